#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

// Independent reference implementations used to pin down the library results.
namespace oracles {

// Mann-Whitney statistic: share of (positive, negative) pairs ranked correctly,
// with half credit for tied scores. O(n^2) on purpose; no shared code with the
// library's sweep-based ROC.
inline double mann_whitney_auc(std::span<const double> scores, std::span<const std::int8_t> labels) {
  double wins = 0, ties = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1;
      else if (scores[i] == scores[j])
        ties += 1;
    }
  }
  if (pairs == 0) throw std::runtime_error("oracle needs both classes");
  return (wins + 0.5 * ties) / static_cast<double>(pairs);
}

}  // namespace oracles
