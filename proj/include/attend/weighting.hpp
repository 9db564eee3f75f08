#pragma once

#include <map>
#include <tuple>

#include "attend/encode.hpp"

namespace attend {

enum class WeightScheme { InverseFrequency, InverseSqrt, InverseLog, Uniform };

inline std::string_view weight_scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::InverseFrequency: return "inv";
    case WeightScheme::InverseSqrt: return "inv-sqrt";
    case WeightScheme::InverseLog: return "inv-log";
    case WeightScheme::Uniform: return "uniform";
  }
  throw ConfigError("unknown weighting scheme");
}

inline std::optional<WeightScheme> parse_weight_scheme(std::string_view s) {
  for (auto w : {WeightScheme::InverseFrequency, WeightScheme::InverseSqrt,
                 WeightScheme::InverseLog, WeightScheme::Uniform})
    if (weight_scheme_name(w) == s) return w;
  return std::nullopt;
}

// Occurrence counts per (attended, user, category) group over the training split.
class FrequencyTable {
 public:
  void add(bool attended, std::string_view user, AppCategory cat, std::size_t n = 1) {
    counts_[key(attended, user, cat)] += n;
    total_ += n;
  }

  std::size_t count(bool attended, std::string_view user, AppCategory cat) const {
    auto it = counts_.find(key(attended, user, cat));
    return it == counts_.end() ? 0 : it->second;
  }

  std::size_t total() const { return total_; }
  std::size_t groups() const { return counts_.size(); }

 private:
  static std::tuple<int, std::string, int> key(bool attended, std::string_view user,
                                               AppCategory cat) {
    return {attended ? 1 : 0, std::string(user), static_cast<int>(cat)};
  }
  std::map<std::tuple<int, std::string, int>, std::size_t> counts_;
  std::size_t total_ = 0;
};

// Weight of one instance whose group occurs f times in the training split.
inline double instance_weight(WeightScheme scheme, std::size_t f) {
  if (f == 0) throw ValidationError("weight requested for a group with zero frequency");
  auto fd = static_cast<double>(f);
  switch (scheme) {
    case WeightScheme::InverseFrequency: return 1.0 / fd;
    case WeightScheme::InverseSqrt: return 1.0 / std::sqrt(fd);
    case WeightScheme::InverseLog: return 1.0 / std::max(std::log(fd), 1.0);
    case WeightScheme::Uniform: return 1.0;
  }
  throw ConfigError("unknown weighting scheme");
}

// Build the table from ground-truth samples before a time cutoff.
inline FrequencyTable build_frequency_table(const std::vector<const SampleSeq*>& seqs,
                                            std::int64_t cutoff_t = std::numeric_limits<std::int64_t>::max()) {
  FrequencyTable table;
  for (const auto* seq : seqs) {
    if (!seq) continue;
    for (std::size_t i = 0; i < seq->size(); ++i)
      if (seq->y[i] >= 0 && seq->t[i] < cutoff_t)
        table.add(seq->y[i] == 1, seq->user_id, static_cast<AppCategory>(seq->category[i]));
  }
  return table;
}

// Assign training weights: ground-truth samples before the cutoff get their
// group weight, everything else carries zero weight (state-only samples).
inline void apply_weights(SampleSeq& seq, const FrequencyTable& table, WeightScheme scheme,
                          std::int64_t cutoff_t = std::numeric_limits<std::int64_t>::max()) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq.y[i] >= 0 && seq.t[i] < cutoff_t) {
      auto f = table.count(seq.y[i] == 1, seq.user_id, static_cast<AppCategory>(seq.category[i]));
      seq.w[i] = static_cast<float>(instance_weight(scheme, f));
    } else {
      seq.w[i] = 0.0f;
    }
  }
}

}  // namespace attend
