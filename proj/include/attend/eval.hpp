#pragma once

#include <functional>
#include <map>

#include "attend/events.hpp"

namespace attend {

// --- ROC and AUC -------------------------------------------------------------

struct RocPoint {
  double fpr, tpr, threshold;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0;
  std::size_t n_pos = 0, n_neg = 0;
};

// Curve over all distinct score thresholds; AUC by the trapezoid rule. Tied
// scores form diagonal segments, so the area equals the Mann-Whitney statistic
// with half credit for ties.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const std::int8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  if (scores.empty()) throw ValidationError("empty prediction set");
  RocCurve out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw ValidationError("non-finite prediction score");
    if (labels[i] == 1)
      ++out.n_pos;
    else
      ++out.n_neg;
  }
  if (out.n_pos == 0 || out.n_neg == 0)
    throw ValidationError("ROC needs both classes present");

  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  auto P = static_cast<double>(out.n_pos);
  auto N = static_cast<double>(out.n_neg);
  out.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  double auc = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      if (labels[idx[i]] == 1)
        ++tp;
      else
        ++fp;
      ++i;
    }
    double fpr = static_cast<double>(fp) / N;
    double tpr = static_cast<double>(tp) / P;
    const auto& prev = out.points.back();
    auc += (fpr - prev.fpr) * (tpr + prev.tpr) / 2.0;
    out.points.push_back({fpr, tpr, s});
  }
  out.auc = auc;
  return out;
}

inline double roc_auc(std::span<const double> scores, std::span<const std::int8_t> labels) {
  return roc_curve(scores, labels).auc;
}

// --- per-user, per-category aggregation ------------------------------------------

struct PredRecord {
  std::string user;
  AppCategory category = AppCategory::Messaging;
  std::int8_t y = 0;
  double score = 0;
};

struct CellAuc {
  std::string user;
  AppCategory category;
  std::size_t n_pos = 0, n_neg = 0;
  double auc = 0;
};

struct AggregateResult {
  double mean_auc = std::numeric_limits<double>::quiet_NaN();
  std::size_t valid_cells = 0;
  std::size_t skipped_cells = 0;  // single-class cells carry no ranking information
  std::vector<CellAuc> cells;
  std::vector<std::pair<std::string, double>> user_means;
};

// AUC per (user, category) cell, averaged categories-first then users.
inline AggregateResult aggregate_predictions(const std::vector<PredRecord>& preds) {
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<std::int8_t>>> cells;
  for (const auto& p : preds) {
    auto& cell = cells[{p.user, static_cast<int>(p.category)}];
    cell.first.push_back(p.score);
    cell.second.push_back(p.y);
  }
  AggregateResult out;
  std::map<std::string, std::vector<double>> per_user;
  for (auto& [key, data] : cells) {
    std::size_t pos = 0;
    for (auto y : data.second) pos += y == 1;
    if (pos == 0 || pos == data.second.size()) {
      ++out.skipped_cells;
      continue;
    }
    auto curve = roc_curve(data.first, data.second);
    out.cells.push_back({key.first, static_cast<AppCategory>(key.second), curve.n_pos,
                         curve.n_neg, curve.auc});
    per_user[key.first].push_back(curve.auc);
    ++out.valid_cells;
  }
  if (out.valid_cells == 0) return out;
  double sum = 0;
  for (auto& [user, aucs] : per_user) {
    double m = mean(aucs);
    out.user_means.emplace_back(user, m);
    sum += m;
  }
  out.mean_auc = sum / static_cast<double>(per_user.size());
  return out;
}

// --- dataset splitting ----------------------------------------------------------------

struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  double holdout_frac = 0.09;  // unknown-user share, scaled from 25 of 279
  std::uint64_t seed = 1;
};

struct SplitResult {
  std::vector<std::string> known_users, holdout_users;
  std::int64_t t0 = 0, t_train_end = 0, t_val_end = 0, t_end = 0;
  int days = 0;
};

// User-wise holdout first, then whole-day time boundaries at the cumulative
// fractions of the observed span.
inline SplitResult split_dataset(const Dataset& ds, const SplitSpec& spec) {
  if (std::fabs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to one");
  if (spec.train_frac <= 0 || spec.val_frac <= 0 || spec.test_frac <= 0)
    throw ConfigError("split fractions must be positive");
  if (spec.holdout_frac < 0 || spec.holdout_frac >= 1)
    throw ConfigError("holdout fraction must be in [0, 1)");
  if (ds.users.empty()) throw ValidationError("cannot split an empty dataset");

  SplitResult out;
  out.t0 = std::numeric_limits<std::int64_t>::max();
  std::int64_t t_max = std::numeric_limits<std::int64_t>::min();
  for (const auto& u : ds.users) {
    if (u.events.empty()) continue;
    out.t0 = std::min(out.t0, u.events.front().t);
    t_max = std::max(t_max, u.events.back().t);
  }
  if (out.t0 > t_max) throw ValidationError("dataset holds no events");
  out.days = static_cast<int>((t_max - out.t0) / 86400) + 1;
  if (out.days < 3) throw ValidationError("need at least three days to cut train/val/test");
  auto day_train = static_cast<std::int64_t>(std::lround(out.days * spec.train_frac));
  auto day_val = static_cast<std::int64_t>(std::lround(out.days * (spec.train_frac + spec.val_frac)));
  day_train = std::clamp<std::int64_t>(day_train, 1, out.days - 2);
  day_val = std::clamp<std::int64_t>(day_val, day_train + 1, out.days - 1);
  out.t_train_end = out.t0 + day_train * 86400;
  out.t_val_end = out.t0 + day_val * 86400;
  out.t_end = out.t0 + static_cast<std::int64_t>(out.days) * 86400;

  std::vector<std::string> users;
  for (const auto& u : ds.users) users.push_back(u.user_id);
  std::sort(users.begin(), users.end());
  auto rng = make_rng(spec.seed);
  std::shuffle(users.begin(), users.end(), rng);

  std::size_t k = 0;
  if (spec.holdout_frac > 0) {
    k = static_cast<std::size_t>(std::lround(spec.holdout_frac * static_cast<double>(users.size())));
    k = std::clamp<std::size_t>(k, 1, users.size() - 1);
  }
  out.holdout_users.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(k));
  out.known_users.assign(users.begin() + static_cast<std::ptrdiff_t>(k), users.end());
  std::sort(out.holdout_users.begin(), out.holdout_users.end());
  std::sort(out.known_users.begin(), out.known_users.end());
  return out;
}

// --- probability-matched random baseline ---------------------------------------------------

// Attendance rates per (user, category) on the training split, falling back to
// the category rate and then the global rate for unseen groups.
class BaselineModel {
 public:
  void fit(const std::vector<PredRecord>& train) {
    if (train.empty()) throw ValidationError("baseline needs training instances");
    std::map<std::pair<std::string, int>, std::pair<std::size_t, std::size_t>> uc;
    std::map<int, std::pair<std::size_t, std::size_t>> c;
    std::size_t pos = 0;
    for (const auto& r : train) {
      auto& a = uc[{r.user, static_cast<int>(r.category)}];
      ++a.first;
      a.second += r.y == 1;
      auto& b = c[static_cast<int>(r.category)];
      ++b.first;
      b.second += r.y == 1;
      pos += r.y == 1;
    }
    for (auto& [k, v] : uc)
      rate_uc_[k] = static_cast<double>(v.second) / static_cast<double>(v.first);
    for (auto& [k, v] : c)
      rate_c_[k] = static_cast<double>(v.second) / static_cast<double>(v.first);
    rate_global_ = static_cast<double>(pos) / static_cast<double>(train.size());
    fitted_ = true;
  }

  double rate_for(std::string_view user, AppCategory cat) const {
    if (!fitted_) throw ValidationError("baseline model is not fitted");
    if (auto it = rate_uc_.find({std::string(user), static_cast<int>(cat)}); it != rate_uc_.end())
      return it->second;
    if (auto it = rate_c_.find(static_cast<int>(cat)); it != rate_c_.end()) return it->second;
    return rate_global_;
  }

  // Thresholded random draw: emit 1 with the group's attendance probability.
  template <typename It>
  void score(It first, It last, std::uint64_t seed) const {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto it = first; it != last; ++it)
      it->score = u(rng) < rate_for(it->user, it->category) ? 1.0 : 0.0;
  }

 private:
  std::map<std::pair<std::string, int>, double> rate_uc_;
  std::map<int, double> rate_c_;
  double rate_global_ = 0;
  bool fitted_ = false;
};

// --- repeated-trial and ablation orchestration -----------------------------------------------

struct TrialStat {
  std::vector<double> values;
  double mean = 0, sd = 0;
};

// Shuffle-and-split pattern: run the pipeline n times with distinct seeds and
// collect mean and spread per metric.
inline std::map<std::string, TrialStat> run_trials(
    int n, const std::function<std::map<std::string, double>(int)>& trial_fn) {
  if (n <= 0) throw ConfigError("need at least one trial");
  std::map<std::string, TrialStat> out;
  for (int i = 0; i < n; ++i)
    for (auto& [key, value] : trial_fn(i)) out[key].values.push_back(value);
  for (auto& [key, stat] : out) {
    stat.mean = mean(stat.values);
    stat.sd = sample_sd(stat.values);
  }
  return out;
}

struct SensorImportance {
  SensorKind kind;
  double mean_delta = 0;  // full-model AUC minus AUC with this unit removed
  double sd = 0;
  std::vector<double> deltas;
};

// Retrain-with-one-unit-removed importance, averaged over seeds. eval_fn
// returns the test AUC of a pipeline trained without `excluded` (or the full
// pipeline when empty) for a given seed.
inline std::vector<SensorImportance> sensor_importance(
    const std::vector<SensorKind>& units, const std::vector<std::uint64_t>& seeds,
    const std::function<double(std::optional<SensorKind>, std::uint64_t)>& eval_fn) {
  if (units.empty() || seeds.empty()) throw ConfigError("need units and seeds for ablation");
  std::vector<double> full;
  for (auto s : seeds) full.push_back(eval_fn(std::nullopt, s));
  std::vector<SensorImportance> out;
  for (auto k : units) {
    SensorImportance imp;
    imp.kind = k;
    for (std::size_t i = 0; i < seeds.size(); ++i)
      imp.deltas.push_back(full[i] - eval_fn(k, seeds[i]));
    imp.mean_delta = mean(imp.deltas);
    imp.sd = sample_sd(imp.deltas);
    out.push_back(std::move(imp));
  }
  std::sort(out.begin(), out.end(), [](const SensorImportance& a, const SensorImportance& b) {
    return a.mean_delta > b.mean_delta;
  });
  return out;
}

}  // namespace attend
