#pragma once

#include <cctype>
#include <cerrno>
#include <istream>
#include <ostream>
#include <set>

#include "attend/eval.hpp"
#include "attend/gbt.hpp"
#include "attend/rnn.hpp"
#include "attend/synth.hpp"
#include "attend/weighting.hpp"

namespace attend {

// Fixed substream ids hung off the global seed, so one `seed` key reproduces
// the whole experiment while any stage seed stays individually overridable.
inline constexpr std::uint64_t kSeedGen = 1;
inline constexpr std::uint64_t kSeedSplit = 2;
inline constexpr std::uint64_t kSeedGbt = 3;
inline constexpr std::uint64_t kSeedRnn = 4;
inline constexpr std::uint64_t kSeedBaseline = 5;
inline constexpr std::uint64_t kSeedTrial = 6;
inline constexpr std::uint64_t kSeedAblate = 7;

// Flat `key = value` text: '#' starts a comment, blank lines are skipped,
// keys may not repeat.
inline std::map<std::string, std::string> parse_config_text(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(strfmt("config line %zu: expected key = value", lineno));
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(strfmt("config line %zu: empty key", lineno));
    if (!out.emplace(key, value).second)
      throw ConfigError(strfmt("config line %zu: duplicate key '%s'", lineno, key.c_str()));
  }
  return out;
}

namespace config_detail {

inline std::int64_t to_i64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  std::int64_t r = 0;
  try {
    r = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(strfmt("%s: not an integer: '%s'", key.c_str(), v.c_str()));
  }
  if (pos != v.size()) throw ConfigError(strfmt("%s: not an integer: '%s'", key.c_str(), v.c_str()));
  return r;
}

inline double to_f64(const std::string& key, const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  double r = std::strtod(c, &end);
  if (v.empty() || end != c + v.size())
    throw ConfigError(strfmt("%s: not a number: '%s'", key.c_str(), v.c_str()));
  return r;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(strfmt("%s: not a boolean: '%s'", key.c_str(), v.c_str()));
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-' || !std::isdigit(static_cast<unsigned char>(v[0])))
    throw ConfigError(strfmt("%s: not an unsigned integer: '%s'", key.c_str(), v.c_str()));
  const char* c = v.c_str();
  char* end = nullptr;
  errno = 0;
  std::uint64_t r = std::strtoull(c, &end, 10);
  if (end != c + v.size() || errno == ERANGE)
    throw ConfigError(strfmt("%s: not an unsigned integer: '%s'", key.c_str(), v.c_str()));
  return r;
}

template <typename T, typename Fn>
std::vector<T> to_list(const std::string& key, const std::string& v, Fn parse_one) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    auto comma = v.find(',', start);
    auto piece = v.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) out.push_back(parse_one(key, piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace config_detail

struct ExperimentConfig {
  std::uint64_t seed = 7;
  int horizon_s = 600;

  GenConfig gen;
  EncodeOptions encode;
  bool compress_enabled = true;
  double compress_span_min = 10.0;
  NormalizationConfig norm;
  WeightScheme weighting = WeightScheme::InverseLog;
  SequencingConfig seq;
  GbtConfig gbt;
  std::vector<int> gbt_grid_depths;
  std::vector<double> gbt_grid_subsamples;
  RnnConfig rnn;
  SplitSpec split;
  std::uint64_t baseline_seed = 0;
  int trials_n = 3;
  int ablate_seeds = 5;
  enum class AblateModel { Rnn, Gbt };
  AblateModel ablate_model = AblateModel::Rnn;
  std::vector<SensorKind> ablate_units;  // empty means all sensors

  struct SeedOverrides {
    bool gen = false, split = false, gbt = false, rnn = false, baseline = false;
  };
  SeedOverrides seed_set;

  // Derives unset stage seeds from the global seed and mirrors the shared
  // knobs into the stage configs.
  void resolve() {
    if (!seed_set.gen) gen.seed = subseed(seed, kSeedGen);
    if (!seed_set.split) split.seed = subseed(seed, kSeedSplit);
    if (!seed_set.gbt) gbt.seed = subseed(seed, kSeedGbt);
    if (!seed_set.rnn) rnn.seed = subseed(seed, kSeedRnn);
    if (!seed_set.baseline) baseline_seed = subseed(seed, kSeedBaseline);
    gen.attend_horizon_s = horizon_s;
    rnn.seq = seq;
  }

  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv) {
    using namespace config_detail;
    ExperimentConfig c;
    std::set<std::string> seen;
    auto take = [&](const char* key) -> const std::string* {
      auto it = kv.find(key);
      if (it == kv.end()) return nullptr;
      seen.insert(key);
      return &it->second;
    };
    auto geti = [&](const char* key, int& dst) {
      if (auto* v = take(key)) dst = static_cast<int>(to_i64(key, *v));
    };
    auto geti64 = [&](const char* key, std::int64_t& dst) {
      if (auto* v = take(key)) dst = to_i64(key, *v);
    };
    auto getu64 = [&](const char* key, std::uint64_t& dst) -> bool {
      if (auto* v = take(key)) {
        dst = to_u64(key, *v);
        return true;
      }
      return false;
    };
    auto getf = [&](const char* key, double& dst) {
      if (auto* v = take(key)) dst = to_f64(key, *v);
    };
    auto getb = [&](const char* key, bool& dst) {
      if (auto* v = take(key)) dst = to_bool(key, *v);
    };

    getu64("seed", c.seed);
    geti("horizon_s", c.horizon_s);

    geti("gen.users", c.gen.num_users);
    geti("gen.days", c.gen.num_days);
    geti64("gen.start_t", c.gen.start_t);
    getf("gen.sampling_period_s", c.gen.sampling_period_s);
    getf("gen.sessions_lo", c.gen.sessions_per_day_lo);
    getf("gen.sessions_hi", c.gen.sessions_per_day_hi);
    getf("gen.launch_factor", c.gen.launch_factor);
    getf("gen.hour_noise_sd", c.gen.hour_noise_sd);
    getf("gen.notif_lo", c.gen.notif_per_day_lo);
    getf("gen.notif_hi", c.gen.notif_per_day_hi);
    getf("gen.signal", c.gen.signal_strength);
    getf("gen.coef_unlock", c.gen.coef_unlock);
    getf("gen.coef_launch", c.gen.coef_launch);
    getf("gen.coef_notif", c.gen.coef_notif);
    getf("gen.coef_night", c.gen.coef_night);
    getf("gen.window_min", c.gen.window_min);
    getf("gen.user_bias_sd", c.gen.user_bias_sd);
    c.seed_set.gen = getu64("gen.seed", c.gen.seed);

    getf("encode.period_s", c.encode.sampling_period_s);
    getb("encode.time_of_day", c.encode.inject_time_of_day);
    getb("compress.enabled", c.compress_enabled);
    getf("compress.span_min", c.compress_span_min);
    getf("norm.percentile", c.norm.cap_percentile);
    getf("norm.dt_cap_min", c.norm.dt_cap_min);

    if (auto* v = take("weighting")) {
      auto scheme = parse_weight_scheme(*v);
      if (!scheme) throw ConfigError("weighting: unknown scheme '" + *v + "'");
      c.weighting = *scheme;
    }

    geti("seq.len", c.seq.seq_len);
    geti("seq.batch_lo", c.seq.batch_lo);
    geti("seq.batch_hi", c.seq.batch_hi);

    geti("gbt.rounds", c.gbt.n_estimators);
    geti("gbt.depth", c.gbt.max_depth);
    getf("gbt.lr", c.gbt.learning_rate);
    getf("gbt.lambda", c.gbt.lambda_l2);
    getf("gbt.subsample", c.gbt.subsample);
    getf("gbt.min_child_hessian", c.gbt.min_child_hessian);
    getf("gbt.min_split_gain", c.gbt.min_split_gain);
    c.seed_set.gbt = getu64("gbt.seed", c.gbt.seed);
    if (auto* v = take("gbt.grid_depths"))
      c.gbt_grid_depths = to_list<int>("gbt.grid_depths", *v, [](const std::string& k, const std::string& p) {
        return static_cast<int>(to_i64(k, p));
      });
    if (auto* v = take("gbt.grid_subsamples"))
      c.gbt_grid_subsamples =
          to_list<double>("gbt.grid_subsamples", *v, [](const std::string& k, const std::string& p) {
            return to_f64(k, p);
          });

    geti("rnn.embed", c.rnn.embed_dim);
    geti("rnn.hidden", c.rnn.hidden);
    geti("rnn.epochs", c.rnn.max_epochs);
    geti("rnn.patience", c.rnn.patience);
    getf("rnn.lr", c.rnn.learning_rate);
    getf("rnn.clip", c.rnn.clip_norm);
    getf("rnn.forget_bias", c.rnn.forget_bias);
    c.seed_set.rnn = getu64("rnn.seed", c.rnn.seed);

    getf("split.train_frac", c.split.train_frac);
    getf("split.val_frac", c.split.val_frac);
    getf("split.test_frac", c.split.test_frac);
    getf("split.holdout_frac", c.split.holdout_frac);
    c.seed_set.split = getu64("split.seed", c.split.seed);
    c.seed_set.baseline = getu64("baseline.seed", c.baseline_seed);

    geti("trials.n", c.trials_n);
    geti("ablate.seeds", c.ablate_seeds);
    if (auto* v = take("ablate.model")) {
      if (*v == "rnn")
        c.ablate_model = AblateModel::Rnn;
      else if (*v == "gbt")
        c.ablate_model = AblateModel::Gbt;
      else
        throw ConfigError("ablate.model: expected rnn or gbt, got '" + *v + "'");
    }
    if (auto* v = take("ablate.units"))
      c.ablate_units = to_list<SensorKind>("ablate.units", *v, [](const std::string& k, const std::string& p) {
        auto kind = parse_sensor_kind(p);
        if (!kind) throw ConfigError(k + ": unknown sensor '" + p + "'");
        return *kind;
      });

    std::string unknown;
    for (const auto& [key, value] : kv)
      if (!seen.count(key)) unknown += unknown.empty() ? key : ", " + key;
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);

    c.resolve();
    return c;
  }

  static ExperimentConfig load(std::istream& is) { return from_map(parse_config_text(is)); }

  // Full resolved configuration, parseable by load(); stage seeds appear with
  // their derived values so a dump pins the run even without the global seed.
  void dump(std::ostream& os) const {
    auto u = [](std::uint64_t v) { return std::to_string(v); };
    auto f = [](double v) { return strfmt("%.17g", v); };
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "seed = " << u(seed) << '\n';
    os << "horizon_s = " << horizon_s << '\n';
    os << "gen.users = " << gen.num_users << '\n';
    os << "gen.days = " << gen.num_days << '\n';
    os << "gen.start_t = " << gen.start_t << '\n';
    os << "gen.sampling_period_s = " << f(gen.sampling_period_s) << '\n';
    os << "gen.sessions_lo = " << f(gen.sessions_per_day_lo) << '\n';
    os << "gen.sessions_hi = " << f(gen.sessions_per_day_hi) << '\n';
    os << "gen.launch_factor = " << f(gen.launch_factor) << '\n';
    os << "gen.hour_noise_sd = " << f(gen.hour_noise_sd) << '\n';
    os << "gen.notif_lo = " << f(gen.notif_per_day_lo) << '\n';
    os << "gen.notif_hi = " << f(gen.notif_per_day_hi) << '\n';
    os << "gen.signal = " << f(gen.signal_strength) << '\n';
    os << "gen.coef_unlock = " << f(gen.coef_unlock) << '\n';
    os << "gen.coef_launch = " << f(gen.coef_launch) << '\n';
    os << "gen.coef_notif = " << f(gen.coef_notif) << '\n';
    os << "gen.coef_night = " << f(gen.coef_night) << '\n';
    os << "gen.window_min = " << f(gen.window_min) << '\n';
    os << "gen.user_bias_sd = " << f(gen.user_bias_sd) << '\n';
    os << "gen.seed = " << u(gen.seed) << '\n';
    os << "encode.period_s = " << f(encode.sampling_period_s) << '\n';
    os << "encode.time_of_day = " << b(encode.inject_time_of_day) << '\n';
    os << "compress.enabled = " << b(compress_enabled) << '\n';
    os << "compress.span_min = " << f(compress_span_min) << '\n';
    os << "norm.percentile = " << f(norm.cap_percentile) << '\n';
    os << "norm.dt_cap_min = " << f(norm.dt_cap_min) << '\n';
    os << "weighting = " << weight_scheme_name(weighting) << '\n';
    os << "seq.len = " << seq.seq_len << '\n';
    os << "seq.batch_lo = " << seq.batch_lo << '\n';
    os << "seq.batch_hi = " << seq.batch_hi << '\n';
    os << "gbt.rounds = " << gbt.n_estimators << '\n';
    os << "gbt.depth = " << gbt.max_depth << '\n';
    os << "gbt.lr = " << f(gbt.learning_rate) << '\n';
    os << "gbt.lambda = " << f(gbt.lambda_l2) << '\n';
    os << "gbt.subsample = " << f(gbt.subsample) << '\n';
    os << "gbt.min_child_hessian = " << f(gbt.min_child_hessian) << '\n';
    os << "gbt.min_split_gain = " << f(gbt.min_split_gain) << '\n';
    os << "gbt.seed = " << u(gbt.seed) << '\n';
    os << "gbt.grid_depths = " << join_ints(gbt_grid_depths) << '\n';
    os << "gbt.grid_subsamples = " << join_doubles(gbt_grid_subsamples) << '\n';
    os << "rnn.embed = " << rnn.embed_dim << '\n';
    os << "rnn.hidden = " << rnn.hidden << '\n';
    os << "rnn.epochs = " << rnn.max_epochs << '\n';
    os << "rnn.patience = " << rnn.patience << '\n';
    os << "rnn.lr = " << f(rnn.learning_rate) << '\n';
    os << "rnn.clip = " << f(rnn.clip_norm) << '\n';
    os << "rnn.forget_bias = " << f(rnn.forget_bias) << '\n';
    os << "rnn.seed = " << u(rnn.seed) << '\n';
    os << "split.train_frac = " << f(split.train_frac) << '\n';
    os << "split.val_frac = " << f(split.val_frac) << '\n';
    os << "split.test_frac = " << f(split.test_frac) << '\n';
    os << "split.holdout_frac = " << f(split.holdout_frac) << '\n';
    os << "split.seed = " << u(split.seed) << '\n';
    os << "baseline.seed = " << u(baseline_seed) << '\n';
    os << "trials.n = " << trials_n << '\n';
    os << "ablate.seeds = " << ablate_seeds << '\n';
    os << "ablate.model = " << (ablate_model == AblateModel::Rnn ? "rnn" : "gbt") << '\n';
    os << "ablate.units = " << join_units(ablate_units) << '\n';
    if (!os) throw IoError("failed to write the resolved config");
  }

 private:
  static std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  }
  static std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + strfmt("%.17g", v[i]);
    return s;
  }
  static std::string join_units(const std::vector<SensorKind>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + std::string(sensor_name(v[i]));
    return s;
  }
};

}  // namespace attend
