#pragma once

#include "attend/events.hpp"

namespace attend {

enum class FeatureGroup : std::uint8_t {
  CommunicationActivity,
  Context,
  Demographic,
  PhoneStatus,
  UsagePatterns,
};

inline std::string_view feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::CommunicationActivity: return "communication_activity";
    case FeatureGroup::Context: return "context";
    case FeatureGroup::Demographic: return "demographic";
    case FeatureGroup::PhoneStatus: return "phone_status";
    case FeatureGroup::UsagePatterns: return "usage_patterns";
  }
  throw ConfigError("unknown feature group");
}

struct FeatureDef {
  std::string name;
  FeatureGroup group;
  std::optional<SensorKind> source;  // empty: not tied to a sensor (demographics)
};

namespace feat_detail {

inline constexpr std::array<std::string_view, 3> kWindowNames = {"5min", "60min", "day"};

// Window w over [start, post): 5 minutes, 60 minutes, or since the last 5 am.
inline std::int64_t window_start(std::int64_t post_t, int w) {
  switch (w) {
    case 0: return post_t - 300;
    case 1: return post_t - 3600;
    default: {
      std::int64_t five_am = epoch_day(post_t) * 86400 + 5 * 3600;
      if (five_am > post_t) five_am -= 86400;
      return five_am;
    }
  }
}

struct PeriodicBlock {
  std::string_view feature_stem;  // canonical measurement, e.g. "light_lux"
  std::string_view present_stem;  // sensor presence flag, e.g. "light"
  SensorKind kind;
  FeatureGroup group;
  // canonical measurement + any further last-value measurements
  std::vector<std::string_view> last_names;
};

inline const std::vector<PeriodicBlock>& periodic_blocks() {
  static const std::vector<PeriodicBlock> blocks = {
      {"acc_mean", "accelerometer", SensorKind::Accelerometer, FeatureGroup::Context,
       {"acc_mean", "acc_max"}},
      {"battery_drain", "battery", SensorKind::Battery, FeatureGroup::PhoneStatus,
       {"battery_drain"}},
      {"data_rx", "data", SensorKind::Data, FeatureGroup::UsagePatterns,
       {"data_rx", "data_tx", "data_cell_rx", "data_cell_tx"}},
      {"light_lux", "light", SensorKind::Light, FeatureGroup::Context, {"light_lux"}},
      {"noise_db", "noise", SensorKind::Noise, FeatureGroup::Context, {"noise_db"}},
  };
  return blocks;
}

struct CountBlock {
  std::string_view stem;
  SensorKind kind;
  FeatureGroup group;
};

inline const std::vector<CountBlock>& count_blocks() {
  static const std::vector<CountBlock> blocks = {
      {"audio_count", SensorKind::Audio, FeatureGroup::Context},
      {"charging_count", SensorKind::ChargingState, FeatureGroup::PhoneStatus},
      {"notif_center_count", SensorKind::NotificationCenter, FeatureGroup::CommunicationActivity},
      {"ringer_count", SensorKind::RingerMode, FeatureGroup::PhoneStatus},
      {"orientation_count", SensorKind::ScreenOrientation, FeatureGroup::UsagePatterns},
      {"unlock_count", SensorKind::Screen, FeatureGroup::UsagePatterns},
  };
  return blocks;
}

}  // namespace feat_detail

// Frozen feature list. Ablations keep the full layout and select a subset, so
// extraction always computes the same vector and a projection picks the
// model-visible columns.
class FeatureManifest {
 public:
  static const std::vector<FeatureDef>& full_defs() {
    static const std::vector<FeatureDef> defs = build_defs();
    return defs;
  }

  static FeatureManifest full() { return without(std::nullopt); }

  static FeatureManifest without(std::optional<SensorKind> excluded) {
    FeatureManifest m;
    const auto& defs = full_defs();
    for (std::uint32_t i = 0; i < defs.size(); ++i)
      if (!excluded || defs[i].source != *excluded) m.kept_.push_back(i);
    if (m.kept_.empty()) throw SchemaError("feature manifest would be empty");
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto i : m.kept_) {
      h = fnv1a64(defs[i].name, h);
      h = fnv1a64("\n", h);
    }
    m.hash_ = h;
    return m;
  }

  std::size_t size() const { return kept_.size(); }
  static std::size_t full_size() { return full_defs().size(); }
  const FeatureDef& def(std::size_t i) const { return full_defs()[kept_[i]]; }
  const std::string& name(std::size_t i) const { return def(i).name; }
  std::uint64_t hash() const { return hash_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < kept_.size(); ++i)
      if (def(i).name == name) return i;
    return std::nullopt;
  }

  std::vector<double> project(const std::vector<double>& full_vec) const {
    if (full_vec.size() != full_size())
      throw SchemaError("feature vector length differs from the manifest");
    std::vector<double> out(kept_.size());
    for (std::size_t i = 0; i < kept_.size(); ++i) out[i] = full_vec[kept_[i]];
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(name(i));
    return out;
  }

 private:
  static std::vector<FeatureDef> build_defs() {
    using namespace feat_detail;
    std::vector<FeatureDef> defs;
    auto add = [&](std::string name, FeatureGroup g, std::optional<SensorKind> src) {
      defs.push_back({std::move(name), g, src});
    };
    for (const auto& b : periodic_blocks()) {
      for (int w = 0; w < 3; ++w)
        for (auto stat : {"q1", "med", "q3", "mad"})
          add(strfmt("%s_%s_%s", std::string(b.feature_stem).c_str(), stat,
                     std::string(kWindowNames[w]).c_str()),
              b.group, b.kind);
      for (int w = 0; w < 3; ++w)
        add(strfmt("%s_present_%s", std::string(b.present_stem).c_str(),
                   std::string(kWindowNames[w]).c_str()),
            b.group, b.kind);
      for (auto m : b.last_names) {
        add(strfmt("last_%s", std::string(m).c_str()), b.group, b.kind);
        add(strfmt("last_%s_known", std::string(m).c_str()), b.group, b.kind);
      }
    }
    for (auto p : detail::kPlaceNames)
      add(strfmt("loc_now_%s", std::string(p).c_str()), FeatureGroup::Context,
          SensorKind::SemanticLocation);
    for (auto p : detail::kPlaceNames)
      add(strfmt("loc_frac_%s_day", std::string(p).c_str()), FeatureGroup::Context,
          SensorKind::SemanticLocation);
    add("loc_distinct_day", FeatureGroup::Context, SensorKind::SemanticLocation);

    add("app_since_last_min", FeatureGroup::UsagePatterns, SensorKind::App);
    add("app_seen_before", FeatureGroup::UsagePatterns, SensorKind::App);
    for (int w = 0; w < 3; ++w)
      add(strfmt("app_count_%s", std::string(kWindowNames[w]).c_str()),
          FeatureGroup::UsagePatterns, SensorKind::App);
    for (int c = 0; c < kNumAppCategories; ++c)
      add(strfmt("app_last_%s", std::string(detail::kCategoryNames[c]).c_str()),
          FeatureGroup::UsagePatterns, SensorKind::App);

    add("notif_since_last_min", FeatureGroup::CommunicationActivity, SensorKind::Notification);
    add("notif_seen_before", FeatureGroup::CommunicationActivity, SensorKind::Notification);
    for (int w = 0; w < 3; ++w)
      add(strfmt("notif_count_%s", std::string(kWindowNames[w]).c_str()),
          FeatureGroup::CommunicationActivity, SensorKind::Notification);
    for (int c = 0; c < kNumNotifCategories; ++c)
      add(strfmt("notif_last_%s", std::string(detail::kCategoryNames[c]).c_str()),
          FeatureGroup::CommunicationActivity, SensorKind::Notification);

    for (const auto& b : count_blocks())
      for (int w = 0; w < 3; ++w)
        add(strfmt("%s_%s", std::string(b.stem).c_str(), std::string(kWindowNames[w]).c_str()),
            b.group, b.kind);

    add("age", FeatureGroup::Demographic, std::nullopt);
    add("gender_female", FeatureGroup::Demographic, std::nullopt);

    add("hour_of_day", FeatureGroup::Context, SensorKind::TimeOfDay);
    add("day_of_week", FeatureGroup::Context, SensorKind::TimeOfDay);
    add("working_day", FeatureGroup::Context, SensorKind::TimeOfDay);
    return defs;
  }

  std::vector<std::uint32_t> kept_;
  std::uint64_t hash_ = 0;
};

// --- extraction -------------------------------------------------------------------

// Per-kind event times and values, presorted for binary search.
struct TraceIndex {
  int age = 0;
  Gender gender = Gender::Female;
  std::array<std::vector<std::int64_t>, 5> periodic_t;   // by periodic_blocks() order
  std::array<std::vector<std::vector<double>>, 5> periodic_v;  // [block][measurement][i]
  std::vector<std::int64_t> semloc_t;
  std::vector<std::int8_t> semloc_place;
  std::vector<std::int64_t> app_t;
  std::vector<std::int8_t> app_cat;
  std::vector<std::int64_t> notif_t;
  std::vector<std::int8_t> notif_cat;
  std::array<std::vector<std::int64_t>, 6> count_t;  // by count_blocks() order
};

inline TraceIndex build_trace_index(const UserTrace& trace) {
  using namespace feat_detail;
  TraceIndex ix;
  ix.age = trace.age;
  ix.gender = trace.gender;
  for (std::size_t b = 0; b < periodic_blocks().size(); ++b)
    ix.periodic_v[b].resize(periodic_blocks()[b].last_names.size());
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : trace.events) {
    if (e.t < prev) throw ValidationError("trace is not sorted by time");
    prev = e.t;
    switch (e.kind) {
      case SensorKind::Accelerometer:
      case SensorKind::Battery:
      case SensorKind::Data:
      case SensorKind::Light:
      case SensorKind::Noise: {
        std::size_t b = e.kind == SensorKind::Accelerometer ? 0
                        : e.kind == SensorKind::Battery     ? 1
                        : e.kind == SensorKind::Data        ? 2
                        : e.kind == SensorKind::Light       ? 3
                                                            : 4;
        ix.periodic_t[b].push_back(e.t);
        for (std::size_t m = 0; m < ix.periodic_v[b].size(); ++m)
          ix.periodic_v[b][m].push_back(e.num[m]);
        break;
      }
      case SensorKind::SemanticLocation:
        ix.semloc_t.push_back(e.t);
        ix.semloc_place.push_back(e.cat[0]);
        break;
      case SensorKind::App:
        ix.app_t.push_back(e.t);
        ix.app_cat.push_back(e.cat[0]);
        break;
      case SensorKind::Notification:
        if (e.cat[0] == static_cast<std::int8_t>(NotifAction::Post)) {
          ix.notif_t.push_back(e.t);
          ix.notif_cat.push_back(e.cat[1]);
        }
        break;
      case SensorKind::Audio: ix.count_t[0].push_back(e.t); break;
      case SensorKind::ChargingState: ix.count_t[1].push_back(e.t); break;
      case SensorKind::NotificationCenter: ix.count_t[2].push_back(e.t); break;
      case SensorKind::RingerMode: ix.count_t[3].push_back(e.t); break;
      case SensorKind::ScreenOrientation: ix.count_t[4].push_back(e.t); break;
      case SensorKind::Screen:
        if (e.cat[0] == static_cast<std::int8_t>(ScreenState::Unlocked))
          ix.count_t[5].push_back(e.t);
        break;
      case SensorKind::TimeOfDay:
        break;  // derived channel, never part of raw traces
    }
  }
  return ix;
}

namespace feat_detail {

inline std::pair<std::size_t, std::size_t> window_range(const std::vector<std::int64_t>& times,
                                                        std::int64_t start, std::int64_t post) {
  auto lo = std::lower_bound(times.begin(), times.end(), start) - times.begin();
  auto hi = std::lower_bound(times.begin(), times.end(), post) - times.begin();
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace feat_detail

// Full-length feature vector (use FeatureManifest::project for the model view).
// Only events strictly before post_t are visible. Missing values are NaN.
inline std::vector<double> extract_features(const TraceIndex& ix, std::int64_t post_t) {
  using namespace feat_detail;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> out;
  out.reserve(FeatureManifest::full_size());

  for (std::size_t b = 0; b < periodic_blocks().size(); ++b) {
    const auto& times = ix.periodic_t[b];
    std::array<std::pair<std::size_t, std::size_t>, 3> ranges;
    for (int w = 0; w < 3; ++w) ranges[w] = window_range(times, window_start(post_t, w), post_t);
    for (int w = 0; w < 3; ++w) {
      auto [lo, hi] = ranges[w];
      if (lo == hi) {
        out.insert(out.end(), {kNaN, kNaN, kNaN, kNaN});
        continue;
      }
      std::vector<double> vals(ix.periodic_v[b][0].begin() + static_cast<std::ptrdiff_t>(lo),
                               ix.periodic_v[b][0].begin() + static_cast<std::ptrdiff_t>(hi));
      std::sort(vals.begin(), vals.end());
      out.push_back(quantile_sorted(vals, 0.25));
      out.push_back(quantile_sorted(vals, 0.5));
      out.push_back(quantile_sorted(vals, 0.75));
      out.push_back(mad(vals));
    }
    for (int w = 0; w < 3; ++w) out.push_back(ranges[w].first != ranges[w].second ? 1.0 : 0.0);
    auto before = std::lower_bound(times.begin(), times.end(), post_t) - times.begin();
    for (std::size_t m = 0; m < ix.periodic_v[b].size(); ++m) {
      if (before == 0) {
        out.push_back(kNaN);
        out.push_back(0.0);
      } else {
        out.push_back(ix.periodic_v[b][m][static_cast<std::size_t>(before - 1)]);
        out.push_back(1.0);
      }
    }
  }

  {  // semantic location
    auto before = std::lower_bound(ix.semloc_t.begin(), ix.semloc_t.end(), post_t) -
                  ix.semloc_t.begin();
    for (int p = 0; p < 4; ++p)
      out.push_back(before > 0 && ix.semloc_place[static_cast<std::size_t>(before - 1)] == p ? 1.0
                    : before > 0                                                             ? 0.0
                                                                                             : kNaN);
    auto [lo, hi] = window_range(ix.semloc_t, window_start(post_t, 2), post_t);
    std::array<double, 4> frac{};
    for (auto i = lo; i < hi; ++i) ++frac[static_cast<std::size_t>(ix.semloc_place[i])];
    double total = static_cast<double>(hi - lo);
    int distinct = 0;
    for (int p = 0; p < 4; ++p) {
      distinct += frac[static_cast<std::size_t>(p)] > 0;
      out.push_back(total > 0 ? frac[static_cast<std::size_t>(p)] / total : kNaN);
    }
    out.push_back(static_cast<double>(distinct));
  }

  auto recency_block = [&](const std::vector<std::int64_t>& times,
                           const std::vector<std::int8_t>& cats, int n_cats) {
    auto before = std::lower_bound(times.begin(), times.end(), post_t) - times.begin();
    if (before == 0) {
      out.push_back(kNaN);
      out.push_back(0.0);
    } else {
      out.push_back(static_cast<double>(post_t - times[static_cast<std::size_t>(before - 1)]) / 60.0);
      out.push_back(1.0);
    }
    for (int w = 0; w < 3; ++w) {
      auto [lo, hi] = window_range(times, window_start(post_t, w), post_t);
      out.push_back(static_cast<double>(hi - lo));
    }
    for (int c = 0; c < n_cats; ++c)
      out.push_back(before > 0 && cats[static_cast<std::size_t>(before - 1)] == c ? 1.0
                    : before > 0                                                  ? 0.0
                                                                                  : kNaN);
  };
  recency_block(ix.app_t, ix.app_cat, kNumAppCategories);
  recency_block(ix.notif_t, ix.notif_cat, kNumNotifCategories);

  for (std::size_t b = 0; b < count_blocks().size(); ++b)
    for (int w = 0; w < 3; ++w) {
      auto [lo, hi] = window_range(ix.count_t[b], window_start(post_t, w), post_t);
      out.push_back(static_cast<double>(hi - lo));
    }

  out.push_back(static_cast<double>(ix.age));
  out.push_back(ix.gender == Gender::Female ? 1.0 : 0.0);

  out.push_back(static_cast<double>(hour_of_day(post_t)));
  out.push_back(static_cast<double>(day_of_week(post_t)));
  out.push_back(is_working_day(post_t) ? 1.0 : 0.0);

  if (out.size() != FeatureManifest::full_size())
    throw SchemaError("feature extraction drifted from the manifest");
  return out;
}

inline std::vector<double> extract_features(const UserTrace& trace,
                                            const LabeledNotification& notif) {
  return extract_features(build_trace_index(trace), notif.post_t);
}

// --- feature matrix -------------------------------------------------------------------

struct InstanceMeta {
  std::string user;
  std::int64_t post_t = 0;
  AppCategory category = AppCategory::Messaging;
  std::int8_t y = 0;
};

struct FeatureMatrix {
  std::vector<std::string> names;
  std::uint64_t manifest_hash = 0;
  std::size_t n_features = 0;
  std::vector<double> values;  // row-major
  std::vector<InstanceMeta> instances;

  std::size_t rows() const { return instances.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * n_features, n_features};
  }
};

struct LabeledUser {
  const UserTrace* trace;
  const std::vector<LabeledNotification>* labels;
};

inline FeatureMatrix extract_matrix(const std::vector<LabeledUser>& users,
                                    const FeatureManifest& manifest) {
  FeatureMatrix m;
  m.names = manifest.names();
  m.manifest_hash = manifest.hash();
  m.n_features = manifest.size();
  for (const auto& lu : users) {
    if (!lu.trace || !lu.labels) throw ValidationError("null user handed to feature extraction");
    auto ix = build_trace_index(*lu.trace);
    for (const auto& ln : *lu.labels) {
      auto full = extract_features(ix, ln.post_t);
      auto proj = manifest.project(full);
      m.values.insert(m.values.end(), proj.begin(), proj.end());
      m.instances.push_back({lu.trace->user_id, ln.post_t, ln.category,
                             static_cast<std::int8_t>(ln.attended ? 1 : 0)});
    }
  }
  return m;
}

// --- per-class distribution report ---------------------------------------------------------

struct FeatureClassStats {
  std::string feature;
  int label = 0;  // 0 or 1
  std::size_t count = 0;  // instances with a reported (non-missing) value
  double mean = 0, min = 0, q1 = 0, med = 0, q3 = 0, max = 0;
};

inline std::vector<FeatureClassStats> feature_distribution(const FeatureMatrix& m) {
  std::vector<FeatureClassStats> out;
  for (std::size_t f = 0; f < m.n_features; ++f) {
    for (int label = 0; label <= 1; ++label) {
      FeatureClassStats st;
      st.feature = m.names[f];
      st.label = label;
      std::vector<double> vals;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        if (m.instances[i].y != label) continue;
        double v = m.values[i * m.n_features + f];
        if (std::isfinite(v)) vals.push_back(v);
      }
      st.count = vals.size();
      if (!vals.empty()) {
        std::sort(vals.begin(), vals.end());
        st.mean = mean(vals);
        st.min = vals.front();
        st.q1 = quantile_sorted(vals, 0.25);
        st.med = quantile_sorted(vals, 0.5);
        st.q3 = quantile_sorted(vals, 0.75);
        st.max = vals.back();
      }
      out.push_back(std::move(st));
    }
  }
  return out;
}

}  // namespace attend
