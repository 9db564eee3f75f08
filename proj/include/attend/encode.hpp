#pragma once

#include "attend/events.hpp"

namespace attend {

// --- column schema -------------------------------------------------------------

struct ColumnDef {
  SensorKind kind;
  std::string name;
};

// Column layout of one sensor kind, in schema order.
inline std::vector<std::string> columns_for_kind(SensorKind k) {
  auto prefixed = [&](std::initializer_list<std::string_view> names) {
    std::vector<std::string> out;
    for (auto n : names) out.push_back(std::string(sensor_name(k)) + "." + std::string(n));
    return out;
  };
  switch (k) {
    case SensorKind::Accelerometer: return prefixed({"acc_mean", "acc_max"});
    case SensorKind::Battery: return prefixed({"drain"});
    case SensorKind::Data: return prefixed({"rx", "tx", "cell_rx", "cell_tx"});
    case SensorKind::Light: return prefixed({"lux"});
    case SensorKind::Noise: return prefixed({"db"});
    case SensorKind::SemanticLocation: return prefixed({"home", "work", "out", "unknown"});
    case SensorKind::App:
      return prefixed({"messaging", "email", "productivity", "social", "entertainment", "games",
                       "alert", "other"});
    case SensorKind::Audio: return prefixed({"music", "no_music", "speaker", "headphones"});
    case SensorKind::ChargingState: return prefixed({"charging", "not_charging"});
    case SensorKind::Notification:
      return prefixed({"post_messaging", "post_email", "post_productivity", "post_social",
                       "post_entertainment", "post_games", "post_alert", "removed"});
    case SensorKind::NotificationCenter: return prefixed({"accessed"});
    case SensorKind::RingerMode: return prefixed({"normal", "silent", "vibrate"});
    case SensorKind::Screen: return prefixed({"on", "off", "unlocked"});
    case SensorKind::ScreenOrientation: return prefixed({"portrait", "landscape"});
    case SensorKind::TimeOfDay: return prefixed({"hour", "weekday", "working"});
  }
  throw SchemaError("unknown sensor kind");
}

class ColumnSchema {
 public:
  static ColumnSchema from_inventory(const std::vector<SensorKind>& inventory) {
    ColumnSchema s;
    s.kind_base_.fill(-1);
    for (auto k : inventory) {
      if (s.kind_base_[static_cast<int>(k)] >= 0)
        throw SchemaError(strfmt("duplicate sensor in inventory: %s",
                                 std::string(sensor_name(k)).c_str()));
      s.kind_base_[static_cast<int>(k)] = static_cast<int>(s.cols_.size());
      for (auto& name : columns_for_kind(k)) {
        for (const auto& c : s.cols_)
          if (c.name == name) throw SchemaError("column name collision: " + name);
        s.cols_.push_back({k, std::move(name)});
      }
    }
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& c : s.cols_) {
      h = fnv1a64(c.name, h);
      h = fnv1a64("\n", h);
    }
    s.hash_ = h;
    return s;
  }

  std::uint32_t width() const { return static_cast<std::uint32_t>(cols_.size()); }
  const ColumnDef& column(std::uint32_t i) const { return cols_.at(i); }
  const std::vector<ColumnDef>& columns() const { return cols_; }
  std::uint64_t hash() const { return hash_; }
  bool has_kind(SensorKind k) const { return kind_base_[static_cast<int>(k)] >= 0; }
  int kind_base(SensorKind k) const { return kind_base_[static_cast<int>(k)]; }

  std::optional<std::uint32_t> index_of(std::string_view name) const {
    for (std::uint32_t i = 0; i < cols_.size(); ++i)
      if (cols_[i].name == name) return i;
    return std::nullopt;
  }

 private:
  std::vector<ColumnDef> cols_;
  std::array<int, kNumSensorKinds> kind_base_{};
  std::uint64_t hash_ = 0;
};

inline std::vector<SensorKind> default_inventory() {
  std::vector<SensorKind> v;
  for (int i = 0; i < kNumSensorKinds; ++i) v.push_back(static_cast<SensorKind>(i));
  return v;
}

inline std::vector<SensorKind> inventory_without(SensorKind excluded) {
  std::vector<SensorKind> v;
  for (int i = 0; i < kNumSensorKinds; ++i)
    if (static_cast<SensorKind>(i) != excluded) v.push_back(static_cast<SensorKind>(i));
  return v;
}

// --- samples -------------------------------------------------------------------------

// One row of the sparse event matrix. Zero column values mean "not reported";
// the encoder therefore never stores zeros.
struct EncodedSample {
  std::int64_t t = 0;     // time of the last constituent event
  double dt_min = 0.0;    // minutes since the previous emitted sample
  std::vector<std::pair<std::uint32_t, double>> x;  // sorted by column
  std::int8_t y = -1;     // attendance ground truth, -1 = no label here
  std::int8_t category = -1;
  float w = 0.0f;         // training weight
};

struct SampleRef {
  std::int64_t t;
  double dt_min;
  std::int8_t y;
  std::int8_t category;
  float w;
  std::span<const std::uint32_t> cols;
  std::span<const double> vals;
};

// Column-oriented store for one user's sample stream.
class SampleSeq {
 public:
  std::string user_id;
  std::uint32_t width = 0;
  std::vector<std::int64_t> t;
  std::vector<double> dt_min;
  std::vector<std::int8_t> y;
  std::vector<std::int8_t> category;
  std::vector<float> w;
  std::vector<std::uint32_t> xoff{0};
  std::vector<std::uint32_t> xcol;
  std::vector<double> xval;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }

  void push(const EncodedSample& s) {
    t.push_back(s.t);
    dt_min.push_back(s.dt_min);
    y.push_back(s.y);
    category.push_back(s.category);
    w.push_back(s.w);
    for (auto& [c, v] : s.x) {
      if (c >= width) throw SchemaError("sample column outside schema width");
      xcol.push_back(c);
      xval.push_back(v);
    }
    xoff.push_back(static_cast<std::uint32_t>(xcol.size()));
  }

  SampleRef ref(std::size_t i) const {
    return SampleRef{t[i],
                     dt_min[i],
                     y[i],
                     category[i],
                     w[i],
                     {xcol.data() + xoff[i], xoff[i + 1] - xoff[i]},
                     {xval.data() + xoff[i], xoff[i + 1] - xoff[i]}};
  }

  EncodedSample get(std::size_t i) const {
    auto r = ref(i);
    EncodedSample s;
    s.t = r.t;
    s.dt_min = r.dt_min;
    s.y = r.y;
    s.category = r.category;
    s.w = r.w;
    for (std::size_t j = 0; j < r.cols.size(); ++j) s.x.emplace_back(r.cols[j], r.vals[j]);
    return s;
  }

  // dt is derived state: minutes between consecutive emitted samples, 0 for the first.
  void recompute_dt() {
    for (std::size_t i = 0; i < size(); ++i)
      dt_min[i] = i == 0 ? 0.0 : static_cast<double>(t[i] - t[i - 1]) / 60.0;
  }

  std::size_t ground_truth_count() const {
    std::size_t n = 0;
    for (auto v : y) n += v >= 0;
    return n;
  }
};

// Prefix of a stream with t < end_t; per-sample dt values are preserved.
inline SampleSeq slice_stream(const SampleSeq& seq, std::int64_t end_t) {
  SampleSeq out;
  out.user_id = seq.user_id;
  out.width = seq.width;
  for (std::size_t i = 0; i < seq.size() && seq.ref(i).t < end_t; ++i) out.push(seq.get(i));
  return out;
}

// --- encoding ----------------------------------------------------------------------------

struct EncodeOptions {
  double sampling_period_s = 600;
  bool inject_time_of_day = true;
};

namespace detail {
inline void append_event_columns(const ColumnSchema& schema, const SensorEvent& e,
                                 std::vector<std::pair<std::uint32_t, double>>& out) {
  int base = schema.kind_base(e.kind);
  if (base < 0) return;
  auto put = [&](int offset, double v) {
    if (v != 0.0 && std::isfinite(v)) out.emplace_back(static_cast<std::uint32_t>(base + offset), v);
  };
  switch (e.kind) {
    case SensorKind::Accelerometer:
    case SensorKind::Battery:
    case SensorKind::Data:
    case SensorKind::Light:
    case SensorKind::Noise:
    case SensorKind::TimeOfDay: {
      const auto& spec = kind_spec(e.kind);
      for (std::size_t i = 0; i < spec.num_keys.size(); ++i) put(static_cast<int>(i), e.num[i]);
      break;
    }
    case SensorKind::SemanticLocation:
    case SensorKind::App:
    case SensorKind::ChargingState:
    case SensorKind::RingerMode:
    case SensorKind::Screen:
    case SensorKind::ScreenOrientation:
      if (e.cat[0] >= 0) put(e.cat[0], 1.0);
      break;
    case SensorKind::Audio:
      if (e.cat[0] >= 0) put(e.cat[0], 1.0);
      if (e.cat[1] >= 0) put(2 + e.cat[1], 1.0);
      break;
    case SensorKind::Notification:
      if (e.cat[0] == static_cast<std::int8_t>(NotifAction::Post))
        put(e.cat[1], 1.0);
      else
        put(kNumNotifCategories, 1.0);
      break;
    case SensorKind::NotificationCenter:
      put(0, 1.0);
      break;
  }
}
}  // namespace detail

// One sample per event, in time order. TimeOfDay pseudo-events are injected on
// the sampling grid (ticks covering [first event, last event], emitted before
// any real event sharing the tick). Notification posts keep their ground truth
// even when the Notification channel is excluded from the schema, so labels
// survive sensor ablation.
inline SampleSeq encode_events(const UserTrace& trace, const ColumnSchema& schema,
                               const EncodeOptions& opts = {},
                               const std::vector<LabeledNotification>* labels = nullptr) {
  if (opts.sampling_period_s <= 0) throw ConfigError("sampling period must be positive");
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : trace.events)
    if (e.t < prev)
      throw ValidationError("trace is not sorted by time: user " + trace.user_id);
    else
      prev = e.t;

  SampleSeq seq;
  seq.user_id = trace.user_id;
  seq.width = schema.width();
  if (trace.events.empty()) return seq;

  std::size_t label_idx = 0;
  auto emit_event = [&](const SensorEvent& e) {
    EncodedSample s;
    s.t = e.t;
    detail::append_event_columns(schema, e, s.x);
    bool is_post =
        e.kind == SensorKind::Notification && e.cat[0] == static_cast<std::int8_t>(NotifAction::Post);
    if (is_post && labels) {
      if (label_idx >= labels->size())
        throw ValidationError("labels do not cover all notification posts");
      const auto& ln = (*labels)[label_idx++];
      if (ln.post_t != e.t || ln.app != e.app ||
          ln.category != static_cast<AppCategory>(e.cat[1]))
        throw ValidationError("labels do not match the trace");
      s.y = ln.attended ? 1 : 0;
      s.category = static_cast<std::int8_t>(ln.category);
    }
    if (!s.x.empty() || is_post) seq.push(s);
  };

  auto period = static_cast<std::int64_t>(opts.sampling_period_s);
  std::int64_t first_t = trace.events.front().t;
  std::int64_t last_t = trace.events.back().t;
  std::int64_t tick = floor_div(first_t + period - 1, period) * period;
  bool inject = opts.inject_time_of_day && schema.has_kind(SensorKind::TimeOfDay);

  for (const auto& e : trace.events) {
    while (inject && tick <= last_t && tick <= e.t) {
      emit_event(make_time_of_day(tick));
      tick += period;
    }
    emit_event(e);
  }
  if (labels && label_idx != labels->size())
    throw ValidationError("labels contain posts that are not in the trace");
  seq.recompute_dt();
  return seq;
}

// --- opportunistic lossless compression ------------------------------------------------------

// Merge consecutive samples while (a) no column clashes, meaning every column
// of the candidate is absent from the open sample or holds the same value
// there (equal duplicates collapse into one assignment), (b) the open sample
// holds no ground truth yet, and (c) the span from the open sample's first
// constituent to the candidate stays within max_span_min. A ground-truth
// candidate may close an open sample by merging into it.
inline SampleSeq compress_samples(const SampleSeq& in, double max_span_min = 10.0) {
  if (max_span_min < 0) throw ConfigError("compression span must be non-negative");
  SampleSeq out;
  out.user_id = in.user_id;
  out.width = in.width;
  auto span_s = static_cast<std::int64_t>(max_span_min * 60.0);

  EncodedSample open;
  std::int64_t open_first_t = 0;
  bool has_open = false;
  std::vector<std::pair<std::uint32_t, double>> merged;

  auto emit = [&]() {
    out.push(open);
    has_open = false;
  };

  for (std::size_t i = 0; i < in.size(); ++i) {
    EncodedSample s = in.get(i);
    if (!has_open) {
      open = std::move(s);
      open_first_t = open.t;
      has_open = true;
      continue;
    }
    bool clash = false;
    {
      auto a = open.x.begin();
      auto b = s.x.begin();
      while (a != open.x.end() && b != s.x.end()) {
        if (a->first == b->first) {
          if (a->second != b->second) {
            clash = true;
            break;
          }
          ++a;
          ++b;
        } else if (a->first < b->first) {
          ++a;
        } else {
          ++b;
        }
      }
    }
    bool mergeable = !clash && open.y < 0 && (s.t - open_first_t) <= span_s;
    if (!mergeable) {
      emit();
      open = std::move(s);
      open_first_t = open.t;
      has_open = true;
      continue;
    }
    merged.clear();
    std::set_union(open.x.begin(), open.x.end(), s.x.begin(), s.x.end(),
                   std::back_inserter(merged),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
    open.x.swap(merged);
    open.t = s.t;
    if (s.y >= 0) {
      open.y = s.y;
      open.category = s.category;
      open.w = s.w;
    }
  }
  if (has_open) emit();
  out.recompute_dt();
  return out;
}

// --- value normalization ------------------------------------------------------------------------

struct NormalizationConfig {
  double cap_percentile = 95.0;
  double dt_cap_min = 60.0;
};

// Per-column rescaling fitted on training data only. Nonzero values map into
// [0.05, 1] so that 0 keeps meaning "not reported"; dt is capped and scaled to [0, 1].
struct NormalizationStats {
  std::uint32_t width = 0;
  double dt_cap_min = 60.0;
  std::vector<double> lo, hi;
  std::vector<std::uint8_t> trained;
};

inline NormalizationStats fit_normalization(const std::vector<const SampleSeq*>& seqs,
                                            std::uint32_t width,
                                            const NormalizationConfig& cfg = {},
                                            std::int64_t cutoff_t = std::numeric_limits<std::int64_t>::max()) {
  if (cfg.dt_cap_min <= 0) throw ConfigError("dt cap must be positive");
  if (cfg.cap_percentile <= 0 || cfg.cap_percentile > 100)
    throw ConfigError("cap percentile must be in (0, 100]");
  std::vector<std::vector<double>> values(width);
  for (const auto* seq : seqs) {
    if (!seq) continue;
    if (seq->width != width) throw SchemaError("sample stream width differs from schema");
    for (std::size_t i = 0; i < seq->size(); ++i) {
      if (seq->t[i] >= cutoff_t) continue;
      for (std::uint32_t j = seq->xoff[i]; j < seq->xoff[i + 1]; ++j)
        values[seq->xcol[j]].push_back(seq->xval[j]);
    }
  }
  NormalizationStats st;
  st.width = width;
  st.dt_cap_min = cfg.dt_cap_min;
  st.lo.assign(width, 0.0);
  st.hi.assign(width, 0.0);
  st.trained.assign(width, 0);
  for (std::uint32_t c = 0; c < width; ++c) {
    if (values[c].empty()) continue;
    st.trained[c] = 1;
    st.lo[c] = *std::min_element(values[c].begin(), values[c].end());
    st.hi[c] = nearest_rank_percentile(std::move(values[c]), cfg.cap_percentile);
    if (st.lo[c] > st.hi[c]) st.lo[c] = st.hi[c];
  }
  return st;
}

inline double normalize_value(const NormalizationStats& st, std::uint32_t col, double v) {
  if (v == 0.0) return 0.0;
  if (!st.trained[col]) return v;
  double lo = st.lo[col], hi = st.hi[col];
  if (hi == lo) return 1.0;
  double clamped = std::clamp(v, lo, hi);
  return 0.05 + 0.95 * (clamped - lo) / (hi - lo);
}

inline void apply_normalization(SampleSeq& seq, const NormalizationStats& st) {
  if (seq.width != st.width) throw SchemaError("normalization stats width differs from stream");
  for (std::size_t j = 0; j < seq.xval.size(); ++j)
    seq.xval[j] = normalize_value(st, seq.xcol[j], seq.xval[j]);
  for (auto& d : seq.dt_min) d = std::min(d, st.dt_cap_min) / st.dt_cap_min;
}

}  // namespace attend
