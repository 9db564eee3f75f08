#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <span>

#include "attend/common.hpp"

namespace attend {

// Sensor channels. Periodical kinds report on a fixed sampling grid,
// event-driven kinds fire on state changes, TimeOfDay is a derived channel
// injected by the encoder on the sampling grid.
enum class SensorKind : std::uint8_t {
  Accelerometer,
  Battery,
  Data,
  Light,
  Noise,
  SemanticLocation,
  App,
  Audio,
  ChargingState,
  Notification,
  NotificationCenter,
  RingerMode,
  Screen,
  ScreenOrientation,
  TimeOfDay,
};

inline constexpr int kNumSensorKinds = 15;

enum class SensorClass : std::uint8_t { Periodical, EventDriven, Derived };

enum class AppCategory : std::int8_t {
  Messaging,
  Email,
  Productivity,
  Social,
  Entertainment,
  Games,
  Alert,
  Other,
};

inline constexpr int kNumNotifCategories = 7;  // notifications never use Other
inline constexpr int kNumAppCategories = 8;

enum class Gender : std::uint8_t { Female, Male };

enum class Place : std::int8_t { Home, Work, Out, Unknown };
enum class Playback : std::int8_t { Music, None };
enum class AudioOutput : std::int8_t { Speaker, Headphones };
enum class NotifAction : std::int8_t { Post, Remove };
enum class RingerMode : std::int8_t { Normal, Silent, Vibrate };
enum class ScreenState : std::int8_t { On, Off, Unlocked };
enum class Orientation : std::int8_t { Portrait, Landscape };

// --- name tables -------------------------------------------------------------

namespace detail {
inline constexpr std::array<std::string_view, kNumSensorKinds> kSensorNames = {
    "accelerometer", "battery",       "data",
    "light",         "noise",         "semantic_location",
    "app",           "audio",         "charging_state",
    "notification",  "notification_center", "ringer_mode",
    "screen",        "screen_orientation",  "time_of_day",
};

inline constexpr std::array<std::string_view, kNumAppCategories> kCategoryNames = {
    "messaging", "email", "productivity", "social", "entertainment", "games", "alert", "other",
};

inline constexpr std::array<std::string_view, 4> kPlaceNames = {"home", "work", "out", "unknown"};
inline constexpr std::array<std::string_view, 2> kPlaybackNames = {"music", "none"};
inline constexpr std::array<std::string_view, 2> kOutputNames = {"speaker", "headphones"};
inline constexpr std::array<std::string_view, 2> kActionNames = {"post", "remove"};
inline constexpr std::array<std::string_view, 2> kChargingNames = {"charging", "not_charging"};
inline constexpr std::array<std::string_view, 3> kRingerNames = {"normal", "silent", "vibrate"};
inline constexpr std::array<std::string_view, 3> kScreenNames = {"on", "off", "unlocked"};
inline constexpr std::array<std::string_view, 2> kOrientationNames = {"portrait", "landscape"};
}  // namespace detail

inline std::string_view sensor_name(SensorKind k) { return detail::kSensorNames[static_cast<int>(k)]; }

inline std::optional<SensorKind> parse_sensor_kind(std::string_view s) {
  for (int i = 0; i < kNumSensorKinds; ++i)
    if (detail::kSensorNames[i] == s) return static_cast<SensorKind>(i);
  return std::nullopt;
}

inline SensorClass sensor_class(SensorKind k) {
  switch (k) {
    case SensorKind::Accelerometer:
    case SensorKind::Battery:
    case SensorKind::Data:
    case SensorKind::Light:
    case SensorKind::Noise:
    case SensorKind::SemanticLocation:
      return SensorClass::Periodical;
    case SensorKind::TimeOfDay:
      return SensorClass::Derived;
    default:
      return SensorClass::EventDriven;
  }
}

inline std::string_view category_name(AppCategory c) {
  return detail::kCategoryNames[static_cast<int>(c)];
}

inline std::optional<AppCategory> parse_category(std::string_view s) {
  for (int i = 0; i < kNumAppCategories; ++i)
    if (detail::kCategoryNames[i] == s) return static_cast<AppCategory>(i);
  return std::nullopt;
}

inline std::string_view gender_name(Gender g) { return g == Gender::Female ? "female" : "male"; }

// --- payload schema ------------------------------------------------------------

// An event stores up to 4 numeric payload slots and 2 categorical slots.
// The per-kind schema below names them for serialization and validation.
struct CatSlotSpec {
  std::string_view key;
  std::span<const std::string_view> labels;
  bool required = true;
};

struct KindSpec {
  SensorClass cls;
  std::span<const std::string_view> num_keys;  // all required when present
  std::span<const CatSlotSpec> cat_slots;
  bool has_app = false;  // carries an application id
};

namespace detail {
inline constexpr std::array<std::string_view, 2> kAccelKeys = {"acc_mean", "acc_max"};
inline constexpr std::array<std::string_view, 1> kBatteryKeys = {"drain"};
inline constexpr std::array<std::string_view, 4> kDataKeys = {"rx", "tx", "cell_rx", "cell_tx"};
inline constexpr std::array<std::string_view, 1> kLightKeys = {"lux"};
inline constexpr std::array<std::string_view, 1> kNoiseKeys = {"db"};
inline constexpr std::array<std::string_view, 3> kTimeKeys = {"hour", "weekday", "working"};

inline constexpr std::array<CatSlotSpec, 1> kPlaceSlots = {CatSlotSpec{"place", kPlaceNames, true}};
inline constexpr std::array<CatSlotSpec, 1> kAppSlots = {CatSlotSpec{"category", kCategoryNames, true}};
inline constexpr std::array<CatSlotSpec, 2> kAudioSlots = {
    CatSlotSpec{"playback", kPlaybackNames, true}, CatSlotSpec{"output", kOutputNames, false}};
inline constexpr std::array<CatSlotSpec, 1> kChargingSlots = {CatSlotSpec{"state", kChargingNames, true}};
inline constexpr std::array<CatSlotSpec, 2> kNotifSlots = {
    CatSlotSpec{"action", kActionNames, true}, CatSlotSpec{"category", kCategoryNames, true}};
inline constexpr std::array<CatSlotSpec, 1> kRingerSlots = {CatSlotSpec{"mode", kRingerNames, true}};
inline constexpr std::array<CatSlotSpec, 1> kScreenSlots = {CatSlotSpec{"state", kScreenNames, true}};
inline constexpr std::array<CatSlotSpec, 1> kOrientationSlots = {
    CatSlotSpec{"orientation", kOrientationNames, true}};
}  // namespace detail

inline const KindSpec& kind_spec(SensorKind k) {
  static const std::array<KindSpec, kNumSensorKinds> specs = {{
      {SensorClass::Periodical, detail::kAccelKeys, {}, false},
      {SensorClass::Periodical, detail::kBatteryKeys, {}, false},
      {SensorClass::Periodical, detail::kDataKeys, {}, false},
      {SensorClass::Periodical, detail::kLightKeys, {}, false},
      {SensorClass::Periodical, detail::kNoiseKeys, {}, false},
      {SensorClass::Periodical, {}, detail::kPlaceSlots, false},
      {SensorClass::EventDriven, {}, detail::kAppSlots, true},
      {SensorClass::EventDriven, {}, detail::kAudioSlots, false},
      {SensorClass::EventDriven, {}, detail::kChargingSlots, false},
      {SensorClass::EventDriven, {}, detail::kNotifSlots, true},
      {SensorClass::EventDriven, {}, {}, false},
      {SensorClass::EventDriven, {}, detail::kRingerSlots, false},
      {SensorClass::EventDriven, {}, detail::kScreenSlots, false},
      {SensorClass::EventDriven, {}, detail::kOrientationSlots, false},
      {SensorClass::Derived, detail::kTimeKeys, {}, false},
  }};
  return specs[static_cast<int>(k)];
}

// --- events ---------------------------------------------------------------------

struct SensorEvent {
  std::int64_t t = 0;  // seconds since epoch, UTC
  SensorKind kind = SensorKind::Light;
  std::array<float, 4> num = {std::numeric_limits<float>::quiet_NaN(),
                              std::numeric_limits<float>::quiet_NaN(),
                              std::numeric_limits<float>::quiet_NaN(),
                              std::numeric_limits<float>::quiet_NaN()};
  std::array<std::int8_t, 2> cat = {-1, -1};
  std::string app;  // App / Notification events only
};

inline SensorEvent make_accelerometer(std::int64_t t, double acc_mean, double acc_max) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Accelerometer;
  e.num[0] = static_cast<float>(acc_mean);
  e.num[1] = static_cast<float>(acc_max);
  return e;
}

inline SensorEvent make_battery(std::int64_t t, double drain_pct_per_h) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Battery;
  e.num[0] = static_cast<float>(drain_pct_per_h);
  return e;
}

inline SensorEvent make_data(std::int64_t t, double rx, double tx, double cell_rx, double cell_tx) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Data;
  e.num = {static_cast<float>(rx), static_cast<float>(tx), static_cast<float>(cell_rx),
           static_cast<float>(cell_tx)};
  return e;
}

inline SensorEvent make_light(std::int64_t t, double lux) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Light;
  e.num[0] = static_cast<float>(lux);
  return e;
}

inline SensorEvent make_noise(std::int64_t t, double db) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Noise;
  e.num[0] = static_cast<float>(db);
  return e;
}

inline SensorEvent make_semantic_location(std::int64_t t, Place p) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::SemanticLocation;
  e.cat[0] = static_cast<std::int8_t>(p);
  return e;
}

inline SensorEvent make_app_launch(std::int64_t t, std::string app_id, AppCategory c) {
  if (app_id.empty()) throw ValidationError("app launch requires an app id");
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::App;
  e.cat[0] = static_cast<std::int8_t>(c);
  e.app = std::move(app_id);
  return e;
}

inline SensorEvent make_audio(std::int64_t t, Playback p,
                              std::optional<AudioOutput> out = std::nullopt) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Audio;
  e.cat[0] = static_cast<std::int8_t>(p);
  if (out) e.cat[1] = static_cast<std::int8_t>(*out);
  return e;
}

inline SensorEvent make_charging(std::int64_t t, bool charging) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::ChargingState;
  e.cat[0] = charging ? 0 : 1;
  return e;
}

inline SensorEvent make_notification(std::int64_t t, NotifAction action, std::string app_id,
                                     AppCategory c) {
  if (app_id.empty()) throw ValidationError("notification requires an app id");
  if (static_cast<int>(c) >= kNumNotifCategories)
    throw ValidationError("notifications use the seven notification categories");
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Notification;
  e.cat[0] = static_cast<std::int8_t>(action);
  e.cat[1] = static_cast<std::int8_t>(c);
  e.app = std::move(app_id);
  return e;
}

inline SensorEvent make_notification_center(std::int64_t t) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::NotificationCenter;
  return e;
}

inline SensorEvent make_ringer(std::int64_t t, RingerMode m) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::RingerMode;
  e.cat[0] = static_cast<std::int8_t>(m);
  return e;
}

inline SensorEvent make_screen(std::int64_t t, ScreenState s) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::Screen;
  e.cat[0] = static_cast<std::int8_t>(s);
  return e;
}

inline SensorEvent make_orientation(std::int64_t t, Orientation o) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::ScreenOrientation;
  e.cat[0] = static_cast<std::int8_t>(o);
  return e;
}

// hour 1..24, weekday 1..7 (Monday = 1), working 1 = workday, 2 = weekend.
// Values start at 1 so they survive the sparse zero-means-missing convention.
inline SensorEvent make_time_of_day(std::int64_t t) {
  SensorEvent e;
  e.t = t;
  e.kind = SensorKind::TimeOfDay;
  e.num[0] = static_cast<float>(hour_of_day(t) + 1);
  e.num[1] = static_cast<float>(day_of_week(t) + 1);
  e.num[2] = is_working_day(t) ? 1.0f : 2.0f;
  return e;
}

// --- traces ------------------------------------------------------------------------

struct UserTrace {
  std::string user_id;
  int age = 0;
  Gender gender = Gender::Female;
  std::vector<SensorEvent> events;  // sorted by t
  // unparseable key=value payload entries found while reading a log,
  // kept aside so validation can report them: (event index, raw text)
  std::vector<std::pair<std::size_t, std::string>> stray_payload;
};

struct Dataset {
  std::vector<UserTrace> users;
};

// --- ground-truth labeling -----------------------------------------------------------

struct LabeledNotification {
  std::int64_t post_t = 0;
  std::string app;
  AppCategory category = AppCategory::Messaging;
  bool attended = false;
  // true when the observation window was cut short by the end of the trace
  // and the notification was not (yet) attended
  bool truncation_risky = false;
};

// A notification counts as attended when the same app is launched within
// (post_t, post_t + horizon_s]. Requires a time-sorted trace.
inline std::vector<LabeledNotification> label_notifications(const UserTrace& trace,
                                                            int horizon_s = 600) {
  if (horizon_s <= 0) throw ConfigError("attendance horizon must be positive");
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : trace.events) {
    if (e.t < prev) throw ValidationError("trace is not sorted by time: user " + trace.user_id);
    prev = e.t;
  }
  std::map<std::string_view, std::vector<std::int64_t>> launches;
  for (const auto& e : trace.events)
    if (e.kind == SensorKind::App) launches[e.app].push_back(e.t);

  std::int64_t trace_end =
      trace.events.empty() ? std::numeric_limits<std::int64_t>::min() : trace.events.back().t;

  std::vector<LabeledNotification> out;
  for (const auto& e : trace.events) {
    if (e.kind != SensorKind::Notification || e.cat[0] != static_cast<std::int8_t>(NotifAction::Post))
      continue;
    LabeledNotification ln;
    ln.post_t = e.t;
    ln.app = e.app;
    ln.category = static_cast<AppCategory>(e.cat[1]);
    auto it = launches.find(e.app);
    if (it != launches.end()) {
      const auto& ts = it->second;
      auto lo = std::upper_bound(ts.begin(), ts.end(), e.t);  // strictly after the post
      ln.attended = lo != ts.end() && *lo <= e.t + horizon_s;
    }
    ln.truncation_risky = !ln.attended && trace_end < e.t + horizon_s;
    out.push_back(std::move(ln));
  }
  return out;
}

// --- validation ------------------------------------------------------------------------

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

inline ValidationReport validate_trace(const UserTrace& trace) {
  ValidationReport rep;
  auto note = [&](std::string msg) { rep.issues.push_back(std::move(msg)); };
  if (trace.user_id.empty()) note("empty user id");
  if (trace.age < 10 || trace.age > 120)
    note(strfmt("implausible age %d for user %s", trace.age, trace.user_id.c_str()));
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    if (e.t < prev) {
      note(strfmt("event %zu out of order (t=%lld after %lld)", i, static_cast<long long>(e.t),
                  static_cast<long long>(prev)));
    }
    prev = std::max(prev, e.t);
    const auto& spec = kind_spec(e.kind);
    for (std::size_t s = 0; s < spec.num_keys.size(); ++s) {
      if (!std::isfinite(e.num[s]))
        note(strfmt("event %zu (%s): missing or non-finite %s", i,
                    std::string(sensor_name(e.kind)).c_str(),
                    std::string(spec.num_keys[s]).c_str()));
    }
    for (std::size_t s = 0; s < spec.cat_slots.size(); ++s) {
      const auto& cs = spec.cat_slots[s];
      int v = e.cat[s];
      if (v < 0) {
        if (cs.required)
          note(strfmt("event %zu (%s): missing %s", i, std::string(sensor_name(e.kind)).c_str(),
                      std::string(cs.key).c_str()));
      } else if (v >= static_cast<int>(cs.labels.size())) {
        note(strfmt("event %zu (%s): %s out of range", i, std::string(sensor_name(e.kind)).c_str(),
                    std::string(cs.key).c_str()));
      }
    }
    if (spec.has_app && e.app.empty())
      note(strfmt("event %zu (%s): missing app id", i, std::string(sensor_name(e.kind)).c_str()));
  }
  for (const auto& [idx, text] : trace.stray_payload)
    note(strfmt("event %zu: unknown payload entry '%s'", idx, text.c_str()));
  return rep;
}

}  // namespace attend
