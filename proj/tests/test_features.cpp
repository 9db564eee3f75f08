#include <catch2/catch_amalgamated.hpp>

#include "attend/features.hpp"
#include "attend/synth.hpp"

using namespace attend;

namespace {

constexpr std::int64_t kMonday = 1465171200;  // Monday 00:00 UTC

UserTrace make_trace(std::vector<SensorEvent> events) {
  UserTrace t;
  t.user_id = "u01";
  t.age = 30;
  t.gender = Gender::Female;
  std::sort(events.begin(), events.end(),
            [](const SensorEvent& a, const SensorEvent& b) { return a.t < b.t; });
  t.events = std::move(events);
  return t;
}

double feat(const std::vector<double>& full, std::string_view name) {
  auto m = FeatureManifest::full();
  auto i = m.index_of(name);
  REQUIRE(i.has_value());
  return full[*i];
}

bool same_vec(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool na = std::isnan(a[i]), nb = std::isnan(b[i]);
    if (na != nb) return false;
    if (!na && a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("feature manifest is frozen at 150 named features") {
  auto m = FeatureManifest::full();
  CHECK(m.size() == 150);
  CHECK(FeatureManifest::full_size() == 150);

  auto name_list = m.names();
  std::set<std::string> names(name_list.begin(), name_list.end());
  CHECK(names.size() == m.size());

  std::set<FeatureGroup> groups;
  for (std::size_t i = 0; i < m.size(); ++i) groups.insert(m.def(i).group);
  CHECK(groups.size() == 5);

  CHECK(m.hash() == FeatureManifest::full().hash());
  CHECK(m.index_of("unlock_count_5min").has_value());
  CHECK(m.index_of("light_lux_q3_day").has_value());
  CHECK(m.index_of("no_such_feature") == std::nullopt);
}

TEST_CASE("ablated manifests drop exactly the excluded sensor's features") {
  const std::vector<std::pair<SensorKind, std::size_t>> expected = {
      {SensorKind::Accelerometer, 131}, {SensorKind::Battery, 133},
      {SensorKind::Data, 127},          {SensorKind::Light, 133},
      {SensorKind::Noise, 133},         {SensorKind::SemanticLocation, 141},
      {SensorKind::App, 137},           {SensorKind::Notification, 138},
      {SensorKind::Audio, 147},         {SensorKind::ChargingState, 147},
      {SensorKind::NotificationCenter, 147}, {SensorKind::RingerMode, 147},
      {SensorKind::Screen, 147},        {SensorKind::ScreenOrientation, 147},
      {SensorKind::TimeOfDay, 147},
  };
  std::size_t removed_total = 0;
  for (auto [kind, kept] : expected) {
    auto m = FeatureManifest::without(kind);
    INFO(sensor_name(kind));
    CHECK(m.size() == kept);
    removed_total += FeatureManifest::full_size() - kept;
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.def(i).source != kind);
    CHECK(m.hash() != FeatureManifest::full().hash());
  }
  // every feature except the two demographics is tied to exactly one sensor
  CHECK(removed_total == FeatureManifest::full_size() - 2);
}

TEST_CASE("projection selects kept columns in order") {
  auto full = FeatureManifest::full();
  std::vector<double> v(FeatureManifest::full_size());
  std::iota(v.begin(), v.end(), 0.0);
  CHECK(full.project(v) == v);

  auto ab = FeatureManifest::without(SensorKind::Screen);
  auto p = ab.project(v);
  REQUIRE(p.size() == ab.size());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    CHECK(ab.name(i) != "unlock_count_5min");
    CHECK(p[i] == feat(v, ab.name(i)));
  }
  CHECK_THROWS_AS(ab.project(std::vector<double>(10, 0.0)), SchemaError);
}

TEST_CASE("unlock counts use strict-before windows") {
  std::int64_t post = kMonday + 12 * 3600;
  auto trace = make_trace({
      make_screen(post - 10, ScreenState::Unlocked),
      make_screen(post - 100, ScreenState::Unlocked),
      make_screen(post - 200, ScreenState::Unlocked),
      make_screen(post - 400, ScreenState::Unlocked),
      make_screen(post, ScreenState::Unlocked),  // at the post itself: excluded
      make_screen(post - 50, ScreenState::On),   // not an unlock
      make_screen(post - 60, ScreenState::Off),
  });
  auto full = extract_features(build_trace_index(trace), post);
  CHECK(feat(full, "unlock_count_5min") == 3.0);
  CHECK(feat(full, "unlock_count_60min") == 4.0);
  CHECK(feat(full, "unlock_count_day") == 4.0);
}

TEST_CASE("periodic summary features match hand-computed quartiles") {
  std::int64_t post = kMonday + 12 * 3600;
  // five light readings spread over the morning, all inside the day window
  auto trace = make_trace({
      make_light(post - 6 * 3600, 1.0),
      make_light(post - 5 * 3600, 100.0),
      make_light(post - 4 * 3600, 3.0),
      make_light(post - 3 * 3600, 2.0),
      make_light(post - 120, 4.0),
  });
  auto full = extract_features(build_trace_index(trace), post);
  CHECK(feat(full, "light_lux_q1_day") == 2.0);
  CHECK(feat(full, "light_lux_med_day") == 3.0);
  CHECK(feat(full, "light_lux_q3_day") == 4.0);
  CHECK(feat(full, "light_lux_mad_day") == 1.0);
  CHECK(feat(full, "light_present_day") == 1.0);

  // 5-minute window holds only the last reading
  CHECK(feat(full, "light_lux_med_5min") == 4.0);
  CHECK(feat(full, "light_lux_mad_5min") == 0.0);
  CHECK(feat(full, "light_present_5min") == 1.0);

  CHECK(feat(full, "last_light_lux") == 4.0);
  CHECK(feat(full, "last_light_lux_known") == 1.0);

  // untouched sensor: missing summaries, zero flags
  CHECK(std::isnan(feat(full, "noise_db_med_day")));
  CHECK(feat(full, "noise_present_day") == 0.0);
  CHECK(std::isnan(feat(full, "last_noise_db")));
  CHECK(feat(full, "last_noise_db_known") == 0.0);
}

TEST_CASE("day window opens at the previous 5 am") {
  std::int64_t six_am = kMonday + 6 * 3600;
  auto trace = make_trace({
      make_screen(kMonday + 4 * 3600 + 1800, ScreenState::Unlocked),  // 04:30
      make_screen(kMonday + 5 * 3600 + 1800, ScreenState::Unlocked),  // 05:30
  });
  auto ix = build_trace_index(trace);
  auto at_six = extract_features(ix, six_am);
  CHECK(feat(at_six, "unlock_count_day") == 1.0);    // 04:30 predates 5 am
  CHECK(feat(at_six, "unlock_count_60min") == 1.0);  // [05:00, 06:00)

  // before 5 am the day window reaches back to yesterday's 5 am
  auto at_three = extract_features(ix, kMonday + 3 * 3600);
  CHECK(feat(at_three, "unlock_count_day") == 0.0);
  auto at_half_past_four = extract_features(ix, kMonday + 4 * 3600 + 2400);
  CHECK(feat(at_half_past_four, "unlock_count_day") == 1.0);
}

TEST_CASE("semantic location snapshot and day fractions") {
  std::int64_t post = kMonday + 12 * 3600;
  auto trace = make_trace({
      make_semantic_location(post - 4 * 3600, Place::Home),
      make_semantic_location(post - 3 * 3600, Place::Home),
      make_semantic_location(post - 2 * 3600, Place::Home),
      make_semantic_location(post - 1 * 3600, Place::Work),
  });
  auto full = extract_features(build_trace_index(trace), post);
  CHECK(feat(full, "loc_now_work") == 1.0);
  CHECK(feat(full, "loc_now_home") == 0.0);
  CHECK(feat(full, "loc_frac_home_day") == 0.75);
  CHECK(feat(full, "loc_frac_work_day") == 0.25);
  CHECK(feat(full, "loc_frac_out_day") == 0.0);
  CHECK(feat(full, "loc_distinct_day") == 2.0);

  auto empty = extract_features(build_trace_index(make_trace({})), post);
  CHECK(std::isnan(feat(empty, "loc_now_home")));
  CHECK(std::isnan(feat(empty, "loc_frac_home_day")));
  CHECK(feat(empty, "loc_distinct_day") == 0.0);
}

TEST_CASE("app and notification recency blocks") {
  std::int64_t post = kMonday + 12 * 3600;
  auto trace = make_trace({
      make_app_launch(post - 4000, "oth0", AppCategory::Other),
      make_app_launch(post - 120, "msg0", AppCategory::Messaging),
      make_notification(post - 3 * 3600, NotifAction::Post, "soc0", AppCategory::Social),
      make_notification(post - 600, NotifAction::Post, "soc0", AppCategory::Social),
      make_notification(post - 580, NotifAction::Remove, "soc0", AppCategory::Social),
  });
  auto full = extract_features(build_trace_index(trace), post);
  CHECK(feat(full, "app_since_last_min") == 2.0);
  CHECK(feat(full, "app_seen_before") == 1.0);
  CHECK(feat(full, "app_count_5min") == 1.0);
  CHECK(feat(full, "app_count_60min") == 1.0);
  CHECK(feat(full, "app_count_day") == 2.0);
  CHECK(feat(full, "app_last_messaging") == 1.0);
  CHECK(feat(full, "app_last_other") == 0.0);

  CHECK(feat(full, "notif_since_last_min") == 10.0);
  CHECK(feat(full, "notif_seen_before") == 1.0);
  CHECK(feat(full, "notif_count_60min") == 1.0);  // removals are not posts
  CHECK(feat(full, "notif_count_day") == 2.0);
  CHECK(feat(full, "notif_last_social") == 1.0);
  CHECK(feat(full, "notif_last_messaging") == 0.0);

  auto empty = extract_features(build_trace_index(make_trace({})), post);
  CHECK(std::isnan(feat(empty, "app_since_last_min")));
  CHECK(feat(empty, "app_seen_before") == 0.0);
  CHECK(std::isnan(feat(empty, "app_last_messaging")));
  CHECK(feat(empty, "app_count_day") == 0.0);
}

TEST_CASE("demographic and clock features") {
  auto trace = make_trace({});
  auto& tr = trace;
  tr.age = 42;
  tr.gender = Gender::Male;
  auto ix = build_trace_index(tr);

  auto monday = extract_features(ix, kMonday + 14 * 3600 + 1800);
  CHECK(feat(monday, "age") == 42.0);
  CHECK(feat(monday, "gender_female") == 0.0);
  CHECK(feat(monday, "hour_of_day") == 14.0);
  CHECK(feat(monday, "day_of_week") == 0.0);
  CHECK(feat(monday, "working_day") == 1.0);

  auto sunday = extract_features(ix, kMonday - 86400 + 9 * 3600);
  CHECK(feat(sunday, "day_of_week") == 6.0);
  CHECK(feat(sunday, "working_day") == 0.0);
}

TEST_CASE("features ignore events at or after the prediction time") {
  std::int64_t post = kMonday + 12 * 3600;
  std::vector<SensorEvent> past = {
      make_light(post - 300, 10.0),
      make_screen(post - 200, ScreenState::Unlocked),
      make_app_launch(post - 100, "msg0", AppCategory::Messaging),
      make_noise(post - 50, 40.0),
  };
  auto before = extract_features(build_trace_index(make_trace(past)), post);

  auto future = past;
  for (std::int64_t off : {std::int64_t{0}, std::int64_t{1}, std::int64_t{3600}}) {
    future.push_back(make_light(post + off, 999.0));
    future.push_back(make_screen(post + off, ScreenState::Unlocked));
    future.push_back(make_app_launch(post + off, "gam0", AppCategory::Games));
    future.push_back(make_notification(post + off, NotifAction::Post, "msg0",
                                       AppCategory::Messaging));
    future.push_back(make_semantic_location(post + off, Place::Out));
    future.push_back(make_noise(post + off, 90.0));
    future.push_back(make_audio(post + off, Playback::Music, AudioOutput::Speaker));
    future.push_back(make_charging(post + off, true));
  }
  auto after = extract_features(build_trace_index(make_trace(future)), post);
  CHECK(same_vec(before, after));
}

TEST_CASE("extract_matrix rows mirror labeled notifications") {
  GenConfig cfg;
  cfg.seed = 11;
  cfg.num_users = 3;
  cfg.num_days = 5;
  auto ds = generate_dataset(cfg);

  std::vector<std::vector<LabeledNotification>> labels;
  std::vector<LabeledUser> users;
  labels.reserve(ds.users.size());
  std::size_t total = 0;
  for (const auto& u : ds.users) labels.push_back(label_notifications(u, cfg.attend_horizon_s));
  for (std::size_t i = 0; i < ds.users.size(); ++i) {
    users.push_back({&ds.users[i], &labels[i]});
    total += labels[i].size();
  }

  auto manifest = FeatureManifest::full();
  auto m = extract_matrix(users, manifest);
  REQUIRE(m.rows() == total);
  CHECK(m.n_features == manifest.size());
  CHECK(m.manifest_hash == manifest.hash());
  CHECK(m.names == manifest.names());

  std::size_t r = 0;
  for (std::size_t i = 0; i < ds.users.size(); ++i)
    for (const auto& ln : labels[i]) {
      CHECK(m.instances[r].user == ds.users[i].user_id);
      CHECK(m.instances[r].post_t == ln.post_t);
      CHECK(m.instances[r].category == ln.category);
      CHECK(m.instances[r].y == (ln.attended ? 1 : 0));
      ++r;
    }

  for (double v : m.values) CHECK((std::isfinite(v) || std::isnan(v)));

  // ablated extraction drops the matching columns but keeps the rows
  auto ab = FeatureManifest::without(SensorKind::Noise);
  auto ma = extract_matrix(users, ab);
  CHECK(ma.rows() == m.rows());
  CHECK(ma.n_features == ab.size());

  auto again = extract_matrix(users, manifest);
  CHECK(same_vec(again.values, m.values));
}

TEST_CASE("feature distribution summarizes per class and skips missing values") {
  FeatureMatrix m;
  m.names = {"f0", "f1"};
  m.n_features = 2;
  m.instances = {{"u", 0, AppCategory::Messaging, 0},
                 {"u", 1, AppCategory::Messaging, 0},
                 {"u", 2, AppCategory::Messaging, 1}};
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  m.values = {1.0, 5.0,
              3.0, kNaN,
              10.0, 7.0};
  auto rows = feature_distribution(m);
  REQUIRE(rows.size() == 4);

  auto find = [&](std::string_view f, int label) -> const FeatureClassStats& {
    for (const auto& r : rows)
      if (r.feature == f && r.label == label) return r;
    FAIL("row not found");
    return rows.front();
  };
  const auto& f0n = find("f0", 0);
  CHECK(f0n.count == 2);
  CHECK(f0n.mean == 2.0);
  CHECK(f0n.min == 1.0);
  CHECK(f0n.max == 3.0);
  const auto& f0p = find("f0", 1);
  CHECK(f0p.count == 1);
  CHECK(f0p.med == 10.0);
  const auto& f1n = find("f1", 0);
  CHECK(f1n.count == 1);  // the NaN row is not counted
  CHECK(f1n.mean == 5.0);
}
