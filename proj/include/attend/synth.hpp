#pragma once

#include "attend/events.hpp"

namespace attend {

// Synthetic dataset with a planted, causal attendance signal: the more a user
// unlocked, launched, and received in the preceding window, the more likely
// the next notification is attended. Attended notifications feed a same-app
// launch back into the stream, so ground truth can be re-derived from events.
struct GenConfig {
  std::uint64_t seed = 7;
  int num_users = 60;
  int num_days = 35;
  std::int64_t start_t = 1465171200;  // a Monday, 00:00 UTC
  double sampling_period_s = 600;

  // usage activity
  double sessions_per_day_lo = 45, sessions_per_day_hi = 95;  // screen unlocks
  double launch_factor = 0.55;   // baseline app launches per unlock
  double hour_noise_sd = 0.55;   // per-hour lognormal noise, decouples the streams

  // notification arrivals
  double notif_per_day_lo = 55, notif_per_day_hi = 110;

  // attendance signal
  double signal_strength = 1.0;
  double coef_unlock = 1.7;
  double coef_launch = 0.5;
  double coef_notif = 0.35;
  double coef_night = -0.9;
  double window_min = 90;
  double user_bias_sd = 0.35;
  int attend_horizon_s = 600;
};

// Notification volume shares and target attendance rates per category.
inline constexpr std::array<double, kNumNotifCategories> kCategoryShare = {
    0.5484, 0.1705, 0.1299, 0.0919, 0.0265, 0.0234, 0.0095};
inline constexpr std::array<double, kNumNotifCategories> kCategoryTargetRate = {
    0.591, 0.175, 0.211, 0.255, 0.212, 0.248, 0.125};

namespace synth_detail {

inline constexpr std::array<double, 24> kUsageProfile = {
    0.15, 0.10, 0.10, 0.10, 0.10, 0.20, 0.50, 0.90, 1.40, 1.40, 1.40, 1.20,
    1.20, 1.20, 1.10, 1.10, 1.10, 1.10, 1.30, 1.60, 1.60, 1.60, 1.00, 0.50};
inline constexpr std::array<double, 24> kNotifProfile = {
    0.35, 0.30, 0.30, 0.30, 0.30, 0.40, 0.60, 0.90, 1.20, 1.30, 1.30, 1.20,
    1.20, 1.20, 1.10, 1.10, 1.10, 1.10, 1.20, 1.30, 1.30, 1.20, 0.90, 0.60};

inline double profile_sum(const std::array<double, 24>& p) {
  double s = 0;
  for (double v : p) s += v;
  return s;
}

inline const std::array<std::array<const char*, 2>, kNumAppCategories> kAppPool = {{
    {"msg0", "msg1"},
    {"eml0", "eml1"},
    {"prd0", "prd1"},
    {"soc0", "soc1"},
    {"ent0", "ent1"},
    {"gam0", "gam1"},
    {"alr0", "alr1"},
    {"oth0", "oth1"},
}};

inline double urand(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}
inline double nrand(std::mt19937_64& g, double m, double sd) {
  return std::normal_distribution<double>(m, sd)(g);
}
inline double lognorm(std::mt19937_64& g, double median, double sigma) {
  return median * std::exp(nrand(g, 0.0, sigma));
}
inline int pois(std::mt19937_64& g, double lam) {
  if (lam <= 0) return 0;
  return std::poisson_distribution<int>(lam)(g);
}
inline bool bern(std::mt19937_64& g, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(g) < p;
}

inline bool is_night(std::int64_t t) { return hour_of_day(t) < 7; }

struct NotifDraft {
  std::int64_t t;
  std::int8_t cat;
  std::string app;
  double base_score = 0;  // recency score before induced launches
  double v = 0;           // scaled score + night term + user bias
};

struct UserDraft {
  UserTrace trace;  // filled stream by stream, merged at the end
  std::vector<std::int64_t> unlock_times, launch_times, notif_times;
  std::vector<NotifDraft> notifs;
  std::vector<std::vector<SensorEvent>> streams;
  double bias_u = 0;
  std::uint64_t attend_seed = 0;
};

inline std::size_t count_in_window(const std::vector<std::int64_t>& sorted, std::int64_t t,
                                   std::int64_t window_s) {
  auto hi = std::lower_bound(sorted.begin(), sorted.end(), t);
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), t - window_s);
  return static_cast<std::size_t>(hi - lo);
}

}  // namespace synth_detail

inline Dataset generate_dataset(const GenConfig& cfg) {
  using namespace synth_detail;
  if (cfg.num_users <= 0 || cfg.num_days <= 0) throw ConfigError("need at least one user and one day");
  if (cfg.sampling_period_s <= 0) throw ConfigError("sampling period must be positive");
  if (cfg.attend_horizon_s < 60) throw ConfigError("attendance horizon must be at least a minute");

  const std::int64_t span_s = static_cast<std::int64_t>(cfg.num_days) * 86400;
  const std::int64_t end_t = cfg.start_t + span_s;
  const int n_hours = cfg.num_days * 24;
  const double usage_sum = profile_sum(kUsageProfile);
  const double notif_sum = profile_sum(kNotifProfile);
  const auto window_s = static_cast<std::int64_t>(cfg.window_min * 60.0);

  std::vector<UserDraft> drafts(cfg.num_users);

  for (int ui = 0; ui < cfg.num_users; ++ui) {
    auto& d = drafts[ui];
    auto& tr = d.trace;
    tr.user_id = strfmt("u%04d", ui + 1);
    d.attend_seed = subseed(cfg.seed, ui, 6);

    auto prof = make_rng(subseed(cfg.seed, ui, 0));
    tr.age = std::clamp(static_cast<int>(std::lround(nrand(prof, 37.7, 11.05))), 18, 66);
    tr.gender = bern(prof, 147.0 / 279.0) ? Gender::Female : Gender::Male;
    double base_sessions = urand(prof, cfg.sessions_per_day_lo, cfg.sessions_per_day_hi);
    double notif_rate = urand(prof, cfg.notif_per_day_lo, cfg.notif_per_day_hi);
    double launch_factor_u = cfg.launch_factor * std::exp(nrand(prof, 0.0, 0.2));
    std::array<double, kNumNotifCategories> mix{};
    double mix_sum = 0;
    for (int c = 0; c < kNumNotifCategories; ++c) {
      mix[c] = kCategoryShare[c] * std::exp(nrand(prof, 0.0, 0.4));
      mix_sum += mix[c];
    }
    for (auto& m : mix) m /= mix_sum;
    double work_start_h = 8.5 + nrand(prof, 0.0, 0.5);
    double work_end_h = 17.0 + nrand(prof, 0.0, 0.5);
    std::vector<std::uint8_t> weekend_out(cfg.num_days, 0);
    for (int day = 0; day < cfg.num_days; ++day)
      if (!is_working_day(cfg.start_t + day * 86400)) weekend_out[day] = bern(prof, 0.6);

    // screen sessions and dependent streams
    {
      auto g = make_rng(subseed(cfg.seed, ui, 1));
      std::vector<SensorEvent> screen, notifcenter;
      double sd2 = cfg.hour_noise_sd * cfg.hour_noise_sd;
      for (int h = 0; h < n_hours; ++h) {
        int hod = h % 24;
        double lam = base_sessions * (kUsageProfile[hod] / usage_sum) *
                     std::exp(nrand(g, -sd2 / 2, cfg.hour_noise_sd));
        int n = pois(g, lam);
        for (int k = 0; k < n; ++k) {
          std::int64_t t = cfg.start_t + h * 3600 + static_cast<std::int64_t>(urand(g, 0, 3600));
          if (t >= end_t) continue;
          if (bern(g, 0.3) && t - 2 >= cfg.start_t)
            screen.push_back(make_screen(t - 2, ScreenState::On));
          screen.push_back(make_screen(t, ScreenState::Unlocked));
          d.unlock_times.push_back(t);
          auto dur = static_cast<std::int64_t>(std::clamp(lognorm(g, 45, 0.8), 5.0, 1800.0));
          if (t + dur < end_t) screen.push_back(make_screen(t + dur, ScreenState::Off));
          if (bern(g, 0.35)) {
            std::int64_t a = t + static_cast<std::int64_t>(urand(g, 2, 40));
            if (a < end_t) notifcenter.push_back(make_notification_center(a));
          }
        }
      }
      std::sort(d.unlock_times.begin(), d.unlock_times.end());
      d.streams.push_back(std::move(screen));
      d.streams.push_back(std::move(notifcenter));
    }

    // baseline app launches
    {
      auto g = make_rng(subseed(cfg.seed, ui, 2));
      std::vector<SensorEvent> launches;
      double sd2 = cfg.hour_noise_sd * cfg.hour_noise_sd;
      for (int h = 0; h < n_hours; ++h) {
        int hod = h % 24;
        double lam = base_sessions * launch_factor_u * (kUsageProfile[hod] / usage_sum) *
                     std::exp(nrand(g, -sd2 / 2, cfg.hour_noise_sd));
        int n = pois(g, lam);
        for (int k = 0; k < n; ++k) {
          std::int64_t t = cfg.start_t + h * 3600 + static_cast<std::int64_t>(urand(g, 0, 3600));
          if (t >= end_t) continue;
          AppCategory cat;
          if (bern(g, 0.3)) {
            cat = AppCategory::Other;
          } else {
            double u = urand(g, 0, 1), acc = 0;
            int c = 0;
            for (; c < kNumNotifCategories - 1; ++c) {
              acc += mix[c];
              if (u < acc) break;
            }
            cat = static_cast<AppCategory>(c);
          }
          const auto& pool = kAppPool[static_cast<int>(cat)];
          launches.push_back(make_app_launch(t, pool[bern(g, 0.7) ? 0 : 1], cat));
          d.launch_times.push_back(t);
        }
      }
      std::sort(d.launch_times.begin(), d.launch_times.end());
      d.streams.push_back(std::move(launches));
    }

    // notification arrivals (posts realized later, after attendance is decided)
    {
      auto g = make_rng(subseed(cfg.seed, ui, 3));
      for (int h = 0; h < n_hours; ++h) {
        int hod = h % 24;
        double hour_eta = std::exp(nrand(g, -0.08, 0.4));
        for (int c = 0; c < kNumNotifCategories; ++c) {
          double lam = notif_rate * mix[c] * (kNotifProfile[hod] / notif_sum) * hour_eta;
          int n = pois(g, lam);
          for (int k = 0; k < n; ++k) {
            std::int64_t t = cfg.start_t + h * 3600 + static_cast<std::int64_t>(urand(g, 0, 3600));
            if (t >= end_t) continue;
            NotifDraft nd;
            nd.t = t;
            nd.cat = static_cast<std::int8_t>(c);
            nd.app = kAppPool[c][bern(g, 0.7) ? 0 : 1];
            d.notifs.push_back(std::move(nd));
          }
        }
      }
      std::sort(d.notifs.begin(), d.notifs.end(),
                [](const NotifDraft& a, const NotifDraft& b) { return a.t < b.t; });
      d.notif_times.resize(d.notifs.size());
      for (std::size_t i = 0; i < d.notifs.size(); ++i) d.notif_times[i] = d.notifs[i].t;
    }

    // periodic sensors on the sampling grid
    {
      auto g = make_rng(subseed(cfg.seed, ui, 4));
      std::vector<SensorEvent> periodic;
      auto period = static_cast<std::int64_t>(cfg.sampling_period_s);
      double base_drain = urand(g, 2.0, 6.0);
      for (std::int64_t t = cfg.start_t; t < end_t; t += period) {
        double hod = static_cast<double>(t - epoch_day(t) * 86400) / 3600.0;
        double am = std::clamp(std::fabs(nrand(g, 0.22, 0.12)) + 0.02, 0.02, 3.0);
        periodic.push_back(make_accelerometer(t, am, am * (1.5 + std::fabs(nrand(g, 1.0, 0.5)))));
        periodic.push_back(make_battery(t, std::clamp(base_drain + std::fabs(nrand(g, 0.0, 1.2)), 0.1, 25.0)));
        double rx = std::clamp(lognorm(g, 8.0, 1.2), 0.01, 5000.0);
        double tx = rx * urand(g, 0.1, 0.4);
        double cell = urand(g, 0.0, 0.5);
        periodic.push_back(make_data(t, rx, tx, std::max(rx * cell, 0.001), std::max(tx * cell, 0.001)));
        double lux = hod >= 7 && hod < 19   ? lognorm(g, 300, 0.7)
                     : hod >= 5 && hod < 22 ? lognorm(g, 30, 0.8)
                                            : lognorm(g, 3, 0.7);
        periodic.push_back(make_light(t, std::clamp(lux, 0.5, 20000.0)));
        // planted null: pure iid noise, independent of everything else
        periodic.push_back(make_noise(t, std::clamp(nrand(g, 45, 8), 20.0, 90.0)));
        Place place;
        if (bern(g, 0.02)) {
          place = Place::Unknown;
        } else if (is_working_day(t)) {
          if (hod >= work_start_h - 0.5 && hod < work_start_h)
            place = Place::Out;
          else if (hod >= work_start_h && hod < work_end_h)
            place = Place::Work;
          else if (hod >= work_end_h && hod < work_end_h + 0.75)
            place = Place::Out;
          else
            place = Place::Home;
        } else {
          int day = static_cast<int>((t - cfg.start_t) / 86400);
          place = (weekend_out[day] && hod >= 12 && hod < 17) ? Place::Out : Place::Home;
        }
        periodic.push_back(make_semantic_location(t, place));
      }
      d.streams.push_back(std::move(periodic));
    }

    // remaining event-driven channels
    {
      auto g = make_rng(subseed(cfg.seed, ui, 5));
      std::vector<SensorEvent> misc;
      auto pick_hour = [&](std::mt19937_64& rg) {
        double u = urand(rg, 0, usage_sum), acc = 0;
        for (int hod = 0; hod < 24; ++hod) {
          acc += kUsageProfile[hod];
          if (u < acc) return hod;
        }
        return 23;
      };
      for (int day = 0; day < cfg.num_days; ++day) {
        std::int64_t day_t = cfg.start_t + static_cast<std::int64_t>(day) * 86400;
        int n_audio = pois(g, 2.5);
        for (int k = 0; k < n_audio; ++k) {
          std::int64_t t = day_t + pick_hour(g) * 3600 + static_cast<std::int64_t>(urand(g, 0, 3600));
          auto dur = static_cast<std::int64_t>(std::clamp(lognorm(g, 1500, 0.7), 60.0, 7200.0));
          auto out = bern(g, 0.6) ? AudioOutput::Speaker : AudioOutput::Headphones;
          if (t < end_t) misc.push_back(make_audio(t, Playback::Music, out));
          if (t + dur < end_t) misc.push_back(make_audio(t + dur, Playback::None));
        }
        std::int64_t plug = day_t + static_cast<std::int64_t>((22.5 + nrand(g, 0, 0.7)) * 3600);
        if (plug >= day_t && plug < end_t) misc.push_back(make_charging(plug, true));
        std::int64_t unplug = day_t + 86400 + static_cast<std::int64_t>((6.75 + nrand(g, 0, 0.5)) * 3600);
        if (unplug < end_t) misc.push_back(make_charging(unplug, false));
        if (bern(g, 0.35)) {
          std::int64_t ts = day_t + static_cast<std::int64_t>((12.0 + urand(g, 0, 4)) * 3600);
          auto dur = static_cast<std::int64_t>(urand(g, 1200, 3600));
          if (ts < end_t) misc.push_back(make_charging(ts, true));
          if (ts + dur < end_t) misc.push_back(make_charging(ts + dur, false));
        }
        int n_ringer = pois(g, 2.5);
        RingerMode mode = RingerMode::Normal;
        for (int k = 0; k < n_ringer; ++k) {
          std::int64_t t = day_t + pick_hour(g) * 3600 + static_cast<std::int64_t>(urand(g, 0, 3600));
          double u = urand(g, 0, 1);
          RingerMode next = u < 0.5 ? RingerMode::Normal : u < 0.8 ? RingerMode::Vibrate : RingerMode::Silent;
          if (next == mode) next = mode == RingerMode::Normal ? RingerMode::Vibrate : RingerMode::Normal;
          mode = next;
          if (t < end_t) misc.push_back(make_ringer(t, mode));
        }
        int n_flip = pois(g, 5.0);
        Orientation ori = Orientation::Portrait;
        for (int k = 0; k < n_flip; ++k) {
          std::int64_t t = day_t + pick_hour(g) * 3600 + static_cast<std::int64_t>(urand(g, 0, 3600));
          ori = ori == Orientation::Portrait ? Orientation::Landscape : Orientation::Portrait;
          if (t < end_t) misc.push_back(make_orientation(t, ori));
        }
      }
      d.streams.push_back(std::move(misc));
    }
  }

  // calibrate attendance probabilities on the pre-feedback streams
  std::vector<double> all_scores;
  for (auto& d : drafts) {
    auto g = make_rng(d.attend_seed);
    d.bias_u = nrand(g, 0.0, cfg.user_bias_sd);
    for (auto& nd : d.notifs) {
      double n1 = static_cast<double>(count_in_window(d.unlock_times, nd.t, window_s));
      double n2 = static_cast<double>(count_in_window(d.launch_times, nd.t, window_s));
      double n3 = static_cast<double>(count_in_window(d.notif_times, nd.t, window_s));
      nd.base_score = cfg.coef_unlock * std::sqrt(n1) + cfg.coef_launch * std::sqrt(n2) +
                      cfg.coef_notif * std::sqrt(n3);
      all_scores.push_back(nd.base_score);
    }
  }
  double score_mean = all_scores.empty() ? 0.0 : mean(all_scores);
  double score_sd = 1.0;
  if (all_scores.size() > 1) {
    double s = 0;
    for (double v : all_scores) s += (v - score_mean) * (v - score_mean);
    score_sd = std::sqrt(s / static_cast<double>(all_scores.size()));
    if (score_sd < 1e-9) score_sd = 1.0;
  }

  std::array<std::vector<double>, kNumNotifCategories> cat_values;
  for (auto& d : drafts)
    for (auto& nd : d.notifs) {
      nd.v = cfg.signal_strength * (nd.base_score - score_mean) / score_sd +
             cfg.coef_night * cfg.signal_strength * (synth_detail::is_night(nd.t) ? 1.0 : 0.0) +
             d.bias_u;
      cat_values[nd.cat].push_back(nd.v);
    }

  auto solve_bias = [](const std::array<std::vector<double>, kNumNotifCategories>& values) {
    std::array<double, kNumNotifCategories> bias{};
    for (int c = 0; c < kNumNotifCategories; ++c) {
      if (values[c].empty()) continue;
      double lo = -15, hi = 15;
      for (int it = 0; it < 100; ++it) {
        double mid = (lo + hi) / 2;
        double m = 0;
        for (double v : values[c]) m += sigmoid(v + mid);
        m /= static_cast<double>(values[c].size());
        (m < kCategoryTargetRate[c] ? lo : hi) = mid;
      }
      bias[c] = (lo + hi) / 2;
    }
    return bias;
  };
  auto cat_bias = solve_bias(cat_values);

  // Chronological attendance realization. Attended posts induce same-app
  // launches which raise the scores of later notifications, so the biases
  // calibrated on the pre-feedback streams drift upward. A rehearsal pass
  // measures the feedback-inclusive scores and the biases are re-solved on
  // them before the final, emitted realization.
  auto realize = [&](UserDraft& d, const std::array<double, kNumNotifCategories>& bias,
                     std::uint64_t rng_tag,
                     std::array<std::vector<double>, kNumNotifCategories>* score_sink,
                     bool emit) {
    auto g = make_rng(subseed(d.attend_seed, rng_tag));
    std::vector<SensorEvent> posts, removals, induced_events;
    std::vector<std::int64_t> induced;
    for (auto& nd : d.notifs) {
      double extra = static_cast<double>(count_in_window(induced, nd.t, window_s));
      double n2 = static_cast<double>(count_in_window(d.launch_times, nd.t, window_s)) + extra;
      double n1 = static_cast<double>(count_in_window(d.unlock_times, nd.t, window_s));
      double n3 = static_cast<double>(count_in_window(d.notif_times, nd.t, window_s));
      double score = cfg.coef_unlock * std::sqrt(n1) + cfg.coef_launch * std::sqrt(n2) +
                     cfg.coef_notif * std::sqrt(n3);
      double v = cfg.signal_strength * (score - score_mean) / score_sd +
                 cfg.coef_night * cfg.signal_strength * (synth_detail::is_night(nd.t) ? 1.0 : 0.0) +
                 d.bias_u;
      if (score_sink) (*score_sink)[nd.cat].push_back(v);
      if (emit)
        posts.push_back(make_notification(nd.t, NotifAction::Post, nd.app,
                                          static_cast<AppCategory>(nd.cat)));
      if (bern(g, sigmoid(v + bias[nd.cat]))) {
        double delay = 5.0 + std::exponential_distribution<double>(1.0 / 75.0)(g);
        delay = std::min(delay, static_cast<double>(cfg.attend_horizon_s) - 15.0);
        std::int64_t lt = std::min(nd.t + static_cast<std::int64_t>(delay), end_t - 1);
        induced.insert(std::lower_bound(induced.begin(), induced.end(), lt), lt);
        if (emit) {
          induced_events.push_back(make_app_launch(lt, nd.app, static_cast<AppCategory>(nd.cat)));
          removals.push_back(make_notification(lt, NotifAction::Remove, nd.app,
                                               static_cast<AppCategory>(nd.cat)));
        }
      } else if (bern(g, 0.5) && emit) {
        std::int64_t rt = nd.t + static_cast<std::int64_t>(urand(g, 300, 7200));
        if (rt < end_t)
          removals.push_back(make_notification(rt, NotifAction::Remove, nd.app,
                                               static_cast<AppCategory>(nd.cat)));
      }
    }
    if (emit) {
      d.streams.push_back(std::move(posts));
      d.streams.push_back(std::move(removals));
      d.streams.push_back(std::move(induced_events));
    }
  };

  std::array<std::vector<double>, kNumNotifCategories> feedback_values;
  for (auto& d : drafts) realize(d, cat_bias, 2, &feedback_values, false);
  cat_bias = solve_bias(feedback_values);

  Dataset ds;
  ds.users.reserve(drafts.size());
  for (auto& d : drafts) {
    realize(d, cat_bias, 1, nullptr, true);

    auto& tr = d.trace;
    std::size_t total = 0;
    for (auto& s : d.streams) total += s.size();
    tr.events.reserve(total);
    for (auto& s : d.streams) tr.events.insert(tr.events.end(), s.begin(), s.end());
    d.streams.clear();
    std::stable_sort(tr.events.begin(), tr.events.end(),
                     [](const SensorEvent& a, const SensorEvent& b) { return a.t < b.t; });
    ds.users.push_back(std::move(tr));
  }
  return ds;
}

// --- dataset summary -------------------------------------------------------------------

struct CategorySummary {
  AppCategory category;
  std::size_t posts = 0;
  double per_user_day_mean = 0;
  double per_user_day_sd = 0;
  double attended_pct = 0;  // share of posts attended, in percent
};

inline std::vector<CategorySummary> summarize_dataset(const Dataset& ds, int horizon_s = 600) {
  std::array<std::size_t, kNumNotifCategories> posts{}, attended{};
  std::array<std::vector<double>, kNumNotifCategories> per_user_day;

  std::int64_t t_min = std::numeric_limits<std::int64_t>::max();
  std::int64_t t_max = std::numeric_limits<std::int64_t>::min();
  for (const auto& u : ds.users) {
    if (u.events.empty()) continue;
    t_min = std::min(t_min, u.events.front().t);
    t_max = std::max(t_max, u.events.back().t);
  }
  double days = t_min > t_max ? 1.0 : std::max(1.0, std::ceil(static_cast<double>(t_max + 1 - t_min) / 86400.0));

  for (const auto& u : ds.users) {
    std::array<std::size_t, kNumNotifCategories> user_posts{};
    for (const auto& ln : label_notifications(u, horizon_s)) {
      auto c = static_cast<int>(ln.category);
      ++posts[c];
      ++user_posts[c];
      attended[c] += ln.attended;
    }
    for (int c = 0; c < kNumNotifCategories; ++c)
      per_user_day[c].push_back(static_cast<double>(user_posts[c]) / days);
  }

  std::vector<CategorySummary> out;
  for (int c = 0; c < kNumNotifCategories; ++c) {
    CategorySummary row;
    row.category = static_cast<AppCategory>(c);
    row.posts = posts[c];
    if (!per_user_day[c].empty()) {
      row.per_user_day_mean = mean(per_user_day[c]);
      row.per_user_day_sd = sample_sd(per_user_day[c]);
    }
    row.attended_pct = posts[c] ? 100.0 * static_cast<double>(attended[c]) / static_cast<double>(posts[c]) : 0.0;
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(),
            [](const CategorySummary& a, const CategorySummary& b) { return a.posts > b.posts; });
  return out;
}

}  // namespace attend
