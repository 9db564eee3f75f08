#pragma once

#include <chrono>

#include "attend/config.hpp"
#include "attend/io.hpp"

namespace attend {

// Per-call switches for run_experiment: which models to train and which
// sensor unit (if any) to remove end to end.
struct RunToggles {
  bool train_gbt = true;
  bool train_rnn = true;
  bool run_baseline = true;
  std::optional<SensorKind> exclude;
};

struct ModelEval {
  double val_auc = std::numeric_limits<double>::quiet_NaN();
  double test_auc = std::numeric_limits<double>::quiet_NaN();
  double unknown_auc = std::numeric_limits<double>::quiet_NaN();
  AggregateResult test_cells;
  AggregateResult unknown_cells;
};

struct ExperimentResult {
  SplitResult split;
  std::size_t raw_samples = 0;     // encoded samples before compression
  std::size_t stored_samples = 0;  // after compression (equal when disabled)
  double compression_ratio = 1.0;

  ModelEval gbt, rnn, baseline;
  GbtGridResult gbt_search;        // trained model, chosen config, grid table
  RnnTrainResult rnn_train;        // trained model, epoch history
  NormalizationStats rnn_norm;
  double rnn_seconds = 0;          // wall clock spent inside train_rnn
  std::uint64_t schema_hash = 0;
  std::uint64_t manifest_hash = 0;
};

namespace pipeline_detail {

// Labeled notifications of one window as prediction records (scores unset).
inline std::vector<PredRecord> window_records(const LabelSet& labels,
                                              const std::vector<std::string>& users,
                                              std::int64_t begin_t, std::int64_t end_t) {
  std::vector<PredRecord> out;
  for (const auto& user : users) {
    auto it = labels.find(user);
    if (it == labels.end()) continue;
    for (const auto& ln : it->second)
      if (ln.post_t >= begin_t && ln.post_t < end_t)
        out.push_back({user, ln.category, static_cast<std::int8_t>(ln.attended ? 1 : 0), 0.0});
  }
  return out;
}

// Labels of one user restricted to [begin_t, end_t).
inline std::vector<LabeledNotification> window_labels(const std::vector<LabeledNotification>& all,
                                                      std::int64_t begin_t, std::int64_t end_t) {
  std::vector<LabeledNotification> out;
  for (const auto& ln : all)
    if (ln.post_t >= begin_t && ln.post_t < end_t) out.push_back(ln);
  return out;
}

inline FeatureMatrix window_matrix(const Dataset& ds, const LabelSet& labels,
                                   const std::vector<std::string>& users,
                                   const FeatureManifest& manifest, std::int64_t begin_t,
                                   std::int64_t end_t) {
  std::map<std::string, const UserTrace*> traces;
  for (const auto& u : ds.users) traces[u.user_id] = &u;
  std::vector<std::vector<LabeledNotification>> windows;
  std::vector<LabeledUser> lus;
  windows.reserve(users.size());
  for (const auto& user : users) {
    auto lit = labels.find(user);
    auto tit = traces.find(user);
    if (lit == labels.end() || tit == traces.end()) continue;
    windows.push_back(window_labels(lit->second, begin_t, end_t));
    lus.push_back({tit->second, &windows.back()});
  }
  return extract_matrix(lus, manifest);
}

inline std::vector<double> row_weights(const FeatureMatrix& m, const FrequencyTable& table,
                                       WeightScheme scheme) {
  std::vector<double> w;
  w.reserve(m.rows());
  for (const auto& meta : m.instances)
    w.push_back(instance_weight(scheme, table.count(meta.y == 1, meta.user, meta.category)));
  return w;
}

}  // namespace pipeline_detail

// The full experiment on an in-memory dataset: label, split, encode (and
// optionally compress), weight, train the requested models, and evaluate on
// the known-user test window plus the held-out unknown users.
inline ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg,
                                       const RunToggles& toggles = {}) {
  using pipeline_detail::window_records;
  ExperimentResult res;

  LabelSet labels;
  for (const auto& u : ds.users) labels[u.user_id] = label_notifications(u, cfg.horizon_s);

  res.split = split_dataset(ds, cfg.split);
  const auto& sp = res.split;

  auto inventory = toggles.exclude ? inventory_without(*toggles.exclude) : default_inventory();
  auto schema = ColumnSchema::from_inventory(inventory);
  res.schema_hash = schema.hash();

  // --- event streams (shared by weighting and the recurrent model) ---
  std::map<std::string, SampleSeq> streams;
  for (const auto& u : ds.users) {
    auto raw = encode_events(u, schema, cfg.encode, &labels[u.user_id]);
    res.raw_samples += raw.size();
    if (cfg.compress_enabled) {
      auto packed = compress_samples(raw, cfg.compress_span_min);
      res.stored_samples += packed.size();
      streams[u.user_id] = std::move(packed);
    } else {
      res.stored_samples += raw.size();
      streams[u.user_id] = std::move(raw);
    }
  }
  res.compression_ratio = res.stored_samples == 0
                              ? 1.0
                              : static_cast<double>(res.raw_samples) /
                                    static_cast<double>(res.stored_samples);

  std::vector<const SampleSeq*> known_streams;
  for (const auto& user : sp.known_users) known_streams.push_back(&streams.at(user));

  auto freq = build_frequency_table(known_streams, sp.t_train_end);
  for (const auto& user : sp.known_users)
    apply_weights(streams.at(user), freq, cfg.weighting, sp.t_train_end);

  // --- recurrent model ---
  if (toggles.train_rnn) {
    std::vector<SampleSeq> train_slices, val_slices;
    for (const auto& user : sp.known_users) {
      auto tr = slice_stream(streams.at(user), sp.t_train_end);
      if (!tr.empty()) train_slices.push_back(std::move(tr));
      auto va = slice_stream(streams.at(user), sp.t_val_end);
      if (!va.empty()) val_slices.push_back(std::move(va));
    }
    std::vector<const SampleSeq*> train_ptrs, val_ptrs;
    for (const auto& s : train_slices) train_ptrs.push_back(&s);
    for (const auto& s : val_slices) val_ptrs.push_back(&s);

    std::vector<const SampleSeq*> norm_ptrs = train_ptrs;
    res.rnn_norm = fit_normalization(norm_ptrs, schema.width(), cfg.norm);

    auto started = std::chrono::steady_clock::now();
    res.rnn_train = train_rnn(train_ptrs, val_ptrs, res.rnn_norm, schema.hash(), sp.t_train_end,
                              sp.t_val_end, cfg.rnn);
    res.rnn_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    res.rnn.val_auc = res.rnn_train.history.empty()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : res.rnn_train.history[static_cast<std::size_t>(res.rnn_train.best_epoch - 1)].val_auc;

    auto score_streams = [&](const std::vector<std::string>& users) {
      std::vector<PredRecord> recs;
      for (const auto& user : users) {
        const auto& s = streams.at(user);
        if (s.empty()) continue;
        for (const auto& pr : res.rnn_train.model.predict_stream(s)) {
          auto r = s.ref(pr.index);
          if (r.t >= sp.t_val_end && r.t < sp.t_end)
            recs.push_back({user, static_cast<AppCategory>(r.category), r.y, pr.proba});
        }
      }
      return recs;
    };
    res.rnn.test_cells = aggregate_predictions(score_streams(sp.known_users));
    res.rnn.test_auc = res.rnn.test_cells.mean_auc;
    res.rnn.unknown_cells = aggregate_predictions(score_streams(sp.holdout_users));
    res.rnn.unknown_auc = res.rnn.unknown_cells.mean_auc;
  }

  // --- boosted trees on windowed features ---
  if (toggles.train_gbt) {
    auto manifest = FeatureManifest::without(toggles.exclude);
    res.manifest_hash = manifest.hash();
    using pipeline_detail::window_matrix;
    auto train_m = window_matrix(ds, labels, sp.known_users, manifest, sp.t0, sp.t_train_end);
    auto val_m = window_matrix(ds, labels, sp.known_users, manifest, sp.t_train_end, sp.t_val_end);
    auto test_m = window_matrix(ds, labels, sp.known_users, manifest, sp.t_val_end, sp.t_end);
    auto unknown_m = window_matrix(ds, labels, sp.holdout_users, manifest, sp.t_val_end, sp.t_end);

    auto w = pipeline_detail::row_weights(train_m, freq, cfg.weighting);
    auto depths = cfg.gbt_grid_depths.empty() ? std::vector<int>{cfg.gbt.max_depth}
                                              : cfg.gbt_grid_depths;
    auto subs = cfg.gbt_grid_subsamples.empty() ? std::vector<double>{cfg.gbt.subsample}
                                                : cfg.gbt_grid_subsamples;
    res.gbt_search = grid_search_gbt(train_m, w, val_m, cfg.gbt, depths, subs);
    res.gbt.val_auc = res.gbt_search.best_val_auc;

    res.gbt.test_cells = aggregate_predictions(predict_records(res.gbt_search.model, test_m));
    res.gbt.test_auc = res.gbt.test_cells.mean_auc;
    res.gbt.unknown_cells = aggregate_predictions(predict_records(res.gbt_search.model, unknown_m));
    res.gbt.unknown_auc = res.gbt.unknown_cells.mean_auc;
  }

  // --- probability-matched random baseline ---
  if (toggles.run_baseline) {
    auto train_recs = window_records(labels, sp.known_users, sp.t0, sp.t_train_end);
    if (!train_recs.empty()) {
      BaselineModel base;
      base.fit(train_recs);

      auto val_recs = window_records(labels, sp.known_users, sp.t_train_end, sp.t_val_end);
      base.score(val_recs.begin(), val_recs.end(), subseed(cfg.baseline_seed, 1));
      res.baseline.val_auc = aggregate_predictions(val_recs).mean_auc;

      auto test_recs = window_records(labels, sp.known_users, sp.t_val_end, sp.t_end);
      base.score(test_recs.begin(), test_recs.end(), subseed(cfg.baseline_seed, 2));
      res.baseline.test_cells = aggregate_predictions(test_recs);
      res.baseline.test_auc = res.baseline.test_cells.mean_auc;

      auto unk_recs = window_records(labels, sp.holdout_users, sp.t_val_end, sp.t_end);
      base.score(unk_recs.begin(), unk_recs.end(), subseed(cfg.baseline_seed, 3));
      res.baseline.unknown_cells = aggregate_predictions(unk_recs);
      res.baseline.unknown_auc = res.baseline.unknown_cells.mean_auc;
    }
  }

  return res;
}

// One shuffle-and-split trial: stage seeds re-derived from the trial index,
// fresh user holdout, full pipeline, flat metric map for run_trials.
inline std::map<std::string, double> trial_metrics(const Dataset& ds, const ExperimentConfig& cfg,
                                                   int trial_index,
                                                   const RunToggles& toggles = {}) {
  ExperimentConfig c = cfg;
  auto i = static_cast<std::uint64_t>(trial_index);
  c.split.seed = subseed(cfg.seed, kSeedTrial, i, kSeedSplit);
  c.gbt.seed = subseed(cfg.seed, kSeedTrial, i, kSeedGbt);
  c.rnn.seed = subseed(cfg.seed, kSeedTrial, i, kSeedRnn);
  c.baseline_seed = subseed(cfg.seed, kSeedTrial, i, kSeedBaseline);
  auto res = run_experiment(ds, c, toggles);

  std::map<std::string, double> m;
  m["compression.ratio"] = res.compression_ratio;
  if (toggles.train_gbt) {
    m["gbt.val_auc"] = res.gbt.val_auc;
    m["gbt.test_auc"] = res.gbt.test_auc;
    m["gbt.unknown_auc"] = res.gbt.unknown_auc;
  }
  if (toggles.train_rnn) {
    m["rnn.val_auc"] = res.rnn.val_auc;
    m["rnn.test_auc"] = res.rnn.test_auc;
    m["rnn.unknown_auc"] = res.rnn.unknown_auc;
    m["rnn.best_epoch"] = res.rnn_train.best_epoch;
  }
  if (toggles.run_baseline) {
    m["baseline.test_auc"] = res.baseline.test_auc;
    m["baseline.unknown_auc"] = res.baseline.unknown_auc;
  }
  return m;
}

// Test AUC of one model trained with `exclude` removed, under per-seed stage
// seeds; the eval_fn of sensor_importance.
inline double ablation_eval(const Dataset& ds, const ExperimentConfig& cfg,
                            ExperimentConfig::AblateModel model,
                            std::optional<SensorKind> exclude, std::uint64_t seed) {
  ExperimentConfig c = cfg;
  c.split.seed = subseed(cfg.seed, kSeedAblate, seed, kSeedSplit);
  c.gbt.seed = subseed(cfg.seed, kSeedAblate, seed, kSeedGbt);
  c.rnn.seed = subseed(cfg.seed, kSeedAblate, seed, kSeedRnn);
  RunToggles t;
  t.exclude = exclude;
  t.run_baseline = false;
  t.train_gbt = model == ExperimentConfig::AblateModel::Gbt;
  t.train_rnn = model == ExperimentConfig::AblateModel::Rnn;
  auto res = run_experiment(ds, c, t);
  return t.train_rnn ? res.rnn.test_auc : res.gbt.test_auc;
}

// Retrain-with-one-unit-removed importances over the configured units and
// seed count.
inline std::vector<SensorImportance> run_ablation(const Dataset& ds, const ExperimentConfig& cfg) {
  std::vector<SensorKind> units = cfg.ablate_units;
  if (units.empty())
    for (int i = 0; i < kNumSensorKinds; ++i) units.push_back(static_cast<SensorKind>(i));
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.ablate_seeds; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  return sensor_importance(units, seeds,
                           [&](std::optional<SensorKind> ex, std::uint64_t s) {
                             return ablation_eval(ds, cfg, cfg.ablate_model, ex, s);
                           });
}

}  // namespace attend
