#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "attend/pipeline.hpp"

using namespace attend;

namespace {

Dataset make_dataset(int users, int days, std::uint64_t seed) {
  GenConfig gc;
  gc.num_users = users;
  gc.num_days = days;
  gc.seed = seed;
  return generate_dataset(gc);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seed = 21;
  cfg.gen.num_users = 8;
  cfg.gen.num_days = 8;
  cfg.gbt.n_estimators = 40;
  cfg.gbt.max_depth = 3;
  cfg.rnn.embed_dim = 8;
  cfg.rnn.hidden = 12;
  cfg.rnn.max_epochs = 4;
  cfg.rnn.patience = 4;
  cfg.seq = {20, 4, 8};
  cfg.resolve();
  return cfg;
}

std::string rnn_text(const ExperimentResult& r) {
  std::ostringstream os;
  r.rnn_train.model.save(os);
  return os.str();
}

std::string gbt_text(const ExperimentResult& r) {
  std::ostringstream os;
  r.gbt_search.model.save(os);
  return os.str();
}

}  // namespace

TEST_CASE("the full pipeline trains, evaluates, and reproduces itself") {
  auto cfg = small_config();
  auto ds = make_dataset(8, 8, cfg.gen.seed);

  auto r1 = run_experiment(ds, cfg);
  const auto& sp = r1.split;

  CHECK(sp.known_users.size() == 7);
  CHECK(sp.holdout_users.size() == 1);
  CHECK(sp.t0 < sp.t_train_end);
  CHECK(sp.t_train_end < sp.t_val_end);
  CHECK(sp.t_val_end < sp.t_end);
  CHECK((sp.t_train_end - sp.t0) % 86400 == 0);
  CHECK((sp.t_val_end - sp.t0) % 86400 == 0);

  CHECK(r1.raw_samples > r1.stored_samples);
  CHECK(r1.compression_ratio > 2.0);
  CHECK(r1.schema_hash == ColumnSchema::from_inventory(default_inventory()).hash());
  CHECK(r1.manifest_hash == FeatureManifest::full().hash());
  CHECK(r1.rnn_norm.width == ColumnSchema::from_inventory(default_inventory()).width());

  for (double auc : {r1.gbt.val_auc, r1.gbt.test_auc, r1.gbt.unknown_auc, r1.rnn.val_auc,
                     r1.rnn.test_auc, r1.rnn.unknown_auc, r1.baseline.test_auc,
                     r1.baseline.unknown_auc}) {
    REQUIRE_FALSE(std::isnan(auc));
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }
  CHECK(r1.gbt.test_cells.valid_cells > 0);
  CHECK(r1.rnn.test_cells.valid_cells > 0);
  CHECK(r1.gbt_search.table.size() == 1);
  REQUIRE_FALSE(r1.rnn_train.history.empty());
  CHECK(r1.rnn.val_auc ==
        r1.rnn_train.history[static_cast<std::size_t>(r1.rnn_train.best_epoch - 1)].val_auc);
  CHECK(r1.rnn_seconds > 0.0);

  auto r2 = run_experiment(ds, cfg);
  CHECK(r1.gbt.test_auc == r2.gbt.test_auc);
  CHECK(r1.rnn.test_auc == r2.rnn.test_auc);
  CHECK(r1.baseline.test_auc == r2.baseline.test_auc);
  CHECK(r1.rnn_train.best_epoch == r2.rnn_train.best_epoch);
  CHECK(rnn_text(r1) == rnn_text(r2));
  CHECK(gbt_text(r1) == gbt_text(r2));
}

TEST_CASE("grid search explores the configured grid") {
  auto cfg = small_config();
  cfg.gbt_grid_depths = {2, 3};
  cfg.gbt_grid_subsamples = {0.8, 1.0};
  auto ds = make_dataset(8, 8, cfg.gen.seed);

  RunToggles t;
  t.train_rnn = false;
  t.run_baseline = false;
  auto res = run_experiment(ds, cfg, t);

  REQUIRE(res.gbt_search.table.size() == 4);
  bool found = false;
  double best = -1;
  for (const auto& p : res.gbt_search.table) {
    CHECK((p.max_depth == 2 || p.max_depth == 3));
    if (!std::isnan(p.val_auc)) best = std::max(best, p.val_auc);
    if (p.max_depth == res.gbt_search.best_config.max_depth &&
        p.subsample == res.gbt_search.best_config.subsample)
      found = true;
  }
  CHECK(found);
  CHECK(res.gbt_search.best_val_auc == best);
  CHECK(std::isnan(res.rnn.test_auc));
  CHECK(std::isnan(res.baseline.test_auc));
}

TEST_CASE("disabling compression stores the raw stream") {
  auto cfg = small_config();
  cfg.gen.num_users = 4;
  cfg.gen.num_days = 5;
  cfg.compress_enabled = false;
  auto ds = make_dataset(4, 5, cfg.gen.seed);

  RunToggles t;
  t.train_gbt = t.train_rnn = t.run_baseline = false;
  auto plain = run_experiment(ds, cfg, t);
  CHECK(plain.stored_samples == plain.raw_samples);
  CHECK(plain.compression_ratio == 1.0);

  cfg.compress_enabled = true;
  auto packed = run_experiment(ds, cfg, t);
  CHECK(packed.raw_samples == plain.raw_samples);
  CHECK(packed.stored_samples < packed.raw_samples);
  CHECK(packed.compression_ratio > 1.0);
}

TEST_CASE("excluding a sensor narrows the schema end to end") {
  auto cfg = small_config();
  cfg.gen.num_users = 6;
  cfg.gen.num_days = 7;
  auto ds = make_dataset(6, 7, cfg.gen.seed);

  RunToggles t;
  t.train_rnn = false;
  t.run_baseline = false;
  t.exclude = SensorKind::Screen;
  auto res = run_experiment(ds, cfg, t);

  CHECK(res.schema_hash != ColumnSchema::from_inventory(default_inventory()).hash());
  CHECK(res.schema_hash == ColumnSchema::from_inventory(inventory_without(SensorKind::Screen)).hash());
  CHECK(res.manifest_hash == FeatureManifest::without(SensorKind::Screen).hash());
  CHECK_FALSE(std::isnan(res.gbt.test_auc));

  auto reduced = FeatureManifest::without(SensorKind::Screen);
  CHECK(reduced.size() < FeatureManifest::full().size());
  CHECK(FeatureManifest::full().index_of("unlock_count_day").has_value());
  CHECK_FALSE(reduced.index_of("unlock_count_day").has_value());
}

TEST_CASE("trials rotate seeds and aggregate the metric map") {
  auto cfg = small_config();
  cfg.gen.num_users = 6;
  cfg.gen.num_days = 7;
  cfg.rnn.max_epochs = 2;
  cfg.rnn.patience = 2;
  cfg.gbt.n_estimators = 25;
  auto ds = make_dataset(6, 7, cfg.gen.seed);

  auto m0 = trial_metrics(ds, cfg, 0);
  std::vector<std::string> expected = {
      "baseline.test_auc", "baseline.unknown_auc", "compression.ratio", "gbt.test_auc",
      "gbt.unknown_auc",   "gbt.val_auc",          "rnn.best_epoch",    "rnn.test_auc",
      "rnn.unknown_auc",   "rnn.val_auc",
  };
  REQUIRE(m0.size() == expected.size());
  std::size_t i = 0;
  for (const auto& [key, value] : m0) CHECK(key == expected[i++]);

  auto m0_again = trial_metrics(ds, cfg, 0);
  CHECK(m0 == m0_again);
  auto m1 = trial_metrics(ds, cfg, 1);
  CHECK(m0 != m1);

  auto stats = run_trials(2, [&](int idx) { return trial_metrics(ds, cfg, idx); });
  REQUIRE(stats.count("gbt.test_auc") == 1);
  const auto& st = stats.at("gbt.test_auc");
  REQUIRE(st.values.size() == 2);
  CHECK(st.values[0] == m0.at("gbt.test_auc"));
  CHECK(st.values[1] == m1.at("gbt.test_auc"));
  CHECK(st.mean == Catch::Approx((st.values[0] + st.values[1]) / 2));
  CHECK(st.sd >= 0.0);
}

TEST_CASE("ablation scores the configured units against the full model") {
  auto cfg = small_config();
  cfg.gen.num_users = 6;
  cfg.gen.num_days = 7;
  cfg.gbt.n_estimators = 25;
  cfg.ablate_units = {SensorKind::Screen, SensorKind::Noise};
  cfg.ablate_seeds = 1;
  cfg.ablate_model = ExperimentConfig::AblateModel::Gbt;
  auto ds = make_dataset(6, 7, cfg.gen.seed);

  auto imps = run_ablation(ds, cfg);
  REQUIRE(imps.size() == 2);
  CHECK(imps[0].mean_delta >= imps[1].mean_delta);
  for (const auto& imp : imps) {
    CHECK((imp.kind == SensorKind::Screen || imp.kind == SensorKind::Noise));
    REQUIRE(imp.deltas.size() == 1);
    CHECK(std::isfinite(imp.deltas[0]));
    CHECK(imp.sd == 0.0);
  }
  CHECK(imps[0].kind != imps[1].kind);
}
