// Experiment runner: every stage reads files, writes files, and records a
// manifest with input hashes, the resolved config, the seed, and wall clock.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "attend/pipeline.hpp"

using namespace attend;
namespace fs = std::filesystem;

namespace {

struct Args {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string weighting;
  int seq_len = 0;
  bool no_compress = false;
  int trials = 0;

  std::string events, demographics, labels, samples, features, model, predictions;
  std::int64_t begin_t = std::numeric_limits<std::int64_t>::min();
  std::int64_t end_t = std::numeric_limits<std::int64_t>::max();
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--config", a.config_path, "experiment config file (flat key = value)");
  sub->add_option("--seed", a.seed, "override the global seed");
  sub->add_option("--weighting", a.weighting, "inv, inv-sqrt, inv-log, or uniform");
  sub->add_option("--seq-len", a.seq_len, "recurrent truncation length");
  sub->add_flag("--no-compress", a.no_compress, "keep raw samples, skip merging");
  sub->add_option("--trials", a.trials, "number of shuffle-and-split trials");
  sub->add_option("--out", a.out_dir, "output directory")->required();
}

ExperimentConfig make_config(const CLI::App* sub, const Args& a) {
  ExperimentConfig cfg;
  if (!a.config_path.empty()) {
    auto f = open_input(a.config_path);
    cfg = ExperimentConfig::load(f);
  }
  if (sub->count("--seed")) cfg.seed = a.seed;
  if (sub->count("--weighting")) {
    auto s = parse_weight_scheme(a.weighting);
    if (!s) throw ConfigError("unknown weighting scheme '" + a.weighting + "'");
    cfg.weighting = *s;
  }
  if (sub->count("--seq-len")) cfg.seq.seq_len = a.seq_len;
  if (a.no_compress) cfg.compress_enabled = false;
  if (sub->count("--trials")) cfg.trials_n = a.trials;
  cfg.resolve();
  return cfg;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

RunManifest start_manifest(const char* command, const ExperimentConfig& cfg) {
  RunManifest man(command);
  man.add("seed", std::to_string(cfg.seed));
  std::ostringstream dump;
  cfg.dump(dump);
  std::istringstream lines(dump.str());
  std::string line;
  while (std::getline(lines, line)) {
    auto eq = line.find(" = ");
    man.add("config." + line.substr(0, eq), line.substr(eq + 3));
  }
  return man;
}

void finish_manifest(RunManifest& man, const Timer& timer, const fs::path& out,
                     const char* command) {
  man.add("wall_clock_s", timer.seconds());
  auto f = open_output(out / (std::string(command) + ".manifest"));
  man.write(f);
}

Dataset load_dataset(const std::string& events, const std::string& demographics) {
  auto ef = open_input(events);
  auto ds = read_event_log(ef);
  if (!demographics.empty()) {
    auto df = open_input(demographics);
    read_demographics(df, ds);
    for (const auto& u : ds.users) {
      auto rep = validate_trace(u);
      if (!rep.ok())
        throw ValidationError("invalid trace for user " + u.user_id + ": " + rep.issues.front());
    }
  }
  return ds;
}

LabelSet load_labels(const std::string& path) {
  auto f = open_input(path);
  return read_labels(f);
}

// Rows of one user set restricted to [begin_t, end_t), keeping the manifest identity.
FeatureMatrix subset_matrix(const FeatureMatrix& m, const std::set<std::string>& users,
                            std::int64_t begin_t, std::int64_t end_t) {
  FeatureMatrix out;
  out.names = m.names;
  out.manifest_hash = m.manifest_hash;
  out.n_features = m.n_features;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto& meta = m.instances[i];
    if (!users.count(meta.user) || meta.post_t < begin_t || meta.post_t >= end_t) continue;
    out.instances.push_back(meta);
    auto row = m.row(i);
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  return out;
}

void cmd_generate(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = generate_dataset(cfg.gen);
  fs::path out(a.out_dir);

  std::size_t n_events = 0;
  for (const auto& u : ds.users) n_events += u.events.size();
  {
    auto f = open_output(out / "events.tsv");
    write_event_log(f, ds);
  }
  {
    auto f = open_output(out / "demographics.tsv");
    write_demographics(f, ds);
  }
  {
    auto f = open_output(out / "config.txt");
    cfg.dump(f);
  }

  auto man = start_manifest("generate", cfg);
  man.add("users", static_cast<std::size_t>(ds.users.size()));
  man.add("events", n_events);
  man.add_output("events", out / "events.tsv");
  man.add_output("demographics", out / "demographics.tsv");
  man.add_output("config", out / "config.txt");
  finish_manifest(man, timer, out, "generate");
}

void cmd_label(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, "");
  fs::path out(a.out_dir);

  LabelSet labels;
  std::size_t total = 0, attended = 0;
  for (const auto& u : ds.users) {
    auto ls = label_notifications(u, cfg.horizon_s);
    total += ls.size();
    for (const auto& ln : ls) attended += ln.attended;
    labels[u.user_id] = std::move(ls);
  }
  {
    auto f = open_output(out / "labels.tsv");
    write_labels(f, labels);
  }

  auto man = start_manifest("label", cfg);
  man.add_input("events", a.events);
  man.add("notifications", total);
  man.add("attended", attended);
  man.add_output("labels", out / "labels.tsv");
  finish_manifest(man, timer, out, "label");
}

void cmd_encode(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, "");
  auto labels = load_labels(a.labels);
  fs::path out(a.out_dir);

  auto schema = ColumnSchema::from_inventory(default_inventory());
  std::vector<SampleSeq> streams;
  streams.reserve(ds.users.size());
  std::size_t count = 0;
  for (const auto& u : ds.users) {
    auto it = labels.find(u.user_id);
    streams.push_back(
        encode_events(u, schema, cfg.encode, it == labels.end() ? nullptr : &it->second));
    count += streams.back().size();
  }
  std::vector<const SampleSeq*> ptrs;
  for (const auto& s : streams) ptrs.push_back(&s);
  {
    auto f = open_output(out / "samples.tsv");
    write_samples(f, ptrs, schema.hash(), schema.width());
  }

  auto man = start_manifest("encode", cfg);
  man.add_input("events", a.events);
  man.add_input("labels", a.labels);
  man.add("schema_hash", hex64(schema.hash()));
  man.add("schema_width", static_cast<std::size_t>(schema.width()));
  man.add("samples", count);
  man.add_output("samples", out / "samples.tsv");
  finish_manifest(man, timer, out, "encode");
}

void cmd_compress(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto in = open_input(a.samples);
  auto file = read_samples(in);
  fs::path out(a.out_dir);

  std::vector<SampleSeq> packed;
  packed.reserve(file.streams.size());
  std::size_t before = 0, after = 0;
  for (const auto& s : file.streams) {
    before += s.size();
    packed.push_back(compress_samples(s, cfg.compress_span_min));
    after += packed.back().size();
  }
  std::vector<const SampleSeq*> ptrs;
  for (const auto& s : packed) ptrs.push_back(&s);
  {
    auto f = open_output(out / "samples.tsv");
    write_samples(f, ptrs, file.schema_hash, file.width);
  }

  auto man = start_manifest("compress", cfg);
  man.add_input("samples", a.samples);
  man.add("samples_before", before);
  man.add("samples_after", after);
  man.add("reduction_factor",
          after == 0 ? 1.0 : static_cast<double>(before) / static_cast<double>(after));
  man.add_output("samples", out / "samples.tsv");
  finish_manifest(man, timer, out, "compress");
}

void cmd_features(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, a.demographics);
  auto labels = load_labels(a.labels);
  fs::path out(a.out_dir);

  auto manifest = FeatureManifest::full();
  std::vector<LabeledUser> lus;
  for (const auto& u : ds.users) {
    auto it = labels.find(u.user_id);
    if (it != labels.end()) lus.push_back({&u, &it->second});
  }
  auto m = extract_matrix(lus, manifest);
  {
    auto f = open_output(out / "features.tsv");
    write_features(f, m);
  }

  auto man = start_manifest("features", cfg);
  man.add_input("events", a.events);
  man.add_input("demographics", a.demographics);
  man.add_input("labels", a.labels);
  man.add("manifest_hash", hex64(manifest.hash()));
  man.add("rows", m.rows());
  man.add("columns", m.n_features);
  man.add_output("features", out / "features.tsv");
  finish_manifest(man, timer, out, "features");
}

void cmd_train_gbt(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, "");
  auto labels = load_labels(a.labels);
  auto ff = open_input(a.features);
  auto fm = read_features(ff);
  fs::path out(a.out_dir);

  auto sp = split_dataset(ds, cfg.split);
  std::set<std::string> known(sp.known_users.begin(), sp.known_users.end());
  auto train_m = subset_matrix(fm, known, sp.t0, sp.t_train_end);
  auto val_m = subset_matrix(fm, known, sp.t_train_end, sp.t_val_end);
  if (train_m.rows() == 0) throw ValidationError("no training rows inside the training window");

  FrequencyTable table;
  for (const auto& user : sp.known_users) {
    auto it = labels.find(user);
    if (it == labels.end()) continue;
    for (const auto& ln : it->second)
      if (ln.post_t < sp.t_train_end) table.add(ln.attended, user, ln.category);
  }
  auto w = pipeline_detail::row_weights(train_m, table, cfg.weighting);

  auto depths =
      cfg.gbt_grid_depths.empty() ? std::vector<int>{cfg.gbt.max_depth} : cfg.gbt_grid_depths;
  auto subs = cfg.gbt_grid_subsamples.empty() ? std::vector<double>{cfg.gbt.subsample}
                                              : cfg.gbt_grid_subsamples;
  auto grid = grid_search_gbt(train_m, w, val_m, cfg.gbt, depths, subs);
  {
    auto f = open_output(out / "gbt-model.txt");
    grid.model.save(f);
  }

  auto man = start_manifest("train-gbt", cfg);
  man.add_input("events", a.events);
  man.add_input("labels", a.labels);
  man.add_input("features", a.features);
  man.add("train_rows", train_m.rows());
  man.add("val_rows", val_m.rows());
  man.add("best_depth", grid.best_config.max_depth);
  man.add("best_subsample", grid.best_config.subsample);
  man.add("val_auc", grid.best_val_auc);
  man.add("t_train_end", sp.t_train_end);
  man.add("t_val_end", sp.t_val_end);
  man.add("t_end", sp.t_end);
  man.add_output("model", out / "gbt-model.txt");
  finish_manifest(man, timer, out, "train-gbt");
}

void cmd_predict_gbt(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto mf = open_input(a.model);
  auto model = GbtModel::load(mf);
  auto ff = open_input(a.features);
  auto fm = read_features(ff);
  fs::path out(a.out_dir);

  auto scores = model.predict_matrix(fm);
  std::vector<PredictionRow> rows;
  rows.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& meta = fm.instances[i];
    rows.push_back({meta.user, meta.post_t, meta.category, meta.y, scores[i]});
  }
  {
    auto f = open_output(out / "predictions.tsv");
    write_predictions(f, rows);
  }

  auto man = start_manifest("predict-gbt", cfg);
  man.add_input("model", a.model);
  man.add_input("features", a.features);
  man.add("rows", rows.size());
  man.add_output("predictions", out / "predictions.tsv");
  finish_manifest(man, timer, out, "predict-gbt");
}

void cmd_train_rnn(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, "");
  auto labels = load_labels(a.labels);
  fs::path out(a.out_dir);

  auto sp = split_dataset(ds, cfg.split);

  std::map<std::string, SampleSeq> streams;
  std::uint64_t schema_hash = 0;
  std::uint32_t width = 0;
  std::size_t raw_count = 0, stored_count = 0;
  bool internal = a.samples.empty();
  if (internal) {
    auto schema = ColumnSchema::from_inventory(default_inventory());
    schema_hash = schema.hash();
    width = schema.width();
    for (const auto& u : ds.users) {
      auto it = labels.find(u.user_id);
      auto raw =
          encode_events(u, schema, cfg.encode, it == labels.end() ? nullptr : &it->second);
      raw_count += raw.size();
      auto stored = cfg.compress_enabled ? compress_samples(raw, cfg.compress_span_min)
                                         : std::move(raw);
      stored_count += stored.size();
      streams[u.user_id] = std::move(stored);
    }
    std::vector<const SampleSeq*> ptrs;
    for (const auto& u : ds.users) ptrs.push_back(&streams.at(u.user_id));
    auto f = open_output(out / "samples.tsv");
    write_samples(f, ptrs, schema_hash, width);
  } else {
    auto in = open_input(a.samples);
    auto file = read_samples(in);
    schema_hash = file.schema_hash;
    width = file.width;
    for (auto& s : file.streams) {
      stored_count += s.size();
      streams[s.user_id] = std::move(s);
    }
  }

  std::vector<const SampleSeq*> known_ptrs;
  for (const auto& user : sp.known_users) {
    auto it = streams.find(user);
    if (it == streams.end()) throw ValidationError("no sample stream for user " + user);
    known_ptrs.push_back(&it->second);
  }
  auto freq = build_frequency_table(known_ptrs, sp.t_train_end);
  for (const auto& user : sp.known_users)
    apply_weights(streams.at(user), freq, cfg.weighting, sp.t_train_end);

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

  auto norm = fit_normalization(train_ptrs, width, cfg.norm);
  Timer train_timer;
  auto res =
      train_rnn(train_ptrs, val_ptrs, norm, schema_hash, sp.t_train_end, sp.t_val_end, cfg.rnn);
  double train_seconds = train_timer.seconds();
  {
    auto f = open_output(out / "rnn-model.txt");
    res.model.save(f);
  }

  auto man = start_manifest("train-rnn", cfg);
  man.add_input("events", a.events);
  man.add_input("labels", a.labels);
  if (!internal) man.add_input("samples", a.samples);
  man.add("schema_hash", hex64(schema_hash));
  if (internal) {
    man.add("samples_before", raw_count);
    man.add("samples_after", stored_count);
    man.add("reduction_factor", stored_count == 0 ? 1.0
                                                  : static_cast<double>(raw_count) /
                                                        static_cast<double>(stored_count));
  } else {
    man.add("samples_stored", stored_count);
  }
  man.add("epochs_run", res.history.size());
  man.add("best_epoch", res.best_epoch);
  double val_auc = res.history.empty()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : res.history[static_cast<std::size_t>(res.best_epoch - 1)].val_auc;
  man.add("val_auc", val_auc);
  man.add("train_seconds", train_seconds);
  man.add("t_train_end", sp.t_train_end);
  man.add("t_val_end", sp.t_val_end);
  man.add("t_end", sp.t_end);
  if (internal) man.add_output("samples", out / "samples.tsv");
  man.add_output("model", out / "rnn-model.txt");
  finish_manifest(man, timer, out, "train-rnn");
}

void cmd_predict_rnn(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto mf = open_input(a.model);
  auto model = RnnModel::load(mf);
  auto in = open_input(a.samples);
  auto file = read_samples(in);
  fs::path out(a.out_dir);

  if (file.schema_hash != model.schema_hash)
    throw SchemaError("sample schema does not match the trained model");

  std::vector<PredictionRow> rows;
  for (const auto& s : file.streams)
    for (const auto& pr : model.predict_stream(s)) {
      auto r = s.ref(pr.index);
      rows.push_back(
          {s.user_id, r.t, static_cast<AppCategory>(r.category), r.y, pr.proba});
    }
  {
    auto f = open_output(out / "predictions.tsv");
    write_predictions(f, rows);
  }

  auto man = start_manifest("predict-rnn", cfg);
  man.add_input("model", a.model);
  man.add_input("samples", a.samples);
  man.add("rows", rows.size());
  man.add_output("predictions", out / "predictions.tsv");
  finish_manifest(man, timer, out, "predict-rnn");
}

void cmd_evaluate(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto pf = open_input(a.predictions);
  auto rows = read_predictions(pf);
  fs::path out(a.out_dir);

  auto recs = to_pred_records(rows, a.begin_t, a.end_t);
  auto agg = aggregate_predictions(recs);
  {
    auto f = open_output(out / "cells.tsv");
    write_cells_report(f, agg);
  }
  {
    auto f = open_output(out / "roc.tsv");
    write_roc_report(f, recs);
  }

  auto man = start_manifest("evaluate", cfg);
  man.add_input("predictions", a.predictions);
  man.add("rows_scored", recs.size());
  man.add("mean_auc", agg.mean_auc);
  man.add("valid_cells", agg.valid_cells);
  man.add("skipped_cells", agg.skipped_cells);
  man.add_output("cells", out / "cells.tsv");
  man.add_output("roc", out / "roc.tsv");
  finish_manifest(man, timer, out, "evaluate");
}

void cmd_trials(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, a.demographics);
  fs::path out(a.out_dir);

  auto stats =
      run_trials(cfg.trials_n, [&](int i) { return trial_metrics(ds, cfg, i); });
  {
    auto f = open_output(out / "trials.tsv");
    write_trials_report(f, stats);
  }

  auto man = start_manifest("trials", cfg);
  man.add_input("events", a.events);
  man.add_input("demographics", a.demographics);
  man.add("trials", cfg.trials_n);
  for (const auto& [key, st] : stats) man.add("mean." + key, st.mean);
  man.add_output("trials", out / "trials.tsv");
  finish_manifest(man, timer, out, "trials");
}

void cmd_ablate(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ds = load_dataset(a.events, a.demographics);
  fs::path out(a.out_dir);

  auto imps = run_ablation(ds, cfg);
  {
    auto f = open_output(out / "ablation.tsv");
    write_ablation_report(f, imps);
  }

  auto man = start_manifest("ablate", cfg);
  man.add_input("events", a.events);
  man.add_input("demographics", a.demographics);
  man.add("units", imps.size());
  man.add("seeds", cfg.ablate_seeds);
  man.add("model", cfg.ablate_model == ExperimentConfig::AblateModel::Rnn ? "rnn" : "gbt");
  for (const auto& imp : imps)
    man.add("delta." + std::string(sensor_name(imp.kind)), imp.mean_delta);
  man.add_output("ablation", out / "ablation.tsv");
  finish_manifest(man, timer, out, "ablate");
}

void cmd_report(const ExperimentConfig& cfg, const Args& a) {
  Timer timer;
  auto ff = open_input(a.features);
  auto fm = read_features(ff);
  fs::path out(a.out_dir);

  auto stats = feature_distribution(fm);
  {
    auto f = open_output(out / "feature-distribution.tsv");
    write_feature_distribution(f, stats);
  }

  auto man = start_manifest("report", cfg);
  man.add_input("features", a.features);
  man.add("rows", fm.rows());
  man.add("features_summarized", fm.n_features);
  man.add_output("feature_distribution", out / "feature-distribution.tsv");
  finish_manifest(man, timer, out, "report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"notification attendance pipeline"};
  app.require_subcommand(1);
  Args a;

  auto* generate = app.add_subcommand("generate", "synthesize an event log and demographics");
  add_common(generate, a);

  auto* label = app.add_subcommand("label", "derive attendance labels from an event log");
  add_common(label, a);
  label->add_option("--events", a.events, "event log")->required();

  auto* encode = app.add_subcommand("encode", "encode events into sparse sample streams");
  add_common(encode, a);
  encode->add_option("--events", a.events, "event log")->required();
  encode->add_option("--labels", a.labels, "labels file")->required();

  auto* compress = app.add_subcommand("compress", "merge sparse samples opportunistically");
  add_common(compress, a);
  compress->add_option("--samples", a.samples, "sample streams")->required();

  auto* features = app.add_subcommand("features", "extract windowed classical features");
  add_common(features, a);
  features->add_option("--events", a.events, "event log")->required();
  features->add_option("--demographics", a.demographics, "demographics file")->required();
  features->add_option("--labels", a.labels, "labels file")->required();

  auto* train_gbt = app.add_subcommand("train-gbt", "train the boosted tree model");
  add_common(train_gbt, a);
  train_gbt->add_option("--events", a.events, "event log (defines the split)")->required();
  train_gbt->add_option("--labels", a.labels, "labels file")->required();
  train_gbt->add_option("--features", a.features, "feature matrix")->required();

  auto* predict_gbt = app.add_subcommand("predict-gbt", "score a feature matrix");
  add_common(predict_gbt, a);
  predict_gbt->add_option("--model", a.model, "trained boosted tree model")->required();
  predict_gbt->add_option("--features", a.features, "feature matrix")->required();

  auto* train_rnn = app.add_subcommand("train-rnn", "train the recurrent model");
  add_common(train_rnn, a);
  train_rnn->add_option("--events", a.events, "event log (defines the split)")->required();
  train_rnn->add_option("--labels", a.labels, "labels file")->required();
  train_rnn->add_option("--samples", a.samples, "precomputed sample streams (else encoded here)");

  auto* predict_rnn = app.add_subcommand("predict-rnn", "score sample streams");
  add_common(predict_rnn, a);
  predict_rnn->add_option("--model", a.model, "trained recurrent model")->required();
  predict_rnn->add_option("--samples", a.samples, "sample streams")->required();

  auto* evaluate = app.add_subcommand("evaluate", "aggregate predictions into AUC reports");
  add_common(evaluate, a);
  evaluate->add_option("--predictions", a.predictions, "prediction file")->required();
  evaluate->add_option("--begin", a.begin_t, "keep predictions at or after this time");
  evaluate->add_option("--end", a.end_t, "keep predictions before this time");

  auto* trials = app.add_subcommand("trials", "shuffle-and-split trials over the full pipeline");
  add_common(trials, a);
  trials->add_option("--events", a.events, "event log")->required();
  trials->add_option("--demographics", a.demographics, "demographics file")->required();

  auto* ablate = app.add_subcommand("ablate", "retrain with one sensor removed at a time");
  add_common(ablate, a);
  ablate->add_option("--events", a.events, "event log")->required();
  ablate->add_option("--demographics", a.demographics, "demographics file")->required();

  auto* report = app.add_subcommand("report", "class-conditional feature distributions");
  add_common(report, a);
  report->add_option("--features", a.features, "feature matrix")->required();

  generate->callback([&] { cmd_generate(make_config(generate, a), a); });
  label->callback([&] { cmd_label(make_config(label, a), a); });
  encode->callback([&] { cmd_encode(make_config(encode, a), a); });
  compress->callback([&] { cmd_compress(make_config(compress, a), a); });
  features->callback([&] { cmd_features(make_config(features, a), a); });
  train_gbt->callback([&] { cmd_train_gbt(make_config(train_gbt, a), a); });
  predict_gbt->callback([&] { cmd_predict_gbt(make_config(predict_gbt, a), a); });
  train_rnn->callback([&] { cmd_train_rnn(make_config(train_rnn, a), a); });
  predict_rnn->callback([&] { cmd_predict_rnn(make_config(predict_rnn, a), a); });
  evaluate->callback([&] { cmd_evaluate(make_config(evaluate, a), a); });
  trials->callback([&] { cmd_trials(make_config(trials, a), a); });
  ablate->callback([&] { cmd_ablate(make_config(ablate, a), a); });
  report->callback([&] { cmd_report(make_config(report, a), a); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const MissingInputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
