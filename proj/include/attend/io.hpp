#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include "attend/encode.hpp"
#include "attend/eval.hpp"
#include "attend/events.hpp"
#include "attend/features.hpp"

namespace attend {

// An input path that does not exist or cannot be opened. Kept distinct from
// IoError so the command line can map it to its own exit code.
struct MissingInputError : IoError {
  using IoError::IoError;
};

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw MissingInputError("cannot open input: " + p.string());
  return f;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(p);
  if (!f) throw IoError("cannot open output: " + p.string());
  return f;
}

namespace io_detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline std::int64_t parse_i64(const std::string& s, const char* what) {
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw IoError(strfmt("bad %s: '%s'", what, s.c_str()));
  }
  if (pos != s.size()) throw IoError(strfmt("bad %s: '%s'", what, s.c_str()));
  return v;
}

inline double parse_f64(const std::string& s, const char* what) {
  const char* c = s.c_str();
  char* end = nullptr;
  double v = std::strtod(c, &end);
  if (end != c + s.size() || s.empty()) throw IoError(strfmt("bad %s: '%s'", what, s.c_str()));
  return v;
}

inline void require_header(std::istream& is, std::string_view expected) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty file, expected header");
  if (line != expected)
    throw SchemaError(strfmt("bad header '%s', expected '%s'", line.c_str(),
                             std::string(expected).c_str()));
}

}  // namespace io_detail

// --- event log --------------------------------------------------------------------
//
// Line-oriented text, one event per line:
//   user_id <tab> timestamp_s <tab> sensor_kind <tab> key=value ...
// Numeric payloads use the per-kind keys from kind_spec, categorical payloads
// their label strings, app ids the key "app".

inline constexpr std::string_view kEventLogHeader = "#attend events v1";
inline constexpr std::string_view kDemographicsHeader = "#attend demographics v1";

inline void write_event(std::ostream& os, const std::string& user, const SensorEvent& e) {
  os << user << '\t' << e.t << '\t' << sensor_name(e.kind);
  const auto& spec = kind_spec(e.kind);
  for (std::size_t s = 0; s < spec.num_keys.size(); ++s)
    os << '\t' << spec.num_keys[s] << '=' << strfmt("%.9g", static_cast<double>(e.num[s]));
  for (std::size_t s = 0; s < spec.cat_slots.size(); ++s) {
    int v = e.cat[s];
    if (v < 0) continue;  // optional slot left empty
    os << '\t' << spec.cat_slots[s].key << '=' << spec.cat_slots[s].labels[static_cast<std::size_t>(v)];
  }
  if (spec.has_app) os << '\t' << "app=" << e.app;
  os << '\n';
}

inline void write_event_log(std::ostream& os, const Dataset& ds) {
  os << kEventLogHeader << '\n';
  for (const auto& u : ds.users)
    for (const auto& e : u.events) write_event(os, u.user_id, e);
  if (!os) throw IoError("failed to write event log");
}

inline Dataset read_event_log(std::istream& is) {
  io_detail::require_header(is, kEventLogHeader);
  Dataset ds;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = io_detail::split_tabs(line);
    if (fields.size() < 3)
      throw IoError(strfmt("line %zu: expected at least 3 tab-separated fields", lineno));
    auto kind = parse_sensor_kind(fields[2]);
    if (!kind) throw SchemaError(strfmt("line %zu: unknown sensor kind '%s'", lineno, fields[2].c_str()));

    auto [it, inserted] = index.try_emplace(fields[0], ds.users.size());
    if (inserted) {
      ds.users.emplace_back();
      ds.users.back().user_id = fields[0];
    }
    auto& trace = ds.users[it->second];

    SensorEvent e;
    e.t = io_detail::parse_i64(fields[1], "timestamp");
    e.kind = *kind;
    const auto& spec = kind_spec(e.kind);
    for (std::size_t f = 3; f < fields.size(); ++f) {
      auto eq = fields[f].find('=');
      if (eq == std::string::npos) {
        trace.stray_payload.emplace_back(trace.events.size(), fields[f]);
        continue;
      }
      auto key = fields[f].substr(0, eq);
      auto value = fields[f].substr(eq + 1);
      bool known = false;
      for (std::size_t s = 0; s < spec.num_keys.size(); ++s)
        if (spec.num_keys[s] == key) {
          e.num[s] = static_cast<float>(io_detail::parse_f64(value, "payload value"));
          known = true;
          break;
        }
      if (!known)
        for (std::size_t s = 0; s < spec.cat_slots.size(); ++s) {
          const auto& cs = spec.cat_slots[s];
          if (cs.key != key) continue;
          known = true;
          bool matched = false;
          for (std::size_t l = 0; l < cs.labels.size(); ++l)
            if (cs.labels[l] == value) {
              e.cat[s] = static_cast<std::int8_t>(l);
              matched = true;
              break;
            }
          if (!matched)
            throw SchemaError(strfmt("line %zu: bad %s value '%s'", lineno, key.c_str(), value.c_str()));
          break;
        }
      if (!known && spec.has_app && key == "app") {
        e.app = value;
        known = true;
      }
      if (!known) trace.stray_payload.emplace_back(trace.events.size(), fields[f]);
    }
    trace.events.push_back(std::move(e));
  }
  return ds;
}

inline void write_demographics(std::ostream& os, const Dataset& ds) {
  os << kDemographicsHeader << '\n';
  for (const auto& u : ds.users)
    os << u.user_id << '\t' << u.age << '\t' << gender_name(u.gender) << '\n';
  if (!os) throw IoError("failed to write demographics");
}

// Fills age and gender on already-read traces; a row naming an unknown user
// means mismatched files and is an error.
inline void read_demographics(std::istream& is, Dataset& ds) {
  io_detail::require_header(is, kDemographicsHeader);
  std::map<std::string_view, UserTrace*> index;
  for (auto& u : ds.users) index[u.user_id] = &u;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 3) throw IoError(strfmt("line %zu: expected user, age, gender", lineno));
    auto it = index.find(fields[0]);
    if (it == index.end())
      throw ValidationError(strfmt("line %zu: demographics for unknown user '%s'", lineno,
                                   fields[0].c_str()));
    it->second->age = static_cast<int>(io_detail::parse_i64(fields[1], "age"));
    if (fields[2] == "female")
      it->second->gender = Gender::Female;
    else if (fields[2] == "male")
      it->second->gender = Gender::Male;
    else
      throw SchemaError(strfmt("line %zu: bad gender '%s'", lineno, fields[2].c_str()));
  }
}

// --- ground-truth labels ------------------------------------------------------------

inline constexpr std::string_view kLabelsHeader = "#attend labels v1";

using LabelSet = std::map<std::string, std::vector<LabeledNotification>>;

inline void write_labels(std::ostream& os, const LabelSet& labels) {
  os << kLabelsHeader << '\n';
  os << "user\tpost_t\tapp\tcategory\tattended\ttruncation_risky\n";
  for (const auto& [user, list] : labels)
    for (const auto& ln : list)
      os << user << '\t' << ln.post_t << '\t' << ln.app << '\t' << category_name(ln.category)
         << '\t' << (ln.attended ? 1 : 0) << '\t' << (ln.truncation_risky ? 1 : 0) << '\n';
  if (!os) throw IoError("failed to write labels");
}

inline LabelSet read_labels(std::istream& is) {
  io_detail::require_header(is, kLabelsHeader);
  std::string line;
  if (!std::getline(is, line)) throw IoError("labels file missing column header");
  LabelSet out;
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 6) throw IoError(strfmt("line %zu: expected 6 label fields", lineno));
    LabeledNotification ln;
    ln.post_t = io_detail::parse_i64(fields[1], "post time");
    ln.app = fields[2];
    auto cat = parse_category(fields[3]);
    if (!cat) throw SchemaError(strfmt("line %zu: unknown category '%s'", lineno, fields[3].c_str()));
    ln.category = *cat;
    ln.attended = fields[4] == "1";
    ln.truncation_risky = fields[5] == "1";
    out[fields[0]].push_back(std::move(ln));
  }
  return out;
}

// --- encoded sample streams -----------------------------------------------------------
//
// Text container with a schema hash header, then per-user sections:
//   schema <tab> hash_hex <tab> width
//   user <tab> user_id <tab> sample_count
//   t <tab> dt <tab> y <tab> category <tab> w <tab> col:val <tab> col:val ...

inline constexpr std::string_view kSamplesHeader = "#attend samples v1";

struct SampleFile {
  std::uint64_t schema_hash = 0;
  std::uint32_t width = 0;
  std::vector<SampleSeq> streams;
};

inline void write_samples(std::ostream& os, const std::vector<const SampleSeq*>& streams,
                          std::uint64_t schema_hash, std::uint32_t width) {
  os << kSamplesHeader << '\n';
  os << "schema\t" << hex64(schema_hash) << '\t' << width << '\n';
  for (const auto* s : streams) {
    if (!s) throw ValidationError("null stream handed to the sample writer");
    if (s->width != width) throw SchemaError("stream width differs from the declared schema");
    os << "user\t" << s->user_id << '\t' << s->size() << '\n';
    for (std::size_t i = 0; i < s->size(); ++i) {
      auto r = s->ref(i);
      os << r.t << '\t' << strfmt("%.17g", r.dt_min) << '\t' << static_cast<int>(r.y) << '\t'
         << static_cast<int>(r.category) << '\t' << strfmt("%.9g", static_cast<double>(r.w));
      for (std::size_t k = 0; k < r.cols.size(); ++k)
        os << '\t' << r.cols[k] << ':' << strfmt("%.17g", r.vals[k]);
      os << '\n';
    }
  }
  if (!os) throw IoError("failed to write samples");
}

inline SampleFile read_samples(std::istream& is) {
  io_detail::require_header(is, kSamplesHeader);
  SampleFile out;
  std::string line;
  if (!std::getline(is, line)) throw IoError("samples file missing schema line");
  {
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 3 || fields[0] != "schema")
      throw SchemaError("samples file missing schema line");
    out.schema_hash = std::strtoull(fields[1].c_str(), nullptr, 16);
    out.width = static_cast<std::uint32_t>(io_detail::parse_i64(fields[2], "schema width"));
  }
  std::size_t lineno = 2;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = io_detail::split_tabs(line);
    if (fields[0] == "user") {
      if (fields.size() != 3) throw IoError(strfmt("line %zu: bad user section", lineno));
      if (!out.streams.empty() && out.streams.back().size() != expected)
        throw IoError("sample count does not match the user section header");
      out.streams.emplace_back();
      out.streams.back().user_id = fields[1];
      out.streams.back().width = out.width;
      expected = static_cast<std::size_t>(io_detail::parse_i64(fields[2], "sample count"));
      continue;
    }
    if (out.streams.empty()) throw IoError(strfmt("line %zu: sample before any user section", lineno));
    if (fields.size() < 5) throw IoError(strfmt("line %zu: expected at least 5 sample fields", lineno));
    EncodedSample s;
    s.t = io_detail::parse_i64(fields[0], "sample time");
    s.dt_min = io_detail::parse_f64(fields[1], "dt");
    s.y = static_cast<std::int8_t>(io_detail::parse_i64(fields[2], "label"));
    s.category = static_cast<std::int8_t>(io_detail::parse_i64(fields[3], "category"));
    s.w = static_cast<float>(io_detail::parse_f64(fields[4], "weight"));
    for (std::size_t f = 5; f < fields.size(); ++f) {
      auto colon = fields[f].find(':');
      if (colon == std::string::npos)
        throw IoError(strfmt("line %zu: bad sparse entry '%s'", lineno, fields[f].c_str()));
      auto col = static_cast<std::uint32_t>(
          io_detail::parse_i64(fields[f].substr(0, colon), "column index"));
      double val = io_detail::parse_f64(fields[f].substr(colon + 1), "column value");
      s.x.emplace_back(col, val);
    }
    out.streams.back().push(s);
  }
  if (!out.streams.empty() && out.streams.back().size() != expected)
    throw IoError("sample count does not match the user section header");
  return out;
}

// --- classical feature matrix ------------------------------------------------------------

inline constexpr std::string_view kFeaturesHeader = "#attend features v1";

inline void write_features(std::ostream& os, const FeatureMatrix& m) {
  os << kFeaturesHeader << '\n';
  os << "manifest\t" << hex64(m.manifest_hash) << '\t' << m.n_features << '\n';
  os << "user\tpost_t\tcategory\ty";
  for (const auto& n : m.names) os << '\t' << n;
  os << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto& meta = m.instances[i];
    os << meta.user << '\t' << meta.post_t << '\t' << category_name(meta.category) << '\t'
       << static_cast<int>(meta.y);
    for (double v : m.row(i)) os << '\t' << strfmt("%.17g", v);
    os << '\n';
  }
  if (!os) throw IoError("failed to write the feature matrix");
}

inline FeatureMatrix read_features(std::istream& is) {
  io_detail::require_header(is, kFeaturesHeader);
  FeatureMatrix m;
  std::string line;
  if (!std::getline(is, line)) throw IoError("feature file missing manifest line");
  {
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 3 || fields[0] != "manifest")
      throw SchemaError("feature file missing manifest line");
    m.manifest_hash = std::strtoull(fields[1].c_str(), nullptr, 16);
    m.n_features = static_cast<std::size_t>(io_detail::parse_i64(fields[2], "feature count"));
  }
  if (!std::getline(is, line)) throw IoError("feature file missing column header");
  {
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 4 + m.n_features || fields[0] != "user")
      throw SchemaError("feature column header does not match the manifest");
    m.names.assign(fields.begin() + 4, fields.end());
  }
  std::size_t lineno = 3;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 4 + m.n_features)
      throw IoError(strfmt("line %zu: expected %zu fields", lineno, 4 + m.n_features));
    InstanceMeta meta;
    meta.user = fields[0];
    meta.post_t = io_detail::parse_i64(fields[1], "post time");
    auto cat = parse_category(fields[2]);
    if (!cat) throw SchemaError(strfmt("line %zu: unknown category '%s'", lineno, fields[2].c_str()));
    meta.category = *cat;
    meta.y = static_cast<std::int8_t>(io_detail::parse_i64(fields[3], "label"));
    m.instances.push_back(std::move(meta));
    for (std::size_t f = 0; f < m.n_features; ++f)
      m.values.push_back(io_detail::parse_f64(fields[4 + f], "feature value"));
  }
  return m;
}

// --- predictions -------------------------------------------------------------------------

inline constexpr std::string_view kPredictionsHeader = "#attend predictions v1";

struct PredictionRow {
  std::string user;
  std::int64_t t = 0;
  AppCategory category = AppCategory::Messaging;
  std::int8_t y = 0;
  double score = 0;
};

inline void write_predictions(std::ostream& os, const std::vector<PredictionRow>& rows) {
  os << kPredictionsHeader << '\n';
  os << "user\tt\tcategory\ty\tscore\n";
  for (const auto& r : rows)
    os << r.user << '\t' << r.t << '\t' << category_name(r.category) << '\t'
       << static_cast<int>(r.y) << '\t' << strfmt("%.17g", r.score) << '\n';
  if (!os) throw IoError("failed to write predictions");
}

inline std::vector<PredictionRow> read_predictions(std::istream& is) {
  io_detail::require_header(is, kPredictionsHeader);
  std::string line;
  if (!std::getline(is, line)) throw IoError("predictions file missing column header");
  std::vector<PredictionRow> out;
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = io_detail::split_tabs(line);
    if (fields.size() != 5) throw IoError(strfmt("line %zu: expected 5 prediction fields", lineno));
    PredictionRow r;
    r.user = fields[0];
    r.t = io_detail::parse_i64(fields[1], "time");
    auto cat = parse_category(fields[2]);
    if (!cat) throw SchemaError(strfmt("line %zu: unknown category '%s'", lineno, fields[2].c_str()));
    r.category = *cat;
    r.y = static_cast<std::int8_t>(io_detail::parse_i64(fields[3], "label"));
    r.score = io_detail::parse_f64(fields[4], "score");
    out.push_back(std::move(r));
  }
  return out;
}

// Prediction rows inside [begin_t, end_t) as evaluation records.
inline std::vector<PredRecord> to_pred_records(const std::vector<PredictionRow>& rows,
                                               std::int64_t begin_t = std::numeric_limits<std::int64_t>::min(),
                                               std::int64_t end_t = std::numeric_limits<std::int64_t>::max()) {
  std::vector<PredRecord> out;
  for (const auto& r : rows)
    if (r.t >= begin_t && r.t < end_t) out.push_back({r.user, r.category, r.y, r.score});
  return out;
}

// --- evaluation reports --------------------------------------------------------------------

inline void write_cells_report(std::ostream& os, const AggregateResult& agg) {
  os << "#attend cells v1\n";
  os << "user\tcategory\tn_pos\tn_neg\tauc\n";
  for (const auto& c : agg.cells)
    os << c.user << '\t' << category_name(c.category) << '\t' << c.n_pos << '\t' << c.n_neg
       << '\t' << strfmt("%.6f", c.auc) << '\n';
  os << "#user_means\n";
  for (const auto& [user, m] : agg.user_means) os << user << '\t' << strfmt("%.6f", m) << '\n';
  os << strfmt("#mean_auc\t%.6f\n", agg.mean_auc);
  os << "#valid_cells\t" << agg.valid_cells << "\n#skipped_cells\t" << agg.skipped_cells << '\n';
  if (!os) throw IoError("failed to write the cell report");
}

// Per-cell ROC points for external plotting.
inline void write_roc_report(std::ostream& os, const std::vector<PredRecord>& recs) {
  os << "#attend roc v1\n";
  os << "user\tcategory\tfpr\ttpr\tthreshold\n";
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<std::int8_t>>> cells;
  for (const auto& r : recs) {
    auto& cell = cells[{r.user, static_cast<int>(r.category)}];
    cell.first.push_back(r.score);
    cell.second.push_back(r.y);
  }
  for (auto& [key, data] : cells) {
    std::size_t pos = 0;
    for (auto y : data.second) pos += y == 1;
    if (pos == 0 || pos == data.second.size()) continue;
    auto curve = roc_curve(data.first, data.second);
    for (const auto& p : curve.points)
      os << key.first << '\t' << category_name(static_cast<AppCategory>(key.second)) << '\t'
         << strfmt("%.6f\t%.6f\t%.6g", p.fpr, p.tpr, p.threshold) << '\n';
  }
  if (!os) throw IoError("failed to write the ROC report");
}

inline void write_trials_report(std::ostream& os, const std::map<std::string, TrialStat>& stats) {
  os << "#attend trials v1\n";
  os << "metric\tmean\tsd\tvalues\n";
  for (const auto& [key, st] : stats) {
    os << key << '\t' << strfmt("%.6f", st.mean) << '\t' << strfmt("%.6f", st.sd) << '\t';
    for (std::size_t i = 0; i < st.values.size(); ++i)
      os << (i ? "," : "") << strfmt("%.6f", st.values[i]);
    os << '\n';
  }
  if (!os) throw IoError("failed to write the trials report");
}

inline void write_ablation_report(std::ostream& os, const std::vector<SensorImportance>& imps) {
  os << "#attend ablation v1\n";
  os << "sensor\tmean_delta\tsd\tdeltas\n";
  for (const auto& imp : imps) {
    os << sensor_name(imp.kind) << '\t' << strfmt("%.6f", imp.mean_delta) << '\t'
       << strfmt("%.6f", imp.sd) << '\t';
    for (std::size_t i = 0; i < imp.deltas.size(); ++i)
      os << (i ? "," : "") << strfmt("%.6f", imp.deltas[i]);
    os << '\n';
  }
  if (!os) throw IoError("failed to write the ablation report");
}

inline void write_feature_distribution(std::ostream& os, const std::vector<FeatureClassStats>& stats) {
  os << "#attend feature-distribution v1\n";
  os << "feature\tlabel\tcount\tmean\tmin\tq1\tmedian\tq3\tmax\n";
  for (const auto& st : stats)
    os << st.feature << '\t' << st.label << '\t' << st.count << '\t'
       << strfmt("%.6g\t%.6g\t%.6g\t%.6g\t%.6g\t%.6g", st.mean, st.min, st.q1, st.med, st.q3,
                 st.max)
       << '\n';
  if (!os) throw IoError("failed to write the feature distribution");
}

// --- run manifest ------------------------------------------------------------------------
//
// Every command writes one of these next to its outputs: what ran, on which
// inputs (content-hashed), with which resolved settings, and what came out.
// The wall-clock entry makes manifests the one artifact exempt from the
// byte-identical reproducibility guarantee.

inline std::uint64_t hash_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw MissingInputError("cannot hash missing file: " + p.string());
  std::uint64_t h = 14695981039346656037ull;
  char buf[65536];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    auto n = static_cast<std::size_t>(f.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

class RunManifest {
 public:
  explicit RunManifest(std::string command) { add("command", std::move(command)); }

  void add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, std::int64_t v) { add(std::move(key), std::to_string(v)); }
  void add(std::string key, std::size_t v) { add(std::move(key), std::to_string(v)); }
  void add(std::string key, int v) { add(std::move(key), std::to_string(v)); }
  void add(std::string key, double v) { add(std::move(key), strfmt("%.17g", v)); }

  void add_input(const std::string& key, const std::filesystem::path& p) {
    add("input." + key, p.string() + " fnv1a64=" + hex64(hash_file(p)));
  }
  void add_output(const std::string& key, const std::filesystem::path& p) {
    add("output." + key, p.string());
  }

  void write(std::ostream& os) const {
    os << "#attend manifest v1\n";
    for (const auto& [k, v] : entries_) os << k << '\t' << v << '\n';
    if (!os) throw IoError("failed to write the run manifest");
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace attend
