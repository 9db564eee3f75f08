#pragma once

#include <istream>
#include <ostream>

#include "attend/eval.hpp"
#include "attend/features.hpp"

namespace attend {

struct GbtConfig {
  int n_estimators = 101;
  int max_depth = 5;
  double learning_rate = 0.1;
  double lambda_l2 = 1.0;
  double subsample = 1.0;
  double min_child_hessian = 1e-3;
  double min_split_gain = 0.0;
  std::uint64_t seed = 1;
};

struct GbtNode {
  int feature = -1;          // -1: leaf
  double threshold = 0.0;    // go left when value < threshold
  bool missing_left = true;  // side that receives missing values
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf increment, learning rate already applied
  bool is_leaf() const { return feature < 0; }
};

struct GbtTree {
  std::vector<GbtNode> nodes;

  double margin(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& nd = nodes[static_cast<std::size_t>(i)];
      double v = x[static_cast<std::size_t>(nd.feature)];
      bool go_left = std::isnan(v) ? nd.missing_left : v < nd.threshold;
      i = go_left ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
};

namespace gbt_detail {

inline void check_config(const GbtConfig& cfg) {
  if (cfg.n_estimators < 1) throw ConfigError("need at least one boosting stage");
  if (cfg.max_depth < 1) throw ConfigError("tree depth must be positive");
  if (!(cfg.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (cfg.lambda_l2 < 0) throw ConfigError("l2 penalty cannot be negative");
  if (!(cfg.subsample > 0) || cfg.subsample > 1) throw ConfigError("subsample must be in (0, 1]");
  if (cfg.min_child_hessian < 0) throw ConfigError("min child hessian cannot be negative");
}

// Columns of the active (positive-weight) rows, each presorted by value with
// missing entries split out, so every tree level scans each column once.
struct Presorted {
  std::vector<std::uint32_t> rows;  // active matrix rows
  std::vector<std::vector<std::uint32_t>> sorted;   // per feature, ascending value
  std::vector<std::vector<std::uint32_t>> missing;  // per feature

  Presorted(const FeatureMatrix& m, const std::vector<double>& w) {
    if (w.size() != m.rows()) throw ValidationError("one weight per instance is required");
    if (m.rows() == 0) throw ValidationError("cannot train on an empty feature matrix");
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (!(w[i] >= 0) || !std::isfinite(w[i]))
        throw ValidationError("instance weights must be finite and non-negative");
      if (w[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
      int y = m.instances[i].y;
      if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    }
    if (rows.empty()) throw ValidationError("all instance weights are zero");
    sorted.resize(m.n_features);
    missing.resize(m.n_features);
    std::vector<std::pair<double, std::uint32_t>> col;
    for (std::size_t f = 0; f < m.n_features; ++f) {
      col.clear();
      for (auto r : rows) {
        double v = m.values[r * m.n_features + f];
        if (std::isnan(v))
          missing[f].push_back(r);
        else
          col.emplace_back(v, r);
      }
      std::sort(col.begin(), col.end());
      sorted[f].reserve(col.size());
      for (auto& [v, r] : col) sorted[f].push_back(r);
    }
  }
};

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = false;
  double left_g = 0.0, left_h = 0.0;  // totals routed left, missing included when missing_left
};

}  // namespace gbt_detail

class GbtModel {
 public:
  GbtConfig config;
  double base_score = 0.0;
  std::vector<GbtTree> trees;
  std::vector<std::string> feature_names;
  std::uint64_t feature_hash = 0;

  double margin(std::span<const double> x) const {
    if (x.size() != feature_names.size())
      throw SchemaError("feature vector width differs from the model");
    double m = base_score;
    for (const auto& t : trees) m += t.margin(x);
    return m;
  }

  double predict_proba(std::span<const double> x) const { return sigmoid(margin(x)); }

  std::vector<double> predict_matrix(const FeatureMatrix& m) const {
    if (m.n_features != feature_names.size() ||
        (feature_hash != 0 && m.manifest_hash != 0 && m.manifest_hash != feature_hash))
      throw SchemaError("feature matrix does not match the trained model");
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = predict_proba(m.row(i));
    return out;
  }

  void save(std::ostream& os) const {
    os << "attend-gbt v1\n";
    os << strfmt("base_score %.17g\n", base_score);
    os << "features " << feature_names.size() << "\n";
    for (const auto& n : feature_names) os << n << "\n";
    os << "feature_hash " << hex64(feature_hash) << "\n";
    os << "trees " << trees.size() << "\n";
    for (const auto& t : trees) {
      os << "tree " << t.nodes.size() << "\n";
      for (const auto& nd : t.nodes)
        os << strfmt("%d %.17g %d %d %d %.17g\n", nd.feature, nd.threshold,
                     nd.missing_left ? 1 : 0, nd.left, nd.right, nd.value);
    }
    os << "end\n";
    if (!os) throw IoError("failed to write the boosted tree model");
  }

  static GbtModel load(std::istream& is) {
    GbtModel m;
    std::string line;
    auto next = [&]() -> std::string& {
      if (!std::getline(is, line)) throw IoError("truncated boosted tree model");
      return line;
    };
    if (next() != "attend-gbt v1") throw SchemaError("not a boosted tree model file");
    std::size_t nf = 0, nt = 0;
    if (std::sscanf(next().c_str(), "base_score %lg", &m.base_score) != 1)
      throw SchemaError("missing base score");
    if (std::sscanf(next().c_str(), "features %zu", &nf) != 1)
      throw SchemaError("missing feature count");
    for (std::size_t i = 0; i < nf; ++i) m.feature_names.push_back(next());
    {
      char buf[32] = {0};
      if (std::sscanf(next().c_str(), "feature_hash %31s", buf) != 1)
        throw SchemaError("missing feature hash");
      m.feature_hash = std::strtoull(buf, nullptr, 16);
    }
    if (std::sscanf(next().c_str(), "trees %zu", &nt) != 1)
      throw SchemaError("missing tree count");
    for (std::size_t t = 0; t < nt; ++t) {
      std::size_t nn = 0;
      if (std::sscanf(next().c_str(), "tree %zu", &nn) != 1 || nn == 0)
        throw SchemaError("bad tree header");
      GbtTree tree;
      tree.nodes.resize(nn);
      for (auto& nd : tree.nodes) {
        int ml = 0;
        if (std::sscanf(next().c_str(), "%d %lg %d %d %d %lg", &nd.feature, &nd.threshold, &ml,
                        &nd.left, &nd.right, &nd.value) != 6)
          throw SchemaError("bad tree node");
        nd.missing_left = ml != 0;
        int n = static_cast<int>(nn);
        if (nd.feature >= static_cast<int>(nf) || nd.left >= n || nd.right >= n)
          throw SchemaError("tree node indices out of range");
      }
      m.trees.push_back(std::move(tree));
    }
    if (next() != "end") throw SchemaError("missing model trailer");
    return m;
  }
};

namespace gbt_detail {

inline GbtModel train_core(const Presorted& pre, const FeatureMatrix& m,
                           const std::vector<double>& w, const GbtConfig& cfg) {
  check_config(cfg);
  const double lambda = cfg.lambda_l2;
  const std::size_t n_rows = m.rows();

  GbtModel model;
  model.config = cfg;
  model.feature_names = m.names;
  model.feature_hash = m.manifest_hash;

  double wsum = 0, wpos = 0;
  for (auto r : pre.rows) {
    wsum += w[r];
    wpos += w[r] * m.instances[r].y;
  }
  double p0 = std::clamp(wpos / wsum, 1e-6, 1.0 - 1e-6);
  model.base_score = std::log(p0 / (1.0 - p0));

  std::vector<double> margin(n_rows, model.base_score);
  std::vector<double> g(n_rows, 0.0), h(n_rows, 0.0);
  std::vector<int> node_of(n_rows, -1);
  std::mt19937_64 rng = make_rng(cfg.seed);

  struct BuildNode {
    double G = 0, H = 0;
  };

  for (int stage = 0; stage < cfg.n_estimators; ++stage) {
    GbtTree tree;
    std::vector<BuildNode> info;
    tree.nodes.emplace_back();
    info.emplace_back();

    for (auto r : pre.rows) {
      double p = sigmoid(margin[r]);
      g[r] = w[r] * (p - m.instances[r].y);
      h[r] = w[r] * p * (1.0 - p);
      bool in = cfg.subsample >= 1.0 || u01(rng) < cfg.subsample;
      node_of[r] = in ? 0 : -1;
      if (in) {
        info[0].G += g[r];
        info[0].H += h[r];
      }
    }

    std::vector<int> level = {0};
    for (int depth = 0; depth < cfg.max_depth && !level.empty(); ++depth) {
      std::vector<SplitChoice> best(tree.nodes.size());
      std::vector<char> active(tree.nodes.size(), 0);
      for (int nid : level) active[static_cast<std::size_t>(nid)] = 1;

      std::vector<double> Gm(tree.nodes.size()), Hm(tree.nodes.size());
      std::vector<double> GL(tree.nodes.size()), HL(tree.nodes.size());
      std::vector<double> prev(tree.nodes.size());
      std::vector<char> has_prev(tree.nodes.size());

      for (std::size_t f = 0; f < m.n_features; ++f) {
        for (int nid : level) {
          auto u = static_cast<std::size_t>(nid);
          Gm[u] = Hm[u] = GL[u] = HL[u] = 0.0;
          has_prev[u] = 0;
        }
        for (auto r : pre.missing[f]) {
          int nid = node_of[r];
          if (nid < 0 || !active[static_cast<std::size_t>(nid)]) continue;
          Gm[static_cast<std::size_t>(nid)] += g[r];
          Hm[static_cast<std::size_t>(nid)] += h[r];
        }
        for (auto r : pre.sorted[f]) {
          int nid = node_of[r];
          if (nid < 0 || !active[static_cast<std::size_t>(nid)]) continue;
          auto u = static_cast<std::size_t>(nid);
          double v = m.values[r * m.n_features + f];
          if (has_prev[u] && v > prev[u]) {
            double G = info[u].G, H = info[u].H;
            double parent = G * G / (H + lambda);
            for (int miss_left = 0; miss_left < 2; ++miss_left) {
              double lg = GL[u] + (miss_left ? Gm[u] : 0.0);
              double lh = HL[u] + (miss_left ? Hm[u] : 0.0);
              double rg = G - lg, rh = H - lh;
              if (lh < cfg.min_child_hessian || rh < cfg.min_child_hessian) continue;
              double gain = 0.5 * (lg * lg / (lh + lambda) + rg * rg / (rh + lambda) - parent);
              if (gain > best[u].gain) {
                best[u] = {gain, static_cast<int>(f), (prev[u] + v) / 2.0, miss_left != 0, lg, lh};
              }
            }
          }
          GL[u] += g[r];
          HL[u] += h[r];
          prev[u] = v;
          has_prev[u] = 1;
        }
      }

      std::vector<int> next_level;
      for (int nid : level) {
        auto u = static_cast<std::size_t>(nid);
        if (best[u].feature < 0 || !(best[u].gain > cfg.min_split_gain)) continue;
        int li = static_cast<int>(tree.nodes.size());
        BuildNode parent = info[u];
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        info.push_back({best[u].left_g, best[u].left_h});
        info.push_back({parent.G - best[u].left_g, parent.H - best[u].left_h});
        auto& nd = tree.nodes[u];
        nd.feature = best[u].feature;
        nd.threshold = best[u].threshold;
        nd.missing_left = best[u].missing_left;
        nd.left = li;
        nd.right = li + 1;
        next_level.push_back(li);
        next_level.push_back(li + 1);
      }
      if (next_level.empty()) break;
      for (auto r : pre.rows) {
        int nid = node_of[r];
        if (nid < 0) continue;
        const auto& nd = tree.nodes[static_cast<std::size_t>(nid)];
        if (nd.is_leaf()) continue;
        double v = m.values[r * m.n_features + static_cast<std::size_t>(nd.feature)];
        bool go_left = std::isnan(v) ? nd.missing_left : v < nd.threshold;
        node_of[r] = go_left ? nd.left : nd.right;
      }
      level = std::move(next_level);
    }

    for (std::size_t u = 0; u < tree.nodes.size(); ++u)
      if (tree.nodes[u].is_leaf())
        tree.nodes[u].value = -cfg.learning_rate * info[u].G / (info[u].H + lambda);

    for (auto r : pre.rows) margin[r] += tree.margin(m.row(r));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace gbt_detail

inline GbtModel train_gbt(const FeatureMatrix& m, const std::vector<double>& w,
                          const GbtConfig& cfg) {
  gbt_detail::check_config(cfg);
  gbt_detail::Presorted pre(m, w);
  return gbt_detail::train_core(pre, m, w, cfg);
}

inline std::vector<PredRecord> predict_records(const GbtModel& model, const FeatureMatrix& m) {
  auto proba = model.predict_matrix(m);
  std::vector<PredRecord> out;
  out.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    out.push_back({m.instances[i].user, m.instances[i].category, m.instances[i].y, proba[i]});
  return out;
}

struct GbtGridPoint {
  int max_depth = 0;
  double subsample = 0;
  double val_auc = 0;
};

struct GbtGridResult {
  GbtModel model;
  GbtConfig best_config;
  double best_val_auc = std::numeric_limits<double>::quiet_NaN();
  std::vector<GbtGridPoint> table;
};

// Trains one model per (depth, subsample) pair and keeps the one with the best
// per-user per-category mean AUC on the validation instances.
inline GbtGridResult grid_search_gbt(const FeatureMatrix& train, const std::vector<double>& w,
                                     const FeatureMatrix& val, const GbtConfig& base,
                                     const std::vector<int>& depths,
                                     const std::vector<double>& subsamples) {
  if (depths.empty() || subsamples.empty()) throw ConfigError("empty hyperparameter grid");
  gbt_detail::Presorted pre(train, w);
  GbtGridResult res;
  bool have_best = false;
  for (int d : depths)
    for (double s : subsamples) {
      GbtConfig cfg = base;
      cfg.max_depth = d;
      cfg.subsample = s;
      auto model = gbt_detail::train_core(pre, train, w, cfg);
      auto agg = aggregate_predictions(predict_records(model, val));
      double auc = agg.mean_auc;
      res.table.push_back({d, s, auc});
      double score = std::isnan(auc) ? -1.0 : auc;
      double best = std::isnan(res.best_val_auc) ? -1.0 : res.best_val_auc;
      if (!have_best || score > best) {
        have_best = true;
        res.best_val_auc = auc;
        res.best_config = cfg;
        res.model = std::move(model);
      }
    }
  return res;
}

}  // namespace attend
