#pragma once

#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "attend/encode.hpp"
#include "attend/eval.hpp"
#include "attend/sequencing.hpp"

namespace attend {

struct RnnConfig {
  int embed_dim = 16;
  int hidden = 24;
  int max_epochs = 30;
  int patience = 5;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  double forget_bias = 1.0;
  std::uint64_t seed = 1;
  SequencingConfig seq;
};

namespace rnn_detail {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline void check_config(const RnnConfig& cfg) {
  if (cfg.embed_dim < 1 || cfg.hidden < 1) throw ConfigError("layer sizes must be positive");
  if (cfg.max_epochs < 1) throw ConfigError("need at least one training epoch");
  if (cfg.patience < 1) throw ConfigError("early-stopping patience must be positive");
  if (!(cfg.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (!(cfg.clip_norm > 0)) throw ConfigError("gradient clip norm must be positive");
}

// Offsets into the flat parameter vector: embedding, two LSTM layers
// (gate rows ordered input, forget, candidate, output), sigmoid head.
struct Layout {
  int in = 0, embed = 0, hidden = 0;
  std::size_t we = 0, be = 0, al = 0;
  std::size_t w1i = 0, w1h = 0, b1 = 0;
  std::size_t w2i = 0, w2h = 0, b2 = 0;
  std::size_t wo = 0, bo = 0, total = 0;

  Layout() = default;
  Layout(int in_, int embed_, int hidden_) : in(in_), embed(embed_), hidden(hidden_) {
    if (in < 1 || embed < 1 || hidden < 1) throw ConfigError("layer sizes must be positive");
    std::size_t off = 0;
    auto take = [&off](std::size_t n) {
      auto at = off;
      off += n;
      return at;
    };
    auto e = static_cast<std::size_t>(embed);
    auto h = static_cast<std::size_t>(hidden);
    we = take(e * static_cast<std::size_t>(in));
    be = take(e);
    al = take(e);
    w1i = take(4 * h * e);
    w1h = take(4 * h * h);
    b1 = take(4 * h);
    w2i = take(4 * h * h);
    w2h = take(4 * h * h);
    b2 = take(4 * h);
    wo = take(h);
    bo = take(1);
    total = off;
  }
};

struct CViews {
  Eigen::Map<const Mat> We, Wi1, Wh1, Wi2, Wh2;
  Eigen::Map<const Vec> be, al, b1, b2, wo;
  const double* bo;
  CViews(const double* p, const Layout& l)
      : We(p + l.we, l.embed, l.in),
        Wi1(p + l.w1i, 4 * l.hidden, l.embed),
        Wh1(p + l.w1h, 4 * l.hidden, l.hidden),
        Wi2(p + l.w2i, 4 * l.hidden, l.hidden),
        Wh2(p + l.w2h, 4 * l.hidden, l.hidden),
        be(p + l.be, l.embed),
        al(p + l.al, l.embed),
        b1(p + l.b1, 4 * l.hidden),
        b2(p + l.b2, 4 * l.hidden),
        wo(p + l.wo, l.hidden),
        bo(p + l.bo) {}
};

struct Views {
  Eigen::Map<Mat> We, Wi1, Wh1, Wi2, Wh2;
  Eigen::Map<Vec> be, al, b1, b2, wo;
  double* bo;
  Views(double* p, const Layout& l)
      : We(p + l.we, l.embed, l.in),
        Wi1(p + l.w1i, 4 * l.hidden, l.embed),
        Wh1(p + l.w1h, 4 * l.hidden, l.hidden),
        Wi2(p + l.w2i, 4 * l.hidden, l.hidden),
        Wh2(p + l.w2h, 4 * l.hidden, l.hidden),
        be(p + l.be, l.embed),
        al(p + l.al, l.embed),
        b1(p + l.b1, 4 * l.hidden),
        b2(p + l.b2, 4 * l.hidden),
        wo(p + l.wo, l.hidden),
        bo(p + l.bo) {}
};

inline std::vector<double> init_params(const Layout& lay, const RnnConfig& cfg) {
  std::vector<double> p(lay.total, 0.0);
  auto rng = make_rng(cfg.seed);
  auto fill = [&rng](Eigen::Map<Mat> m, double fan_in) {
    double r = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = (2.0 * u01(rng) - 1.0) * r;
  };
  Views v(p.data(), lay);
  fill(v.We, lay.in);
  fill(v.Wi1, lay.embed);
  fill(v.Wh1, lay.hidden);
  fill(v.Wi2, lay.hidden);
  fill(v.Wh2, lay.hidden);
  for (Eigen::Index j = 0; j < v.wo.size(); ++j)
    v.wo(j) = (2.0 * u01(rng) - 1.0) / std::sqrt(static_cast<double>(lay.hidden));
  v.al.setConstant(0.25);
  v.b1.segment(lay.hidden, lay.hidden).setConstant(cfg.forget_bias);
  v.b2.segment(lay.hidden, lay.hidden).setConstant(cfg.forget_bias);
  return p;
}

// In-place step: on entry c and h hold the previous state, on exit the new one.
// A receives the post-activation gates stacked [input; forget; candidate; output].
inline void lstm_forward(const Eigen::Ref<const Mat>& Wi, const Eigen::Ref<const Mat>& Wh,
                         const Eigen::Ref<const Vec>& b, const Mat& in, Mat& A, Mat& c, Mat& h) {
  const auto H = c.rows();
  A.noalias() = Wi * in + Wh * h;
  A.colwise() += b;
  auto gi = A.middleRows(0, H).array();
  auto gf = A.middleRows(H, H).array();
  auto gg = A.middleRows(2 * H, H).array();
  auto go = A.middleRows(3 * H, H).array();
  gi = 1.0 / (1.0 + (-gi).exp());
  gf = 1.0 / (1.0 + (-gf).exp());
  gg = gg.tanh();
  go = 1.0 / (1.0 + (-go).exp());
  c.array() = gf * c.array() + gi * gg;
  h.array() = go * c.array().tanh();
}

// dh: gradient at this step's h. dc_io: on entry the gradient flowing back
// from the next step's cell, on exit the gradient at the previous cell.
// Returns the gradient at the pre-activation gates.
inline Mat lstm_backward(const Mat& A, const Mat& c_prev, const Mat& c, const Mat& dh,
                         Mat& dc_io) {
  const auto H = c.rows();
  auto gi = A.middleRows(0, H).array();
  auto gf = A.middleRows(H, H).array();
  auto gg = A.middleRows(2 * H, H).array();
  auto go = A.middleRows(3 * H, H).array();
  Eigen::ArrayXXd tc = c.array().tanh();
  Eigen::ArrayXXd dc = dc_io.array() + dh.array() * go * (1.0 - tc * tc);
  Mat da(A.rows(), A.cols());
  da.middleRows(0, H).array() = dc * gg * gi * (1.0 - gi);
  da.middleRows(H, H).array() = dc * c_prev.array() * gf * (1.0 - gf);
  da.middleRows(2 * H, H).array() = dc * gi * (1.0 - gg * gg);
  da.middleRows(3 * H, H).array() = dh.array() * tc * go * (1.0 - go);
  dc_io.array() = dc * gf;
  return da;
}

struct BatchStats {
  double loss_num = 0;   // sum of weighted cross entropies
  double weight_sum = 0;
};

// One forward (and optionally backward) pass over batch batch_idx of a bucket.
// State matrices carry across calls; gradients never flow past the incoming
// state, which truncates backpropagation at batch boundaries. The gradient,
// when requested, is of (sum w*ce / sum w) over this batch and is accumulated
// into *grad.
inline BatchStats run_batch(const Layout& lay, const std::vector<double>& params,
                            const NormalizationStats& norm, const Bucket& bucket, int batch_idx,
                            int seq_len, Mat& h1, Mat& c1, Mat& h2, Mat& c2,
                            std::vector<double>* grad) {
  const int B = static_cast<int>(bucket.slots.size());
  const int H = lay.hidden, E = lay.embed, I = lay.in;
  CViews V(params.data(), lay);
  const double cap = norm.dt_cap_min;

  std::vector<Mat> Xs(static_cast<std::size_t>(seq_len)), Epre(Xs.size()), Epost(Xs.size());
  std::vector<Mat> A1(Xs.size()), A2(Xs.size());
  std::vector<Mat> C1(Xs.size() + 1), G1(Xs.size() + 1), C2(Xs.size() + 1), G2(Xs.size() + 1);
  std::vector<Vec> zs(Xs.size()), ws(Xs.size()), ys(Xs.size());
  C1[0] = c1;
  G1[0] = h1;
  C2[0] = c2;
  G2[0] = h2;

  BatchStats st;
  for (int t = 0; t < seq_len; ++t) {
    auto u = static_cast<std::size_t>(t);
    Mat X = Mat::Zero(I, B);
    Vec w = Vec::Zero(B), y = Vec::Zero(B);
    for (int b = 0; b < B; ++b) {
      auto s = sample_at(bucket, b, static_cast<std::uint32_t>(batch_idx * seq_len + t));
      if (!s) continue;
      for (std::size_t k = 0; k < s->cols.size(); ++k)
        X(static_cast<int>(s->cols[k]), b) = normalize_value(norm, s->cols[k], s->vals[k]);
      X(I - 1, b) = std::min(s->dt_min, cap) / cap;
      if (s->y >= 0 && s->w > 0) {
        w(b) = s->w;
        y(b) = s->y;
      }
    }
    Xs[u] = std::move(X);
    Epre[u].noalias() = V.We * Xs[u];
    Epre[u].colwise() += V.be;
    Epost[u] = Epre[u];
    for (int j = 0; j < E; ++j)
      for (int b = 0; b < B; ++b)
        if (Epre[u](j, b) < 0) Epost[u](j, b) = V.al(j) * Epre[u](j, b);

    A1[u].resize(4 * H, B);
    C1[u + 1] = C1[u];
    G1[u + 1] = G1[u];
    lstm_forward(V.Wi1, V.Wh1, V.b1, Epost[u], A1[u], C1[u + 1], G1[u + 1]);
    A2[u].resize(4 * H, B);
    C2[u + 1] = C2[u];
    G2[u + 1] = G2[u];
    lstm_forward(V.Wi2, V.Wh2, V.b2, G1[u + 1], A2[u], C2[u + 1], G2[u + 1]);

    zs[u] = G2[u + 1].transpose() * V.wo;
    zs[u].array() += *V.bo;
    ws[u] = std::move(w);
    ys[u] = std::move(y);
    for (int b = 0; b < B; ++b) {
      double wb = ws[u](b);
      if (wb <= 0) continue;
      double z = zs[u](b), yb = ys[u](b);
      st.loss_num += wb * (std::max(z, 0.0) - z * yb + std::log1p(std::exp(-std::abs(z))));
      st.weight_sum += wb;
    }
  }

  auto last = static_cast<std::size_t>(seq_len);
  h1 = G1[last];
  c1 = C1[last];
  h2 = G2[last];
  c2 = C2[last];

  if (!grad || !(st.weight_sum > 0)) return st;

  Views G(grad->data(), lay);
  Mat dh1 = Mat::Zero(H, B), dc1 = Mat::Zero(H, B);
  Mat dh2 = Mat::Zero(H, B), dc2 = Mat::Zero(H, B);
  for (int t = seq_len - 1; t >= 0; --t) {
    auto u = static_cast<std::size_t>(t);
    Vec dz = Vec::Zero(B);
    for (int b = 0; b < B; ++b)
      if (ws[u](b) > 0) dz(b) = (sigmoid(zs[u](b)) - ys[u](b)) * ws[u](b) / st.weight_sum;
    G.wo.noalias() += G2[u + 1] * dz;
    *G.bo += dz.sum();
    dh2.noalias() += V.wo * dz.transpose();

    Mat da2 = lstm_backward(A2[u], C2[u], C2[u + 1], dh2, dc2);
    G.Wi2.noalias() += da2 * G1[u + 1].transpose();
    G.Wh2.noalias() += da2 * G2[u].transpose();
    G.b2 += da2.rowwise().sum();
    dh1.noalias() += V.Wi2.transpose() * da2;
    dh2.noalias() = V.Wh2.transpose() * da2;

    Mat da1 = lstm_backward(A1[u], C1[u], C1[u + 1], dh1, dc1);
    G.Wi1.noalias() += da1 * Epost[u].transpose();
    G.Wh1.noalias() += da1 * G1[u].transpose();
    G.b1 += da1.rowwise().sum();
    Mat dE = V.Wi1.transpose() * da1;
    dh1.noalias() = V.Wh1.transpose() * da1;

    for (int j = 0; j < E; ++j)
      for (int b = 0; b < B; ++b)
        if (Epre[u](j, b) < 0) {
          G.al(j) += Epre[u](j, b) * dE(j, b);
          dE(j, b) *= V.al(j);
        }
    G.We.noalias() += dE * Xs[u].transpose();
    G.be += dE.rowwise().sum();
  }
  return st;
}

}  // namespace rnn_detail

class RnnModel {
 public:
  int in_dim = 0;  // schema width plus the dt channel
  int embed_dim = 0;
  int hidden = 0;
  std::uint64_t schema_hash = 0;
  NormalizationStats norm;
  std::vector<double> params;

  rnn_detail::Layout layout() const { return {in_dim, embed_dim, hidden}; }

  struct Prediction {
    std::size_t index = 0;  // sample position within the stream
    double proba = 0;
  };

  // Stateful forward over one user's full stream from a fresh state,
  // scoring every ground-truth sample.
  std::vector<Prediction> predict_stream(const SampleSeq& seq) const {
    using rnn_detail::Mat;
    if (static_cast<int>(seq.width) + 1 != in_dim)
      throw SchemaError("stream width differs from the trained model");
    if (norm.width != seq.width) throw SchemaError("normalization stats width differs");
    rnn_detail::Layout lay = layout();
    rnn_detail::CViews V(params.data(), lay);
    Mat h1 = Mat::Zero(hidden, 1), c1 = h1, h2 = h1, c2 = h1;
    Mat x(in_dim, 1), a1(4 * hidden, 1), a2(4 * hidden, 1), e(embed_dim, 1);
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto r = seq.ref(i);
      x.setZero();
      for (std::size_t k = 0; k < r.cols.size(); ++k)
        x(static_cast<int>(r.cols[k]), 0) = normalize_value(norm, r.cols[k], r.vals[k]);
      x(in_dim - 1, 0) = std::min(r.dt_min, norm.dt_cap_min) / norm.dt_cap_min;
      e.noalias() = V.We * x;
      e.col(0) += V.be;
      for (int j = 0; j < embed_dim; ++j)
        if (e(j, 0) < 0) e(j, 0) *= V.al(j);
      rnn_detail::lstm_forward(V.Wi1, V.Wh1, V.b1, e, a1, c1, h1);
      rnn_detail::lstm_forward(V.Wi2, V.Wh2, V.b2, h1, a2, c2, h2);
      if (r.y >= 0) {
        double z = V.wo.dot(h2.col(0)) + *V.bo;
        out.push_back({i, sigmoid(z)});
      }
    }
    return out;
  }

  void save(std::ostream& os) const {
    os << "attend-rnn v1\n";
    os << "dims " << in_dim << " " << embed_dim << " " << hidden << "\n";
    os << "schema_hash " << hex64(schema_hash) << "\n";
    os << "norm_width " << norm.width << "\n";
    os << strfmt("norm_dt_cap %.17g\n", norm.dt_cap_min);
    auto row = [&os](const char* name, const std::vector<double>& vals) {
      os << name;
      for (double v : vals) os << strfmt(" %.17g", v);
      os << "\n";
    };
    row("norm_lo", norm.lo);
    row("norm_hi", norm.hi);
    os << "norm_trained";
    for (auto b : norm.trained) os << " " << static_cast<int>(b);
    os << "\n";
    os << "params " << params.size() << "\n";
    for (double p : params) os << strfmt("%.17g\n", p);
    os << "end\n";
    if (!os) throw IoError("failed to write the recurrent model");
  }

  static RnnModel load(std::istream& is) {
    RnnModel m;
    std::string line;
    auto next = [&]() -> std::string& {
      if (!std::getline(is, line)) throw IoError("truncated recurrent model");
      return line;
    };
    if (next() != "attend-rnn v1") throw SchemaError("not a recurrent model file");
    if (std::sscanf(next().c_str(), "dims %d %d %d", &m.in_dim, &m.embed_dim, &m.hidden) != 3)
      throw SchemaError("missing model dims");
    {
      char buf[32] = {0};
      if (std::sscanf(next().c_str(), "schema_hash %31s", buf) != 1)
        throw SchemaError("missing schema hash");
      m.schema_hash = std::strtoull(buf, nullptr, 16);
    }
    if (std::sscanf(next().c_str(), "norm_width %u", &m.norm.width) != 1)
      throw SchemaError("missing normalization width");
    if (std::sscanf(next().c_str(), "norm_dt_cap %lg", &m.norm.dt_cap_min) != 1)
      throw SchemaError("missing dt cap");
    auto parse_row = [&](const char* name, std::vector<double>& vals) {
      std::istringstream ss(next());
      std::string tag;
      ss >> tag;
      if (tag != name) throw SchemaError("missing normalization row");
      double v;
      while (ss >> v) vals.push_back(v);
      if (vals.size() != m.norm.width) throw SchemaError("normalization row has wrong width");
    };
    parse_row("norm_lo", m.norm.lo);
    parse_row("norm_hi", m.norm.hi);
    {
      std::istringstream ss(next());
      std::string tag;
      ss >> tag;
      if (tag != "norm_trained") throw SchemaError("missing trained flags");
      int v;
      while (ss >> v) m.norm.trained.push_back(static_cast<std::uint8_t>(v));
      if (m.norm.trained.size() != m.norm.width) throw SchemaError("trained flags have wrong width");
    }
    std::size_t count = 0;
    if (std::sscanf(next().c_str(), "params %zu", &count) != 1)
      throw SchemaError("missing parameter count");
    rnn_detail::Layout lay(m.in_dim, m.embed_dim, m.hidden);
    if (count != lay.total) throw SchemaError("parameter count does not match dims");
    if (static_cast<int>(m.norm.width) + 1 != m.in_dim)
      throw SchemaError("normalization width does not match dims");
    m.params.reserve(count);
    for (std::size_t i = 0; i < count; ++i) m.params.push_back(std::strtod(next().c_str(), nullptr));
    if (next() != "end") throw SchemaError("missing model trailer");
    return m;
  }
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0;
  double val_auc = 0;
};

struct RnnTrainResult {
  RnnModel model;
  std::vector<EpochStat> history;
  int best_epoch = 0;
};

// Trains on bucketed batches of the training streams (already cut at the
// training boundary and weighted). Validation scores come from a stateful
// pass over val_streams, keeping predictions in [val_begin_t, val_end_t).
// Early stopping keeps the parameters of the best validation epoch.
inline RnnTrainResult train_rnn(const std::vector<const SampleSeq*>& train_streams,
                                const std::vector<const SampleSeq*>& val_streams,
                                const NormalizationStats& norm, std::uint64_t schema_hash,
                                std::int64_t val_begin_t, std::int64_t val_end_t,
                                const RnnConfig& cfg = {}) {
  using rnn_detail::Mat;
  rnn_detail::check_config(cfg);
  if (norm.width == 0) throw ConfigError("normalization stats are empty");
  for (const auto* s : train_streams)
    if (s && s->width != norm.width) throw SchemaError("training stream width differs");
  for (const auto* s : val_streams) {
    if (!s) throw ValidationError("null validation stream");
    if (s->width != norm.width) throw SchemaError("validation stream width differs");
  }

  auto plan = build_buckets(train_streams, cfg.seq);
  auto order = training_order(plan);
  rnn_detail::Layout lay(static_cast<int>(norm.width) + 1, cfg.embed_dim, cfg.hidden);

  RnnTrainResult out;
  out.model.in_dim = lay.in;
  out.model.embed_dim = cfg.embed_dim;
  out.model.hidden = cfg.hidden;
  out.model.schema_hash = schema_hash;
  out.model.norm = norm;

  auto params = rnn_detail::init_params(lay, cfg);
  std::vector<double> grad(lay.total), am(lay.total, 0.0), av(lay.total, 0.0);
  std::int64_t adam_t = 0;
  Mat h1, c1, h2, c2;

  auto best_params = params;
  double best_score = -std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double num = 0, den = 0;
    for (const auto& step : order) {
      const auto& bucket = plan.buckets[static_cast<std::size_t>(step.bucket)];
      const auto B = static_cast<Eigen::Index>(bucket.slots.size());
      if (!step.carry_state) {
        h1 = Mat::Zero(cfg.hidden, B);
        c1 = h1;
        h2 = h1;
        c2 = h1;
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      auto bs = rnn_detail::run_batch(lay, params, norm, bucket, step.batch, cfg.seq.seq_len, h1,
                                      c1, h2, c2, &grad);
      num += bs.loss_num;
      den += bs.weight_sum;
      if (!(bs.weight_sum > 0)) continue;

      double sq = 0;
      for (double g : grad) sq += g * g;
      double scale = std::sqrt(sq) > cfg.clip_norm ? cfg.clip_norm / std::sqrt(sq) : 1.0;
      ++adam_t;
      double bc1 = 1.0 - std::pow(0.9, static_cast<double>(adam_t));
      double bc2 = 1.0 - std::pow(0.999, static_cast<double>(adam_t));
      for (std::size_t k = 0; k < lay.total; ++k) {
        double g = grad[k] * scale;
        am[k] = 0.9 * am[k] + 0.1 * g;
        av[k] = 0.999 * av[k] + 0.001 * g * g;
        params[k] -= cfg.learning_rate * (am[k] / bc1) / (std::sqrt(av[k] / bc2) + 1e-8);
      }
    }

    RnnModel snap = out.model;
    snap.params = params;
    std::vector<PredRecord> recs;
    for (const auto* s : val_streams)
      for (const auto& pr : snap.predict_stream(*s)) {
        auto r = s->ref(pr.index);
        if (r.t >= val_begin_t && r.t < val_end_t)
          recs.push_back({s->user_id, static_cast<AppCategory>(r.category), r.y, pr.proba});
      }
    double auc = recs.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : aggregate_predictions(recs).mean_auc;
    out.history.push_back(
        {epoch, den > 0 ? num / den : std::numeric_limits<double>::quiet_NaN(), auc});

    double score = std::isnan(auc) ? -1.0 : auc;
    if (score > best_score) {
      best_score = score;
      best_params = params;
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  out.model.params = std::move(best_params);
  return out;
}

}  // namespace attend
