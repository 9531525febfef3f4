#include "affectlab/learn/lstm.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "affectlab/core/binary_io.hpp"
#include "affectlab/core/csv.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/rng.hpp"

namespace affectlab::learn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMap = Eigen::Map<const MatrixXd>;
using MMap = Eigen::Map<MatrixXd>;

namespace {

MatrixXd sigmoid(const MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Per-layer activations kept for the backward pass.
struct LayerTrace {
  std::vector<MatrixXd> gates;  // 4H x B, activated i f g o
  std::vector<MatrixXd> c;      // H x B, c[t]
  std::vector<MatrixXd> tc;     // tanh(c[t])
  std::vector<MatrixXd> h;      // H x B
};

}  // namespace

LstmModel::LstmModel(int input_dim, std::vector<int> layers, int classes, std::uint64_t seed)
    : input_dim_(input_dim), classes_(classes), layers_(std::move(layers)) {
  if (input_dim < 1 || classes < 2 || layers_.empty()) throw Error("lstm: invalid shape");
  for (int h : layers_)
    if (h < 1) throw Error("lstm: layer size must be >= 1");
  build_offsets();

  Rng rng(seed, 0x4c53544d);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Index H = layers_[l];
    const double a = 1.0 / std::sqrt(static_cast<double>(H));
    for (Index i = off_[l].W; i < off_[l].b; ++i) params_(i) = rng.uniform(-a, a);
    for (Index i = 0; i < 4 * H; ++i) params_(off_[l].b + i) = (i >= H && i < 2 * H) ? 1.0 : 0.0;
  }
  const double a = 1.0 / std::sqrt(static_cast<double>(layers_.back()));
  for (Index i = head_V_; i < head_c_; ++i) params_(i) = rng.uniform(-a, a);
  for (Index i = head_c_; i < params_.size(); ++i) params_(i) = 0.0;
}

Index LstmModel::layer_in(std::size_t l) const { return l == 0 ? input_dim_ : layers_[l - 1]; }

void LstmModel::build_offsets() {
  off_.clear();
  Index pos = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Index H = layers_[l];
    Offsets o;
    o.W = pos;
    pos += 4 * H * layer_in(l);
    o.U = pos;
    pos += 4 * H * H;
    o.b = pos;
    pos += 4 * H;
    off_.push_back(o);
  }
  head_V_ = pos;
  pos += static_cast<Index>(classes_) * layers_.back();
  head_c_ = pos;
  pos += classes_;
  params_.setZero(pos);
}

double LstmModel::loss(const std::vector<const Sequence*>& batch, const std::vector<int>& labels, VectorXd* grad) const {
  if (batch.empty() || batch.size() != labels.size()) throw Error("lstm: empty batch or label count mismatch");
  const Index B = static_cast<Index>(batch.size());
  const Index T = batch.front()->cols();
  if (T < 1) throw Error("lstm: empty sequence");
  for (const auto* s : batch) {
    if (s->cols() != T) throw Error("lstm: ragged sequence lengths in batch");
    if (s->rows() != input_dim_)
      throw Error("lstm: sequence has " + std::to_string(s->rows()) + " features, model expects " +
                  std::to_string(input_dim_));
  }

  std::vector<MatrixXd> xs(static_cast<std::size_t>(T), MatrixXd(input_dim_, B));
  for (Index t = 0; t < T; ++t)
    for (Index b = 0; b < B; ++b) xs[static_cast<std::size_t>(t)].col(b) = batch[static_cast<std::size_t>(b)]->col(t);

  const std::size_t L = layers_.size();
  std::vector<LayerTrace> trace(L);
  const std::vector<MatrixXd>* input = &xs;
  for (std::size_t l = 0; l < L; ++l) {
    const Index H = layers_[l];
    CMap W(params_.data() + off_[l].W, 4 * H, layer_in(l));
    CMap U(params_.data() + off_[l].U, 4 * H, H);
    Eigen::Map<const VectorXd> bias(params_.data() + off_[l].b, 4 * H);
    auto& tr = trace[l];
    MatrixXd h = MatrixXd::Zero(H, B), c = MatrixXd::Zero(H, B);
    for (Index t = 0; t < T; ++t) {
      MatrixXd z = W * (*input)[static_cast<std::size_t>(t)] + U * h;
      z.colwise() += bias;
      MatrixXd g(4 * H, B);
      g.topRows(2 * H) = sigmoid(z.topRows(2 * H));
      g.middleRows(2 * H, H) = z.middleRows(2 * H, H).array().tanh().matrix();
      g.bottomRows(H) = sigmoid(z.bottomRows(H));
      c = (g.middleRows(H, H).array() * c.array() + g.topRows(H).array() * g.middleRows(2 * H, H).array()).matrix();
      MatrixXd tcv = c.array().tanh().matrix();
      h = (g.bottomRows(H).array() * tcv.array()).matrix();
      tr.gates.push_back(std::move(g));
      tr.c.push_back(c);
      tr.tc.push_back(std::move(tcv));
      tr.h.push_back(h);
    }
    input = &tr.h;
  }

  const Index Htop = layers_.back();
  CMap V(params_.data() + head_V_, classes_, Htop);
  Eigen::Map<const VectorXd> cb(params_.data() + head_c_, classes_);
  const MatrixXd& hT = trace.back().h.back();
  MatrixXd logits = V * hT;
  logits.colwise() += cb;
  MatrixXd P(classes_, B);
  double loss = 0.0;
  for (Index b = 0; b < B; ++b) {
    const double mx = logits.col(b).maxCoeff();
    const VectorXd e = (logits.col(b).array() - mx).exp().matrix();
    const double s = e.sum();
    P.col(b) = e / s;
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= classes_) throw Error("lstm: label out of range");
    loss -= (logits(y, b) - mx) - std::log(s);
  }
  loss /= static_cast<double>(B);
  if (!grad) return loss;

  grad->setZero(params_.size());
  MatrixXd dlogits = P;
  for (Index b = 0; b < B; ++b) dlogits(labels[static_cast<std::size_t>(b)], b) -= 1.0;
  dlogits /= static_cast<double>(B);
  MMap(grad->data() + head_V_, classes_, Htop) = dlogits * hT.transpose();
  grad->segment(head_c_, classes_) = dlogits.rowwise().sum();

  // dh_ext[t]: gradient arriving at h[t] from above (head or next layer).
  std::vector<MatrixXd> dh_ext(static_cast<std::size_t>(T), MatrixXd::Zero(Htop, B));
  dh_ext.back() = V.transpose() * dlogits;

  for (std::size_t li = L; li-- > 0;) {
    const Index H = layers_[li];
    const Index in = layer_in(li);
    CMap W(params_.data() + off_[li].W, 4 * H, in);
    CMap U(params_.data() + off_[li].U, 4 * H, H);
    MMap dW(grad->data() + off_[li].W, 4 * H, in);
    MMap dU(grad->data() + off_[li].U, 4 * H, H);
    Eigen::Map<VectorXd> db(grad->data() + off_[li].b, 4 * H);
    const auto& tr = trace[li];
    const std::vector<MatrixXd>& x = li == 0 ? xs : trace[li - 1].h;
    std::vector<MatrixXd> dx(li == 0 ? 0 : static_cast<std::size_t>(T));

    MatrixXd dh_next = MatrixXd::Zero(H, B), dc_next = MatrixXd::Zero(H, B);
    const MatrixXd zero = MatrixXd::Zero(H, B);
    for (Index t = T; t-- > 0;) {
      const auto st = static_cast<std::size_t>(t);
      const MatrixXd& g = tr.gates[st];
      const auto gi = g.topRows(H).array();
      const auto gf = g.middleRows(H, H).array();
      const auto gg = g.middleRows(2 * H, H).array();
      const auto go = g.bottomRows(H).array();
      const auto tc = tr.tc[st].array();
      const MatrixXd& c_prev = t > 0 ? tr.c[st - 1] : zero;
      const MatrixXd& h_prev = t > 0 ? tr.h[st - 1] : zero;

      const MatrixXd dh = dh_ext[st] + dh_next;
      const MatrixXd dc = (dh.array() * go * (1.0 - tc.square()) + dc_next.array()).matrix();
      MatrixXd dz(4 * H, B);
      dz.topRows(H) = (dc.array() * gg * gi * (1.0 - gi)).matrix();
      dz.middleRows(H, H) = (dc.array() * c_prev.array() * gf * (1.0 - gf)).matrix();
      dz.middleRows(2 * H, H) = (dc.array() * gi * (1.0 - gg.square())).matrix();
      dz.bottomRows(H) = (dh.array() * tc * go * (1.0 - go)).matrix();

      dW.noalias() += dz * x[st].transpose();
      if (t > 0) dU.noalias() += dz * h_prev.transpose();
      db += dz.rowwise().sum();
      if (li > 0) dx[st] = W.transpose() * dz;
      dh_next = U.transpose() * dz;
      dc_next = (dc.array() * gf).matrix();
    }
    if (li > 0) dh_ext = std::move(dx);
  }
  return loss;
}

VectorXd LstmModel::probabilities(const Sequence& seq) const {
  // Reuses the batched forward path via a one-sequence batch.
  const Index Htop = layers_.back();
  const std::size_t L = layers_.size();
  MatrixXd input = seq;
  if (seq.rows() != input_dim_) throw Error("lstm: sequence feature count mismatch");
  for (std::size_t l = 0; l < L; ++l) {
    const Index H = layers_[l];
    CMap W(params_.data() + off_[l].W, 4 * H, layer_in(l));
    CMap U(params_.data() + off_[l].U, 4 * H, H);
    Eigen::Map<const VectorXd> bias(params_.data() + off_[l].b, 4 * H);
    VectorXd h = VectorXd::Zero(H), c = VectorXd::Zero(H);
    MatrixXd out(H, seq.cols());
    for (Index t = 0; t < seq.cols(); ++t) {
      VectorXd z = W * input.col(t) + U * h + bias;
      const VectorXd gi = sigmoid(z.head(H)), gf = sigmoid(z.segment(H, H));
      const VectorXd gg = z.segment(2 * H, H).array().tanh().matrix(), go = sigmoid(z.tail(H));
      c = (gf.array() * c.array() + gi.array() * gg.array()).matrix();
      h = (go.array() * c.array().tanh()).matrix();
      out.col(t) = h;
    }
    input = std::move(out);
  }
  CMap V(params_.data() + head_V_, classes_, Htop);
  Eigen::Map<const VectorXd> cb(params_.data() + head_c_, classes_);
  VectorXd logits = V * input.col(input.cols() - 1) + cb;
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

int LstmModel::predict(const Sequence& seq) const {
  const VectorXd p = probabilities(seq);
  int best = 0;
  for (Index i = 1; i < p.size(); ++i)
    if (p(i) > p(best)) best = static_cast<int>(i);
  return best;
}

LstmTrainResult lstm_train(const std::vector<Sequence>& sequences, const std::vector<int>& labels, int classes,
                           const LstmConfig& cfg) {
  if (sequences.empty()) throw Error("lstm_train: no sequences");
  if (sequences.size() != labels.size()) throw Error("lstm_train: sequence/label count mismatch");
  const Index T = sequences.front().cols(), F = sequences.front().rows();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].cols() != T)
      throw Error("lstm_train: ragged sequence lengths (" + std::to_string(sequences[i].cols()) + " vs " +
                  std::to_string(T) + " at index " + std::to_string(i) + ")");
    if (sequences[i].rows() != F) throw Error("lstm_train: feature count differs at index " + std::to_string(i));
  }
  if (cfg.batch_size < 1 || cfg.epochs < 0) throw Error("lstm_train: invalid batch size or epochs");

  LstmTrainResult res;
  res.model = LstmModel(static_cast<int>(F), cfg.layers, classes, cfg.seed);

  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed, 0x5347444d);
  std::vector<std::size_t> train_idx = order, val_idx;
  const std::size_t n_val = cfg.patience > 0 ? static_cast<std::size_t>(cfg.validation_fraction * sequences.size()) : 0;
  if (n_val >= 1 && n_val < sequences.size()) {
    rng.shuffle(order.begin(), order.end());
    val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  }

  const auto batch_of = [&](const std::vector<std::size_t>& idx, std::size_t from, std::size_t to) {
    std::pair<std::vector<const Sequence*>, std::vector<int>> b;
    for (std::size_t i = from; i < to; ++i) {
      b.first.push_back(&sequences[idx[i]]);
      b.second.push_back(labels[idx[i]]);
    }
    return b;
  };

  VectorXd velocity = VectorXd::Zero(res.model.params().size());
  VectorXd grad;
  VectorXd best_params = res.model.params();
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx.begin(), train_idx.end());
    double total = 0.0;
    for (std::size_t from = 0; from < train_idx.size(); from += bs) {
      const std::size_t to = std::min(train_idx.size(), from + bs);
      const auto [seqs, ys] = batch_of(train_idx, from, to);
      const double l = res.model.loss(seqs, ys, &grad);
      if (!std::isfinite(l)) throw Error("lstm_train: non-finite loss at epoch " + std::to_string(epoch));
      total += l * static_cast<double>(to - from);
      const double norm = grad.norm();
      if (cfg.clip_norm > 0 && norm > cfg.clip_norm) grad *= cfg.clip_norm / norm;
      velocity = cfg.momentum * velocity - cfg.learning_rate * grad;
      res.model.params() += velocity;
    }
    res.train_loss.push_back(total / static_cast<double>(train_idx.size()));

    if (!val_idx.empty()) {
      const auto [seqs, ys] = batch_of(val_idx, 0, val_idx.size());
      const double vl = res.model.loss(seqs, ys);
      if (!std::isfinite(vl)) throw Error("lstm_train: non-finite validation loss at epoch " + std::to_string(epoch));
      res.val_loss.push_back(vl);
      if (vl < best_val) {
        best_val = vl;
        best_params = res.model.params();
        res.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    } else {
      res.best_epoch = epoch;
    }
  }
  if (!val_idx.empty()) res.model.params() = best_params;
  return res;
}

void write_loss_curve(const std::filesystem::path& path, const LstmTrainResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out << e << ',' << format_double(r.train_loss[e]) << ',';
    if (e < r.val_loss.size()) out << format_double(r.val_loss[e]);
    out << '\n';
  }
}

void save_lstm(const LstmModel& m, const std::filesystem::path& path) {
  BinaryWriter w("ALSM", 1);
  w.u32(static_cast<std::uint32_t>(m.input_dim()));
  w.u32(static_cast<std::uint32_t>(m.classes()));
  w.u32(static_cast<std::uint32_t>(m.layers().size()));
  for (int h : m.layers()) w.u32(static_cast<std::uint32_t>(h));
  w.vec(m.params());
  w.save(path);
}

LstmModel load_lstm(const std::filesystem::path& path) {
  auto r = BinaryReader::open(path, "ALSM", 1);
  const int in = static_cast<int>(r.u32());
  const int classes = static_cast<int>(r.u32());
  const std::uint32_t nl = r.u32();
  if (nl == 0 || nl > 64) throw Error("lstm file: bad layer count in " + path.string());
  std::vector<int> layers;
  for (std::uint32_t i = 0; i < nl; ++i) layers.push_back(static_cast<int>(r.u32()));
  LstmModel m(in, layers, classes, 0);
  VectorXd p = r.vec();
  if (p.size() != m.params().size()) throw Error("lstm file: parameter count mismatch in " + path.string());
  m.params() = std::move(p);
  return m;
}

}  // namespace affectlab::learn
