#include "affectlab/learn/elm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>

#include "affectlab/core/binary_io.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/rng.hpp"

namespace affectlab::learn {

namespace {

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& G, const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw Error("elm: singular system (ridge too small)");
  Eigen::MatrixXd out = llt.solve(rhs);
  if (!out.allFinite()) throw Error("elm: singular system (ridge too small)");
  return out;
}

}  // namespace

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = static_cast<int>(i);
  return best;
}

Eigen::MatrixXd ElmModel::hidden_activations(const Eigen::MatrixXd& X) const {
  if (X.cols() != input_weights.cols())
    throw Error("elm: input dim " + std::to_string(X.cols()) + " != " + std::to_string(input_weights.cols()));
  Eigen::MatrixXd Z = X * input_weights.transpose();
  Z.rowwise() += biases.transpose();
  return Z.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
}

Eigen::MatrixXd ElmModel::scores(const Eigen::MatrixXd& X) const { return hidden_activations(X) * output_weights; }

Eigen::VectorXd ElmModel::scores(const Eigen::VectorXd& x) const {
  return scores(Eigen::MatrixXd(x.transpose())).row(0).transpose();
}

int ElmModel::predict(const Eigen::VectorXd& x) const { return argmax_lowest(scores(x)); }

std::vector<int> ElmModel::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd S = scores(X);
  std::vector<int> out(static_cast<std::size_t>(S.rows()));
  for (Eigen::Index r = 0; r < S.rows(); ++r) out[static_cast<std::size_t>(r)] = argmax_lowest(S.row(r).transpose());
  return out;
}

ElmPrediction elm_predict(const ElmModel& m, const Eigen::VectorXd& x) {
  ElmPrediction p;
  p.scores = m.scores(x);
  p.label = argmax_lowest(p.scores);
  return p;
}

ElmModel elm_train(const Eigen::MatrixXd& X, const std::vector<int>& labels, int classes, const ElmConfig& cfg) {
  if (cfg.hidden < 1) throw Error("elm: hidden size must be >= 1");
  if (cfg.ridge < 0) throw Error("elm: ridge must be >= 0");
  if (X.rows() != static_cast<Eigen::Index>(labels.size())) throw Error("elm: sample/label count mismatch");
  std::set<int> present;
  for (int l : labels) {
    if (l < 0 || l >= classes) throw Error("elm: label out of range");
    present.insert(l);
  }
  if (present.size() < 2) throw Error("elm: training set has fewer than 2 classes");

  const Eigen::Index n = X.rows(), d = X.cols(), H = cfg.hidden;
  ElmModel m;
  Rng rng(cfg.seed, 0x454c4d);
  m.input_weights.resize(H, d);
  for (Eigen::Index r = 0; r < H; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m.input_weights(r, c) = rng.uniform(-1.0, 1.0);
  m.biases.resize(H);
  for (Eigen::Index r = 0; r < H; ++r) m.biases(r) = rng.uniform(-1.0, 1.0);

  const Eigen::MatrixXd A = m.hidden_activations(X);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) T(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  // Primal (H x H) or dual (n x n) normal equations, whichever is smaller.
  if (n >= H) {
    Eigen::MatrixXd G = A.transpose() * A;
    G.diagonal().array() += cfg.ridge;
    m.output_weights = solve_spd(G, A.transpose() * T);
  } else {
    Eigen::MatrixXd G = A * A.transpose();
    G.diagonal().array() += cfg.ridge;
    m.output_weights = A.transpose() * solve_spd(G, T);
  }
  return m;
}

int elm_select_hidden(const Eigen::MatrixXd& X, const std::vector<int>& labels, int classes, const ElmConfig& cfg,
                      const std::vector<int>& grid) {
  if (grid.empty()) return cfg.hidden;
  const std::size_t n = labels.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(cfg.seed, 0x53454c);
  rng.shuffle(idx.begin(), idx.end());
  const std::size_t n_val = n / 5;
  if (n_val == 0) return cfg.hidden;
  std::vector<std::size_t> tr(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::vector<std::size_t> va(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::set<int> tr_classes;
  for (auto i : tr) tr_classes.insert(labels[i]);
  if (tr_classes.size() < 2) return cfg.hidden;

  Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(tr.size()), X.cols()), Xva(static_cast<Eigen::Index>(va.size()), X.cols());
  std::vector<int> ytr, yva;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Xtr.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(tr[i]));
    ytr.push_back(labels[tr[i]]);
  }
  for (std::size_t i = 0; i < va.size(); ++i) {
    Xva.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(va[i]));
    yva.push_back(labels[va[i]]);
  }

  std::vector<int> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  int best_h = sorted.front();
  int best_correct = -1;
  for (int h : sorted) {
    ElmConfig c = cfg;
    c.hidden = h;
    const auto pred = elm_train(Xtr, ytr, classes, c).predict(Xva);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == yva[i];
    if (correct > best_correct) {
      best_correct = correct;
      best_h = h;
    }
  }
  return best_h;
}

void save_elm(const ElmModel& m, const std::filesystem::path& path) {
  BinaryWriter w("AELM", 1);
  w.mat(m.input_weights);
  w.vec(m.biases);
  w.mat(m.output_weights);
  w.save(path);
}

ElmModel load_elm(const std::filesystem::path& path) {
  auto r = BinaryReader::open(path, "AELM", 1);
  ElmModel m;
  m.input_weights = r.mat();
  m.biases = r.vec();
  m.output_weights = r.mat();
  if (m.biases.size() != m.input_weights.rows() || m.output_weights.rows() != m.input_weights.rows())
    throw Error("elm file: inconsistent shapes in " + path.string());
  return m;
}

}  // namespace affectlab::learn
