#include "affectlab/learn/pca.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include "affectlab/core/binary_io.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/rng.hpp"

namespace affectlab::learn {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& A) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  return qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
}

// Top-k right singular vectors and values of Xc by block subspace iteration
// with a fixed-seed start, run until the leading k singular values settle.
void subspace_svd(const Eigen::MatrixXd& Xc, Eigen::Index k, Eigen::MatrixXd& V, Eigen::VectorXd& sv) {
  const Eigen::Index l = std::min<Eigen::Index>(k + std::max<Eigen::Index>(10, k), std::min(Xc.rows(), Xc.cols()));
  Rng rng(0x50434121);
  Eigen::MatrixXd omega(Xc.cols(), l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < Xc.cols(); ++i) omega(i, j) = rng.normal();
  Eigen::MatrixXd Q = orthonormal_basis(Xc * omega);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(k);
  for (int it = 0; it < kPcaSubspaceMaxIter; ++it) {
    const Eigen::MatrixXd Z = orthonormal_basis(Xc.transpose() * Q);  // d x l
    const Eigen::MatrixXd Y = Xc * Z;                                  // n x l
    // Rayleigh-Ritz on span(Z): Xc Z = U S W^T gives Xc ~ U S (Z W)^T
    Eigen::BDCSVD<Eigen::MatrixXd> small(Y, Eigen::ComputeThinV);
    sv = small.singularValues().head(k);
    V = Z * small.matrixV().leftCols(k);
    const double change = ((sv - prev).cwiseAbs().array() / sv.array().max(1e-300)).maxCoeff();
    if (it > 0 && change < 1e-12) return;
    prev = sv;
    Q = orthonormal_basis(Y);
  }
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& X, Eigen::Index k) {
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n < 2) throw Error("pca_fit: need at least 2 samples, got " + std::to_string(n));
  if (k < 1 || k > std::min(n, d))
    throw Error("pca_fit: k=" + std::to_string(k) + " exceeds min(d, n)=" + std::to_string(std::min(n, d)));

  PcaModel m;
  m.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd Xc = X.rowwise() - m.mean.transpose();
  m.total_variance = Xc.squaredNorm() / static_cast<double>(n - 1);

  Eigen::MatrixXd V;
  Eigen::VectorXd sv;
  const Eigen::Index r = std::min(n, d);
  if (r > kPcaExactLimit && 4 * k < r) {
    subspace_svd(Xc, k, V, sv);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Xc, Eigen::ComputeThinV);
    V = svd.matrixV().leftCols(k);
    sv = svd.singularValues().head(k);
  }
  m.components = V.transpose();
  m.explained_variance = sv.array().square() / static_cast<double>(n - 1);

  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double a = std::abs(m.components(r, c));
      if (a > best) {
        best = a;
        arg = c;
      }
    }
    if (m.components(r, arg) < 0) m.components.row(r) *= -1.0;
  }
  return m;
}

Eigen::VectorXd PcaModel::transform(const Eigen::VectorXd& x) const {
  if (x.size() != d()) throw Error("pca transform: input dim " + std::to_string(x.size()) + " != " + std::to_string(d()));
  return components * (x - mean);
}

Eigen::MatrixXd PcaModel::transform(const Eigen::MatrixXd& X) const {
  if (X.cols() != d()) throw Error("pca transform: input dim " + std::to_string(X.cols()) + " != " + std::to_string(d()));
  return (X.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::VectorXd PcaModel::inverse_transform(const Eigen::VectorXd& z) const {
  return components.transpose() * z + mean;
}

void save_pca(const PcaModel& m, const std::filesystem::path& path) {
  BinaryWriter w("APCA", 1);
  w.vec(m.mean);
  w.mat(m.components);
  w.vec(m.explained_variance);
  w.f64(m.total_variance);
  w.save(path);
}

PcaModel load_pca(const std::filesystem::path& path) {
  auto r = BinaryReader::open(path, "APCA", 1);
  PcaModel m;
  m.mean = r.vec();
  m.components = r.mat();
  m.explained_variance = r.vec();
  m.total_variance = r.f64();
  if (m.components.cols() != m.mean.size() || m.components.rows() != m.explained_variance.size())
    throw Error("pca file: inconsistent shapes in " + path.string());
  return m;
}

}  // namespace affectlab::learn
