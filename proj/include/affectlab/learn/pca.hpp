#pragma once

#include <filesystem>

#include <Eigen/Core>

namespace affectlab::learn {

// Rows of `components` are orthonormal principal axes, strongest first.
// Each axis is signed so its largest-magnitude entry is positive (first such
// entry on exact ties), which makes fits reproducible across SVD backends.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // k x d
  Eigen::VectorXd explained_variance;
  double total_variance = 0.0;

  Eigen::Index k() const { return components.rows(); }
  Eigen::Index d() const { return components.cols(); }

  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
  // Row-wise transform of an n x d matrix.
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd inverse_transform(const Eigen::VectorXd& z) const;
};

// Above this min(n, d), and when k < min(n, d) / 4, the leading axes come from
// a seeded block subspace iteration (refined until the k singular values
// change by < 1e-12 relative, at most kPcaSubspaceMaxIter rounds) instead of
// a full SVD. Embedding-sized sequence data (thousands of 4096-d rows) needs it.
inline constexpr Eigen::Index kPcaExactLimit = 600;
inline constexpr int kPcaSubspaceMaxIter = 60;

// X is n x d. Requires n >= 2 and k <= min(d, n); k too large is an error,
// callers cap explicitly.
PcaModel pca_fit(const Eigen::MatrixXd& X, Eigen::Index k);

void save_pca(const PcaModel& m, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace affectlab::learn
