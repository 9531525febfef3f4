#pragma once

#include <filesystem>

#include <Eigen/Core>

namespace affectlab::learn {

// Per-feature affine map of the fit range onto [-1, 1]. Columns with
// max == min map to 0; values outside the fit range are clipped.
struct RangeScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

RangeScaler rescale_fit(const Eigen::MatrixXd& X);
inline Eigen::VectorXd rescale_apply(const RangeScaler& s, const Eigen::VectorXd& x) { return s.apply(x); }
inline Eigen::MatrixXd rescale_apply(const RangeScaler& s, const Eigen::MatrixXd& X) { return s.apply(X); }

void save_scaler(const RangeScaler& s, const std::filesystem::path& path);
RangeScaler load_scaler(const std::filesystem::path& path);

}  // namespace affectlab::learn
