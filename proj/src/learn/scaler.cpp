#include "affectlab/learn/scaler.hpp"

#include <algorithm>

#include "affectlab/core/binary_io.hpp"
#include "affectlab/core/error.hpp"

namespace affectlab::learn {

RangeScaler rescale_fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw Error("rescale_fit: empty matrix");
  return {X.colwise().minCoeff().transpose(), X.colwise().maxCoeff().transpose()};
}

Eigen::VectorXd RangeScaler::apply(const Eigen::VectorXd& x) const {
  if (x.size() != min.size()) throw Error("rescale: dim " + std::to_string(x.size()) + " != " + std::to_string(min.size()));
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double span = max(i) - min(i);
    if (!(span > 0.0)) {
      y(i) = 0.0;
      continue;
    }
    y(i) = std::clamp(2.0 * (x(i) - min(i)) / span - 1.0, -1.0, 1.0);
  }
  return y;
}

Eigen::MatrixXd RangeScaler::apply(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Y(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) Y.row(r) = apply(Eigen::VectorXd(X.row(r).transpose())).transpose();
  return Y;
}

void save_scaler(const RangeScaler& s, const std::filesystem::path& path) {
  BinaryWriter w("ASCL", 1);
  w.vec(s.min);
  w.vec(s.max);
  w.save(path);
}

RangeScaler load_scaler(const std::filesystem::path& path) {
  auto r = BinaryReader::open(path, "ASCL", 1);
  RangeScaler s;
  s.min = r.vec();
  s.max = r.vec();
  if (s.min.size() != s.max.size()) throw Error("scaler file: inconsistent shapes in " + path.string());
  return s;
}

}  // namespace affectlab::learn
