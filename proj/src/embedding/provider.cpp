#include "affectlab/embedding/provider.hpp"

#include <cmath>

#include "affectlab/core/error.hpp"
#include "affectlab/core/rng.hpp"

namespace affectlab::embedding {

Eigen::VectorXd EmbeddingProvider::embed(const RgbImage& image, ImageProfile profile) const {
  return embed_batch(std::span<const RgbImage>(&image, 1), profile).front();
}

StubProvider::StubProvider(std::uint64_t seed, std::size_t dim, Exec exec) : seed_(seed), dim_(dim), exec_(exec) {
  if (dim == 0) throw Error("stub provider: dim must be positive");
}

std::string StubProvider::id() const { return "stub:seed=" + std::to_string(seed_) + ":dim=" + std::to_string(dim_); }

const Eigen::MatrixXd& StubProvider::projection(ImageProfile profile) const {
  const int p = profile == ImageProfile::face ? 1 : 0;
  std::call_once(once_[p], [&] {
    Rng rng(seed_, static_cast<std::uint64_t>(p));
    // Unit-variance uniform entries scaled so P x has O(1) spread.
    const double scale = 4.0 * std::sqrt(3.0) / std::sqrt(static_cast<double>(kInputs));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(kInputs));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = scale * rng.uniform(-1.0, 1.0);
    proj_[p] = std::move(m);
  });
  return proj_[p];
}

Eigen::VectorXd StubProvider::pooled_input(const RgbImage& image) {
  if (image.width != kEmbeddingImageSize || image.height != kEmbeddingImageSize)
    throw Error("stub embed: wrong image shape " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                ", expected 224x224x3");
  constexpr int cells = 16;
  constexpr int block = kEmbeddingImageSize / cells;
  Eigen::VectorXd x(static_cast<Eigen::Index>(kInputs));
  Eigen::Index idx = 0;
  for (int by = 0; by < cells; ++by) {
    for (int bx = 0; bx < cells; ++bx) {
      double sum[3] = {0, 0, 0};
      for (int y = by * block; y < (by + 1) * block; ++y)
        for (int xx = bx * block; xx < (bx + 1) * block; ++xx)
          for (int c = 0; c < 3; ++c) sum[c] += image.at(xx, y)[c];
      const double norm = 1.0 / (255.0 * block * block);
      const double r = sum[0] * norm, g = sum[1] * norm, b = sum[2] * norm;
      x(idx++) = r - 0.5;
      x(idx++) = g - 0.5;
      x(idx++) = b - 0.5;
      x(idx++) = (r + g + b) / 3.0 - 0.5;
    }
  }
  return x;
}

Eigen::VectorXd project_tanh(const Eigen::MatrixXd& projection, const Eigen::VectorXd& x, Exec exec) {
  const Eigen::Index rows = projection.rows();
  Eigen::VectorXd y(rows);
  const auto row_value = [&](Eigen::Index r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < projection.cols(); ++c) s += projection(r, c) * x(c);
    y(r) = std::tanh(s);
  };
  if (exec == Exec::serial) {
    for (Eigen::Index r = 0; r < rows; ++r) row_value(r);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < rows; ++r) row_value(r);
  }
  return y;
}

std::vector<Eigen::VectorXd> StubProvider::embed_batch(std::span<const RgbImage> images, ImageProfile profile) const {
  const auto& p = projection(profile);
  std::vector<Eigen::VectorXd> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(project_tanh(p, pooled_input(img), exec_));
  return out;
}

std::vector<Eigen::VectorXd> ZeroProvider::embed_batch(std::span<const RgbImage> images, ImageProfile) const {
  return std::vector<Eigen::VectorXd>(images.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_)));
}

}  // namespace affectlab::embedding
