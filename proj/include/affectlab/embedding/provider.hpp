#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "affectlab/core/exec.hpp"
#include "affectlab/image/image.hpp"

namespace affectlab::embedding {

inline constexpr std::size_t kDefaultDim = 4096;

// Which pretrained network a request is meant for: topo maps and
// spectrograms go to the generic image network, face crops to the face one.
enum class ImageProfile { generic, face };

// image (224x224x3) -> fixed-length vector. Identical inputs give identical
// outputs; dim() never changes for an instance.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  // Stable identity used in cache keys.
  virtual std::string id() const = 0;
  virtual std::vector<Eigen::VectorXd> embed_batch(std::span<const RgbImage> images, ImageProfile profile) const = 0;

  Eigen::VectorXd embed(const RgbImage& image, ImageProfile profile = ImageProfile::generic) const;
};

// Offline stand-in for the pretrained network: 14x14 block means of
// R, G, B and gray (16x16x4 = 1024 inputs in [-0.5, 0.5]), a seeded random
// projection to `dim`, then tanh.
class StubProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kInputs = 1024;

  explicit StubProvider(std::uint64_t seed, std::size_t dim = kDefaultDim, Exec exec = Exec::parallel);

  std::size_t dim() const override { return dim_; }
  std::string id() const override;
  std::vector<Eigen::VectorXd> embed_batch(std::span<const RgbImage> images, ImageProfile profile) const override;

  // The pooled input vector the projection is applied to.
  static Eigen::VectorXd pooled_input(const RgbImage& image);
  // Projection rows for a profile (dim x 1024).
  const Eigen::MatrixXd& projection(ImageProfile profile) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  Exec exec_;
  mutable std::once_flag once_[2];
  mutable Eigen::MatrixXd proj_[2];
};

// y = tanh(P x), one output row per thread chunk in the parallel variant.
Eigen::VectorXd project_tanh(const Eigen::MatrixXd& projection, const Eigen::VectorXd& x, Exec exec);

// Returns zero vectors; the in-process twin of the sidecar's echo mode.
class ZeroProvider final : public EmbeddingProvider {
 public:
  explicit ZeroProvider(std::size_t dim = kDefaultDim) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  std::string id() const override { return "zero:dim=" + std::to_string(dim_); }
  std::vector<Eigen::VectorXd> embed_batch(std::span<const RgbImage> images, ImageProfile) const override;

 private:
  std::size_t dim_;
};

}  // namespace affectlab::embedding
