#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "affectlab/embedding/provider.hpp"

namespace affectlab::embedding {

// File exchange with an out-of-process embedder.
//
//   <root>/<job_id>/img_0000.png ...   request images (8-bit RGB)
//   <root>/<job_id>.json               {"job_id", "images": [...], "dim", "profile"}
//   <root>/<job_id>.f32                response: u32 count, u32 dim (little endian),
//                                      then count*dim little-endian float32
//   <root>/<job_id>.error              failure text, instead of a response
//
// Both sides write to "<name>.tmp" and rename, so a visible file is complete.
struct SidecarJob {
  std::string job_id;
  std::vector<std::filesystem::path> images;  // relative to root
  std::size_t dim = kDefaultDim;
  ImageProfile profile = ImageProfile::generic;
};

std::string to_string(ImageProfile p);
ImageProfile parse_profile(const std::string& s);

void write_job(const std::filesystem::path& root, const SidecarJob& job);
SidecarJob read_job(const std::filesystem::path& job_file);

std::vector<std::uint8_t> encode_response(std::span<const Eigen::VectorXd> rows, std::size_t dim);
// Validates header count/dim against the request and the payload length.
// Errors: "dim mismatch", "count mismatch", "malformed response".
std::vector<Eigen::VectorXd> decode_response(std::span<const std::uint8_t> bytes, std::size_t expected_count,
                                             std::size_t expected_dim);

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

class SidecarProvider final : public EmbeddingProvider {
 public:
  explicit SidecarProvider(std::filesystem::path exchange_root, std::size_t dim = kDefaultDim,
                           std::chrono::milliseconds timeout = std::chrono::seconds(300));

  std::size_t dim() const override { return dim_; }
  std::string id() const override { return "sidecar:dim=" + std::to_string(dim_); }
  std::vector<Eigen::VectorXd> embed_batch(std::span<const RgbImage> images, ImageProfile profile) const override;

 private:
  std::filesystem::path root_;
  std::size_t dim_;
  std::chrono::milliseconds timeout_;
};

// Answers jobs in `root` with `provider` (or zero rows when echo is set).
// Processes whatever jobs are pending; returns how many were handled.
std::size_t serve_pending(const std::filesystem::path& root, const EmbeddingProvider& provider, bool echo);

// Polls until `stop` is set.
void serve_forever(const std::filesystem::path& root, const EmbeddingProvider& provider, bool echo,
                   const std::atomic<bool>& stop, std::chrono::milliseconds poll = std::chrono::milliseconds(20));

}  // namespace affectlab::embedding
