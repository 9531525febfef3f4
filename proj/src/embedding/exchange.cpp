#include "affectlab/embedding/exchange.hpp"

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "affectlab/core/error.hpp"
#include "json.hpp"

namespace affectlab::embedding {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ImageProfile p) { return p == ImageProfile::face ? "face" : "generic"; }

ImageProfile parse_profile(const std::string& s) {
  if (s == "generic") return ImageProfile::generic;
  if (s == "face") return ImageProfile::face;
  throw Error("unknown image profile '" + s + "'");
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::mutex& root_mutex(const fs::path& root) {
  static std::mutex guard;
  static std::map<std::string, std::unique_ptr<std::mutex>> per_root;
  std::lock_guard lock(guard);
  auto& m = per_root[fs::weakly_canonical(root).string()];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

}  // namespace

void write_job(const fs::path& root, const SidecarJob& job) {
  json j{{"job_id", job.job_id}, {"dim", job.dim}, {"profile", to_string(job.profile)}, {"images", json::array()}};
  for (const auto& p : job.images) j["images"].push_back(p.generic_string());
  const std::string text = j.dump(2);
  write_file_atomic(root / (job.job_id + ".json"),
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SidecarJob read_job(const fs::path& job_file) {
  std::ifstream in(job_file);
  if (!in) throw Error("cannot open job " + job_file.string());
  try {
    const auto j = json::parse(in);
    SidecarJob job;
    job.job_id = j.at("job_id").get<std::string>();
    job.dim = j.at("dim").get<std::size_t>();
    job.profile = parse_profile(j.value("profile", std::string("generic")));
    for (const auto& p : j.at("images")) job.images.emplace_back(p.get<std::string>());
    return job;
  } catch (const json::exception& e) {
    throw Error("job parse error: " + job_file.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_response(std::span<const Eigen::VectorXd> rows, std::size_t dim) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + rows.size() * dim * 4);
  put_u32(out, static_cast<std::uint32_t>(rows.size()));
  put_u32(out, static_cast<std::uint32_t>(dim));
  for (const auto& r : rows) {
    if (static_cast<std::size_t>(r.size()) != dim) throw Error("encode_response: row length != dim");
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const auto f = static_cast<float>(r(i));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(out, bits);
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> decode_response(std::span<const std::uint8_t> bytes, std::size_t expected_count,
                                             std::size_t expected_dim) {
  if (bytes.size() < 8) throw Error("malformed response: shorter than header");
  const std::size_t count = get_u32(bytes.data());
  const std::size_t dim = get_u32(bytes.data() + 4);
  if (dim != expected_dim)
    throw Error("dim mismatch: response dim " + std::to_string(dim) + ", provider dim " + std::to_string(expected_dim));
  if (count != expected_count)
    throw Error("count mismatch: response rows " + std::to_string(count) + ", requested " + std::to_string(expected_count));
  if (bytes.size() != 8 + count * dim * 4)
    throw Error("malformed response: payload is " + std::to_string(bytes.size() - 8) + " bytes, expected " +
                std::to_string(count * dim * 4));
  std::vector<Eigen::VectorXd> rows(count, Eigen::VectorXd(static_cast<Eigen::Index>(dim)));
  const std::uint8_t* p = bytes.data() + 8;
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t i = 0; i < dim; ++i, p += 4) {
      const std::uint32_t bits = get_u32(p);
      float f;
      std::memcpy(&f, &bits, 4);
      if (!std::isfinite(f)) throw Error("malformed response: non-finite value in row " + std::to_string(r));
      rows[r](static_cast<Eigen::Index>(i)) = f;
    }
  return rows;
}

SidecarProvider::SidecarProvider(fs::path exchange_root, std::size_t dim, std::chrono::milliseconds timeout)
    : root_(std::move(exchange_root)), dim_(dim), timeout_(timeout) {
  fs::create_directories(root_);
}

std::vector<Eigen::VectorXd> SidecarProvider::embed_batch(std::span<const RgbImage> images, ImageProfile profile) const {
  std::lock_guard lock(root_mutex(root_));
  static std::atomic<std::uint64_t> counter{0};
  SidecarJob job;
  job.job_id = "job-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  job.dim = dim_;
  job.profile = profile;
  const fs::path dir = root_ / job.job_id;
  fs::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04zu.png", i);
    write_png(dir / name, images[i]);
    job.images.push_back(fs::path(job.job_id) / name);
  }
  write_job(root_, job);

  const fs::path response = root_ / (job.job_id + ".f32");
  const fs::path error = root_ / (job.job_id + ".error");
  const auto cleanup = [&] {
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::remove(root_ / (job.job_id + ".json"), ec);
    fs::remove(response, ec);
    fs::remove(error, ec);
  };
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (fs::exists(response)) break;
    if (fs::exists(error)) {
      std::ifstream in(error);
      std::stringstream ss;
      ss << in.rdbuf();
      cleanup();
      throw Error("sidecar job " + job.job_id + " failed: " + ss.str());
    }
    if (std::chrono::steady_clock::now() > deadline) {
      cleanup();
      throw Error("timeout waiting for sidecar job " + job.job_id);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  std::vector<Eigen::VectorXd> rows;
  try {
    rows = decode_response(read_bytes(response), images.size(), dim_);
  } catch (...) {
    cleanup();
    throw;
  }
  cleanup();
  return rows;
}

std::size_t serve_pending(const fs::path& root, const EmbeddingProvider& provider, bool echo) {
  std::vector<fs::path> jobs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_regular_file() && entry.path().extension() == ".json") jobs.push_back(entry.path());
  std::sort(jobs.begin(), jobs.end());
  std::size_t handled = 0;
  for (const auto& job_file : jobs) {
    const SidecarJob job = read_job(job_file);
    try {
      std::vector<RgbImage> imgs;
      for (const auto& p : job.images) imgs.push_back(read_png(root / p));
      std::vector<Eigen::VectorXd> rows;
      if (echo) {
        rows.assign(imgs.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(job.dim)));
      } else {
        if (provider.dim() != job.dim) throw Error("job dim " + std::to_string(job.dim) + " != provider dim");
        rows = provider.embed_batch(imgs, job.profile);
      }
      write_file_atomic(root / (job.job_id + ".f32"), encode_response(rows, job.dim));
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      write_file_atomic(root / (job.job_id + ".error"), std::span(reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size()));
    }
    fs::remove(job_file);
    ++handled;
  }
  return handled;
}

void serve_forever(const fs::path& root, const EmbeddingProvider& provider, bool echo, const std::atomic<bool>& stop,
                   std::chrono::milliseconds poll) {
  fs::create_directories(root);
  while (!stop.load()) {
    if (serve_pending(root, provider, echo) == 0) std::this_thread::sleep_for(poll);
  }
}

}  // namespace affectlab::embedding
