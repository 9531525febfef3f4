#include "affectlab/core/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "affectlab/core/error.hpp"

namespace affectlab {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

BinaryWriter::BinaryWriter(std::string magic, std::uint32_t version) {
  if (magic.size() != 4) throw Error("binary magic must be 4 bytes");
  buf_.assign(magic.begin(), magic.end());
  u32(version);
}

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void BinaryWriter::vec(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
}

void BinaryWriter::mat(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  // row-major on disk
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
}

void BinaryWriter::strings(const std::vector<std::string>& s) {
  u64(s.size());
  for (const auto& x : s) str(x);
}

void BinaryWriter::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

BinaryReader::BinaryReader(std::vector<std::uint8_t> bytes, const std::string& magic, std::uint32_t version)
    : buf_(std::move(bytes)) {
  if (buf_.size() < 8 || std::memcmp(buf_.data(), magic.data(), 4) != 0) throw Error("bad magic, expected " + magic);
  pos_ = 4;
  const auto v = u32();
  if (v != version) throw Error("version mismatch: file " + std::to_string(v) + ", expected " + std::to_string(version));
}

BinaryReader BinaryReader::open(const std::filesystem::path& path, const std::string& magic, std::uint32_t version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return BinaryReader(std::move(bytes), magic, version);
}

const std::uint8_t* BinaryReader::take(std::size_t n) {
  if (buf_.size() - pos_ < n) throw Error("truncated binary record");
  const auto* p = buf_.data() + pos_;
  pos_ += n;
  return p;
}

std::uint32_t BinaryReader::u32() {
  const auto* p = take(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  const auto* p = take(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const auto n = u64();
  const auto* p = take(n);
  return std::string(reinterpret_cast<const char*>(p), n);
}

Eigen::VectorXd BinaryReader::vec() {
  const auto n = u64();
  if (n > buf_.size()) throw Error("truncated binary record");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
  return v;
}

Eigen::MatrixXd BinaryReader::mat() {
  const auto r = u64();
  const auto c = u64();
  if (r * c > buf_.size()) throw Error("truncated binary record");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  return m;
}

std::vector<std::string> BinaryReader::strings() {
  const auto n = u64();
  if (n > buf_.size()) throw Error("truncated binary record");
  std::vector<std::string> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(str());
  return out;
}

}  // namespace affectlab
