#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace affectlab {

// Little-endian record files: 4-byte magic, u32 version, then a stream of
// tagged fields. Readers check magic and version up front and throw on any
// short read, so a truncated file never yields a half-filled model.
class BinaryWriter {
 public:
  BinaryWriter(std::string magic, std::uint32_t version);

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void vec(const Eigen::VectorXd& v);
  void mat(const Eigen::MatrixXd& m);
  void strings(const std::vector<std::string>& s);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::vector<std::uint8_t> bytes, const std::string& magic, std::uint32_t version);
  static BinaryReader open(const std::filesystem::path& path, const std::string& magic, std::uint32_t version);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  Eigen::VectorXd vec();
  Eigen::MatrixXd mat();
  std::vector<std::string> strings();

  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::uint8_t* take(std::size_t n);
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace affectlab
