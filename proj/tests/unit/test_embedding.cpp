#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "affectlab/core/error.hpp"
#include "affectlab/core/rng.hpp"
#include "affectlab/embedding/exchange.hpp"
#include "affectlab/embedding/provider.hpp"
#include "support.hpp"

using namespace affectlab;
using namespace affectlab::embedding;
namespace fs = std::filesystem;

namespace {

RgbImage random_image(std::uint64_t seed, int size = kEmbeddingImageSize) {
  RgbImage img(size, size);
  Rng rng(seed);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng.uniform(0.0, 256.0));
  return img;
}

}  // namespace

TEST_CASE("stub: deterministic, 4096 long, bounded") {
  const StubProvider a(7), b(7), c(8);
  const auto img = random_image(1);
  const auto ea = a.embed(img);
  CHECK(ea.size() == 4096);
  CHECK(a.dim() == 4096);
  CHECK(ea == b.embed(img));
  CHECK((ea - c.embed(img)).norm() > 1.0);
  CHECK(ea.cwiseAbs().maxCoeff() < 1.0);
  CHECK(a.id() == b.id());
  CHECK(a.id() != c.id());
  // face and generic are different networks
  CHECK((ea - a.embed(img, ImageProfile::face)).norm() > 1.0);
}

TEST_CASE("stub: one-pixel change moves the embedding very little") {
  const StubProvider p(3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto img = random_image(s);
    const auto e0 = p.embed(img);
    auto* px = img.at(100, 57);
    px[0] = static_cast<std::uint8_t>(255 - px[0]);
    const auto e1 = p.embed(img);
    CHECK((e1 - e0).cwiseAbs().maxCoeff() < 1e-2);
  }
}

TEST_CASE("stub: wrong image shape") {
  const StubProvider p(1);
  CHECK_THROWS_WITH_AS(p.embed(RgbImage(64, 64)), doctest::Contains("wrong image shape"), Error);
  CHECK_THROWS_AS(StubProvider::pooled_input(RgbImage(224, 223)), Error);
}

TEST_CASE("stub: parallel projection equals the serial reference") {
  const StubProvider p(11);
  const auto x = StubProvider::pooled_input(random_image(4));
  CHECK(x.size() == static_cast<Eigen::Index>(StubProvider::kInputs));
  CHECK(x.maxCoeff() <= 0.5);
  CHECK(x.minCoeff() >= -0.5);
  const auto& proj = p.projection(ImageProfile::generic);
  CHECK(project_tanh(proj, x, Exec::parallel) == project_tanh(proj, x, Exec::serial));
  const StubProvider serial(11, kDefaultDim, Exec::serial);
  CHECK(serial.embed(random_image(4)) == p.embed(random_image(4)));
}

TEST_CASE("zero provider") {
  const ZeroProvider z(16);
  const std::vector<RgbImage> imgs{random_image(1), random_image(2)};
  const auto rows = z.embed_batch(imgs, ImageProfile::generic);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].size() == 16);
  CHECK(rows[1].isZero());
}

TEST_CASE("exchange: response round trip and validation") {
  std::vector<Eigen::VectorXd> rows{Eigen::VectorXd::LinSpaced(8, -1, 1), Eigen::VectorXd::Constant(8, 0.25)};
  const auto bytes = encode_response(rows, 8);
  CHECK(bytes.size() == 8 + 2 * 8 * 4);
  CHECK(bytes[0] == 2);
  CHECK(bytes[4] == 8);
  const auto back = decode_response(bytes, 2, 8);
  REQUIRE(back.size() == 2);
  CHECK((back[0] - rows[0]).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(back[1] == rows[1]);

  CHECK_THROWS_WITH_AS(decode_response(bytes, 2, 16), doctest::Contains("dim mismatch"), Error);
  CHECK_THROWS_WITH_AS(decode_response(bytes, 3, 8), doctest::Contains("count mismatch"), Error);
  auto cut = bytes;
  cut.pop_back();
  CHECK_THROWS_WITH_AS(decode_response(cut, 2, 8), doctest::Contains("malformed response"), Error);
  CHECK_THROWS_WITH_AS(decode_response(std::vector<std::uint8_t>(5), 0, 8), doctest::Contains("malformed response"),
                       Error);
  auto nan = bytes;
  nan[8 + 3] = 0x7f;
  nan[8 + 2] = 0xc0;
  CHECK_THROWS_WITH_AS(decode_response(nan, 2, 8), doctest::Contains("malformed response"), Error);
  CHECK_THROWS_AS(encode_response(rows, 4), Error);
}

TEST_CASE("exchange: job json round trip") {
  const auto root = testing::scratch("emb_job");
  SidecarJob job{"job-x", {"job-x/img_0000.png", "job-x/img_0001.png"}, 4096, ImageProfile::face};
  write_job(root, job);
  CHECK(fs::exists(root / "job-x.json"));
  CHECK_FALSE(fs::exists(root / "job-x.json.tmp"));
  const auto back = read_job(root / "job-x.json");
  CHECK(back.job_id == "job-x");
  CHECK(back.dim == 4096);
  CHECK(back.profile == ImageProfile::face);
  CHECK(back.images == job.images);
  CHECK(parse_profile(to_string(ImageProfile::generic)) == ImageProfile::generic);
  CHECK_THROWS_AS(parse_profile("vgg"), Error);
  std::ofstream(root / "bad.json") << "{\"job_id\": 3";
  CHECK_THROWS_WITH_AS(read_job(root / "bad.json"), doctest::Contains("job parse error"), Error);
}

TEST_CASE("exchange: sidecar against an in-process server") {
  const auto root = testing::scratch("emb_serve");
  const StubProvider stub(5, 64);
  std::atomic<bool> stop{false};
  std::thread server([&] { serve_forever(root, stub, false, stop, std::chrono::milliseconds(2)); });
  const SidecarProvider side(root, 64, std::chrono::seconds(20));
  std::vector<RgbImage> imgs{random_image(1), random_image(2), random_image(3)};
  const auto rows = side.embed_batch(imgs, ImageProfile::generic);
  stop = true;
  server.join();
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK((rows[i] - stub.embed(imgs[i])).cwiseAbs().maxCoeff() < 1e-6);
  // nothing left behind
  CHECK(fs::is_empty(root));
}

TEST_CASE("exchange: echo mode and server-side errors") {
  const auto root = testing::scratch("emb_echo");
  std::atomic<bool> stop{false};
  const StubProvider stub(5, 32);
  std::thread server([&] { serve_forever(root, stub, true, stop, std::chrono::milliseconds(2)); });
  const SidecarProvider echo(root, 16, std::chrono::seconds(20));
  const std::vector<RgbImage> imgs{random_image(9)};
  const auto rows = echo.embed_batch(imgs, ImageProfile::face);
  stop = true;
  server.join();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].size() == 16);
  CHECK(rows[0].isZero());

  // provider dim differs from the job dim: the server answers with an .error
  stop = false;
  std::thread strict([&] { serve_forever(root, stub, false, stop, std::chrono::milliseconds(2)); });
  CHECK_THROWS_WITH_AS(echo.embed_batch(imgs, ImageProfile::generic), doctest::Contains("failed"), Error);
  stop = true;
  strict.join();
}

TEST_CASE("exchange: timeout when nobody answers") {
  const auto root = testing::scratch("emb_timeout");
  const SidecarProvider side(root, 8, std::chrono::milliseconds(50));
  const std::vector<RgbImage> imgs{random_image(1)};
  CHECK_THROWS_WITH_AS(side.embed_batch(imgs, ImageProfile::generic), doctest::Contains("timeout"), Error);
  CHECK(fs::is_empty(root));
}

TEST_CASE("exchange: a bad response file is rejected") {
  const auto root = testing::scratch("emb_badresp");
  std::atomic<bool> stop{false};
  // answers every job with a response one row short
  std::thread liar([&] {
    while (!stop) {
      for (const auto& e : fs::directory_iterator(root))
        if (e.path().extension() == ".json") {
          const auto job = read_job(e.path());
          std::vector<Eigen::VectorXd> rows(job.images.size() - 1, Eigen::VectorXd::Zero(8));
          write_file_atomic(root / (job.job_id + ".f32"), encode_response(rows, 8));
          fs::remove(e.path());
        }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  });
  const SidecarProvider side(root, 8, std::chrono::seconds(20));
  const std::vector<RgbImage> imgs{random_image(1), random_image(2)};
  CHECK_THROWS_WITH_AS(side.embed_batch(imgs, ImageProfile::generic), doctest::Contains("count mismatch"), Error);
  stop = true;
  liar.join();
}

TEST_CASE("exchange: fuzzed batch sizes and payloads") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto count = static_cast<std::size_t>(rng.uniform(0.0, 101.0));
    const auto dim = static_cast<std::size_t>(rng.uniform(1.0, 65.0));
    std::vector<Eigen::VectorXd> rows(count, Eigen::VectorXd(static_cast<Eigen::Index>(dim)));
    for (auto& r : rows)
      for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = static_cast<float>(rng.normal() * 10.0);
    const auto bytes = encode_response(rows, dim);
    const auto back = decode_response(bytes, count, dim);
    REQUIRE(back.size() == count);
    for (std::size_t i = 0; i < count; ++i) CHECK(back[i] == rows[i]);
    // any truncation or extension is malformed
    auto trunc = bytes;
    trunc.resize(8 + static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(bytes.size() - 8))));
    if (trunc.size() != bytes.size()) CHECK_THROWS_AS(decode_response(trunc, count, dim), Error);
    auto longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS(decode_response(longer, count, dim), Error);
  }
}
