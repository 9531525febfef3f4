#include <algorithm>
#include <numeric>
#include <set>

#include "affectlab/core/error.hpp"
#include "affectlab/eeg/layout.hpp"
#include "affectlab/eeg/mutual_info.hpp"
#include "affectlab/eeg/topo.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace affectlab;
using namespace affectlab::eeg;

TEST_CASE("mutual information: x = y gives near-zero conditional entropy") {
  const auto x = testing::noise(1000, 7);
  const auto e = parzen_entropy(x, x);
  CHECK(e.mutual_information > 1.0);
  CHECK(e.conditional_entropy <= 0.05);
  CHECK(e.conditional_entropy >= 0.0);
}

TEST_CASE("mutual information: independent streams") {
  const auto x = testing::noise(1000, 1), y = testing::noise(1000, 2);
  const auto e = parzen_entropy(x, y);
  CHECK(e.mutual_information < 0.05);
  CHECK(std::abs(e.conditional_entropy - e.entropy_y) < 0.1);
}

TEST_CASE("mutual information: symmetry and translation invariance") {
  std::vector<double> x, y;
  testing::bivariate_gaussian(0.6, 800, 5, x, y);
  CHECK(std::abs(mutual_information(x, y) - mutual_information(y, x)) < 1e-9);
  auto xs = x;
  for (auto& v : xs) v += 123.0;
  CHECK(std::abs(conditional_entropy(xs, y) - conditional_entropy(x, y)) < 1e-6);
}

TEST_CASE("mutual information: tracks the histogram oracle and is monotone in rho") {
  for (std::uint64_t seed : {11u, 12u}) {
    double prev = -1;
    for (double rho : {0.0, 0.5, 0.9}) {
      std::vector<double> x, y;
      testing::bivariate_gaussian(rho, 2000, seed, x, y);
      const double mi = mutual_information(x, y);
      CHECK(std::abs(mi - testing::histogram_mi(x, y)) < 0.1);
      CHECK(mi > prev);
      prev = mi;
    }
  }
}

TEST_CASE("mutual information: bounds, errors, config validation") {
  std::vector<double> x, y;
  testing::bivariate_gaussian(0.3, 300, 9, x, y);
  const auto e = parzen_entropy(x, y);
  CHECK(e.mutual_information >= 0);
  CHECK(e.conditional_entropy <= e.entropy_y + 1e-9);
  CHECK_THROWS_WITH_AS(mutual_information(std::vector<double>(y.size(), 1.0), y), doctest::Contains("constant signal"),
                       Error);
  CHECK_THROWS_AS(mutual_information(std::vector<double>(x.begin(), x.begin() + 63),
                                     std::vector<double>(y.begin(), y.begin() + 63)),
                  Error);
  CHECK_THROWS_AS(mutual_information(x, std::vector<double>(y.begin(), y.end() - 1)), Error);
  MutualInfoConfig bad;
  bad.eval_grid = 16;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.bandwidth = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("parzen joint: parallel matches serial bit for bit; truncation is negligible") {
  std::vector<double> x, y;
  testing::bivariate_gaussian(0.4, 700, 3, x, y);
  MutualInfoConfig cfg;
  const auto gx = detail::make_grid(x, cfg), gy = detail::make_grid(y, cfg);
  const double h = detail::silverman_factor(x.size());
  const auto s = detail::parzen_joint(x, y, gx, gy, h, cfg.cutoff, Exec::serial);
  const auto p = detail::parzen_joint(x, y, gx, gy, h, cfg.cutoff, Exec::parallel);
  CHECK(s == p);
  const auto full = detail::parzen_joint(x, y, gx, gy, h, std::numeric_limits<double>::infinity(), Exec::serial);
  double worst = 0;
  for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(s[i] - full[i]));
  CHECK(worst < 1e-7);
  CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parzen_entropy(x, y, cfg, Exec::serial).mutual_information ==
        parzen_entropy(x, y, cfg, Exec::parallel).mutual_information);
}

TEST_CASE("layouts: sizes, disc, unique names, json round trip, unknown channel") {
  for (auto [name, n] : {std::pair{"deap32", 32u}, std::pair{"emotiv14", 14u}}) {
    const auto l = ScalpLayout::builtin(name);
    CHECK(l.entries().size() == n);
    std::set<std::string> names;
    for (const auto& e : l.entries()) {
      CHECK(e.u * e.u + e.v * e.v <= 1.0);
      names.insert(e.name);
    }
    CHECK(names.size() == n);
  }
  const auto l = ScalpLayout::builtin("deap32");
  CHECK(l.at("Fz").v > 0.0);  // nose up
  CHECK(l.at("C4").u > 0.0);  // right is +u
  CHECK(std::abs(l.at("Cz").u) < 1e-12);
  const auto dir = testing::scratch("eeg_layout");
  l.save_json(dir / "l.json");
  const auto back = ScalpLayout::load_json(dir / "l.json");
  CHECK(back.entries().size() == 32);
  CHECK(back.at("O2").u == l.at("O2").u);
  CHECK_THROWS_WITH_AS(l.at("XYZ"), doctest::Contains("unknown channel"), Error);
  CHECK_THROWS_AS(ScalpLayout::builtin("nope"), Error);
  CHECK(resolve_layout("emotiv14", dir).entries().size() == 14);
  CHECK(resolve_layout("l.json", dir).entries().size() == 32);
}

TEST_CASE("layout json fixtures match the builtin tables") {
  for (const std::string name : {"deap32", "emotiv14"}) {
    const auto f = ScalpLayout::load_json(std::string(AFFECTLAB_DATA_DIR) + "/layouts/" + name + ".json");
    const auto b = ScalpLayout::builtin(name);
    REQUIRE(f.entries().size() == b.entries().size());
    for (const auto& e : b.entries()) {
      CHECK(f.at(e.name).u == doctest::Approx(e.u).epsilon(1e-12));
      CHECK(f.at(e.name).v == doctest::Approx(e.v).epsilon(1e-12));
    }
  }
}

namespace {

std::vector<std::string> names_of(const ScalpLayout& l) {
  std::vector<std::string> n;
  for (const auto& e : l.entries()) n.push_back(e.name);
  return n;
}

}  // namespace

TEST_CASE("delaunay: empty circumcircles, ccw, Euler count") {
  Rng rng(4);
  std::vector<std::array<double, 2>> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
  const auto tri = delaunay(pts);
  for (const auto& t : tri) {
    const auto &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
    CHECK((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == t[0] || k == t[1] || k == t[2]) continue;
      const auto& d = pts[k];
      const double ax = a[0] - d[0], ay = a[1] - d[1], bx = b[0] - d[0], by = b[1] - d[1], cx = c[0] - d[0],
                   cy = c[1] - d[1];
      const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay) +
                         (cx * cx + cy * cy) * (ax * by - bx * ay);
      CHECK(det <= 1e-12);
    }
  }
  // convex position count: 2n - 2 - hull
  CHECK(tri.size() >= pts.size());
}

TEST_CASE("cubic interpolant reproduces quadratics and interpolates sites") {
  const auto l = ScalpLayout::builtin("deap32");
  std::vector<std::array<double, 2>> sites, grads;
  std::vector<double> vals;
  // stationary point far outside the head, so no site is a local extremum
  const auto f = [](double u, double v) { return 0.3 + 0.7 * u - 0.2 * v + 0.1 * u * u - 0.05 * u * v + 0.15 * v * v; };
  for (const auto& e : l.entries()) {
    sites.push_back({e.u, e.v});
    vals.push_back(f(e.u, e.v));
    grads.push_back({0.7 + 0.2 * e.u - 0.05 * e.v, -0.2 - 0.05 * e.u + 0.3 * e.v});
  }
  const CubicScatteredInterpolant exact(sites, vals, grads), fitted(sites, vals);
  Rng rng(2);
  int inside = 0;
  double worst = 0, worst_fit = 0;
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform(-0.8, 0.8), v = rng.uniform(-0.8, 0.8);
    const auto a = exact(u, v), b = fitted(u, v);
    if (!a) continue;
    ++inside;
    worst = std::max(worst, std::abs(*a - f(u, v)));
    worst_fit = std::max(worst_fit, std::abs(*b - f(u, v)));
  }
  CHECK(inside > 500);
  CHECK(worst < 1e-9);
  CHECK(worst_fit < 1e-9);
  for (std::size_t k = 0; k < sites.size(); ++k) CHECK(*fitted(sites[k][0], sites[k][1]) == doctest::Approx(vals[k]));
  CHECK_FALSE(fitted(0.0, 0.99).has_value());
}

TEST_CASE("topo: all-equal values give 0.5 inside, 0 outside") {
  const auto l = ScalpLayout::builtin("deap32");
  const auto names = names_of(l);
  const auto img = render_topo_band(std::vector<double>(32, 2.5), names, l);
  CHECK(img.size == kTopoGrid);
  for (std::size_t i = 0; i < img.grid.size(); ++i) CHECK(img.grid[i] == (img.mask[i] ? 0.5 : 0.0));
  CHECK(img.mask[0] == 0);
  CHECK(img.mask[static_cast<std::size_t>(32 * kTopoGrid + 32)] == 1);
}

TEST_CASE("topo: channel permutation and global scaling give identical images") {
  const auto l = ScalpLayout::builtin("deap32");
  auto names = names_of(l);
  auto vals = testing::noise(32, 8);
  const auto ref = render_topo_band(vals, names, l);
  std::vector<std::size_t> perm(32);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(1);
  rng.shuffle(perm.begin(), perm.end());
  std::vector<std::string> pn;
  std::vector<double> pv;
  std::vector<Electrode> pe;
  for (auto i : perm) {
    pn.push_back(names[i]);
    pv.push_back(vals[i]);
    pe.push_back(l.at(names[i]));
  }
  CHECK(render_topo_band(pv, pn, ScalpLayout(pe)).grid == ref.grid);
  std::vector<double> scaled(vals);
  for (auto& v : scaled) v = v * 4.0;
  CHECK(render_topo_band(scaled, names, l).grid == ref.grid);
  CHECK(render_topo_band(vals, names, l, kTopoGrid, Exec::serial).grid == ref.grid);
  for (double g : ref.grid) CHECK((g >= 0.0 && g <= 1.0));
}

TEST_CASE("topo: single hot electrode is the argmax") {
  // Hull electrodes own a flat exterior cell (nearest-electrode fill), so the
  // maximum is a plateau touching the electrode. Interior ones peak alone.
  for (const std::string layout : {"deap32", "emotiv14"}) {
    const auto l = ScalpLayout::builtin(layout);
    const auto names = names_of(l);
    std::vector<std::array<double, 2>> sites;
    for (const auto& e : l.entries()) sites.push_back({e.u, e.v});
    const auto tris = delaunay(sites);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& t : tris)
      for (int e = 0; e < 3; ++e) edges.insert({t[e], t[(e + 1) % 3]});
    std::set<std::size_t> hull;
    for (const auto& [a, b] : edges)
      if (!edges.count({b, a})) hull.insert(a);
    CHECK(hull.size() >= 3);
    CHECK(hull.size() < names.size());

    for (std::size_t hot = 0; hot < names.size(); ++hot) {
      CAPTURE(layout);
      CAPTURE(names[hot]);
      std::vector<double> v(names.size(), 1.0);
      v[hot] = 10.0;
      const auto img = render_topo_band(v, names, l);
      const double top = *std::max_element(img.grid.begin(), img.grid.end());
      if (hull.count(hot)) CHECK(top == 1.0);
      const auto [pr, pc] = head_to_pixel(l.entries()[hot].u, l.entries()[hot].v, kTopoGrid);
      double nearest = INFINITY;
      int count = 0;
      for (int i = 0; i < kTopoGrid * kTopoGrid; ++i) {
        if (img.grid[static_cast<std::size_t>(i)] != top) continue;
        ++count;
        nearest = std::min(nearest, std::hypot(i / kTopoGrid - pr, i % kTopoGrid - pc));
      }
      CHECK(nearest <= 2.0);
      if (!hull.count(hot)) {
        const auto it = std::max_element(img.grid.begin(), img.grid.end());
        const auto idx = static_cast<int>(it - img.grid.begin());
        CHECK(std::hypot(idx / kTopoGrid - pr, idx % kTopoGrid - pc) <= 2.0);
      }
    }
  }
}

TEST_CASE("topo: unknown channel and too few channels") {
  const auto l = ScalpLayout::builtin("emotiv14");
  CHECK_THROWS_AS(render_topo_band(std::vector<double>{1, 2, 3}, std::vector<std::string>{"AF3", "F7", "Cz"}, l),
                  Error);
  CHECK_THROWS_AS(render_topo_band(std::vector<double>{1, 2}, std::vector<std::string>{"AF3", "F7"}, l), Error);
}

TEST_CASE("pixel mapping round trip") {
  for (int r : {0, 17, 63})
    for (int c : {0, 40, 63}) {
      const auto [u, v] = pixel_to_head(r, c, 64);
      const auto [pr, pc] = head_to_pixel(u, v, 64);
      CHECK(pr == doctest::Approx(r));
      CHECK(pc == doctest::Approx(c));
    }
}

TEST_CASE("compose: theta only is pure red; equal inputs are gray; zero maxima") {
  const auto l = ScalpLayout::builtin("emotiv14");
  const auto names = names_of(l);
  const auto t = render_topo_band(testing::noise(14, 3), names, l);
  const auto zero = render_topo_band(std::vector<double>(14, 0.0), names, l);
  const auto red = compose_rgb_topo(t, zero, zero, {5.0, 0.0, 0.0});
  bool any_red = false;
  for (int y = 0; y < red.height; ++y)
    for (int x = 0; x < red.width; ++x) {
      CHECK(red.at(x, y)[1] == 0);
      CHECK(red.at(x, y)[2] == 0);
      any_red |= red.at(x, y)[0] > 0;
    }
  CHECK(any_red);
  const auto gray = compose_rgb_topo(t, t, t, {2.0, 2.0, 2.0});
  for (int y = 0; y < gray.height; ++y)
    for (int x = 0; x < gray.width; ++x) {
      CHECK(gray.at(x, y)[0] == gray.at(x, y)[1]);
      CHECK(gray.at(x, y)[1] == gray.at(x, y)[2]);
    }
  CHECK(compose_rgb_topo(t, t, t, {0, 0, 0}) == gray);
}
