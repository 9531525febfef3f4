#include "affectlab/eeg/topo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "affectlab/core/error.hpp"

namespace affectlab::eeg {

using Vec2 = std::array<double, 2>;

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// > 0 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }

std::array<double, 3> barycentric(const std::array<Vec2, 3>& t, double u, double v) {
  const double area = cross(t[0], t[1], t[2]);
  const Vec2 p{u, v};
  return {cross(p, t[1], t[2]) / area, cross(t[0], p, t[2]) / area, cross(t[0], t[1], p) / area};
}

// Bernstein ordinates of a cubic on one micro-triangle (A, B, C), stored as
// [300, 030, 003, 210, 120, 201, 021, 102, 012, 111].
double bernstein_cubic(const std::array<double, 10>& c, double a, double b, double g) {
  return c[0] * a * a * a + c[1] * b * b * b + c[2] * g * g * g + 3.0 * c[3] * a * a * b + 3.0 * c[4] * a * b * b +
         3.0 * c[5] * a * a * g + 3.0 * c[6] * b * b * g + 3.0 * c[7] * a * g * g + 3.0 * c[8] * b * g * g +
         6.0 * c[9] * a * b * g;
}

}  // namespace

std::vector<std::array<std::size_t, 3>> delaunay(std::span<const Vec2> sites) {
  const std::size_t n = sites.size();
  if (n < 3) throw Error("delaunay: need at least 3 sites");
  double minx = sites[0][0], maxx = minx, miny = sites[0][1], maxy = miny;
  for (const auto& s : sites) {
    minx = std::min(minx, s[0]);
    maxx = std::max(maxx, s[0]);
    miny = std::min(miny, s[1]);
    maxy = std::max(maxy, s[1]);
  }
  const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
  const double m = std::max({maxx - minx, maxy - miny, 1e-9});
  std::vector<Vec2> pts(sites.begin(), sites.end());
  pts.push_back({cx - 40 * m, cy - 20 * m});
  pts.push_back({cx + 40 * m, cy - 20 * m});
  pts.push_back({cx, cy + 40 * m});

  using Tri = std::array<std::size_t, 3>;
  std::vector<Tri> tris = {{n, n + 1, n + 2}};
  const double eps = 1e-12 * m * m * m * m;
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<Tri> keep, bad;
    for (const auto& t : tris) (incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[p]) > eps ? bad : keep).push_back(t);
    std::vector<std::array<std::size_t, 2>> boundary;
    for (std::size_t i = 0; i < bad.size(); ++i) {
      for (int e = 0; e < 3; ++e) {
        const std::size_t a = bad[i][e], b = bad[i][(e + 1) % 3];
        bool shared = false;
        for (std::size_t j = 0; j < bad.size() && !shared; ++j) {
          if (j == i) continue;
          for (int f = 0; f < 3; ++f)
            if (bad[j][f] == b && bad[j][(f + 1) % 3] == a) shared = true;
        }
        if (!shared) boundary.push_back({a, b});
      }
    }
    for (const auto& e : boundary) keep.push_back({e[0], e[1], p});
    tris = std::move(keep);
  }
  std::vector<Tri> out;
  for (const auto& t : tris)
    if (t[0] < n && t[1] < n && t[2] < n) out.push_back(t);
  return out;
}

CubicScatteredInterpolant::CubicScatteredInterpolant(std::span<const Vec2> sites, std::span<const double> values)
    : CubicScatteredInterpolant(sites, values, {}) {}

CubicScatteredInterpolant::CubicScatteredInterpolant(std::span<const Vec2> sites, std::span<const double> values,
                                                     std::span<const Vec2> gradients) {
  if (sites.size() != values.size()) throw Error("interpolant: site/value count mismatch");
  if (sites.size() < 3) throw Error("interpolant: need at least 3 sites");
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sites[a] < sites[b]; });
  std::vector<Vec2> grads;
  for (std::size_t i : order) {
    sites_.push_back(sites[i]);
    values_.push_back(values[i]);
    if (!gradients.empty()) grads.push_back(gradients[i]);
  }
  build(grads);
}

void CubicScatteredInterpolant::build(std::span<const Vec2> given) {
  const std::size_t n = sites_.size();
  triangles_ = delaunay(sites_);
  hull_sites_.clear();
  for (const auto& t : triangles_)
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = t[e], b = t[(e + 1) % 3];
      bool shared = false;
      for (const auto& o : triangles_)
        for (int f = 0; f < 3 && !shared; ++f) shared = o[f] == b && o[(f + 1) % 3] == a;
      if (!shared) hull_sites_.push_back(a);
    }
  std::sort(hull_sites_.begin(), hull_sites_.end());

  std::vector<Vec2> grad(n, Vec2{0.0, 0.0});
  if (!given.empty()) {
    grad.assign(given.begin(), given.end());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> nb;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) nb.push_back(j);
      const auto d2 = [&](std::size_t j) {
        const Vec2 d = sub(sites_[j], sites_[i]);
        return dot(d, d);
      };
      std::stable_sort(nb.begin(), nb.end(), [&](std::size_t a, std::size_t b) { return d2(a) < d2(b); });
      nb.resize(std::min<std::size_t>(nb.size(), 12));
      const int cols = nb.size() >= 5 ? 5 : 2;
      Eigen::MatrixXd a(static_cast<Eigen::Index>(nb.size()), cols);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(nb.size()));
      for (std::size_t r = 0; r < nb.size(); ++r) {
        const Vec2 d = sub(sites_[nb[r]], sites_[i]);
        const double w = 1.0 / std::sqrt(d2(nb[r]));
        const auto row = static_cast<Eigen::Index>(r);
        a(row, 0) = w * d[0];
        a(row, 1) = w * d[1];
        if (cols == 5) {
          a(row, 2) = w * 0.5 * d[0] * d[0];
          a(row, 3) = w * d[0] * d[1];
          a(row, 4) = w * 0.5 * d[1] * d[1];
        }
        rhs(row) = w * (values_[nb[r]] - values_[i]);
      }
      const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
      grad[i] = {sol(0), sol(1)};
    }
    // An interior site that is a local extremum among its Delaunay neighbours
    // keeps a flat tangent plane, so peaks and troughs stay on the electrodes.
    // Hull sites are left alone: their neighbours all lie on one side.
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& t : triangles_)
      for (int e = 0; e < 3; ++e) adj[t[e]].push_back(t[(e + 1) % 3]);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::binary_search(hull_sites_.begin(), hull_sites_.end(), i)) continue;
      bool hi = true, lo = true;
      for (std::size_t j : adj[i]) {
        hi = hi && values_[i] >= values_[j];
        lo = lo && values_[i] <= values_[j];
      }
      if (hi || lo) grad[i] = {0.0, 0.0};
    }
  }

  patches_.clear();
  for (const auto& t : triangles_) {
    Patch patch;
    std::array<double, 3> f{};
    std::array<Vec2, 3> g{};
    for (int k = 0; k < 3; ++k) {
      patch.p[k] = sites_[t[k]];
      f[k] = values_[t[k]];
      g[k] = grad[t[k]];
    }
    const Vec2 c{(patch.p[0][0] + patch.p[1][0] + patch.p[2][0]) / 3.0,
                 (patch.p[0][1] + patch.p[1][1] + patch.p[2][1]) / 3.0};
    // Tangent-plane points: toward[i][j] next to vertex i on edge (i, j);
    // tc[i] next to vertex i toward the centroid.
    std::array<std::array<double, 3>, 3> toward{};
    std::array<double, 3> tc{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        if (i != j) toward[i][j] = f[i] + dot(g[i], sub(patch.p[j], patch.p[i])) / 3.0;
      tc[i] = f[i] + dot(g[i], sub(c, patch.p[i])) / 3.0;
    }
    // Interior point of the micro-triangle on edge (i, j), opposite vertex k,
    // from a cross-boundary derivative that is linear along the edge.
    std::array<double, 3> c111{};
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      const Vec2 e = sub(patch.p[j], patch.p[i]);
      const double len = std::sqrt(dot(e, e));
      const Vec2 tang{e[0] / len, e[1] / len};
      const Vec2 nrm{-tang[1], tang[0]};
      const Vec2 mid{0.5 * (patch.p[i][0] + patch.p[j][0]), 0.5 * (patch.p[i][1] + patch.p[j][1])};
      const Vec2 d = sub(c, mid);
      const double alpha = dot(d, nrm), beta = dot(d, tang);
      const Vec2 gm{0.5 * (g[i][0] + g[j][0]), 0.5 * (g[i][1] + g[j][1])};
      const double dt = 3.0 / len *
                        (0.25 * (toward[i][j] - f[i]) + 0.5 * (toward[j][i] - toward[i][j]) + 0.25 * (f[j] - toward[j][i]));
      const double target = alpha * dot(gm, nrm) + beta * dt;
      const double s0 = -0.5 * f[i] - 0.5 * toward[i][j] + tc[i];
      const double s2 = -0.5 * toward[j][i] - 0.5 * f[j] + tc[j];
      c111[k] = 2.0 * (target / 3.0 - 0.25 * s0 - 0.25 * s2) + 0.5 * (toward[i][j] + toward[j][i]);
    }
    // Points on the inner edges (vertex i -> centroid) at 2/3, then the centroid.
    std::array<double, 3> inner{};
    for (int i = 0; i < 3; ++i) {
      // Micro-triangles touching segment i-C are those opposite the other two vertices.
      inner[i] = (tc[i] + c111[(i + 1) % 3] + c111[(i + 2) % 3]) / 3.0;
    }
    const double center = (inner[0] + inner[1] + inner[2]) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      patch.ctrl[k] = {f[i], f[j], center, toward[i][j], toward[j][i], tc[i], tc[j], inner[i], inner[j], c111[k]};
    }
    patches_.push_back(patch);
  }

}

std::optional<double> CubicScatteredInterpolant::operator()(double u, double v) const {
  for (const auto& patch : patches_) {
    const auto b = barycentric(patch.p, u, v);
    if (b[0] < -1e-12 || b[1] < -1e-12 || b[2] < -1e-12) continue;
    int k = 0;
    if (b[1] < b[k]) k = 1;
    if (b[2] < b[k]) k = 2;
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    return bernstein_cubic(patch.ctrl[k], b[i] - b[k], b[j] - b[k], 3.0 * b[k]);
  }
  return std::nullopt;
}

double CubicScatteredInterpolant::extended(double u, double v) const {
  if (const auto inside = (*this)(u, v)) return *inside;
  std::size_t best = hull_sites_.front();
  double best_d = INFINITY;
  for (std::size_t i : hull_sites_) {
    const double d = (sites_[i][0] - u) * (sites_[i][0] - u) + (sites_[i][1] - v) * (sites_[i][1] - v);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return values_[best];
}

double CubicScatteredInterpolant::nearest(double u, double v) const {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const double d = (sites_[i][0] - u) * (sites_[i][0] - u) + (sites_[i][1] - v) * (sites_[i][1] - v);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return values_[best];
}

std::array<double, 2> pixel_to_head(int row, int col, int size) {
  return {-1.0 + (2.0 * col + 1.0) / size, 1.0 - (2.0 * row + 1.0) / size};
}

std::array<double, 2> head_to_pixel(double u, double v, int size) {
  return {(1.0 - v) * size / 2.0 - 0.5, (u + 1.0) * size / 2.0 - 0.5};
}

TopoImage render_topo_band(std::span<const double> values, std::span<const std::string> channels,
                           const ScalpLayout& layout, int grid, Exec exec) {
  if (values.size() != channels.size()) throw Error("render_topo_band: value/channel count mismatch");
  if (values.size() < 3) throw Error("render_topo_band: need at least 3 channels");
  if (grid < 2) throw Error("render_topo_band: grid too small");
  for (double v : values)
    if (!std::isfinite(v)) throw Error("render_topo_band: non-finite band value");

  TopoImage img;
  img.size = grid;
  img.grid.assign(static_cast<std::size_t>(grid) * grid, 0.0);
  img.mask.assign(img.grid.size(), 0);
  for (int r = 0; r < grid; ++r)
    for (int c = 0; c < grid; ++c) {
      const auto [u, v] = pixel_to_head(r, c, grid);
      img.mask[static_cast<std::size_t>(r) * grid + c] = u * u + v * v <= 1.0 ? 1 : 0;
    }

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*hi > *lo)) {
    for (std::size_t i = 0; i < img.grid.size(); ++i) img.grid[i] = img.mask[i] ? 0.5 : 0.0;
    return img;
  }
  std::vector<Vec2> sites;
  std::vector<double> norm;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& e = layout.at(channels[i]);
    sites.push_back({e.u, e.v});
    norm.push_back((values[i] - *lo) / (*hi - *lo));
  }
  const CubicScatteredInterpolant interp(sites, norm);

  const auto shade_row = [&](int r) {
    for (int c = 0; c < grid; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * grid + c;
      if (!img.mask[idx]) continue;
      const auto [u, v] = pixel_to_head(r, c, grid);
      img.grid[idx] = std::clamp(interp.extended(u, v), 0.0, 1.0);
    }
  };
  if (exec == Exec::serial) {
    for (int r = 0; r < grid; ++r) shade_row(r);
  } else {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < grid; ++r) shade_row(r);
  }
  return img;
}

RgbImage compose_rgb_topo(const TopoImage& theta, const TopoImage& alpha, const TopoImage& beta,
                          const std::array<double, 3>& band_maxima) {
  if (theta.size != alpha.size || theta.size != beta.size) throw Error("compose_rgb_topo: grid sizes differ");
  std::array<double, 3> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const double total = band_maxima[0] + band_maxima[1] + band_maxima[2];
  if (total > 0.0)
    for (int k = 0; k < 3; ++k) w[k] = band_maxima[k] / total;
  RgbImage out(theta.size, theta.size);
  const std::array<const TopoImage*, 3> bands{&theta, &alpha, &beta};
  for (int r = 0; r < theta.size; ++r)
    for (int c = 0; c < theta.size; ++c)
      for (int k = 0; k < 3; ++k)
        out.at(c, r)[k] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(w[k] * bands[k]->at(r, c), 0.0, 1.0)));
  return out;
}

}  // namespace affectlab::eeg
