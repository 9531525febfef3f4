#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affectlab/core/exec.hpp"
#include "affectlab/eeg/layout.hpp"
#include "affectlab/image/image.hpp"

namespace affectlab::eeg {

inline constexpr int kTopoGrid = 64;

// One band's normalized scalp field. Pixels outside the head disc are 0.
struct TopoImage {
  int size = 0;
  std::vector<double> grid;        // row-major, row 0 = front (nose)
  std::vector<std::uint8_t> mask;  // 1 inside the head disc

  double at(int row, int col) const { return grid[static_cast<std::size_t>(row) * size + col]; }
};

// Pixel center of (row, col) in head-plane coordinates.
std::array<double, 2> pixel_to_head(int row, int col, int size);
// Continuous (row, col) pixel position of a head-plane point.
std::array<double, 2> head_to_pixel(double u, double v, int size);

// Clough-Tocher C1 cubic interpolant over the Delaunay triangulation of
// scattered sites. Vertex gradients come from a weighted local quadratic
// least-squares fit, so quadratic fields are reproduced exactly, except that
// an interior site which is a local extremum among its Delaunay neighbours
// gets a zero gradient (no overshoot past a peak). Sites are put in canonical
// (u, v) order first, which makes the result independent of the order they
// are supplied in.
class CubicScatteredInterpolant {
 public:
  CubicScatteredInterpolant(std::span<const std::array<double, 2>> sites, std::span<const double> values);
  // Same, with caller-supplied gradients (used to check polynomial reproduction).
  CubicScatteredInterpolant(std::span<const std::array<double, 2>> sites, std::span<const double> values,
                            std::span<const std::array<double, 2>> gradients);

  // nullopt outside the convex hull of the sites.
  std::optional<double> operator()(double u, double v) const;
  // Inside the hull: the interpolant. Outside: the value of the nearest site
  // on the hull boundary, so interior sites never reach past the hull.
  double extended(double u, double v) const;
  // Value of the site nearest to (u, v).
  double nearest(double u, double v) const;

  std::size_t triangle_count() const { return patches_.size(); }

 private:
  struct Patch {
    std::array<std::array<double, 2>, 3> p;
    std::array<std::array<double, 10>, 3> ctrl;  // per micro-triangle opposite vertex k
  };

  void build(std::span<const std::array<double, 2>> grads);

  std::vector<std::array<double, 2>> sites_;
  std::vector<double> values_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<Patch> patches_;
  std::vector<std::size_t> hull_sites_;
};

// Delaunay triangulation (Bowyer-Watson), counter-clockwise triangles.
std::vector<std::array<std::size_t, 3>> delaunay(std::span<const std::array<double, 2>> sites);

// Min-max normalizes the per-channel values to [0, 1], interpolates inside the
// electrodes' convex hull, takes the nearest hull electrode's value between
// the hull and the disc edge and is 0 outside the disc. All-equal values give a uniform 0.5 field.
TopoImage render_topo_band(std::span<const double> values, std::span<const std::string> channels,
                           const ScalpLayout& layout, int grid = kTopoGrid, Exec exec = Exec::parallel);

// R/G/B = theta/alpha/beta fields weighted by w_k = max_k / sum(max), where
// band_maxima are the trial's pre-normalization band maxima.
RgbImage compose_rgb_topo(const TopoImage& theta, const TopoImage& alpha, const TopoImage& beta,
                          const std::array<double, 3>& band_maxima);

}  // namespace affectlab::eeg
