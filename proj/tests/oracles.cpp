#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lodopab/rng.hpp"

namespace lodopab::testing {

double siddon_line_integral(const Image& image, double s, double phi) {
  const int n = image.grid.width;
  const double e = image.grid.extent;
  const double pitch = image.grid.pixel_pitch();

  const double c = std::cos(phi), sn = std::sin(phi);
  const double ox = s * c, oy = s * sn;  // point on the ray at t = 0
  const double dx = -sn, dy = c;         // unit direction

  // Clip to the domain square.
  double t0 = -1e300, t1 = 1e300;
  const double orig[2] = {ox, oy};
  const double dir[2] = {dx, dy};
  for (int axis = 0; axis < 2; ++axis) {
    if (dir[axis] == 0.0) {
      if (std::abs(orig[axis]) > e) return 0.0;
      continue;
    }
    const double ta = (-e - orig[axis]) / dir[axis];
    const double tb = (e - orig[axis]) / dir[axis];
    t0 = std::max(t0, std::min(ta, tb));
    t1 = std::min(t1, std::max(ta, tb));
  }
  if (!(t1 > t0)) return 0.0;

  // All grid-line crossing parameters inside [t0, t1].
  std::vector<double> ts;
  ts.reserve(2 * n + 4);
  ts.push_back(t0);
  ts.push_back(t1);
  for (int axis = 0; axis < 2; ++axis) {
    if (dir[axis] == 0.0) continue;
    for (int i = 0; i <= n; ++i) {
      const double boundary = -e + i * pitch;
      const double t = (boundary - orig[axis]) / dir[axis];
      if (t > t0 && t < t1) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double len = ts[i + 1] - ts[i];
    if (len <= 0.0) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    const double px = ox + tm * dx, py = oy + tm * dy;
    const int cx = static_cast<int>(std::floor((px + e) / pitch));
    const int cy = static_cast<int>(std::floor((py + e) / pitch));
    if (cx < 0 || cx >= n || cy < 0 || cy >= n) continue;
    total += len * image.values(cy, cx);
  }
  return total;
}

Image random_smooth_image(const ImageGrid& grid, std::uint64_t seed,
                          int num_bumps, double amplitude) {
  RandomStream rng(seed);
  struct Bump {
    double cx, cy, w, a;
  };
  std::vector<Bump> bumps(num_bumps);
  const double e = grid.extent;
  for (auto& b : bumps) {
    b.cx = (2.0 * rng.uniform() - 1.0) * 0.7 * e;
    b.cy = (2.0 * rng.uniform() - 1.0) * 0.7 * e;
    b.w = (0.08 + 0.25 * rng.uniform()) * e;
    b.a = amplitude * (0.2 + 0.8 * rng.uniform());
  }

  Image image = make_image(grid, PixelUnit::kMuPerM);
  const double pitch = grid.pixel_pitch();
  for (int r = 0; r < grid.height; ++r) {
    const double y = -e + (r + 0.5) * pitch;
    for (int c = 0; c < grid.width; ++c) {
      const double x = -e + (c + 0.5) * pitch;
      double v = 0.0;
      for (const auto& b : bumps) {
        const double dx = x - b.cx, dy = y - b.cy;
        v += b.a * std::exp(-(dx * dx + dy * dy) / (b.w * b.w));
      }
      image.values(r, c) = v;
    }
  }
  return image;
}

Array2d<double> random_array(std::size_t rows, std::size_t cols,
                             std::uint64_t seed, double lo, double hi) {
  RandomStream rng(seed);
  Array2d<double> out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = lo + (hi - lo) * rng.uniform();
  return out;
}

}  // namespace lodopab::testing
