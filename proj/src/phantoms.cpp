#include "lodopab/phantoms.hpp"

#include <cmath>
#include <numbers>

#include "lodopab/errors.hpp"

namespace lodopab {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

struct EllipseSpec {
  double cx, cy, a, b, theta_deg, value;
};

// Classic Shepp-Logan parameters on [-1, 1]^2.
constexpr EllipseSpec kSheppLogan[] = {
    {0.0, 0.0, 0.69, 0.92, 0.0, 2.0},
    {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98},
    {0.22, 0.0, 0.11, 0.31, -18.0, -0.02},
    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.02},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
    {0.0, -0.605, 0.023, 0.023, 0.0, 0.01},
    {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
};

void validate(const EllipsePhantom& phantom) {
  for (const auto& el : phantom.ellipses) {
    if (!(el.a > 0.0) || !(el.b > 0.0))
      throw ContractError("phantom: ellipse semi-axes must be positive");
    if (!std::isfinite(el.cx) || !std::isfinite(el.cy) ||
        !std::isfinite(el.theta) || !std::isfinite(el.value))
      throw ContractError("phantom: non-finite ellipse parameter");
  }
}

}  // namespace

EllipsePhantom shepp_logan(double extent) {
  EllipsePhantom phantom;
  for (const auto& e : kSheppLogan)
    phantom.ellipses.push_back({e.cx * extent, e.cy * extent, e.a * extent,
                                e.b * extent, e.theta_deg * kDegree, e.value});
  return phantom;
}

EllipsePhantom uniform_disk(double radius, double value, double cx,
                            double cy) {
  return {{{cx, cy, radius, radius, 0.0, value}}};
}

Image rasterize(const EllipsePhantom& phantom, const ImageGrid& grid) {
  validate(phantom);
  Image image = make_image(grid, PixelUnit::kMuPerM);
  const double pitch = grid.pixel_pitch();
  const double e = grid.extent;

  for (const auto& el : phantom.ellipses) {
    const double ct = std::cos(el.theta), st = std::sin(el.theta);
    const double inv_a2 = 1.0 / (el.a * el.a);
    const double inv_b2 = 1.0 / (el.b * el.b);
    for (int r = 0; r < grid.height; ++r) {
      const double y = -e + (r + 0.5) * pitch - el.cy;
      double* row = image.values.row(r);
      for (int c = 0; c < grid.width; ++c) {
        const double x = -e + (c + 0.5) * pitch - el.cx;
        const double xr = x * ct + y * st;
        const double yr = -x * st + y * ct;
        if (xr * xr * inv_a2 + yr * yr * inv_b2 <= 1.0) row[c] += el.value;
      }
    }
  }
  return image;
}

double analytic_line_integral(const EllipsePhantom& phantom, double s,
                              double phi) {
  const double c = std::cos(phi), sn = std::sin(phi);
  double total = 0.0;
  for (const auto& el : phantom.ellipses) {
    // Offset of the line relative to the ellipse center, and the
    // effective radius of the rotated ellipse along the beam normal.
    const double s_rel = s - (el.cx * c + el.cy * sn);
    const double gamma = phi - el.theta;
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    const double r2 = el.a * el.a * cg * cg + el.b * el.b * sg * sg;
    const double d2 = r2 - s_rel * s_rel;
    if (d2 > 0.0) total += el.value * 2.0 * el.a * el.b * std::sqrt(d2) / r2;
  }
  return total;
}

Sinogram analytic_sinogram(const EllipsePhantom& phantom,
                           const ScanGeometry& geom) {
  validate(phantom);
  Sinogram sino = make_sinogram(geom, SinoUnit::kLineIntegral);
  const int na = geom.num_angles();
  const int nd = geom.num_detectors();
#pragma omp parallel for schedule(static)
  for (int ia = 0; ia < na; ++ia) {
    double* row = sino.values.row(ia);
    for (int k = 0; k < nd; ++k)
      row[k] = analytic_line_integral(phantom, geom.detector_positions[k],
                                      geom.angles[ia]);
  }
  return sino;
}

}  // namespace lodopab
