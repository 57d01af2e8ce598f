#pragma once

#include <vector>

#include "lodopab/geometry.hpp"
#include "lodopab/image.hpp"

namespace lodopab {

/// Additive ellipse: value is added to every point of the interior.
struct Ellipse {
  double cx = 0.0, cy = 0.0;  // center, meters
  double a = 0.0, b = 0.0;    // semi-axes, meters
  double theta = 0.0;         // rotation, radians
  double value = 0.0;
};

struct EllipsePhantom {
  std::vector<Ellipse> ellipses;
};

/// Classic Shepp-Logan parameter set, scaled from the unit square to
/// [-extent, extent]^2.
EllipsePhantom shepp_logan(double extent = kDomainHalfWidth);

EllipsePhantom uniform_disk(double radius, double value, double cx = 0.0,
                            double cy = 0.0);

/// Pixel value = sum of ellipse values whose interior contains the pixel
/// center.
Image rasterize(const EllipsePhantom& phantom, const ImageGrid& grid);

/// Exact line integrals via the closed-form ellipse chord: each ellipse
/// contributes value * 2ab * sqrt(r^2 - s'^2) / r^2 in rotated/translated
/// coordinates, and 0 when the line misses.
Sinogram analytic_sinogram(const EllipsePhantom& phantom,
                           const ScanGeometry& geom);

/// Single-ray version of analytic_sinogram.
double analytic_line_integral(const EllipsePhantom& phantom, double s,
                              double phi);

}  // namespace lodopab
