#include "lodopab/projector.hpp"

#include <cmath>

#include "lodopab/errors.hpp"

namespace lodopab {

namespace {

// Fixed block count for the adjoint's angle partition. Partial images are
// reduced in block order, so results are independent of the thread count.
constexpr int kAdjointBlocks = 16;

struct RayClip {
  double t0 = 0.0;
  double t1 = 0.0;
  bool hit = false;
};

// Intersects the ray p(t) = s*omega + t*omega_perp with the image domain
// square [-e, e]^2. The image is zero outside the domain, so rays that
// miss contribute nothing.
RayClip clip_to_square(double s, double cos_phi, double sin_phi, double e) {
  double t0 = -1e300, t1 = 1e300;
  const double orig[2] = {s * cos_phi, s * sin_phi};
  const double dir[2] = {-sin_phi, cos_phi};
  for (int axis = 0; axis < 2; ++axis) {
    const double o = orig[axis], d = dir[axis];
    if (d == 0.0) {
      if (std::abs(o) > e) return {};
      continue;
    }
    const double ta = (-e - o) / d;
    const double tb = (e - o) / d;
    const double lo = std::min(ta, tb);
    const double hi = std::max(ta, tb);
    if (lo > t0) t0 = lo;
    if (hi < t1) t1 = hi;
  }
  if (!(t1 > t0)) return {};
  return {t0, t1, true};
}

struct RaySampling {
  double gx0, gy0;  // first sample in pixel-index coordinates
  double dgx, dgy;  // per-step increment
  double step;      // physical step length
  int num_steps;    // samples at j = 0..num_steps
};

// Lays out trapezoid samples along the clipped ray. Sample j carries
// quadrature weight step/2 at the ends and step inside.
bool sample_ray(double s, double cos_phi, double sin_phi, double e,
                double inv_pitch, double target_step, RaySampling& out) {
  const RayClip clip = clip_to_square(s, cos_phi, sin_phi, e);
  if (!clip.hit) return false;
  const double len = clip.t1 - clip.t0;
  const int m = std::max(1, static_cast<int>(std::ceil(len / target_step)));
  const double h = len / m;
  const double px = s * cos_phi - clip.t0 * sin_phi;
  const double py = s * sin_phi + clip.t0 * cos_phi;
  out.gx0 = (px + e) * inv_pitch - 0.5;
  out.gy0 = (py + e) * inv_pitch - 0.5;
  out.dgx = -h * sin_phi * inv_pitch;
  out.dgy = h * cos_phi * inv_pitch;
  out.step = h;
  out.num_steps = m;
  return true;
}

}  // namespace

Sinogram forward_project(const Image& image, const ScanGeometry& geom) {
  validate(image);
  validate(geom);

  const int n = image.grid.width;
  const double e = image.grid.extent;
  const double pitch = image.grid.pixel_pitch();
  const double inv_pitch = 1.0 / pitch;
  const double target_step = 0.5 * pitch;
  const int na = geom.num_angles();
  const int nd = geom.num_detectors();
  const double* img = image.values.data();

  Sinogram sino = make_sinogram(geom, SinoUnit::kLineIntegral);

#pragma omp parallel for schedule(static)
  for (int ia = 0; ia < na; ++ia) {
    const double c = std::cos(geom.angles[ia]);
    const double sn = std::sin(geom.angles[ia]);
    double* row = sino.values.row(ia);
    for (int k = 0; k < nd; ++k) {
      RaySampling ray;
      if (!sample_ray(geom.detector_positions[k], c, sn, e, inv_pitch,
                      target_step, ray)) {
        row[k] = 0.0;
        continue;
      }
      double gx = ray.gx0, gy = ray.gy0;
      double acc = 0.0;
      for (int j = 0; j <= ray.num_steps; ++j) {
        const double w = (j == 0 || j == ray.num_steps) ? 0.5 * ray.step
                                                        : ray.step;
        const int ix = static_cast<int>(std::floor(gx));
        const int iy = static_cast<int>(std::floor(gy));
        if (ix >= 0 && ix + 1 < n && iy >= 0 && iy + 1 < n) {
          const double fx = gx - ix, fy = gy - iy;
          const double* p = img + static_cast<std::size_t>(iy) * n + ix;
          acc += w * ((1.0 - fx) * (1.0 - fy) * p[0] + fx * (1.0 - fy) * p[1] +
                      (1.0 - fx) * fy * p[n] + fx * fy * p[n + 1]);
        } else if (ix >= -1 && ix <= n - 1 && iy >= -1 && iy <= n - 1) {
          const double fx = gx - ix, fy = gy - iy;
          double v = 0.0;
          if (ix >= 0 && iy >= 0) v += (1.0 - fx) * (1.0 - fy) * img[iy * n + ix];
          if (ix + 1 < n && iy >= 0) v += fx * (1.0 - fy) * img[iy * n + ix + 1];
          if (ix >= 0 && iy + 1 < n) v += (1.0 - fx) * fy * img[(iy + 1) * n + ix];
          if (ix + 1 < n && iy + 1 < n) v += fx * fy * img[(iy + 1) * n + ix + 1];
          acc += w * v;
        }
        gx += ray.dgx;
        gy += ray.dgy;
      }
      row[k] = acc;
    }
  }
  return sino;
}

Image back_project(const Sinogram& sino, const ScanGeometry& geom,
                   const ImageGrid& grid) {
  validate(sino);
  validate(grid);
  if (sino.geometry.num_angles() != geom.num_angles() ||
      sino.geometry.num_detectors() != geom.num_detectors())
    throw ContractError("back_project: sinogram shape does not match geometry");

  const int n = grid.width;
  const double e = grid.extent;
  const double pitch = grid.pixel_pitch();
  const double inv_pitch = 1.0 / pitch;
  const double target_step = 0.5 * pitch;
  const int na = geom.num_angles();
  const int nd = geom.num_detectors();

  const int blocks = std::min(kAdjointBlocks, na);
  std::vector<Array2d<double>> partial(
      blocks, Array2d<double>(grid.height, grid.width, 0.0));

#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < blocks; ++b) {
    double* out = partial[b].data();
    const int a_begin = static_cast<int>(static_cast<long>(b) * na / blocks);
    const int a_end = static_cast<int>(static_cast<long>(b + 1) * na / blocks);
    for (int ia = a_begin; ia < a_end; ++ia) {
      const double c = std::cos(geom.angles[ia]);
      const double sn = std::sin(geom.angles[ia]);
      const double* row = sino.values.row(ia);
      for (int k = 0; k < nd; ++k) {
        const double y = row[k];
        if (y == 0.0) continue;
        RaySampling ray;
        if (!sample_ray(geom.detector_positions[k], c, sn, e, inv_pitch,
                        target_step, ray))
          continue;
        double gx = ray.gx0, gy = ray.gy0;
        for (int j = 0; j <= ray.num_steps; ++j) {
          const double w = (j == 0 || j == ray.num_steps) ? 0.5 * ray.step
                                                          : ray.step;
          const double val = y * w;
          const int ix = static_cast<int>(std::floor(gx));
          const int iy = static_cast<int>(std::floor(gy));
          if (ix >= 0 && ix + 1 < n && iy >= 0 && iy + 1 < n) {
            const double fx = gx - ix, fy = gy - iy;
            double* p = out + static_cast<std::size_t>(iy) * n + ix;
            p[0] += val * (1.0 - fx) * (1.0 - fy);
            p[1] += val * fx * (1.0 - fy);
            p[n] += val * (1.0 - fx) * fy;
            p[n + 1] += val * fx * fy;
          } else if (ix >= -1 && ix <= n - 1 && iy >= -1 && iy <= n - 1) {
            const double fx = gx - ix, fy = gy - iy;
            if (ix >= 0 && iy >= 0)
              out[iy * n + ix] += val * (1.0 - fx) * (1.0 - fy);
            if (ix + 1 < n && iy >= 0)
              out[iy * n + ix + 1] += val * fx * (1.0 - fy);
            if (ix >= 0 && iy + 1 < n)
              out[(iy + 1) * n + ix] += val * (1.0 - fx) * fy;
            if (ix + 1 < n && iy + 1 < n)
              out[(iy + 1) * n + ix + 1] += val * fx * fy;
          }
          gx += ray.dgx;
          gy += ray.dgy;
        }
      }
    }
  }

  Image result = make_image(grid, PixelUnit::kNormalized);
  double* out = result.values.data();
  const std::size_t count = result.values.size();
  for (int b = 0; b < blocks; ++b) {
    const double* p = partial[b].data();
    for (std::size_t i = 0; i < count; ++i) out[i] += p[i];
  }
  return result;
}

}  // namespace lodopab
