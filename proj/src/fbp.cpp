#include "lodopab/fbp.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "lodopab/errors.hpp"
#include "lodopab/projector.hpp"

namespace lodopab {

namespace {

// FFTW planning is not thread-safe; plan under a lock, execute on
// per-thread buffers via the new-array interface.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int padded_size(int num_detectors, int factor) {
  int p = 1;
  while (p < factor * num_detectors) p *= 2;
  return p;
}

struct FftBuffers {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  int size = 0;

  explicit FftBuffers(int n) : size(n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
  }
  ~FftBuffers() {
    fftw_free(in);
    fftw_free(out);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

// Per-angle ramp filtering: zero-pad, real FFT, multiply by |nu| up to
// the detector Nyquist frequency, inverse FFT, truncate.
Sinogram ram_lak_filter(const Sinogram& sino, int pad_factor) {
  const int na = sino.geometry.num_angles();
  const int nd = sino.geometry.num_detectors();
  const double ds = sino.geometry.detector_pitch();
  const int p = padded_size(nd, pad_factor);
  const int nfreq = p / 2 + 1;

  std::vector<double> ramp(nfreq);
  for (int m = 0; m < nfreq; ++m) ramp[m] = m / (p * ds);

  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    FftBuffers tmp(p);
    fwd = fftw_plan_dft_r2c_1d(p, tmp.in, tmp.out, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(p, tmp.out, tmp.in, FFTW_ESTIMATE);
  }

  Sinogram filtered = make_sinogram(sino.geometry, sino.unit);

#pragma omp parallel
  {
    FftBuffers buf(p);
#pragma omp for schedule(static)
    for (int ia = 0; ia < na; ++ia) {
      const double* src = sino.values.row(ia);
      for (int k = 0; k < nd; ++k) buf.in[k] = src[k];
      for (int k = nd; k < p; ++k) buf.in[k] = 0.0;
      fftw_execute_dft_r2c(fwd, buf.in, buf.out);
      for (int m = 0; m < nfreq; ++m) {
        buf.out[m][0] *= ramp[m];
        buf.out[m][1] *= ramp[m];
      }
      fftw_execute_dft_c2r(inv, buf.out, buf.in);
      double* dst = filtered.values.row(ia);
      const double inv_p = 1.0 / p;
      for (int k = 0; k < nd; ++k) dst[k] = buf.in[k] * inv_p;
    }
  }

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  return filtered;
}

}  // namespace

Image fbp_reconstruct(const Sinogram& sino, const FbpConfig& config) {
  validate(sino);
  validate(config.output_grid);
  if (config.filter != FbpFilter::kRamLak)
    throw ContractError("fbp: unknown filter");
  if (config.zero_pad_factor < 1)
    throw ContractError("fbp: zero_pad_factor must be >= 1");

  const Sinogram filtered = ram_lak_filter(sino, config.zero_pad_factor);
  Image image = back_project(filtered, sino.geometry, config.output_grid);

  // The discrete adjoint carries quadrature weights of pitch^2 / ds per
  // angle; rescale so the result approximates the inversion integral
  // (pi / num_angles) * integral of the filtered data over angles.
  const double pitch = config.output_grid.pixel_pitch();
  const double ds = sino.geometry.detector_pitch();
  const double scale = std::numbers::pi / sino.geometry.num_angles() * ds /
                       (pitch * pitch);
  for (std::size_t i = 0; i < image.values.size(); ++i)
    image.values.data()[i] *= scale;

  image.unit = sino.unit == SinoUnit::kNormalizedPostLog
                   ? PixelUnit::kNormalized
                   : PixelUnit::kMuPerM;
  return image;
}

Image fbp_reconstruct(const Measurement& meas, const FbpConfig& config) {
  Sinogram sino{meas.geometry, SinoUnit::kNormalizedPostLog, meas.values};
  return fbp_reconstruct(sino, config);
}

}  // namespace lodopab
