#pragma once

#include "lodopab/geometry.hpp"
#include "lodopab/image.hpp"

namespace lodopab {

enum class FbpFilter { kRamLak };

/// Filtered back-projection configuration. The Ram-Lak filter is applied
/// without frequency scaling; rows are zero-padded to the next power of
/// two >= zero_pad_factor * num_detectors before the transform.
struct FbpConfig {
  FbpFilter filter = FbpFilter::kRamLak;
  int zero_pad_factor = 2;
  ImageGrid output_grid{kGroundTruthSize, kGroundTruthSize, kDomainHalfWidth};
};

/// Reconstructs an image from a sinogram: per-angle ramp filtering in the
/// frequency domain (band-limited |nu| up to the detector Nyquist
/// frequency), back-projection, and amplitude scaling. The output is not
/// clipped.
Image fbp_reconstruct(const Sinogram& sino, const FbpConfig& config = {});

/// Convenience overload for normalized post-log measurements.
Image fbp_reconstruct(const Measurement& meas, const FbpConfig& config = {});

}  // namespace lodopab
