#pragma once

#include <cstdint>

#include "lodopab/array.hpp"
#include "lodopab/geometry.hpp"

namespace lodopab {

enum class PixelUnit { kHU, kMuPerM, kNormalized };
enum class SinoUnit { kLineIntegral, kNormalizedPostLog };

/// 2D scalar field on an ImageGrid. values(r, c): r follows y, c follows x.
struct Image {
  ImageGrid grid;
  PixelUnit unit = PixelUnit::kMuPerM;
  Array2d<double> values;
};

Image make_image(const ImageGrid& grid, PixelUnit unit);

/// 2D scalar field indexed (angle, detector).
struct Sinogram {
  ScanGeometry geometry;
  SinoUnit unit = SinoUnit::kLineIntegral;
  Array2d<double> values;  // shape (num_angles, num_detectors)
};

Sinogram make_sinogram(const ScanGeometry& geom, SinoUnit unit);

/// Per-(angle, detector) photon counts, pre-log domain.
struct PhotonField {
  ScanGeometry geometry;
  Array2d<double> counts;
};

/// Simulation parameters recorded with every measurement.
struct Provenance {
  std::uint64_t seed = 0;
  double n0 = 4096.0;
  double min_photon_count = 0.1;
  double sigma_detector = 0.0;
};

/// Normalized post-log observation y-hat with its provenance. Values are
/// bounded above by -ln(min_photon_count / n0) / mu_max.
struct Measurement {
  ScanGeometry geometry;
  Array2d<double> values;
  Provenance provenance;
};

/// Throws ContractError unless the value shapes match the attached
/// grid / geometry.
void validate(const Image& image);
void validate(const Sinogram& sino);

}  // namespace lodopab
