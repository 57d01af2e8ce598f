#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace lodopab {

inline constexpr double kDomainHalfWidth = 0.13;  // meters
inline constexpr int kGroundTruthSize = 362;
inline constexpr int kSimulationSize = 1000;
inline constexpr int kDefaultNumAngles = 1000;
inline constexpr int kDefaultNumDetectors = 513;

/// Square pixel grid over the physical domain [-extent, extent]^2.
/// Row index increases with y, column index with x; pixel (r, c) is
/// centered at (-extent + (c + 1/2) * pitch, -extent + (r + 1/2) * pitch).
struct ImageGrid {
  int width = 0;
  int height = 0;
  double extent = kDomainHalfWidth;  // physical half-width, meters

  double pixel_pitch() const { return 2.0 * extent / width; }
  bool operator==(const ImageGrid&) const = default;
};

ImageGrid make_grid(int size, double extent = kDomainHalfWidth);

/// Throws ContractError unless the grid is square with positive size and
/// extent.
void validate(const ImageGrid& grid);

/// Parallel-beam sampling of the sinogram domain: projection angles
/// phi in [0, pi) and signed detector positions s in meters.
struct ScanGeometry {
  std::vector<double> angles;
  std::vector<double> detector_positions;
  double detector_half_length = 0.0;

  int num_angles() const { return static_cast<int>(angles.size()); }
  int num_detectors() const {
    return static_cast<int>(detector_positions.size());
  }
  double detector_pitch() const {
    return 2.0 * detector_half_length / num_detectors();
  }
  bool operator==(const ScanGeometry&) const = default;
};

/// Uniform geometry: angles at midpoints of num_angles cells partitioning
/// [0, pi); detectors at midpoints of num_detectors cells partitioning
/// [-half_length, half_length]. Midpoint detector positions are built
/// symmetric about zero (s_k = -s_{n-1-k} holds bit-exactly).
ScanGeometry make_geometry(int num_angles, int num_detectors,
                           double half_length);

/// The measurement geometry used throughout: 1000 angles, 513 detector
/// positions, detector half-length sqrt(2) * 0.13 m. The half-length
/// circumscribes the rotated image square, which makes 513 detector
/// pixels the smallest odd count resolving a 362-pixel image.
ScanGeometry make_default_geometry();

void validate(const ScanGeometry& geom);

/// Unit direction omega(phi) = (cos phi, sin phi).
std::array<double, 2> beam_direction(double phi);
/// Orthogonal direction omega_perp(phi) = (-sin phi, cos phi).
std::array<double, 2> beam_normal(double phi);

/// Point on the beam with offset s at angle phi, parameter t:
/// s * omega(phi) + t * omega_perp(phi).
std::array<double, 2> beam_point(double s, double phi, double t);

nlohmann::json to_json(const ImageGrid& grid);
ImageGrid grid_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScanGeometry& geom);
ScanGeometry geometry_from_json(const nlohmann::json& j);

/// Stable 64-bit FNV-1a hash over the geometry's raw field bytes,
/// hex-encoded. Used to tie dataset files to the geometry that produced
/// them.
std::string geometry_hash(const ScanGeometry& geom);

}  // namespace lodopab
