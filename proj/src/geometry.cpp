#include "lodopab/geometry.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "lodopab/errors.hpp"

namespace lodopab {

ImageGrid make_grid(int size, double extent) {
  ImageGrid grid{size, size, extent};
  validate(grid);
  return grid;
}

void validate(const ImageGrid& grid) {
  if (grid.width <= 0 || grid.height <= 0)
    throw ContractError("image grid: non-positive size");
  if (grid.width != grid.height)
    throw ContractError("image grid: only square grids are supported");
  if (!(grid.extent > 0.0))
    throw ContractError("image grid: extent must be positive");
}

ScanGeometry make_geometry(int num_angles, int num_detectors,
                           double half_length) {
  if (num_angles <= 0 || num_detectors <= 0)
    throw ContractError("scan geometry: counts must be positive");
  if (!(half_length > 0.0))
    throw ContractError("scan geometry: detector half-length must be positive");

  ScanGeometry geom;
  geom.detector_half_length = half_length;
  geom.angles.resize(num_angles);
  for (int i = 0; i < num_angles; ++i)
    geom.angles[i] = (i + 0.5) * std::numbers::pi / num_angles;

  // Positions relative to the center index so that s_k = -s_{n-1-k}
  // holds bit-exactly (and the middle position of an odd grid is 0).
  const double pitch = 2.0 * half_length / num_detectors;
  const double center = (num_detectors - 1) / 2.0;
  geom.detector_positions.resize(num_detectors);
  for (int k = 0; k < num_detectors; ++k)
    geom.detector_positions[k] = (k - center) * pitch;
  return geom;
}

ScanGeometry make_default_geometry() {
  return make_geometry(kDefaultNumAngles, kDefaultNumDetectors,
                       std::numbers::sqrt2 * kDomainHalfWidth);
}

void validate(const ScanGeometry& geom) {
  if (geom.angles.empty() || geom.detector_positions.empty())
    throw ContractError("scan geometry: empty angle or detector set");
  if (!(geom.detector_half_length > 0.0))
    throw ContractError("scan geometry: detector half-length must be positive");
  for (std::size_t i = 1; i < geom.angles.size(); ++i)
    if (!(geom.angles[i] > geom.angles[i - 1]))
      throw ContractError("scan geometry: angles must be strictly increasing");
  const int n = geom.num_detectors();
  for (int k = 0; k < n; ++k)
    if (geom.detector_positions[k] != -geom.detector_positions[n - 1 - k])
      throw ContractError("scan geometry: detector positions not symmetric");
}

std::array<double, 2> beam_direction(double phi) {
  return {std::cos(phi), std::sin(phi)};
}

std::array<double, 2> beam_normal(double phi) {
  return {-std::sin(phi), std::cos(phi)};
}

std::array<double, 2> beam_point(double s, double phi, double t) {
  const auto w = beam_direction(phi);
  const auto wp = beam_normal(phi);
  return {s * w[0] + t * wp[0], s * w[1] + t * wp[1]};
}

nlohmann::json to_json(const ImageGrid& grid) {
  return {{"width", grid.width},
          {"height", grid.height},
          {"extent", grid.extent}};
}

ImageGrid grid_from_json(const nlohmann::json& j) {
  ImageGrid grid;
  grid.width = j.at("width").get<int>();
  grid.height = j.at("height").get<int>();
  grid.extent = j.at("extent").get<double>();
  validate(grid);
  return grid;
}

nlohmann::json to_json(const ScanGeometry& geom) {
  return {{"num_angles", geom.num_angles()},
          {"num_detectors", geom.num_detectors()},
          {"angles", geom.angles},
          {"detector_positions", geom.detector_positions},
          {"detector_half_length", geom.detector_half_length},
          {"angle_convention", "midpoint"}};
}

ScanGeometry geometry_from_json(const nlohmann::json& j) {
  ScanGeometry geom;
  geom.angles = j.at("angles").get<std::vector<double>>();
  geom.detector_positions =
      j.at("detector_positions").get<std::vector<double>>();
  geom.detector_half_length = j.at("detector_half_length").get<double>();
  if (j.contains("num_angles") &&
      j.at("num_angles").get<int>() != geom.num_angles())
    throw ContractError("geometry json: num_angles mismatch");
  if (j.contains("num_detectors") &&
      j.at("num_detectors").get<int>() != geom.num_detectors())
    throw ContractError("geometry json: num_detectors mismatch");
  validate(geom);
  return geom;
}

std::string geometry_hash(const ScanGeometry& geom) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t na = geom.angles.size();
  const std::uint64_t nd = geom.detector_positions.size();
  mix(&na, sizeof na);
  mix(&nd, sizeof nd);
  mix(&geom.detector_half_length, sizeof(double));
  mix(geom.angles.data(), geom.angles.size() * sizeof(double));
  mix(geom.detector_positions.data(),
      geom.detector_positions.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lodopab
