#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lodopab/array.hpp"
#include "lodopab/constants.hpp"
#include "lodopab/rng.hpp"

namespace lodopab {

inline constexpr int kSourceSliceSize = 512;
inline constexpr int kCropMargin = 75;  // 512 - 2*75 = 362

/// Central 362x362 crop of a 512x512 slice (rows/cols 75..436).
/// Throws IngestError for any other input shape.
Array2d<double> crop_center(const Array2d<double>& slice,
                            const std::string& slice_name = "slice");

/// Adds i.i.d. uniform noise from [0, 1) to every pixel. Deterministic
/// given the stream state.
Array2d<double> dequantize(const Array2d<double>& hu, RandomStream& rng);

/// HU -> linear attenuation [1/m]: mu = hu * (mu_water - mu_air) / 1000
/// + mu_water. Evaluated in a fused order so that hu = 0 and hu = -1000
/// map to mu_water and mu_air bit-exactly.
double hu_to_mu(double hu, const PhysicsConstants& constants);
Array2d<double> hu_to_mu(const Array2d<double>& hu,
                         const PhysicsConstants& constants);

/// Exact inverse of hu_to_mu.
double mu_to_hu(double mu, const PhysicsConstants& constants);

/// mu -> [0, 1]: clip(mu / mu_max, [0, 1]).
double normalize_clip(double mu, const PhysicsConstants& constants);
Array2d<double> normalize_clip(const Array2d<double>& mu,
                               const PhysicsConstants& constants);

/// One source slice: raw stored values plus the affine rescale into HU
/// and the sidecar metadata.
struct SliceRecord {
  Array2d<double> raw;  // 512x512 stored integer values
  double rescale_slope = 1.0;
  double rescale_intercept = 0.0;
  long patient_random_id = -1;
  double z_position = 0.0;
  std::string source_name;
};

/// Reads the intermediate slice format: <stem>.raw holds 512*512 little-
/// endian int16 row-major, <stem>.json holds {rescale_slope,
/// rescale_intercept, patient_random_id, z_position}.
SliceRecord read_slice_raw(const std::filesystem::path& raw_path);

/// Writes a slice in the intermediate format (values rounded to int16).
void write_slice_raw(const std::filesystem::path& raw_path,
                     const Array2d<double>& values, double rescale_slope,
                     double rescale_intercept, long patient_random_id,
                     double z_position);

/// Best-effort reader for uncompressed little-endian DICOM files,
/// extracting PixelData, RescaleSlope and RescaleIntercept only.
/// Compressed transfer syntaxes are rejected with IngestError.
SliceRecord read_slice_dicom(const std::filesystem::path& path);

/// Slice files under dir (*.raw or *.dcm), sorted by filename. The sorted
/// position is the slice index used for seeding.
std::vector<std::filesystem::path> list_slices(
    const std::filesystem::path& dir);

/// Reads a slice by extension (.raw -> intermediate format, .dcm -> DICOM).
SliceRecord read_slice(const std::filesystem::path& path);

}  // namespace lodopab
