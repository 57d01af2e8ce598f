#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lodopab/array.hpp"
#include "lodopab/constants.hpp"
#include "lodopab/geometry.hpp"

namespace lodopab {

inline constexpr int kDefaultShardSize = 128;

struct ShardInfo {
  std::string file;
  std::size_t count = 0;
};

/// Everything needed to regenerate or reattach a dataset part: counts,
/// sharding, seed, physics constants and the scan geometry with its hash.
struct PartManifest {
  std::string part;
  std::size_t count = 0;
  int shard_size = kDefaultShardSize;
  std::uint64_t seed = 0;
  PhysicsConstants constants;
  ScanGeometry geometry;
  std::string geometry_hash;
  ImageGrid ground_truth_grid{kGroundTruthSize, kGroundTruthSize,
                              kDomainHalfWidth};
  int simulation_grid_size = kSimulationSize;
  std::string angle_convention = "midpoint";
  std::vector<ShardInfo> ground_truth_shards;
  std::vector<ShardInfo> observation_shards;
};

nlohmann::json to_json(const PartManifest& manifest);
PartManifest manifest_from_json(const nlohmann::json& j);

void save_manifest(const PartManifest& manifest,
                   const std::filesystem::path& dir);
PartManifest load_manifest(const std::filesystem::path& dir,
                           const std::string& part);

/// Writes {kind}_{part}_{NNN}.hdf5 shards incrementally. Each shard holds
/// one float32 dataset named "data" of shape (n, rows, cols) with
/// n <= shard_size; the final shard may be smaller.
class ShardWriter {
 public:
  ShardWriter(std::filesystem::path dir, std::string kind, std::string part,
              std::size_t rows, std::size_t cols,
              int shard_size = kDefaultShardSize);
  ~ShardWriter();
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  void append(const Array2d<float>& sample);
  /// Flushes the open shard and returns the shard list.
  std::vector<ShardInfo> close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// O(1) sample access over a shard sequence: index / shard_size names the
/// shard, index % shard_size the row.
class ShardReader {
 public:
  ShardReader(std::filesystem::path dir, std::string kind, std::string part,
              std::size_t count, std::size_t rows, std::size_t cols,
              int shard_size = kDefaultShardSize);
  ~ShardReader();
  ShardReader(const ShardReader&) = delete;
  ShardReader& operator=(const ShardReader&) = delete;

  std::size_t count() const;
  Array2d<float> read(std::size_t index) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Pull-based sample stream; returns std::nullopt when exhausted.
using SampleSource = std::function<
    std::optional<std::pair<Array2d<float>, Array2d<float>>>()>;

/// Drains `next` into ground_truth / observation shards under dir and
/// writes manifest_{part}.json. The template manifest supplies part name,
/// seed, constants and geometry; counts and shard lists are filled in.
PartManifest write_shards(const SampleSource& next, PartManifest manifest,
                          const std::filesystem::path& dir);

/// Reads one (ground truth, observation) pair through the part manifest.
std::pair<Array2d<float>, Array2d<float>> read_sample(
    const std::filesystem::path& dir, const std::string& part,
    std::size_t index);

/// Standalone single-array HDF5 files (dataset "data", float32, 2D).
void write_array_hdf5(const std::filesystem::path& path,
                      const Array2d<float>& values);
Array2d<float> read_array_hdf5(const std::filesystem::path& path);

/// Total sample count over the shard sequence {kind}_{part}_{NNN}.hdf5
/// present under dir (sum of first-dimension extents).
std::size_t probe_shard_count(const std::filesystem::path& dir,
                              const std::string& kind,
                              const std::string& part);

/// Patient-ID sidecar: CSV with columns (sample_index, patient_random_id).
void write_patient_csv(const std::filesystem::path& dir,
                       const std::string& part,
                       const std::vector<long>& patient_ids);
std::vector<long> read_patient_csv(const std::filesystem::path& dir,
                                   const std::string& part);

/// Partitions sample indices into parts so that all slices of one patient
/// land in exactly one part. Patients are shuffled deterministically by
/// seed, then apportioned to parts by the fractions (largest remainder).
/// Requires fractions summing to 1 and at least as many patients as parts.
std::vector<std::vector<std::size_t>> split_by_patient(
    const std::vector<long>& patient_ids, const std::vector<double>& fractions,
    std::uint64_t seed);

}  // namespace lodopab
