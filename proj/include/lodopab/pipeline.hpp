#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lodopab/constants.hpp"
#include "lodopab/dataset_io.hpp"
#include "lodopab/fbp.hpp"
#include "lodopab/metrics.hpp"

namespace lodopab {

/// Batch run configuration shared by the simulate / reconstruct / evaluate
/// commands. All physics parameters default to the dataset's values.
struct RunConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::string part = "train";
  std::uint64_t seed = 0;
  PhysicsConstants constants;
  ScanGeometry geometry;  // empty -> default geometry
  int simulation_grid_size = kSimulationSize;
  int shard_size = kDefaultShardSize;
  int workers = 0;  // 0 -> hardware concurrency
  FbpConfig fbp;
};

/// Fills in defaulted fields (geometry) and validates the rest.
RunConfig resolve(RunConfig config);

/// Ingests every slice under input_dir, simulates measurements, and
/// writes ground-truth and observation shards plus the part manifest and
/// patient-ID sidecar. Deterministic given (inputs, seed), independent of
/// the worker count. Fails if any slice fails; nothing is dropped
/// silently.
PartManifest cmd_simulate(const RunConfig& config);

/// FBP per sample over the part's observation shards; writes
/// reconstruction_{part}_{NNN}.hdf5 with the same sharding. Refuses to
/// run when the manifest's geometry hash does not match the configured
/// geometry.
void cmd_reconstruct(const RunConfig& config);

/// Per-sample PSNR/SSIM of reconstructions against ground truths plus the
/// mean summary row, written to metrics_{part}.csv.
MetricReport cmd_evaluate(const RunConfig& config);

}  // namespace lodopab
