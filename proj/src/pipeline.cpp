#include "lodopab/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <thread>
#include <vector>

#include "lodopab/errors.hpp"
#include "lodopab/ingest.hpp"
#include "lodopab/physics.hpp"

namespace lodopab {

namespace {

// Slices per in-memory batch. Batches bound the buffering while keeping
// enough work in flight for the worker pool.
constexpr std::size_t kBatchSize = 32;

struct SliceOutput {
  Array2d<float> ground_truth;
  Array2d<float> observation;
  long patient_id = -1;
  std::string error;  // non-empty on failure
};

SliceOutput process_slice(const std::filesystem::path& path,
                          std::size_t slice_index, const RunConfig& cfg) {
  SliceOutput out;
  try {
    const SliceRecord rec = read_slice(path);
    Array2d<double> hu = crop_center(rec.raw, rec.source_name);
    for (std::size_t i = 0; i < hu.size(); ++i)
      hu.data()[i] = hu.data()[i] * rec.rescale_slope + rec.rescale_intercept;

    RandomStream rng(derive_stream_seed(cfg.seed, cfg.part, slice_index));
    const Array2d<double> dequantized = dequantize(hu, rng);
    const Array2d<double> mu = hu_to_mu(dequantized, cfg.constants);
    const Array2d<double> gt = normalize_clip(mu, cfg.constants);

    // The projection runs on the non-normalized attenuation image; the
    // stored ground truth is the clipped, normalized one.
    Image mu_image{make_grid(kGroundTruthSize), PixelUnit::kMuPerM, mu};
    SimulateOptions options;
    options.simulation_grid_size = cfg.simulation_grid_size;
    const Measurement meas = simulate_from_mu(mu_image, cfg.geometry,
                                              cfg.constants, rng, cfg.seed,
                                              options);

    out.ground_truth = gt.cast<float>();
    out.observation = meas.values.cast<float>();
    out.patient_id = rec.patient_random_id;
  } catch (const std::exception& ex) {
    out.error = ex.what();
  }
  return out;
}

// Batches run through a pool of `workers` slice-level threads; with one
// worker the batch loop stays serial and the operators parallelize
// internally instead. Results are committed in index order either way.
void run_batched(std::size_t count, int workers,
                 const std::function<void(std::size_t)>& work,
                 const std::function<void(std::size_t)>& commit) {
  for (std::size_t start = 0; start < count; start += kBatchSize) {
    const std::size_t end = std::min(count, start + kBatchSize);
    const auto n = static_cast<long>(end - start);
#pragma omp parallel for num_threads(workers) schedule(dynamic) \
    if (workers > 1)
    for (long i = 0; i < n; ++i) work(start + static_cast<std::size_t>(i));
    for (std::size_t i = start; i < end; ++i) commit(i);
  }
}

}  // namespace

RunConfig resolve(RunConfig config) {
  if (config.geometry.angles.empty())
    config.geometry = make_default_geometry();
  validate(config.geometry);
  validate(config.constants);
  if (config.shard_size <= 0)
    throw ContractError("config: shard size must be positive");
  if (config.workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    config.workers = hw > 0 ? static_cast<int>(hw) : 1;
  }
  return config;
}

PartManifest cmd_simulate(const RunConfig& raw_config) {
  const RunConfig cfg = resolve(raw_config);
  const auto slices = list_slices(cfg.input_dir);
  std::filesystem::create_directories(cfg.output_dir);

  ShardWriter gt_writer(cfg.output_dir, "ground_truth", cfg.part,
                        kGroundTruthSize, kGroundTruthSize, cfg.shard_size);
  ShardWriter obs_writer(cfg.output_dir, "observation", cfg.part,
                         cfg.geometry.num_angles(),
                         cfg.geometry.num_detectors(), cfg.shard_size);
  std::vector<long> patient_ids;
  patient_ids.reserve(slices.size());

  std::vector<SliceOutput> batch(std::min(kBatchSize, slices.size()));
  std::size_t failures = 0;
  std::string first_failure;

  run_batched(
      slices.size(), cfg.workers,
      [&](std::size_t i) { batch[i % kBatchSize] = process_slice(slices[i], i, cfg); },
      [&](std::size_t i) {
        SliceOutput& out = batch[i % kBatchSize];
        if (!out.error.empty()) {
          ++failures;
          std::cerr << "error: slice " << slices[i].filename().string()
                    << ": " << out.error << "\n";
          if (first_failure.empty()) first_failure = out.error;
          return;
        }
        gt_writer.append(out.ground_truth);
        obs_writer.append(out.observation);
        patient_ids.push_back(out.patient_id);
      });

  if (failures > 0)
    throw IngestError(std::to_string(failures) + " slice(s)",
                      "simulation aborted; first failure: " + first_failure);

  PartManifest manifest;
  manifest.part = cfg.part;
  manifest.count = patient_ids.size();
  manifest.shard_size = cfg.shard_size;
  manifest.seed = cfg.seed;
  manifest.constants = cfg.constants;
  manifest.geometry = cfg.geometry;
  manifest.geometry_hash = geometry_hash(cfg.geometry);
  manifest.ground_truth_grid = make_grid(kGroundTruthSize);
  manifest.simulation_grid_size = cfg.simulation_grid_size;
  manifest.ground_truth_shards = gt_writer.close();
  manifest.observation_shards = obs_writer.close();
  save_manifest(manifest, cfg.output_dir);
  write_patient_csv(cfg.output_dir, cfg.part, patient_ids);
  return manifest;
}

void cmd_reconstruct(const RunConfig& raw_config) {
  const RunConfig cfg = resolve(raw_config);
  const PartManifest manifest = load_manifest(cfg.input_dir, cfg.part);
  if (geometry_hash(cfg.geometry) != manifest.geometry_hash)
    throw ContractError(
        "reconstruct: configured geometry (hash " +
        geometry_hash(cfg.geometry) + ") does not match the dataset (hash " +
        manifest.geometry_hash + "); refusing to run");

  std::filesystem::create_directories(cfg.output_dir);
  ShardReader obs(cfg.input_dir, "observation", cfg.part, manifest.count,
                  manifest.geometry.num_angles(),
                  manifest.geometry.num_detectors(), manifest.shard_size);

  // Reconstructions land on the dataset's ground-truth grid so they can
  // be evaluated sample by sample.
  FbpConfig fbp = cfg.fbp;
  fbp.output_grid = manifest.ground_truth_grid;
  ShardWriter recon_writer(cfg.output_dir, "reconstruction", cfg.part,
                           fbp.output_grid.height, fbp.output_grid.width,
                           manifest.shard_size);

  std::vector<Array2d<float>> inputs(std::min(kBatchSize, manifest.count));
  std::vector<Array2d<float>> outputs(inputs.size());

  for (std::size_t start = 0; start < manifest.count; start += kBatchSize) {
    const std::size_t end = std::min(manifest.count, start + kBatchSize);
    for (std::size_t i = start; i < end; ++i)
      inputs[i - start] = obs.read(i);  // reader keeps one shard open

    const auto n = static_cast<long>(end - start);
    const bool pool = cfg.workers > 1;
#pragma omp parallel for num_threads(cfg.workers) schedule(dynamic) if (pool)
    for (long i = 0; i < n; ++i) {
      Measurement meas{manifest.geometry,
                       inputs[static_cast<std::size_t>(i)].cast<double>(),
                       Provenance{manifest.seed, manifest.constants.n0,
                                  manifest.constants.min_photon_count,
                                  manifest.constants.sigma_detector}};
      const Image image = fbp_reconstruct(meas, fbp);
      outputs[static_cast<std::size_t>(i)] = image.values.cast<float>();
    }
    for (std::size_t i = start; i < end; ++i)
      recon_writer.append(outputs[i - start]);
  }
  recon_writer.close();
}

MetricReport cmd_evaluate(const RunConfig& raw_config) {
  const RunConfig cfg = resolve(raw_config);
  const PartManifest manifest = load_manifest(cfg.input_dir, cfg.part);

  const std::size_t recon_count =
      probe_shard_count(cfg.input_dir, "reconstruction", cfg.part);
  if (recon_count != manifest.count)
    throw ContractError("evaluate: reconstruction count (" +
                        std::to_string(recon_count) +
                        ") does not match ground-truth count (" +
                        std::to_string(manifest.count) + ")");

  ShardReader gt(cfg.input_dir, "ground_truth", cfg.part, manifest.count,
                 manifest.ground_truth_grid.height,
                 manifest.ground_truth_grid.width, manifest.shard_size);
  ShardReader recon(cfg.input_dir, "reconstruction", cfg.part, manifest.count,
                    manifest.ground_truth_grid.height,
                    manifest.ground_truth_grid.width, manifest.shard_size);

  std::vector<SampleMetrics> samples;
  samples.reserve(manifest.count);
  for (std::size_t i = 0; i < manifest.count; ++i) {
    const Array2d<double> g = gt.read(i).cast<double>();
    const Array2d<double> r = recon.read(i).cast<double>();
    samples.push_back({i, psnr(r, g), ssim(r, g)});
  }

  MetricReport report = aggregate(std::move(samples));
  std::filesystem::create_directories(cfg.output_dir);
  write_metric_csv(report, cfg.output_dir / ("metrics_" + cfg.part + ".csv"));
  return report;
}

}  // namespace lodopab
