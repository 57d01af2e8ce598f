#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "lodopab/errors.hpp"
#include "lodopab/ingest.hpp"
#include "lodopab/pipeline.hpp"
#include "lodopab/rng.hpp"
#include "oracles.hpp"

using namespace lodopab;
using namespace lodopab::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lodopab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Random soft-tissue-like slices in HU with an elliptical body on an air
// background.
void make_synthetic_slices(const fs::path& dir, int count,
                           std::uint64_t seed) {
  RandomStream rng(seed);
  for (int i = 0; i < count; ++i) {
    Array2d<double> hu(512, 512, -1000.0);
    const double cx = 256.0 + 30.0 * (rng.uniform() - 0.5);
    const double cy = 256.0 + 30.0 * (rng.uniform() - 0.5);
    const double ax = 150.0 + 40.0 * rng.uniform();
    const double ay = 120.0 + 40.0 * rng.uniform();
    for (int r = 0; r < 512; ++r)
      for (int c = 0; c < 512; ++c) {
        const double dx = (c - cx) / ax, dy = (r - cy) / ay;
        if (dx * dx + dy * dy <= 1.0)
          hu(r, c) = 40.0 + 60.0 * std::sin(0.05 * r) * std::cos(0.07 * c);
      }
    char name[32];
    std::snprintf(name, sizeof name, "slice_%03d.raw", i);
    write_slice_raw(dir / name, hu, 1.0, 0.0, 1000 + i / 2, i * 7.5);
  }
}

// Small geometry keeps the unit-level pipeline fast; the acceptance suite
// exercises the full-size one.
RunConfig small_config(const fs::path& input, const fs::path& output) {
  RunConfig cfg;
  cfg.input_dir = input;
  cfg.output_dir = output;
  cfg.part = "train";
  cfg.seed = 99;
  cfg.geometry = make_geometry(100, 65, std::numbers::sqrt2 * 0.13);
  cfg.simulation_grid_size = 500;
  return cfg;
}

std::vector<char> file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("simulate writes shards, manifest and patient ids deterministically") {
  const auto slices = temp_dir("pipe_slices");
  make_synthetic_slices(slices, 3, 1);

  const auto out1 = temp_dir("pipe_out1");
  auto cfg = small_config(slices, out1);
  const auto manifest = cmd_simulate(cfg);
  CHECK(manifest.count == 3);
  CHECK(fs::exists(out1 / "ground_truth_train_000.hdf5"));
  CHECK(fs::exists(out1 / "observation_train_000.hdf5"));
  CHECK(fs::exists(out1 / "manifest_train.json"));
  CHECK(fs::exists(out1 / "patient_ids_train.csv"));
  CHECK(read_patient_csv(out1, "train") ==
        std::vector<long>{1000, 1000, 1001});

  // Re-run into a second directory: bit-identical data.
  const auto out2 = temp_dir("pipe_out2");
  cfg.output_dir = out2;
  cmd_simulate(cfg);
  for (std::size_t i = 0; i < manifest.count; ++i) {
    const auto a = read_sample(out1, "train", i);
    const auto b = read_sample(out2, "train", i);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("worker counts do not change the output bytes") {
  const auto slices = temp_dir("pipe_workers_slices");
  make_synthetic_slices(slices, 5, 2);

  const auto out1 = temp_dir("pipe_workers_1");
  auto cfg = small_config(slices, out1);
  cfg.workers = 1;
  cmd_simulate(cfg);

  const auto out8 = temp_dir("pipe_workers_8");
  cfg.output_dir = out8;
  cfg.workers = 8;
  cmd_simulate(cfg);

  for (std::size_t i = 0; i < 5; ++i) {
    const auto a = read_sample(out1, "train", i);
    const auto b = read_sample(out8, "train", i);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("a missing sidecar aborts the run naming the slice") {
  const auto slices = temp_dir("pipe_missing_sidecar");
  make_synthetic_slices(slices, 2, 3);
  fs::remove(slices / "slice_001.json");

  const auto out = temp_dir("pipe_missing_out");
  CHECK_THROWS_WITH_AS(cmd_simulate(small_config(slices, out)),
                       doctest::Contains("slice_001"), IngestError);
}

TEST_CASE("reconstruct refuses a geometry hash mismatch") {
  const auto slices = temp_dir("pipe_hash_slices");
  make_synthetic_slices(slices, 1, 4);
  const auto out = temp_dir("pipe_hash_out");
  auto cfg = small_config(slices, out);
  cmd_simulate(cfg);

  auto wrong = cfg;
  wrong.input_dir = out;
  wrong.geometry = make_geometry(101, 65, std::numbers::sqrt2 * 0.13);
  CHECK_THROWS_WITH_AS(cmd_reconstruct(wrong), doctest::Contains("hash"),
                       ContractError);
}

TEST_CASE("simulate, reconstruct and evaluate chain end to end") {
  const auto slices = temp_dir("pipe_chain_slices");
  make_synthetic_slices(slices, 3, 5);
  const auto ds = temp_dir("pipe_chain_ds");
  auto cfg = small_config(slices, ds);
  cmd_simulate(cfg);

  cfg.input_dir = ds;
  cfg.output_dir = ds;
  cmd_reconstruct(cfg);
  CHECK(fs::exists(ds / "reconstruction_train_000.hdf5"));

  const auto report = cmd_evaluate(cfg);
  CHECK(report.samples.size() == 3);
  for (const auto& s : report.samples) {
    CHECK(std::isfinite(s.psnr_db));
    CHECK(s.psnr_db > 5.0);  // a sane reconstruction, not noise
    CHECK(s.ssim > 0.0);
    CHECK(s.ssim <= 1.0);
  }
  CHECK(fs::exists(ds / "metrics_train.csv"));
}

TEST_CASE("evaluating reconstructions identical to ground truth") {
  const auto slices = temp_dir("pipe_ident_slices");
  make_synthetic_slices(slices, 1, 6);
  const auto ds = temp_dir("pipe_ident_ds");
  auto cfg = small_config(slices, ds);
  const auto manifest = cmd_simulate(cfg);

  // Forge reconstruction shards as copies of the ground truth.
  for (const auto& shard : manifest.ground_truth_shards) {
    auto recon_name = shard.file;
    recon_name.replace(0, std::string("ground_truth").size(),
                       "reconstruction");
    fs::copy_file(ds / shard.file, ds / recon_name);
  }

  cfg.input_dir = ds;
  cfg.output_dir = ds;
  const auto report = cmd_evaluate(cfg);
  REQUIRE(report.samples.size() == 1);
  CHECK(report.samples[0].psnr_db ==
        std::numeric_limits<double>::infinity());
  CHECK(report.samples[0].ssim == 1.0);
  CHECK(report.mean_ssim == 1.0);
}

TEST_CASE("evaluate rejects a count mismatch") {
  const auto slices = temp_dir("pipe_count_slices");
  make_synthetic_slices(slices, 2, 7);
  const auto ds = temp_dir("pipe_count_ds");
  auto cfg = small_config(slices, ds);
  const auto manifest = cmd_simulate(cfg);

  // Only one of the two samples gets a forged reconstruction.
  ShardWriter writer(ds, "reconstruction", "train", 362, 362,
                     manifest.shard_size);
  writer.append(Array2d<float>(362, 362, 0.5f));
  writer.close();

  cfg.input_dir = ds;
  cfg.output_dir = ds;
  CHECK_THROWS_WITH_AS(cmd_evaluate(cfg), doctest::Contains("count"),
                       ContractError);
}

TEST_CASE("an empty slice directory produces an empty part") {
  const auto slices = temp_dir("pipe_empty_slices");
  const auto ds = temp_dir("pipe_empty_ds");
  auto cfg = small_config(slices, ds);
  const auto manifest = cmd_simulate(cfg);
  CHECK(manifest.count == 0);
  CHECK(manifest.ground_truth_shards.empty());

  cfg.input_dir = ds;
  cfg.output_dir = ds;
  cmd_reconstruct(cfg);  // zero shards
  const auto report = cmd_evaluate(cfg);
  CHECK(report.samples.empty());
  CHECK(fs::exists(ds / "metrics_train.csv"));
}
