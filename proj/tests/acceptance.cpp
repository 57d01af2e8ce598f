// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion. Exit code 0 only
// if all non-skipped criteria pass.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lodopab/dataset_io.hpp"
#include "lodopab/fbp.hpp"
#include "lodopab/ingest.hpp"
#include "lodopab/metrics.hpp"
#include "lodopab/phantoms.hpp"
#include "lodopab/physics.hpp"
#include "lodopab/pipeline.hpp"
#include "lodopab/projector.hpp"
#include "lodopab/rng.hpp"
#include "oracles.hpp"

using namespace lodopab;
using namespace lodopab::testing;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " - criterion " << criterion
            << ": " << detail << "\n";
  std::cout.flush();
  if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
  std::cout << "SKIP - criterion " << criterion << ": " << detail << "\n";
  std::cout.flush();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lodopab_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double masked_rel_l2(const Array2d<double>& got, const Array2d<double>& want,
                     double mask_fraction) {
  double max_abs = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i)
    max_abs = std::max(max_abs, std::abs(want.data()[i]));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (std::abs(want.data()[i]) <= mask_fraction * max_abs) continue;
    const double d = got.data()[i] - want.data()[i];
    num += d * d;
    den += want.data()[i] * want.data()[i];
  }
  return std::sqrt(num / den);
}

struct ScopedSingleThread {
#ifdef _OPENMP
  int saved = omp_get_max_threads();
  ScopedSingleThread() { omp_set_num_threads(1); }
  ~ScopedSingleThread() { omp_set_num_threads(saved); }
#endif
};

// --- criterion 1: projector vs analytic phantoms at 1000^2 --------------

void criterion_1() {
  const auto geom = make_default_geometry();
  const auto grid = make_grid(1000);

  double worst = 0.0;
  double seconds = 0.0;
  {
    ScopedSingleThread single;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& phantom :
         {shepp_logan(), uniform_disk(0.09, 1.0, 0.02, -0.01)}) {
      const auto image = rasterize(phantom, grid);
      const auto sino = forward_project(image, geom);
      const auto exact = analytic_sinogram(phantom, geom);
      worst = std::max(worst,
                       masked_rel_l2(sino.values, exact.values, 0.05));
    }
    seconds = std::chrono::duration<double>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  }

  std::ostringstream msg;
  msg << "forward projector within 1% of analytic sinograms (masked rel L2 "
      << worst << "), single-threaded run " << seconds << " s";
  report(1, worst < 0.01 && seconds < 60.0, msg.str());
}

// --- criterion 2: adjointness at 362^2, default geometry ----------------

void criterion_2() {
  const auto geom = make_default_geometry();
  const auto grid = make_grid(362);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Image x = make_image(grid, PixelUnit::kMuPerM);
    x.values = random_array(362, 362, seed, -1.0, 1.0);
    Sinogram y = make_sinogram(geom, SinoUnit::kLineIntegral);
    y.values = random_array(1000, 513, seed + 50, -1.0, 1.0);

    const auto ax = forward_project(x, geom);
    const auto aty = back_project(y, geom, grid);
    double lhs = 0.0, rhs = 0.0, nax = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < ax.values.size(); ++i) {
      lhs += ax.values.data()[i] * y.values.data()[i];
      nax += ax.values.data()[i] * ax.values.data()[i];
      ny += y.values.data()[i] * y.values.data()[i];
    }
    for (std::size_t i = 0; i < x.values.size(); ++i)
      rhs += x.values.data()[i] * aty.values.data()[i];
    worst = std::max(worst, std::abs(lhs - rhs) /
                                (std::sqrt(nax) * std::sqrt(ny)));
  }
  std::ostringstream msg;
  msg << "adjoint identity on 10 seeded pairs, worst relative mismatch "
      << worst;
  report(2, worst < 1e-3, msg.str());
}

// --- criterion 3: physics constants -------------------------------------

void criterion_3() {
  const PhysicsConstants c;
  const bool mu_max_ok = std::abs(c.mu_max() - 81.35858) < 0.5e-5;
  const bool water_ok = hu_to_mu(0.0, c) == 20.0;
  const bool air_ok = hu_to_mu(-1000.0, c) == 0.02;
  std::ostringstream msg;
  msg << "mu_max = " << c.mu_max() << " (81.35858 to 5 decimals), "
      << "hu_to_mu(0) = " << hu_to_mu(0.0, c) << ", hu_to_mu(-1000) = "
      << hu_to_mu(-1000.0, c);
  report(3, mu_max_ok && water_ok && air_ok, msg.str());
}

// --- criterion 4: noise statistics and the measurement cap --------------

void criterion_4() {
  bool ok = true;
  std::ostringstream msg;
  RandomStream rng(20240901);
  for (double lam : {10.0, 100.0, 4096.0}) {
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.poisson(lam);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double mean_bound = 3.0 * std::sqrt(lam / n);
    const double var_bound = 3.0 * std::sqrt((lam + 2.0 * lam * lam) / n);
    const bool this_ok = std::abs(mean - lam) <= mean_bound &&
                         std::abs(var - lam) <= var_bound;
    ok = ok && this_ok;
    msg << "lambda " << lam << ": mean " << mean << ", var " << var << "; ";
  }

  // Cap, against independent high-precision arithmetic (mpmath, 50
  // digits): -ln(0.1/4096)/81.35858 = 0.13053756911334231...
  const PhysicsConstants c;
  const double cap = measurement_cap(c);
  const double reference = 0.13053756911334231;
  const bool cap_ok = std::abs(cap - reference) <= 4.0 * std::numeric_limits<double>::epsilon();
  ok = ok && cap_ok;
  msg << "cap " << cap;

  // Every stored value of a photon-starved simulation respects the cap.
  Image dense = make_image(make_grid(362), PixelUnit::kNormalized);
  for (std::size_t i = 0; i < dense.values.size(); ++i)
    dense.values.data()[i] = 0.9;
  SimulateOptions options;
  options.simulation_grid_size = 500;
  const auto meas = simulate(dense, make_geometry(50, 65, std::numbers::sqrt2 * 0.13),
                             c, 3, options);
  for (std::size_t i = 0; i < meas.values.size(); ++i)
    if (meas.values.data()[i] > cap) ok = false;

  report(4, ok, msg.str());
}

// --- criterion 5: round trips -------------------------------------------

void criterion_5() {
  bool ok = true;
  std::ostringstream msg;

  // post_log then pre_log back-transform.
  const PhysicsConstants c;
  const auto geom = make_geometry(20, 21, 0.2);
  PhotonField photons{geom, random_array(20, 21, 40, 0.1, 4096.0)};
  const auto meas = post_log(photons, c, Provenance{});
  const auto ratios = pre_log_backtransform(meas, c);
  PhotonField counts{geom, Array2d<double>(20, 21)};
  for (std::size_t i = 0; i < counts.counts.size(); ++i)
    counts.counts.data()[i] = ratios.counts.data()[i] * c.n0;
  const auto roundtrip = post_log(counts, c, Provenance{});
  double worst = 0.0;
  for (std::size_t i = 0; i < roundtrip.values.size(); ++i) {
    const double ref = std::max(1.0, std::abs(meas.values.data()[i]));
    worst = std::max(worst, std::abs(roundtrip.values.data()[i] -
                                     meas.values.data()[i]) / ref);
  }
  ok = ok && worst <= 1e-12;
  msg << "post_log/pre_log identity worst rel " << worst;

  // HDF5 write/read, bit-exact float32.
  const auto dir = fresh_dir("roundtrip");
  const auto values = random_array(100, 77, 41, -1.0, 1.0).cast<float>();
  write_array_hdf5(dir / "x.hdf5", values);
  const bool h5_ok = read_array_hdf5(dir / "x.hdf5") == values;
  ok = ok && h5_ok;
  msg << "; hdf5 bit-exact " << (h5_ok ? "yes" : "NO");

  // refilter idempotence at the stored epsilon.
  Measurement m{geom, random_array(20, 21, 42, 0.0, 0.13),
                Provenance{0, 4096.0, 0.1, 0.0}};
  const bool refilter_ok = refilter_min_photons(m, 0.1).values == m.values;
  ok = ok && refilter_ok;
  msg << "; refilter idempotent " << (refilter_ok ? "yes" : "NO");

  report(5, ok, msg.str());
}

// --- criterion 6: FBP amplitude on disks ---------------------------------

void criterion_6() {
  const auto geom = make_default_geometry();
  bool ok = true;
  std::ostringstream msg;
  msg << "disk interior means:";
  for (double radius : {0.03, 0.06, 0.09}) {
    const double value = 0.5;
    auto sino = analytic_sinogram(uniform_disk(radius, value), geom);
    sino.unit = SinoUnit::kNormalizedPostLog;
    const auto image = fbp_reconstruct(sino);
    const auto& grid = image.grid;
    double sum = 0.0;
    long count = 0;
    for (int r = 0; r < grid.height; ++r) {
      const double y = -grid.extent + (r + 0.5) * grid.pixel_pitch();
      for (int c2 = 0; c2 < grid.width; ++c2) {
        const double x = -grid.extent + (c2 + 0.5) * grid.pixel_pitch();
        if (x * x + y * y <= radius * radius) {
          sum += image.values(r, c2);
          ++count;
        }
      }
    }
    const double mean = sum / count;
    ok = ok && std::abs(mean - value) / value < 0.02;
    msg << " r=" << radius << " -> " << mean;
  }
  report(6, ok, msg.str());
}

// --- criterion 7: metric oracles -----------------------------------------

void criterion_7() {
  bool ok = true;
  std::ostringstream msg;

  const auto x = random_array(64, 64, 7);
  const bool ssim_ok = ssim(x, x) == 1.0;
  ok = ok && ssim_ok;
  msg << "ssim(x,x) = " << ssim(x, x);

  Array2d<double> gt(32, 32);
  for (std::size_t i = 0; i < gt.size(); ++i)
    gt.data()[i] = (i % 2) ? 1.0 : 0.0;
  Array2d<double> recon = gt;
  for (std::size_t i = 0; i < recon.size(); ++i) recon.data()[i] += 0.1;
  const double p = psnr(recon, gt);
  const bool psnr_ok = std::abs(p - 20.0) < 1e-12;
  ok = ok && psnr_ok;
  msg << "; psnr(range 1, mse 0.01) = " << p;

  // Shift and scale invariance.
  const auto r0 = random_array(48, 48, 8);
  const auto g0 = random_array(48, 48, 9);
  Array2d<double> r1 = r0, g1 = g0, r2 = r0, g2 = g0;
  for (std::size_t i = 0; i < r0.size(); ++i) {
    r1.data()[i] += 0.37;
    g1.data()[i] += 0.37;
    r2.data()[i] *= 2.9;
    g2.data()[i] *= 2.9;
  }
  const bool shift_ok = psnr(r1, g1) == psnr(r0, g0);
  const bool scale_ok = std::abs(psnr(r2, g2) - psnr(r0, g0)) < 1e-10;
  ok = ok && shift_ok && scale_ok;
  msg << "; shift-invariant " << (shift_ok ? "yes" : "NO")
      << "; scale drift " << std::abs(psnr(r2, g2) - psnr(r0, g0));

  report(7, ok, msg.str());
}

// --- criterion 8: simulation determinism across runs and workers ---------

std::vector<char> file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

bool same_dataset_bytes(const fs::path& a, const fs::path& b,
                        const PartManifest& manifest) {
  for (const auto& shards :
       {manifest.ground_truth_shards, manifest.observation_shards})
    for (const auto& shard : shards)
      if (file_bytes(a / shard.file) != file_bytes(b / shard.file))
        return false;
  return true;
}

void make_synthetic_slices(const fs::path& dir, int count,
                           std::uint64_t seed) {
  RandomStream rng(seed);
  for (int i = 0; i < count; ++i) {
    Array2d<double> hu(512, 512, -1000.0);
    const double cx = 256.0 + 30.0 * (rng.uniform() - 0.5);
    const double cy = 256.0 + 30.0 * (rng.uniform() - 0.5);
    const double ax = 150.0 + 40.0 * rng.uniform();
    const double ay = 120.0 + 40.0 * rng.uniform();
    const double bone = rng.uniform() * 800.0;
    for (int r = 0; r < 512; ++r)
      for (int c = 0; c < 512; ++c) {
        const double dx = (c - cx) / ax, dy = (r - cy) / ay;
        const double q = dx * dx + dy * dy;
        if (q <= 1.0)
          hu(r, c) = 40.0 + 60.0 * std::sin(0.05 * r) * std::cos(0.07 * c) +
                     (q < 0.04 ? bone : 0.0);
      }
    char name[32];
    std::snprintf(name, sizeof name, "slice_%03d.raw", i);
    write_slice_raw(dir / name, hu, 1.0, 0.0, 5000 + i / 3, i * 5.0);
  }
}

void criterion_8() {
  const auto slices = fresh_dir("det_slices");
  make_synthetic_slices(slices, 10, 11);

  RunConfig cfg;
  cfg.input_dir = slices;
  cfg.part = "test";
  cfg.seed = 42;

  const auto out_a = fresh_dir("det_a");
  cfg.output_dir = out_a;
  cfg.workers = 1;
  const auto manifest = cmd_simulate(cfg);

  const auto out_b = fresh_dir("det_b");
  cfg.output_dir = out_b;
  cfg.workers = 1;
  cmd_simulate(cfg);

  const auto out_c = fresh_dir("det_c");
  cfg.output_dir = out_c;
  cfg.workers = 8;
  cmd_simulate(cfg);

  const bool rerun_ok = same_dataset_bytes(out_a, out_b, manifest);
  const bool workers_ok = same_dataset_bytes(out_a, out_c, manifest);
  std::ostringstream msg;
  msg << "10-slice simulation byte-identical: rerun "
      << (rerun_ok ? "yes" : "NO") << ", workers 1 vs 8 "
      << (workers_ok ? "yes" : "NO");
  report(8, rerun_ok && workers_ok, msg.str());
}

// --- criterion 9: paper-number reproduction (conditional) ----------------

void criterion_9() {
  const char* data_dir = std::getenv("LODOPAB_DATA_DIR");
  if (data_dir == nullptr || std::string(data_dir).empty()) {
    report_skip(9,
                "source LIDC-derived data not available (set LODOPAB_DATA_DIR "
                "to a directory holding the published test part); criteria "
                "1-8 constitute acceptance");
    return;
  }

  // Expects the published layout: ground_truth_test_*.hdf5 and
  // observation_test_*.hdf5 under LODOPAB_DATA_DIR.
  const fs::path dir(data_dir);
  const std::size_t count = probe_shard_count(dir, "ground_truth", "test");
  if (count == 0) {
    report(9, false, "LODOPAB_DATA_DIR is set but holds no test shards");
    return;
  }

  const auto geom = make_default_geometry();
  ShardReader gt(dir, "ground_truth", "test", count, 362, 362);
  ShardReader obs(dir, "observation", "test", count, 1000, 513);
  std::vector<SampleMetrics> samples;
  FbpConfig fbp;
  for (std::size_t i = 0; i < count; ++i) {
    Measurement meas{geom, obs.read(i).cast<double>(), Provenance{}};
    const auto recon = fbp_reconstruct(meas, fbp);
    const auto g = gt.read(i).cast<double>();
    samples.push_back({i, psnr(recon.values, g), ssim(recon.values, g)});
  }
  const auto report_values = aggregate(std::move(samples));
  const bool psnr_ok = std::abs(report_values.mean_psnr_db - 24.43) <= 0.3;
  const bool ssim_ok = std::abs(report_values.mean_ssim - 0.426) <= 0.015;
  std::ostringstream msg;
  msg << "FBP over " << count << " test samples: mean PSNR "
      << report_values.mean_psnr_db << " dB (24.43 +- 0.3), mean SSIM "
      << report_values.mean_ssim << " (0.426 +- 0.015)";
  report(9, psnr_ok && ssim_ok, msg.str());
}

// --- criterion 10: desk-scale runtime ------------------------------------

void criterion_10() {
  const auto slices = fresh_dir("runtime_slices");
  make_synthetic_slices(slices, 50, 21);
  const auto ds = fresh_dir("runtime_ds");

  RunConfig cfg;
  cfg.input_dir = slices;
  cfg.output_dir = ds;
  cfg.part = "train";
  cfg.seed = 1;

  const auto t0 = std::chrono::steady_clock::now();
  cmd_simulate(cfg);
  cfg.input_dir = ds;
  cfg.output_dir = ds;
  cmd_reconstruct(cfg);
  const auto report_values = cmd_evaluate(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::ostringstream msg;
  msg << "simulate+FBP+evaluate on 50 synthetic slices in " << seconds
      << " s (< 600 s); mean PSNR " << report_values.mean_psnr_db
      << " dB, mean SSIM " << report_values.mean_ssim;
  report(10, seconds < 600.0 && report_values.samples.size() == 50,
         msg.str());
}

}  // namespace

int main() {
  std::cout << "LoDoPaB toolkit acceptance suite\n";
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) FAILED\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
