#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lodopab/dataset_io.hpp"
#include "lodopab/errors.hpp"
#include "lodopab/phantoms.hpp"
#include "lodopab/pipeline.hpp"
#include "lodopab/png_io.hpp"
#include "lodopab/projector.hpp"

namespace {

void add_common_flags(CLI::App* cmd, lodopab::RunConfig& cfg) {
  cmd->add_option("--input", cfg.input_dir, "Input directory");
  cmd->add_option("--output", cfg.output_dir, "Output directory");
  cmd->add_option("--part", cfg.part, "Dataset part name")
      ->default_val("train");
  cmd->add_option("--workers", cfg.workers,
                  "Worker threads (0 = hardware concurrency)");
}

void add_physics_flags(CLI::App* cmd, lodopab::RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "Global RNG seed");
  cmd->add_option("--n0", cfg.constants.n0,
                  "Mean photon count per detector pixel before attenuation");
  cmd->add_option("--min-photons", cfg.constants.min_photon_count,
                  "Minimum photon count after sampling");
  cmd->add_option("--sigma", cfg.constants.sigma_detector,
                  "Std-dev of additive Gaussian detector noise");
}

void add_filter_flag(CLI::App* cmd, std::string& filter_name) {
  cmd->add_option("--filter", filter_name, "Reconstruction filter")
      ->default_val("ram_lak")
      ->check(CLI::IsMember({"ram_lak"}));
}

int run_phantom(const std::string& out_dir, int grid_size, bool png,
                bool hdf5) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto phantom = lodopab::shepp_logan();
  const auto grid = lodopab::make_grid(grid_size);
  const auto image = lodopab::rasterize(phantom, grid);
  const auto geom = lodopab::make_default_geometry();
  const auto sino = lodopab::analytic_sinogram(phantom, geom);

  if (hdf5) {
    lodopab::write_array_hdf5(fs::path(out_dir) / "phantom.hdf5",
                              image.values.cast<float>());
    lodopab::write_array_hdf5(fs::path(out_dir) / "sinogram.hdf5",
                              sino.values.cast<float>());
  }
  if (png) {
    double hi = 0.0;
    for (std::size_t i = 0; i < image.values.size(); ++i)
      hi = std::max(hi, image.values.data()[i]);
    lodopab::write_png_gray(fs::path(out_dir) / "phantom.png", image.values,
                            0.0, hi > 0.0 ? hi : 1.0);
    double shi = 0.0;
    for (std::size_t i = 0; i < sino.values.size(); ++i)
      shi = std::max(shi, sino.values.data()[i]);
    lodopab::write_png_gray(fs::path(out_dir) / "sinogram.png", sino.values,
                            0.0, shi > 0.0 ? shi : 1.0);
  }
  std::cout << "phantom written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoDoPaB low-dose CT simulation and reconstruction toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (TOML-style key = value)");

  lodopab::RunConfig cfg;

  auto* simulate = app.add_subcommand(
      "simulate", "Simulate measurements from source slices");
  add_common_flags(simulate, cfg);
  add_physics_flags(simulate, cfg);
  simulate->get_option("--input")->required();
  simulate->get_option("--output")->required();

  auto* reconstruct = app.add_subcommand(
      "reconstruct", "FBP reconstruction of a simulated part");
  add_common_flags(reconstruct, cfg);
  std::string filter_name = "ram_lak";
  add_filter_flag(reconstruct, filter_name);
  reconstruct->get_option("--input")->required();
  reconstruct->get_option("--output")->required();

  auto* evaluate = app.add_subcommand(
      "evaluate", "PSNR/SSIM of reconstructions against ground truths");
  add_common_flags(evaluate, cfg);
  evaluate->get_option("--input")->required();
  evaluate->get_option("--output")->required();

  auto* phantom = app.add_subcommand(
      "phantom", "Emit the Shepp-Logan phantom and its sinogram");
  std::string phantom_out;
  int phantom_grid = lodopab::kGroundTruthSize;
  bool no_png = false, no_hdf5 = false;
  phantom->add_option("--output", phantom_out, "Output directory")
      ->required();
  phantom->add_option("--grid", phantom_grid, "Rasterization grid size");
  phantom->add_flag("--no-png", no_png, "Skip PNG output");
  phantom->add_flag("--no-hdf5", no_hdf5, "Skip HDF5 output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) {
      const auto manifest = lodopab::cmd_simulate(cfg);
      std::cout << "simulated " << manifest.count << " slice(s) into "
                << cfg.output_dir.string() << "\n";
    } else if (reconstruct->parsed()) {
      lodopab::cmd_reconstruct(cfg);
      std::cout << "reconstructions written to " << cfg.output_dir.string()
                << "\n";
    } else if (evaluate->parsed()) {
      const auto report = lodopab::cmd_evaluate(cfg);
      std::cout << "samples: " << report.samples.size()
                << "  mean PSNR: " << report.mean_psnr_db
                << " dB  mean SSIM: " << report.mean_ssim << "\n";
    } else if (phantom->parsed()) {
      return run_phantom(phantom_out, phantom_grid, !no_png, !no_hdf5);
    }
  } catch (const lodopab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const lodopab::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
