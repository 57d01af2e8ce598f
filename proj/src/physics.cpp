#include "lodopab/physics.hpp"

#include <cmath>

#include "lodopab/errors.hpp"
#include "lodopab/projector.hpp"

namespace lodopab {

void validate(const PhysicsConstants& c) {
  if (!(c.n0 > 0.0)) throw ContractError("constants: n0 must be positive");
  if (!(c.min_photon_count > 0.0))
    throw ContractError("constants: min_photon_count must be positive");
  if (c.sigma_detector < 0.0)
    throw ContractError("constants: sigma_detector must be non-negative");
  if (!(c.mu_water > c.mu_air))
    throw ContractError("constants: mu_water must exceed mu_air");
}

nlohmann::json to_json(const PhysicsConstants& c) {
  return {{"mu_water", c.mu_water},
          {"mu_air", c.mu_air},
          {"mu_max", c.mu_max()},
          {"n0", c.n0},
          {"min_photon_count", c.min_photon_count},
          {"sigma_detector", c.sigma_detector}};
}

PhysicsConstants constants_from_json(const nlohmann::json& j) {
  PhysicsConstants c;
  c.mu_water = j.at("mu_water").get<double>();
  c.mu_air = j.at("mu_air").get<double>();
  c.n0 = j.at("n0").get<double>();
  c.min_photon_count = j.at("min_photon_count").get<double>();
  c.sigma_detector = j.value("sigma_detector", 0.0);
  validate(c);
  return c;
}

Image upscale_bilinear(const Image& image, const ImageGrid& target) {
  validate(image);
  validate(target);
  if (image.grid.extent != target.extent)
    throw ContractError("upscale_bilinear: source and target extents differ");

  const int n_in = image.grid.width;
  const int n_out = target.width;
  if (n_in < 2) {
    Image constant = make_image(target, image.unit);
    for (std::size_t i = 0; i < constant.values.size(); ++i)
      constant.values.data()[i] = image.values.data()[0];
    return constant;
  }
  const double dx_in = image.grid.pixel_pitch();
  const double dx_out = target.pixel_pitch();
  const double e = target.extent;

  // Source sample coordinate of each output pixel center, edge-clamped.
  std::vector<int> i0(n_out);
  std::vector<double> frac(n_out);
  for (int i = 0; i < n_out; ++i) {
    const double x = -e + (i + 0.5) * dx_out;
    double g = (x + e) / dx_in - 0.5;
    if (g < 0.0) g = 0.0;
    if (g > n_in - 1.0) g = n_in - 1.0;
    int lo = static_cast<int>(g);
    if (lo > n_in - 2) lo = n_in - 2;
    i0[i] = lo;
    frac[i] = g - lo;
  }

  Image out = make_image(target, image.unit);
  for (int r = 0; r < n_out; ++r) {
    const double fy = frac[r];
    const double* row0 = image.values.row(i0[r]);
    const double* row1 = image.values.row(std::min(i0[r] + 1, n_in - 1));
    double* dst = out.values.row(r);
    for (int c = 0; c < n_out; ++c) {
      const double fx = frac[c];
      const int cx = i0[c];
      const double top = row0[cx] * (1.0 - fx) + row0[cx + 1] * fx;
      const double bot = row1[cx] * (1.0 - fx) + row1[cx + 1] * fx;
      dst[c] = top * (1.0 - fy) + bot * fy;
    }
  }
  return out;
}

PhotonField expected_photons(const Sinogram& proj, double n0) {
  validate(proj);
  if (proj.unit != SinoUnit::kLineIntegral)
    throw ContractError("expected_photons: projection must be in line-integral units");
  if (!(n0 > 0.0)) throw ContractError("expected_photons: n0 must be positive");

  PhotonField field{proj.geometry,
                    Array2d<double>(proj.values.rows(), proj.values.cols())};
  for (std::size_t i = 0; i < proj.values.size(); ++i)
    field.counts.data()[i] = n0 * std::exp(-proj.values.data()[i]);
  return field;
}

PhotonField sample_photons(const PhotonField& expected, RandomStream& rng,
                           double min_count, double sigma) {
  if (!(min_count > 0.0))
    throw ContractError("sample_photons: min_count must be positive");
  PhotonField out{expected.geometry,
                  Array2d<double>(expected.counts.rows(),
                                  expected.counts.cols())};
  for (std::size_t i = 0; i < expected.counts.size(); ++i) {
    double v = rng.poisson(expected.counts.data()[i]);
    if (sigma > 0.0) v += sigma * rng.gaussian();
    out.counts.data()[i] = std::max(min_count, v);
  }
  return out;
}

double measurement_cap(const PhysicsConstants& c) {
  return -std::log(c.min_photon_count / c.n0) / c.mu_max();
}

Measurement post_log(const PhotonField& photons,
                     const PhysicsConstants& constants,
                     const Provenance& provenance) {
  const double n0 = constants.n0;
  const double mu_max = constants.mu_max();
  Measurement meas{photons.geometry,
                   Array2d<double>(photons.counts.rows(),
                                   photons.counts.cols()),
                   provenance};
  for (std::size_t i = 0; i < photons.counts.size(); ++i) {
    const double count = photons.counts.data()[i];
    if (!(count > 0.0))
      throw ContractError("post_log: non-positive photon count");
    meas.values.data()[i] = -std::log(count / n0) / mu_max;
  }
  return meas;
}

PhotonField pre_log_backtransform(const Measurement& meas,
                                  const PhysicsConstants& constants) {
  const double mu_max = constants.mu_max();
  PhotonField out{meas.geometry,
                  Array2d<double>(meas.values.rows(), meas.values.cols())};
  for (std::size_t i = 0; i < meas.values.size(); ++i)
    out.counts.data()[i] = std::exp(-mu_max * meas.values.data()[i]);
  return out;
}

Measurement refilter_min_photons(const Measurement& meas, double new_epsilon) {
  if (new_epsilon < meas.provenance.min_photon_count)
    throw ContractError(
        "refilter_min_photons: cannot lower the minimum photon count below "
        "the value used at simulation time");
  PhysicsConstants c;
  c.n0 = meas.provenance.n0;
  c.min_photon_count = new_epsilon;
  const double cap = measurement_cap(c);

  Measurement out = meas;
  out.provenance.min_photon_count = new_epsilon;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (out.values.data()[i] > cap) out.values.data()[i] = cap;
  return out;
}

Measurement simulate_from_mu(const Image& mu_image, const ScanGeometry& geom,
                             const PhysicsConstants& constants,
                             RandomStream& rng, std::uint64_t recorded_seed,
                             const SimulateOptions& options) {
  validate(mu_image);
  validate(geom);
  validate(constants);
  if (options.simulation_grid_size == mu_image.grid.width)
    throw ContractError(
        "simulate: simulation grid must differ from the input grid "
        "(identical discrete models for simulation and reconstruction are "
        "refused)");

  const ImageGrid sim_grid =
      make_grid(options.simulation_grid_size, mu_image.grid.extent);
  const Image upscaled = upscale_bilinear(mu_image, sim_grid);
  const Sinogram proj = forward_project(upscaled, geom);
  const PhotonField expected = expected_photons(proj, constants.n0);

  PhotonField counts =
      options.poisson_sampling
          ? sample_photons(expected, rng, constants.min_photon_count,
                           constants.sigma_detector)
          : PhotonField{expected.geometry, expected.counts};
  if (!options.poisson_sampling) {
    // Keep the positivity clamp so the log stays defined.
    for (std::size_t i = 0; i < counts.counts.size(); ++i)
      counts.counts.data()[i] =
          std::max(constants.min_photon_count, counts.counts.data()[i]);
  }

  const Provenance provenance{recorded_seed, constants.n0,
                              constants.min_photon_count,
                              constants.sigma_detector};
  return post_log(counts, constants, provenance);
}

Measurement simulate(const Image& ground_truth, const ScanGeometry& geom,
                     const PhysicsConstants& constants, std::uint64_t seed,
                     const SimulateOptions& options) {
  validate(ground_truth);
  const double mu_max = constants.mu_max();
  Image mu_image = ground_truth;
  mu_image.unit = PixelUnit::kMuPerM;
  for (std::size_t i = 0; i < mu_image.values.size(); ++i)
    mu_image.values.data()[i] *= mu_max;

  RandomStream rng(seed);
  return simulate_from_mu(mu_image, geom, constants, rng, seed, options);
}

}  // namespace lodopab
