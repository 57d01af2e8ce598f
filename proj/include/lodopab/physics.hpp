#pragma once

#include <cstdint>

#include "lodopab/constants.hpp"
#include "lodopab/image.hpp"
#include "lodopab/rng.hpp"

namespace lodopab {

/// Bilinear resampling between grids of identical physical extent.
/// Pixel values are treated as samples at cell centers; coordinates
/// outside the source sample lattice are edge-clamped.
Image upscale_bilinear(const Image& image, const ImageGrid& target);

/// Expected photon counts n0 * exp(-proj) per Beer-Lambert. proj must be
/// in line-integral units.
PhotonField expected_photons(const Sinogram& proj, double n0);

/// Draws counts ~ Poisson(expected) per element, adds N(0, sigma^2) when
/// sigma > 0, then clamps to >= min_count. The clamp happens after
/// sampling.
PhotonField sample_photons(const PhotonField& expected, RandomStream& rng,
                           double min_count, double sigma);

/// Post-log transform y-hat = -ln(counts / n0) / mu_max. Counts must be
/// strictly positive.
Measurement post_log(const PhotonField& photons,
                     const PhysicsConstants& constants,
                     const Provenance& provenance);

/// Largest attainable observation value, -ln(min_photon_count/n0)/mu_max.
double measurement_cap(const PhysicsConstants& constants);

/// Back-transform to the pre-log domain: returns the intensity quotients
/// I1/I0 = exp(-mu_max * y-hat). Multiply by n0 for photon counts; for
/// physically consistent data pairs, multiply ground truths by mu_max.
PhotonField pre_log_backtransform(const Measurement& meas,
                                  const PhysicsConstants& constants);

/// Raises the minimum photon count after the fact: observation values
/// above -ln(new_epsilon/n0)/mu_max are replaced by exactly that cap.
/// new_epsilon must be >= the stored minimum (information discarded at
/// simulation time cannot be restored).
Measurement refilter_min_photons(const Measurement& meas, double new_epsilon);

struct SimulateOptions {
  int simulation_grid_size = kSimulationSize;
  bool poisson_sampling = true;  // disabled only for diagnostics/tests
};

/// Full measurement simulation from a mu-domain image [1/m]:
/// upscale to the simulation grid, forward project, attenuate,
/// Poisson-sample, clamp, post-log normalize.
///
/// The simulation grid must differ from the input grid; projecting on the
/// reconstruction grid is refused.
Measurement simulate_from_mu(const Image& mu_image, const ScanGeometry& geom,
                             const PhysicsConstants& constants,
                             RandomStream& rng, std::uint64_t recorded_seed,
                             const SimulateOptions& options = {});

/// Simulation from a normalized ground truth in [0, 1]: denormalizes by
/// mu_max and runs simulate_from_mu with a fresh stream seeded by `seed`.
Measurement simulate(const Image& ground_truth, const ScanGeometry& geom,
                     const PhysicsConstants& constants, std::uint64_t seed,
                     const SimulateOptions& options = {});

}  // namespace lodopab
