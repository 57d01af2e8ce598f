#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lodopab {

/// Seedable random stream with fixed sampling algorithms.
///
/// The uniform, Gaussian and Poisson samplers are implemented here instead
/// of using the <random> distributions, whose output is implementation
/// defined. The mt19937_64 engine itself is fully specified by the
/// standard, so a stream produces identical values on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), rejection sampled.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Standard normal via Box-Muller.
  double gaussian();

  /// Poisson sample, returned as a real count.
  /// Inversion by multiplication for lambda < 10, Hormann's PTRS
  /// transformed rejection otherwise.
  double poisson(double lambda);

 private:
  std::mt19937_64 engine_;
};

/// Derives the per-slice stream seed from (global seed, part name, slice
/// index) with a splitmix64-based mix. Streams for distinct slices are
/// independent, so slices can be simulated in any order or in parallel.
std::uint64_t derive_stream_seed(std::uint64_t global_seed,
                                 std::string_view part,
                                 std::uint64_t slice_index);

}  // namespace lodopab
