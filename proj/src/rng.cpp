#include "lodopab/rng.hpp"

#include <cmath>
#include <numbers>

#include "lodopab/errors.hpp"

namespace lodopab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t RandomStream::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw ContractError("uniform_int: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double RandomStream::gaussian() {
  // Box-Muller; u1 shifted away from 0 for the log.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::poisson(double lambda) {
  if (!(lambda >= 0.0))
    throw ContractError("poisson: lambda must be non-negative");
  if (lambda == 0.0) return 0.0;

  if (lambda < 10.0) {
    // Inversion by multiplication.
    double k = 0.0;
    double p = std::exp(-lambda);
    double cdf = p;
    const double u = uniform();
    while (u > cdf) {
      k += 1.0;
      p *= lambda / k;
      cdf += p;
      if (k > 1e6) break;  // cdf saturated numerically
    }
    return k;
  }

  // Hormann's PTRS transformed rejection (1993).
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return k;
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * loglam - lambda - std::lgamma(k + 1.0)) {
      return k;
    }
  }
}

std::uint64_t derive_stream_seed(std::uint64_t global_seed,
                                 std::string_view part,
                                 std::uint64_t slice_index) {
  std::uint64_t h = splitmix64(global_seed);
  h = splitmix64(h ^ fnv1a(part));
  h = splitmix64(h ^ slice_index);
  return h;
}

}  // namespace lodopab
