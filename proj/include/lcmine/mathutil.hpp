#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lcmine {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0,1). Accurate to ~1e-12 after a
/// Halley refinement step; throws for p outside (0,1).
double normal_quantile(double p);

double mean_of(std::span<const double> values);
/// Population standard deviation (divides by n). Returns 0 for n <= 1.
double stddev_of(std::span<const double> values);

/// FNV-1a 64-bit hash, used for config fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// Minimal xoshiro-style deterministic generator. The standard library's
/// distributions are implementation-defined, so everything that must be
/// reproducible across toolchains draws through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform integer in [0, bound), bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);
  /// Uniform double in [0, 1).
  double next_double();
  /// Standard normal via Box-Muller (deterministic, pair-cached).
  double next_normal();

 private:
  std::uint64_t state_[4];
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// In-place Fisher-Yates shuffle with explicit index draws.
void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng);

/// Dense linear solve / inversion for the small systems used by the
/// estimator (Gauss-Jordan with partial pivoting). Matrices are row-major
/// n*n vectors. Returns false when the matrix is numerically singular.
bool invert_matrix(std::vector<double> matrix, std::size_t n,
                   std::vector<double>& inverse_out);

}  // namespace lcmine
