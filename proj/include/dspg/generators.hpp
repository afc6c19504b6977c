#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dspg/linalg.hpp"
#include "dspg/model.hpp"

namespace dspg {

/**
 * Counter-based 64-bit generator. Output t of a stream is
 * splitmix64_mix(key + (t + 1) * 0x9E3779B97F4A7C15) where
 * key = splitmix64_mix(seed ^ splitmix64_mix(stream + 1)).
 * Streams of one seed are independent, so drawing from one never shifts
 * another.
 */
class CounterRng {
public:
  enum Stream : std::uint64_t { Pattern = 1, Values = 2, Gaussian = 3, Constraints = 4 };

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t bounded(std::uint64_t bound);
  /// Standard normal by Box-Muller; draws come in pairs (cos, sin).
  double normal();

  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

enum class Family { Random, Ar, Decay, Star, Circle, Full };

struct GenSpec {
  Index n = 1;
  double density = 0.0;  ///< fraction of off-diagonal pairs, Random only
  std::uint64_t seed = 0;
  Family family = Family::Random;
  int band = 1;          ///< k of Ar(k)
  Index samples = 0;     ///< covariance draws; 0 means 2n

  void validate() const;
  Index sample_count() const noexcept { return samples > 0 ? samples : 2 * n; }
};

/// Parses "random", "ar1".."ar4", "decay", "star", "circle", "full".
std::optional<std::pair<Family, int>> parse_family(std::string_view name);
std::string family_name(Family f, int band);

/// ceil(density * n(n-1)/2), robust to binary rounding of the product.
Index random_pair_count(Index n, double density);

/// Sparse positive definite precision matrix of the requested family.
SymMat gen_precision(const GenSpec& spec);

/// (1/N) sum x_t x_t^T with x_t ~ N(0, precision^{-1}).
SymMat sample_covariance(const SymMat& precision, Index samples, std::uint64_t seed);

struct ZeroConstraints {
  ConstraintMap map;
  std::vector<IndexPair> pattern;
};

/// X_ij = 0 for a seeded ceil(fraction * |zeros|) subset of the zero
/// off-diagonal positions of `precision`.
ZeroConstraints build_zero_constraints(const SymMat& precision, double fraction,
                                       std::uint64_t seed);

/// Constraint map with one unit entry (i, j, 1) and b = 0 per pair.
ConstraintMap zero_pattern_map(Index n, const std::vector<IndexPair>& pattern);

}  // namespace dspg
