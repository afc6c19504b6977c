#include "dspg/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace dspg {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Shift that makes a unit-diagonal construction positive definite.
constexpr double kDiagonalMargin = 0.1;
constexpr double kSingularTolerance = 1e-10;

SymMat shift_to_positive_definite(Matrix a) {
  SymMat m = SymMat::from_upper(a);
  const Vector ev = sym_eigenvalues(m);
  const double lmin = ev(0);
  // Singular constructions (e.g. an even circle) land within roundoff of zero.
  if (lmin <= kSingularTolerance * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
    a.diagonal().array() += std::abs(lmin) + kDiagonalMargin;
    m = SymMat::from_upper(a);
  }
  for (;;) {
    try {
      cholesky(m);
      return m;
    } catch (const NotPositiveDefinite&) {
      a.diagonal().array() += kDiagonalMargin;
      m = SymMat::from_upper(a);
    }
  }
}

// Row-major position of the t-th strictly upper pair.
IndexPair upper_pair(Index n, std::uint64_t t) {
  Index i = 0;
  std::uint64_t row_start = 0;
  for (;; ++i) {
    const auto row_len = static_cast<std::uint64_t>(n - 1 - i);
    if (t < row_start + row_len) break;
    row_start += row_len;
  }
  return {i, i + 1 + static_cast<Index>(t - row_start)};
}

// First `count` entries of a seeded Fisher-Yates shuffle of [0, total).
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t total, std::uint64_t count,
                                                      CounterRng& rng) {
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto value_at = [&](std::uint64_t i) {
    auto found = swapped.find(i);
    return found == swapped.end() ? i : found->second;
  };
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + rng.bounded(total - i);
    const std::uint64_t vi = value_at(i);
    const std::uint64_t vj = value_at(j);
    out.push_back(vj);
    swapped[j] = vi;
  }
  return out;
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64_mix(seed ^ splitmix64_mix(stream + 1))) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::bounded(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("CounterRng::bounded: zero bound");
  // Lemire's multiply-shift with rejection.
  unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double CounterRng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  return r * std::cos(angle);
}

void GenSpec::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0,1]");
  if (family == Family::Ar && (band < 1 || band >= n)) {
    throw std::invalid_argument("ar(k) needs 1 <= k < n");
  }
  if (samples < 0) throw std::invalid_argument("samples must be >= 0");
}

std::optional<std::pair<Family, int>> parse_family(std::string_view name) {
  if (name == "random") return std::pair{Family::Random, 0};
  if (name == "decay") return std::pair{Family::Decay, 0};
  if (name == "star") return std::pair{Family::Star, 0};
  if (name == "circle") return std::pair{Family::Circle, 0};
  if (name == "full") return std::pair{Family::Full, 0};
  if (name.size() == 3 && name.substr(0, 2) == "ar" && name[2] >= '1' && name[2] <= '4') {
    return std::pair{Family::Ar, name[2] - '0'};
  }
  return std::nullopt;
}

std::string family_name(Family f, int band) {
  switch (f) {
    case Family::Random: return "random";
    case Family::Ar: return "ar" + std::to_string(band);
    case Family::Decay: return "decay";
    case Family::Star: return "star";
    case Family::Circle: return "circle";
    case Family::Full: return "full";
  }
  return "unknown";
}

Index random_pair_count(Index n, double density) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double raw = density * pairs;
  const double nearest = std::round(raw);
  const double target = std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? nearest
                                                                              : std::ceil(raw);
  return static_cast<Index>(target);
}

SymMat gen_precision(const GenSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  Matrix a = Matrix::Identity(n, n);

  switch (spec.family) {
    case Family::Random: {
      const auto total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
      const auto count = static_cast<std::uint64_t>(random_pair_count(n, spec.density));
      CounterRng pattern(spec.seed, CounterRng::Pattern);
      CounterRng values(spec.seed, CounterRng::Values);
      for (const std::uint64_t t : sample_without_replacement(total, count, pattern)) {
        const auto [i, j] = upper_pair(n, t);
        double v = 2.0 * values.uniform() - 1.0;
        // An exact zero would silently drop a pattern entry.
        while (v == 0.0) v = 2.0 * values.uniform() - 1.0;
        a(i, j) = v;
      }
      break;
    }
    case Family::Ar:
      for (Index i = 0; i < n; ++i) {
        for (int j = 1; j <= spec.band && i + j < n; ++j) a(i, i + j) = 0.5 / j;
      }
      break;
    case Family::Decay:
      for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) a(i, j) = std::exp(-2.0 * static_cast<double>(j - i));
      }
      break;
    case Family::Star:
      for (Index j = 1; j < n; ++j) a(0, j) = 0.1;
      break;
    case Family::Circle:
      for (Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 0.5;
      if (n > 2) a(0, n - 1) = 0.5;
      break;
    case Family::Full:
      a.triangularView<Eigen::StrictlyUpper>().setConstant(0.5);
      break;
  }
  return shift_to_positive_definite(std::move(a));
}

SymMat sample_covariance(const SymMat& precision, Index samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sample_covariance: need at least one sample");
  const Index n = precision.n();
  const SymMat sigma = inverse_from_factor(cholesky(precision));
  const Matrix root = cholesky(sigma).lower();

  CounterRng rng(seed, CounterRng::Gaussian);
  Matrix z(n, samples);
  for (Index t = 0; t < samples; ++t) {
    for (Index i = 0; i < n; ++i) z(i, t) = rng.normal();
  }
  const Matrix x = root.triangularView<Eigen::Lower>() * z;
  Matrix c = Matrix::Zero(n, n);
  c.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(samples));
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  return SymMat::symmetrized(c);
}

ConstraintMap zero_pattern_map(Index n, const std::vector<IndexPair>& pattern) {
  std::vector<SparseSym> coeffs;
  coeffs.reserve(pattern.size());
  for (const auto& [i, j] : pattern) coeffs.push_back({CoordEntry{i, j, 1.0}});
  return ConstraintMap(n, std::move(coeffs), Vector::Zero(static_cast<Index>(pattern.size())));
}

ZeroConstraints build_zero_constraints(const SymMat& precision, double fraction,
                                       std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("constraint fraction must lie in [0,1]");
  }
  const Index n = precision.n();
  std::vector<IndexPair> zeros;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (precision(i, j) == 0.0) zeros.emplace_back(i, j);
    }
  }

  std::vector<IndexPair> chosen;
  if (fraction >= 1.0) {
    chosen = std::move(zeros);
  } else {
    const double raw = fraction * static_cast<double>(zeros.size());
    const double nearest = std::round(raw);
    const auto count = static_cast<std::uint64_t>(
        std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? nearest : std::ceil(raw));
    CounterRng rng(seed, CounterRng::Constraints);
    auto picks = sample_without_replacement(zeros.size(), count, rng);
    std::sort(picks.begin(), picks.end());
    chosen.reserve(picks.size());
    for (const auto t : picks) chosen.push_back(zeros[t]);
  }
  ConstraintMap map = zero_pattern_map(n, chosen);
  return {std::move(map), std::move(chosen)};
}

}  // namespace dspg
