#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dspg/linalg.hpp"

namespace dspg {

/// Problem data failed a structural check.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Upper-triangle coordinate entry of a symmetric coefficient matrix (0-based, row <= col).
struct CoordEntry {
  Index row;
  Index col;
  double value;
};

/// Sparse symmetric coefficient matrix, stored by its upper triangle.
using SparseSym = std::vector<CoordEntry>;

/// Zero-based pair (i, j), i <= j.
using IndexPair = std::pair<Index, Index>;

/**
 * The linear map A(X) = (A_1 . X, ..., A_m . X) together with its right-hand
 * side b. An off-diagonal stored entry (i, j, v) stands for v at both (i, j)
 * and (j, i), so it contributes 2 v X_ij to A_p . X.
 */
class ConstraintMap {
public:
  ConstraintMap() = default;
  ConstraintMap(Index n, std::vector<SparseSym> coeffs, Vector rhs);

  Index n() const noexcept { return n_; }
  Index m() const noexcept { return static_cast<Index>(coeffs_.size()); }
  const std::vector<SparseSym>& coeffs() const noexcept { return coeffs_; }
  const Vector& rhs() const noexcept { return rhs_; }

private:
  Index n_ = 0;
  std::vector<SparseSym> coeffs_;
  Vector rhs_;
};

Vector apply_map(const ConstraintMap& map, const SymMat& x);
SymMat apply_adjoint(const ConstraintMap& map, const Vector& y);

/// Gram matrix G_pq = A_p . A_q is positive definite (A surjective).
/// Returns false when the check fails.
bool gram_is_positive_definite(const ConstraintMap& map);

/// Above this constraint count the surjectivity check is skipped.
inline constexpr Index kGramCheckLimit = 20000;
/// Gram pivots at or below this fraction of the largest diagonal count as zero.
inline constexpr double kGramPivotTolerance = 1e-12;

struct InstanceOptions {
  bool check_surjective = true;
};

class ProblemInstance {
public:
  /// Validates the data; throws ValidationError.
  ProblemInstance(SymMat c, SymMat rho, double mu, ConstraintMap map,
                  std::optional<std::vector<IndexPair>> zero_pattern = std::nullopt,
                  InstanceOptions options = {});

  Index n() const noexcept { return c_.n(); }
  Index m() const noexcept { return map_.m(); }
  const SymMat& c() const noexcept { return c_; }
  const SymMat& rho() const noexcept { return rho_; }
  double mu() const noexcept { return mu_; }
  const ConstraintMap& map() const noexcept { return map_; }
  const std::optional<std::vector<IndexPair>>& zero_pattern() const noexcept {
    return zero_pattern_;
  }
  /// Non-empty when surjectivity validation was skipped.
  const std::string& warning() const noexcept { return warning_; }

  /// Same instance with rho replaced (validated again).
  ProblemInstance with_rho(SymMat rho) const;

private:
  SymMat c_;
  SymMat rho_;
  double mu_;
  ConstraintMap map_;
  std::optional<std::vector<IndexPair>> zero_pattern_;
  std::string warning_;
};

/// Tolerance on |W_ij| <= rho_ij when validating supplied iterates.
inline constexpr double kBoxTolerance = 1e-12;

class Infeasible : public std::runtime_error {
public:
  enum class Reason { BoxViolated, NotPositiveDefinite };

  Infeasible(Reason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

private:
  Reason reason_;
};

/// A dual point that has been factorized but not inverted; cheap line-search trial.
struct TrialPoint {
  Vector y;
  SymMat w;
  CholeskyFactor z_factor;
  double g_val;
};

/// Point of the dual feasible set with cached Z = C + W - A^T(y) factor,
/// X = mu Z^{-1} and the dual objective value.
class DualIterate {
public:
  const Vector& y() const noexcept { return y_; }
  const SymMat& w() const noexcept { return w_; }
  const CholeskyFactor& z_factor() const noexcept { return z_factor_; }
  const SymMat& x() const noexcept { return x_; }
  double g_val() const noexcept { return g_val_; }

private:
  DualIterate(TrialPoint p, SymMat x)
      : y_(std::move(p.y)), w_(std::move(p.w)), z_factor_(std::move(p.z_factor)),
        x_(std::move(x)), g_val_(p.g_val) {}
  friend DualIterate complete_iterate(const ProblemInstance& inst, TrialPoint point);

  Vector y_;
  SymMat w_;
  CholeskyFactor z_factor_;
  SymMat x_;
  double g_val_;
};

/// Factorizes Z and evaluates g; std::nullopt when Z is not positive definite.
/// The box constraint is not checked here.
std::optional<TrialPoint> evaluate_point(const ProblemInstance& inst, Vector y, SymMat w);

/// Computes the cached primal matrix of an evaluated point.
DualIterate complete_iterate(const ProblemInstance& inst, TrialPoint point);

/// Validated construction; throws Infeasible.
DualIterate make_iterate(const ProblemInstance& inst, const Vector& y, const SymMat& w);

/// The default start (0, O).
DualIterate make_initial_iterate(const ProblemInstance& inst);

double dual_objective(const ProblemInstance& inst, const DualIterate& it);

struct DualGradient {
  Vector y;
  SymMat w;
};

/// (b - A(X), X).
DualGradient dual_gradient(const ProblemInstance& inst, const DualIterate& it);

/// Tr(C X) - mu log det X + sum rho_ij |X_ij|; throws NotPositiveDefinite.
double primal_objective(const ProblemInstance& inst, const SymMat& x);

/// Cached X, with entries of the zero pattern cleared when `cleanup` is set.
SymMat recover_primal(const ProblemInstance& inst, const DualIterate& it, bool cleanup);

struct KktResiduals {
  double direction_inf = 0.0;  ///< ||(dy_(1), dW_(1))||_inf
  double primal_feas = 0.0;    ///< ||A(X) - b||_inf
  double gap = 0.0;            ///< g(y, W) - f(X), signed
  double compl_slack = 0.0;    ///< |rho . |X| - W . X|
};

KktResiduals kkt_residuals(const ProblemInstance& inst, const DualIterate& it);

/// As above, but gap and complementarity are taken at `primal` (e.g. the
/// cleaned-up recovery). primal_feas always uses the iterate's own X.
KktResiduals kkt_residuals(const ProblemInstance& inst, const DualIterate& it,
                           const SymMat& primal);

}  // namespace dspg
