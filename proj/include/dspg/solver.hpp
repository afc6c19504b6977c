#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dspg/model.hpp"

namespace dspg {

/// Parameters of the dual spectral projected gradient iteration.
/// Defaults are the published experimental settings.
struct SolverConfig {
  double eps = 1e-5;         ///< stop when ||(dy_(1), dW_(1))||_inf <= eps
  double gamma = 1e-4;       ///< Armijo constant
  double tau = 0.5;          ///< fraction of the distance to the PSD boundary
  double sigma1 = 0.1;       ///< backtracking window [sigma1 l, sigma2 l]
  double sigma2 = 0.9;
  double alpha_min = 1e-15;  ///< Barzilai-Borwein clamp
  double alpha_max = 1e15;
  double alpha0 = 1.0;
  int window_m = 50;         ///< nonmonotone memory
  int max_outer = 20000;
  int max_inner = 60;
  bool cleanup = true;       ///< clear the zero pattern of the recovered X

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double g_val = 0.0;           ///< g(y^k, W^k)
  double direction_inf = 0.0;   ///< ||(dy_(1), dW_(1))||_inf
  double direction1_norm = 0.0; ///< ||(dy_(1), dW_(1))||
  double alpha = 0.0;
  double theta = 0.0;
  double lambda_bar = 0.0;
  double lambda = 0.0;
  int inner_steps = 0;
  double ascent_lhs = 0.0;      ///< grad g . (dy, dW)
  double direction_norm = 0.0;  ///< ||(dy, dW)||
  double g_reference = 0.0;     ///< min of the nonmonotone window
  double g_next = 0.0;          ///< g at the accepted point
};

enum class SolveStatus { Converged, MaxOuterReached, LineSearchStalled, Infeasible };

std::string_view to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  std::string message;
  int iterations = 0;
  Vector y;
  SymMat w;
  SymMat x;                 ///< recovered primal (cleanup applied when configured)
  bool cleanup_applied = false;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;         ///< dual_obj - primal_obj
  double min_eig_x = 0.0;
  double min_lambda = 1.0;  ///< smallest accepted step length
  KktResiduals kkt;
  std::vector<IterationRecord> trace;
  double wall_time = 0.0;   ///< seconds
};

/// Element-wise clamp of W into [-rho, rho].
SymMat project_box(const SymMat& w, const SymMat& rho);

struct Direction {
  Vector dy;
  SymMat dw;
};

/// (alpha (b - A(X)), [W + alpha X]_rho - W).
Direction search_direction(const ProblemInstance& inst, const DualIterate& it, double alpha);

struct StepBound {
  double lambda_bar;
  double theta;
};

/// Largest step keeping C + W - A^T(y) safely positive definite along the direction.
StepBound max_feasible_step(const ProblemInstance& inst, const DualIterate& it,
                            const Direction& d, double tau);

/// lambda_bar from the congruence eigenvalue alone.
double step_bound_from_theta(double theta, double tau);

/// Next trial step inside [sigma1 lambda, sigma2 lambda], by quadratic
/// interpolation of phi(0), phi'(0) and phi(lambda). Non-finite phi_lambda
/// or a non-concave model falls back to lambda / 2.
double backtrack_step(double lambda, double phi0, double slope, double phi_lambda,
                      double sigma1, double sigma2);

struct LineSearchResult {
  std::optional<DualIterate> next;  ///< empty when stalled
  double lambda = 0.0;
  int inner_steps = 0;
  double g_reference = 0.0;
};

/// Nonmonotone backtracking from lambda_bar against min(history) + gamma lambda slope.
LineSearchResult nonmonotone_line_search(const ProblemInstance& inst, const DualIterate& it,
                                         const Direction& d, double slope, double lambda_bar,
                                         std::span<const double> history,
                                         const SolverConfig& cfg);

/// (y1, W1) . (y2, W2) = y1^T y2 + W1 . W2
double pair_dot(const Vector& y1, const SymMat& w1, const Vector& y2, const SymMat& w2);

/// Barzilai-Borwein projection length from the iterate and gradient displacements.
double bb_update(const Direction& s1, const Direction& s2, const SolverConfig& cfg);

/// Called once per outer iteration with the current iterate and its record.
using IterationObserver = std::function<void(const DualIterate&, const IterationRecord&)>;

SolveReport solve(const ProblemInstance& inst, const SolverConfig& cfg = {},
                  const std::optional<std::pair<Vector, SymMat>>& init = std::nullopt,
                  const IterationObserver& observer = {});

}  // namespace dspg
