#include "dspg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace dspg {

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(eps >= 0.0)) fail("eps must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0,1)");
  if (!(sigma1 > 0.0 && sigma1 < sigma2 && sigma2 < 1.0)) fail("need 0 < sigma1 < sigma2 < 1");
  if (!(alpha_min > 0.0 && alpha_min < alpha_max && std::isfinite(alpha_max))) {
    fail("need 0 < alpha_min < alpha_max < inf");
  }
  if (!(alpha0 >= alpha_min && alpha0 <= alpha_max)) fail("alpha0 outside [alpha_min, alpha_max]");
  if (window_m < 1) fail("window_m must be >= 1");
  if (max_outer < 0) fail("max_outer must be >= 0");
  if (max_inner < 1) fail("max_inner must be >= 1");
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxOuterReached: return "MaxOuterReached";
    case SolveStatus::LineSearchStalled: return "LineSearchStalled";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

SymMat project_box(const SymMat& w, const SymMat& rho) {
  if (w.n() != rho.n()) throw std::invalid_argument("project_box: dimension mismatch");
  Matrix out = w.dense().cwiseMax(-rho.dense()).cwiseMin(rho.dense());
  return unchecked_symmetric(std::move(out));
}

Direction search_direction(const ProblemInstance& inst, const DualIterate& it, double alpha) {
  Vector dy;
  if (inst.m() > 0) dy = alpha * (inst.map().rhs() - apply_map(inst.map(), it.x()));
  else dy = Vector();
  SymMat dw = project_box(it.w() + alpha * it.x(), inst.rho()) - it.w();
  return {std::move(dy), std::move(dw)};
}

double step_bound_from_theta(double theta, double tau) {
  if (theta >= 0.0) return 1.0;
  return std::min(1.0, -tau / theta);
}

StepBound max_feasible_step(const ProblemInstance& inst, const DualIterate& it,
                            const Direction& d, double tau) {
  SymMat dz = d.dw;
  if (inst.m() > 0) dz -= apply_adjoint(inst.map(), d.dy);
  const double theta = min_eig_congruence(it.z_factor(), dz);
  return {step_bound_from_theta(theta, tau), theta};
}

double backtrack_step(double lambda, double phi0, double slope, double phi_lambda,
                      double sigma1, double sigma2) {
  const double lo = sigma1 * lambda;
  const double hi = sigma2 * lambda;
  if (!std::isfinite(phi_lambda)) return 0.5 * lambda;
  // phi(t) ~ phi0 + slope t + c t^2 through phi(lambda)
  const double shortfall = phi0 + slope * lambda - phi_lambda;
  if (!(shortfall > 0.0) || !(slope > 0.0)) return 0.5 * lambda;
  const double t = slope * lambda * lambda / (2.0 * shortfall);
  if (!std::isfinite(t)) return 0.5 * lambda;
  return std::clamp(t, lo, hi);
}

double pair_dot(const Vector& y1, const SymMat& w1, const Vector& y2, const SymMat& w2) {
  const double yy = y1.size() > 0 ? y1.dot(y2) : 0.0;
  return yy + w1.dot(w2);
}

double bb_update(const Direction& s1, const Direction& s2, const SolverConfig& cfg) {
  const double b = pair_dot(s1.dy, s1.dw, s2.dy, s2.dw);
  if (b >= 0.0) return cfg.alpha_max;
  const double a = pair_dot(s1.dy, s1.dw, s1.dy, s1.dw);
  return std::min(cfg.alpha_max, std::max(cfg.alpha_min, -a / b));
}

LineSearchResult nonmonotone_line_search(const ProblemInstance& inst, const DualIterate& it,
                                         const Direction& d, double slope, double lambda_bar,
                                         std::span<const double> history,
                                         const SolverConfig& cfg) {
  LineSearchResult result;
  result.g_reference = history.empty() ? it.g_val()
                                       : *std::min_element(history.begin(), history.end());
  double lambda = lambda_bar;
  for (int j = 1; j <= cfg.max_inner; ++j) {
    result.inner_steps = j;
    Vector y = it.y();
    if (y.size() > 0) y += lambda * d.dy;
    // (1 - l) W + l [.]_rho stays in the box mathematically; the clamp removes roundoff.
    SymMat w = project_box(it.w() + lambda * d.dw, inst.rho());
    auto trial = evaluate_point(inst, std::move(y), std::move(w));
    const double g_trial = trial ? trial->g_val : std::numeric_limits<double>::quiet_NaN();
    if (trial && g_trial >= result.g_reference + cfg.gamma * lambda * slope) {
      result.lambda = lambda;
      result.next = complete_iterate(inst, std::move(*trial));
      return result;
    }
    lambda = backtrack_step(lambda, it.g_val(), slope, g_trial, cfg.sigma1, cfg.sigma2);
  }
  result.lambda = lambda;
  return result;
}

namespace {

constexpr int kFullTraceIterations = 5000;
constexpr int kTraceStride = 10;

double pair_norm(const Vector& y, const SymMat& w) { return std::sqrt(pair_dot(y, w, y, w)); }

void finish_report(const ProblemInstance& inst, const DualIterate& it, const SolverConfig& cfg,
                   SolveReport& report) {
  report.y = it.y();
  report.w = it.w();
  report.dual_obj = it.g_val();

  SymMat x = recover_primal(inst, it, cfg.cleanup);
  report.cleanup_applied = cfg.cleanup && inst.zero_pattern().has_value();
  double primal = 0.0;
  try {
    primal = primal_objective(inst, x);
  } catch (const NotPositiveDefinite&) {
    // Cleanup destroyed definiteness; report the uncleaned matrix instead.
    x = it.x();
    report.cleanup_applied = false;
    report.message += "zero-pattern cleanup lost positive definiteness; reporting raw X. ";
    primal = primal_objective(inst, x);
  }
  report.primal_obj = primal;
  report.gap = report.dual_obj - report.primal_obj;
  report.kkt = kkt_residuals(inst, it, x);
  report.min_eig_x = sym_eigenvalues(x)(0);
  report.x = std::move(x);
}

}  // namespace

SolveReport solve(const ProblemInstance& inst, const SolverConfig& cfg,
                  const std::optional<std::pair<Vector, SymMat>>& init,
                  const IterationObserver& observer) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolveReport report;
  std::optional<DualIterate> current;
  try {
    current = init ? make_iterate(inst, init->first, init->second) : make_initial_iterate(inst);
  } catch (const Infeasible& e) {
    report.status = SolveStatus::Infeasible;
    report.message = e.what();
    report.wall_time = elapsed();
    return report;
  }

  std::deque<double> history;
  double alpha = cfg.alpha0;
  int k = 0;
  for (;; ++k) {
    const DualIterate& it = *current;
    if (history.size() == static_cast<std::size_t>(cfg.window_m)) history.pop_front();
    history.push_back(it.g_val());

    const Direction d1 = search_direction(inst, it, 1.0);
    const double direction_inf = pair_inf(d1.dy, d1.dw);
    if (direction_inf <= cfg.eps) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (k >= cfg.max_outer) {
      report.status = SolveStatus::MaxOuterReached;
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.g_val = it.g_val();
    rec.direction_inf = direction_inf;
    rec.direction1_norm = pair_norm(d1.dy, d1.dw);
    rec.alpha = alpha;

    const Direction d = search_direction(inst, it, alpha);
    const DualGradient grad = dual_gradient(inst, it);
    rec.ascent_lhs = pair_dot(grad.y, grad.w, d.dy, d.dw);
    rec.direction_norm = pair_norm(d.dy, d.dw);

    const StepBound bound = max_feasible_step(inst, it, d, cfg.tau);
    rec.theta = bound.theta;
    rec.lambda_bar = bound.lambda_bar;

    const std::vector<double> window(history.begin(), history.end());
    LineSearchResult ls =
        nonmonotone_line_search(inst, it, d, rec.ascent_lhs, bound.lambda_bar, window, cfg);
    rec.inner_steps = ls.inner_steps;
    rec.g_reference = ls.g_reference;
    if (!ls.next) {
      rec.lambda = ls.lambda;
      rec.g_next = std::numeric_limits<double>::quiet_NaN();
      if (observer) observer(it, rec);
      report.trace.push_back(rec);
      report.status = SolveStatus::LineSearchStalled;
      report.message = "line search exhausted " + std::to_string(cfg.max_inner) + " trials. ";
      break;
    }
    rec.lambda = ls.lambda;
    rec.g_next = ls.next->g_val();
    report.min_lambda = std::min(report.min_lambda, ls.lambda);

    const DualGradient next_grad = dual_gradient(inst, *ls.next);
    Direction s1{ls.next->y() - it.y(), ls.next->w() - it.w()};
    Direction s2{next_grad.y - grad.y, next_grad.w - grad.w};
    alpha = bb_update(s1, s2, cfg);

    if (observer) observer(it, rec);
    if (k < kFullTraceIterations || k % kTraceStride == 0) report.trace.push_back(rec);
    current = std::move(ls.next);
  }

  report.iterations = k;
  finish_report(inst, *current, cfg, report);
  report.wall_time = elapsed();
  return report;
}

}  // namespace dspg
