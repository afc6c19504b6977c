#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dspg/solver.hpp"
#include "oracles/oracles.hpp"
#include "test_support.hpp"

using namespace dspg;

namespace {

// n = 1, A = [1], b = 2, C = [1], rho = 0.
ProblemInstance scalar_constrained() {
  Vector b(1);
  b << 2.0;
  return ProblemInstance(SymMat::identity(1), SymMat::zeros(1), 1.0,
                         ConstraintMap(1, {{{0, 0, 1.0}}}, b));
}

oracle::M3 to_m3(const SymMat& s) {
  oracle::M3 a{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[3 * i + j] = s(i, j);
  return a;
}

}  // namespace

TEST(SolverConfig, DefaultsAndValidation) {
  const SolverConfig cfg;
  EXPECT_EQ(cfg.eps, 1e-5);
  EXPECT_EQ(cfg.gamma, 1e-4);
  EXPECT_EQ(cfg.tau, 0.5);
  EXPECT_EQ(cfg.sigma1, 0.1);
  EXPECT_EQ(cfg.sigma2, 0.9);
  EXPECT_EQ(cfg.alpha_min, 1e-15);
  EXPECT_EQ(cfg.alpha_max, 1e15);
  EXPECT_EQ(cfg.alpha0, 1.0);
  EXPECT_EQ(cfg.window_m, 50);
  EXPECT_NO_THROW(cfg.validate());
  SolverConfig bad = cfg;
  bad.sigma1 = 0.95;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.tau = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(ProjectBox, Examples) {
  Matrix w(2, 2);
  w << 0.3, -2, -2, 0.05;
  const SymMat p = project_box(SymMat::from_dense(w), SymMat::constant(2, 0.1));
  EXPECT_EQ(p(0, 0), 0.1);
  EXPECT_EQ(p(0, 1), -0.1);
  EXPECT_EQ(p(1, 1), 0.05);
  EXPECT_EQ(project_box(SymMat::constant(2, 5.0), SymMat::zeros(2)), SymMat::zeros(2));
}

TEST(SearchDirection, Examples) {
  const auto inst = test::uniform_instance(SymMat::identity(2), 0.5);
  const auto it = make_initial_iterate(inst);
  const Direction d = search_direction(inst, it, 1.0);
  EXPECT_EQ(d.dy.size(), 0);
  EXPECT_EQ(d.dw, SymMat::identity(2) * 0.5);

  const auto opt = make_iterate(inst, Vector(), SymMat::identity(2) * 0.5);
  EXPECT_LE(inf_elem(search_direction(inst, opt, 1.0).dw), 1e-15);

  const auto con = scalar_constrained();
  const Direction dc = search_direction(con, make_initial_iterate(con), 3.0);
  EXPECT_DOUBLE_EQ(dc.dy(0), 3.0);
  EXPECT_EQ(dc.dw(0, 0), 0.0);
}

TEST(StepBound, Examples) {
  EXPECT_EQ(step_bound_from_theta(0.3, 0.5), 1.0);
  EXPECT_EQ(step_bound_from_theta(-2.0, 0.5), 0.25);
  EXPECT_EQ(step_bound_from_theta(-0.4, 0.5), 1.0);
  EXPECT_EQ(step_bound_from_theta(0.0, 0.5), 1.0);

  const auto con = scalar_constrained();
  const auto it = make_initial_iterate(con);
  const auto d = search_direction(con, it, 10.0);
  const StepBound b = max_feasible_step(con, it, d, 0.99);
  EXPECT_DOUBLE_EQ(b.theta, -10.0);
  EXPECT_DOUBLE_EQ(b.lambda_bar, 0.099);
}

TEST(BacktrackStep, StaysInWindow) {
  EXPECT_EQ(backtrack_step(1.0, 0.0, 1.0, NAN, 0.1, 0.9), 0.5);
  // concave model minimum at 0.5 * slope / shortfall
  EXPECT_DOUBLE_EQ(backtrack_step(1.0, 0.0, 1.0, -1.0, 0.1, 0.9), 0.25);
  EXPECT_DOUBLE_EQ(backtrack_step(1.0, 0.0, 1.0, 0.99, 0.1, 0.9), 0.9);
  EXPECT_DOUBLE_EQ(backtrack_step(1.0, 0.0, 1.0, -1e6, 0.1, 0.9), 0.1);
  // phi(lambda) above the tangent: no concave model
  EXPECT_EQ(backtrack_step(1.0, 0.0, 1.0, 2.0, 0.1, 0.9), 0.5);
}

TEST(BbUpdate, Examples) {
  const SolverConfig cfg;
  Direction s1{Vector(), SymMat::identity(2)};
  Direction s2{Vector(), SymMat::identity(2) * -0.5};
  EXPECT_DOUBLE_EQ(bb_update(s1, s2, cfg), 2.0);
  Direction up{Vector(), SymMat::identity(2)};
  EXPECT_EQ(bb_update(s1, up, cfg), cfg.alpha_max);
  EXPECT_EQ(bb_update(s1, Direction{Vector(), SymMat::zeros(2)}, cfg), cfg.alpha_max);
  Direction tiny{Vector(), SymMat::identity(2) * -1e20};
  EXPECT_EQ(bb_update(s1, tiny, cfg), cfg.alpha_min);
  Vector y(1);
  y << 1.0;
  Vector yn(1);
  yn << -4.0;
  EXPECT_DOUBLE_EQ(bb_update(Direction{y, SymMat::zeros(1)}, Direction{yn, SymMat::zeros(1)}, cfg),
                   0.25);
}

TEST(LineSearch, AcceptsFirstTrial) {
  const auto inst = test::uniform_instance(SymMat::identity(2), 0.5);
  const auto it = make_initial_iterate(inst);
  const auto d = search_direction(inst, it, 1.0);
  const double slope = pair_dot(Vector(), it.x(), d.dy, d.dw);
  EXPECT_DOUBLE_EQ(slope, 1.0);
  const std::vector<double> hist{it.g_val()};
  const auto r = nonmonotone_line_search(inst, it, d, slope, 1.0, hist, SolverConfig{});
  ASSERT_TRUE(r.next.has_value());
  EXPECT_EQ(r.inner_steps, 1);
  EXPECT_EQ(r.lambda, 1.0);
  EXPECT_NEAR(r.next->g_val(), 2.0 + 2.0 * std::log(1.5), 1e-14);
}

TEST(LineSearch, BacktracksOnce) {
  const auto inst = scalar_constrained();
  const auto it = make_initial_iterate(inst);
  SolverConfig cfg;
  cfg.tau = 0.99;
  const auto d = search_direction(inst, it, 10.0);
  const auto grad = dual_gradient(inst, it);
  const double slope = pair_dot(grad.y, grad.w, d.dy, d.dw);
  EXPECT_DOUBLE_EQ(slope, 10.0);
  const double lbar = max_feasible_step(inst, it, d, cfg.tau).lambda_bar;
  const std::vector<double> hist{it.g_val()};
  const auto r = nonmonotone_line_search(inst, it, d, slope, lbar, hist, cfg);
  ASSERT_TRUE(r.next.has_value());
  EXPECT_EQ(r.inner_steps, 2);
  // g(0.99) = 1.98 + log 0.01 + 1; interpolate through it.
  const double g1 = 2 * 0.99 + std::log(0.01) + 1.0;
  const double expected = 10.0 * lbar * lbar / (2.0 * (1.0 + 10.0 * lbar - g1));
  EXPECT_NEAR(r.lambda, expected, 1e-15);
  EXPECT_NEAR(r.lambda, 0.01355, 1e-5);
  EXPECT_GE(r.next->g_val(), 1.0 + cfg.gamma * r.lambda * slope);

  cfg.max_inner = 1;
  const auto stalled = nonmonotone_line_search(inst, it, d, slope, lbar, hist, cfg);
  EXPECT_FALSE(stalled.next.has_value());
}

TEST(LineSearch, NonmonotoneReferenceIsWindowMinimum) {
  const auto inst = test::uniform_instance(SymMat::identity(2), 0.5);
  const auto it = make_initial_iterate(inst);
  const auto d = search_direction(inst, it, 1.0);
  const std::vector<double> hist{5.0, -3.0, 2.0};
  const auto r = nonmonotone_line_search(inst, it, d, 1.0, 1.0, hist, SolverConfig{});
  EXPECT_EQ(r.g_reference, -3.0);
}

TEST(Solve, AnalyticIdentityFamily) {
  const auto inst = test::uniform_instance(SymMat::identity(50), 0.1);
  const auto rep = solve(inst);
  ASSERT_EQ(rep.status, SolveStatus::Converged);
  EXPECT_LE(inf_elem(rep.x - SymMat::identity(50) * (1.0 / 1.1)), 1e-5);
  EXPECT_LE(std::abs(rep.gap), 1e-8);
  EXPECT_LT(rep.iterations, 100);
  EXPECT_NEAR(rep.dual_obj, 50.0 + 50.0 * std::log(1.1), 1e-8);
}

TEST(Solve, FixedPointComplementarity) {
  for (const double rho : {0.05, 0.1, 0.7}) {
    const auto inst = test::uniform_instance(SymMat::identity(6) * 2.0, rho);
    SolverConfig cfg;
    cfg.eps = 1e-10;
    const auto rep = solve(inst, cfg);
    ASSERT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.kkt.compl_slack, 1e-8);
  }
}

TEST(Solve, AlreadyOptimalInit) {
  const auto inst = test::uniform_instance(SymMat::identity(4), 0.1);
  const auto rep = solve(inst, {}, std::make_pair(Vector(), SymMat::identity(4) * 0.1));
  EXPECT_EQ(rep.status, SolveStatus::Converged);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_TRUE(rep.trace.empty());
}

TEST(Solve, MatchesProjectedGradientOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    const SymMat c = test::random_spd(3, rng, 0.5);
    const double rho = 0.1;
    const auto inst = test::uniform_instance(c, rho);
    SolverConfig cfg;
    cfg.eps = 1e-9;
    const auto rep = solve(inst, cfg);
    ASSERT_EQ(rep.status, SolveStatus::Converged);
    const auto ref = oracle::projected_gradient_3x3(to_m3(c), rho, 1.0, 1e-4, 1e-8);
    ASSERT_TRUE(ref.converged);
    EXPECT_NEAR(rep.primal_obj, ref.primal, 1e-6);
  }
}

TEST(Solve, InfeasibleInit) {
  const auto inst = test::uniform_instance(SymMat::identity(2), 0.1);
  const auto rep = solve(inst, {}, std::make_pair(Vector(), SymMat::identity(2) * 0.2));
  EXPECT_EQ(rep.status, SolveStatus::Infeasible);

  Matrix c(2, 2);
  c << 1, 2, 2, 1;
  const auto bad = test::uniform_instance(SymMat::from_dense(c), 0.1);
  EXPECT_EQ(solve(bad).status, SolveStatus::Infeasible);
}

TEST(Solve, MaxOuterReached) {
  const auto inst = test::uniform_instance(test::synthetic_covariance(20, 0.2, 3), 0.1);
  SolverConfig cfg;
  cfg.max_outer = 1;
  const auto rep = solve(inst, cfg);
  EXPECT_EQ(rep.status, SolveStatus::MaxOuterReached);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.trace.size(), 1u);
}

TEST(Solve, LineSearchStalled) {
  SolverConfig cfg;
  cfg.alpha0 = 10.0;
  cfg.tau = 0.99;
  cfg.max_inner = 1;
  const auto rep = solve(scalar_constrained(), cfg);
  EXPECT_EQ(rep.status, SolveStatus::LineSearchStalled);
  EXPECT_EQ(rep.iterations, 0);
}

TEST(Solve, TraceInvariants) {
  const SymMat c = test::synthetic_covariance(25, 0.15, 9);
  const auto inst = test::uniform_instance(c, 0.05);
  const SolverConfig cfg;
  double g0 = NAN;
  int calls = 0;
  const auto rep = solve(inst, cfg, std::nullopt, [&](const DualIterate& it, const IterationRecord& r) {
    if (calls++ == 0) g0 = it.g_val();
    EXPECT_LE((it.w().dense().cwiseAbs() - inst.rho().dense()).maxCoeff(), 0.0);
    EXPECT_GE(r.ascent_lhs, r.direction_norm * r.direction_norm / r.alpha -
                                1e-10 * (1 + r.direction_norm * r.direction_norm));
    EXPECT_GE(r.direction_norm, std::min(1.0, cfg.alpha_min) * r.direction1_norm * (1 - 1e-12));
    EXPECT_LE(r.direction_norm, std::max(1.0, cfg.alpha_max) * r.direction1_norm * (1 + 1e-12));
    EXPECT_GE(r.g_next, r.g_reference + cfg.gamma * r.lambda * r.ascent_lhs);
    EXPECT_GE(r.g_val, g0 - 1e-9 * (1 + std::abs(g0)));
    EXPECT_LE(r.lambda, r.lambda_bar);
    EXPECT_LE(r.lambda_bar, 1.0);
    EXPECT_GE(r.alpha, cfg.alpha_min);
    EXPECT_LE(r.alpha, cfg.alpha_max);
  });
  ASSERT_EQ(rep.status, SolveStatus::Converged);
  EXPECT_EQ(calls, rep.iterations);
  EXPECT_EQ(static_cast<int>(rep.trace.size()), rep.iterations);
  EXPECT_LE(rep.kkt.direction_inf, cfg.eps);
  EXPECT_GT(rep.min_lambda, 0.0);
}

TEST(Solve, Deterministic) {
  const auto inst = test::uniform_instance(test::synthetic_covariance(15, 0.3, 4), 0.1);
  const auto a = solve(inst);
  const auto b = solve(inst);
  ASSERT_EQ(a.iterations, b.iterations);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].g_val, b.trace[i].g_val);
    EXPECT_EQ(a.trace[i].lambda, b.trace[i].lambda);
  }
  EXPECT_EQ(a.x, b.x);
}
