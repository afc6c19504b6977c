#include "dspg/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Sparse>

#include "dspg/solver.hpp"

namespace dspg {

ConstraintMap::ConstraintMap(Index n, std::vector<SparseSym> coeffs, Vector rhs)
    : n_(n), coeffs_(std::move(coeffs)), rhs_(std::move(rhs)) {
  if (static_cast<Index>(coeffs_.size()) != rhs_.size()) {
    throw ValidationError("constraint count does not match right-hand side length");
  }
  if (!rhs_.allFinite()) throw ValidationError("right-hand side has a non-finite entry");
  for (const auto& a : coeffs_) {
    for (const auto& e : a) {
      if (e.row < 0 || e.col >= n_ || e.row > e.col) {
        throw ValidationError("constraint entry outside the upper triangle");
      }
      if (!std::isfinite(e.value)) throw ValidationError("constraint entry is not finite");
    }
  }
}

Vector apply_map(const ConstraintMap& map, const SymMat& x) {
  const Index m = map.m();
  Vector out(m);
  for (Index p = 0; p < m; ++p) {
    double sum = 0.0;
    for (const auto& e : map.coeffs()[p]) {
      sum += (e.row == e.col ? 1.0 : 2.0) * e.value * x(e.row, e.col);
    }
    out(p) = sum;
  }
  return out;
}

SymMat apply_adjoint(const ConstraintMap& map, const Vector& y) {
  if (y.size() != map.m()) throw std::invalid_argument("apply_adjoint: length mismatch");
  Matrix out = Matrix::Zero(map.n(), map.n());
  for (Index p = 0; p < map.m(); ++p) {
    const double yp = y(p);
    if (yp == 0.0) continue;
    for (const auto& e : map.coeffs()[p]) {
      out(e.row, e.col) += yp * e.value;
      if (e.row != e.col) out(e.col, e.row) += yp * e.value;
    }
  }
  return unchecked_symmetric(std::move(out));
}

bool gram_is_positive_definite(const ConstraintMap& map) {
  const Index m = map.m();
  if (m == 0) return true;

  // position -> (constraint, weighted coefficient)
  std::map<std::pair<Index, Index>, std::vector<std::pair<Index, double>>> by_position;
  for (Index p = 0; p < m; ++p) {
    std::map<std::pair<Index, Index>, double> merged;
    for (const auto& e : map.coeffs()[p]) merged[{e.row, e.col}] += e.value;
    for (const auto& [pos, v] : merged) {
      if (v != 0.0) by_position[pos].emplace_back(p, v);
    }
  }

  std::map<std::pair<Index, Index>, double> gram;
  for (const auto& [pos, list] : by_position) {
    const double weight = pos.first == pos.second ? 1.0 : 2.0;
    for (const auto& [p, vp] : list) {
      for (const auto& [q, vq] : list) {
        if (q <= p) gram[{p, q}] += weight * vp * vq;
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(gram.size());
  for (const auto& [pq, v] : gram) triplets.emplace_back(pq.first, pq.second, v);
  Eigen::SparseMatrix<double> g(m, m);
  g.setFromTriplets(triplets.begin(), triplets.end());

  // Exact rank deficiency rarely gives an exactly zero pivot, so pivots are
  // judged relative to the largest Gram diagonal.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt(g);
  if (ldlt.info() != Eigen::Success) return false;
  double scale = 0.0;
  for (Index p = 0; p < m; ++p) scale = std::max(scale, g.coeff(p, p));
  return ldlt.vectorD().minCoeff() > kGramPivotTolerance * scale;
}

ProblemInstance::ProblemInstance(SymMat c, SymMat rho, double mu, ConstraintMap map,
                                 std::optional<std::vector<IndexPair>> zero_pattern,
                                 InstanceOptions options)
    : c_(std::move(c)), rho_(std::move(rho)), mu_(mu), map_(std::move(map)),
      zero_pattern_(std::move(zero_pattern)) {
  const Index n = c_.n();
  if (n < 1) throw ValidationError("dimension must be positive");
  if (rho_.n() != n) throw ValidationError("rho dimension does not match C");
  if (rho_.dense().minCoeff() < 0.0) throw ValidationError("rho has a negative entry");
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw ValidationError("mu must be positive");
  if (map_.m() > 0 && map_.n() != n) {
    throw ValidationError("constraint map dimension does not match C");
  }
  if (map_.m() == 0) map_ = ConstraintMap(n, {}, Vector());
  if (zero_pattern_) {
    for (const auto& [i, j] : *zero_pattern_) {
      if (i < 0 || j >= n || i > j) throw ValidationError("zero pattern index out of range");
    }
  }
  if (options.check_surjective) {
    if (map_.m() > kGramCheckLimit) {
      warning_ = "surjectivity check skipped: " + std::to_string(map_.m()) + " constraints";
    } else if (!gram_is_positive_definite(map_)) {
      throw ValidationError("constraint matrices are linearly dependent (A not surjective)");
    }
  }
}

ProblemInstance ProblemInstance::with_rho(SymMat rho) const {
  ProblemInstance copy = *this;
  if (rho.n() != n()) throw ValidationError("rho dimension does not match C");
  if (rho.dense().minCoeff() < 0.0) throw ValidationError("rho has a negative entry");
  copy.rho_ = std::move(rho);
  return copy;
}

namespace {

SymMat z_matrix(const ProblemInstance& inst, const Vector& y, const SymMat& w) {
  SymMat z = inst.c() + w;
  if (inst.m() > 0) z -= apply_adjoint(inst.map(), y);
  return z;
}

double dual_value(const ProblemInstance& inst, const Vector& y, double logdet_z) {
  const double n = static_cast<double>(inst.n());
  const double mu = inst.mu();
  const double by = inst.m() > 0 ? inst.map().rhs().dot(y) : 0.0;
  return by + mu * logdet_z + n * mu - n * mu * std::log(mu);
}

}  // namespace

std::optional<TrialPoint> evaluate_point(const ProblemInstance& inst, Vector y, SymMat w) {
  if (y.size() != inst.m() || w.n() != inst.n()) {
    throw std::invalid_argument("evaluate_point: dimension mismatch");
  }
  const SymMat z = z_matrix(inst, y, w);
  try {
    CholeskyFactor f = cholesky(z);
    const double g = dual_value(inst, y, logdet_from_factor(f));
    if (!std::isfinite(g)) return std::nullopt;
    return TrialPoint{std::move(y), std::move(w), std::move(f), g};
  } catch (const NotPositiveDefinite&) {
    return std::nullopt;
  }
}

DualIterate complete_iterate(const ProblemInstance& inst, TrialPoint point) {
  SymMat x = inverse_from_factor(point.z_factor) * inst.mu();
  return DualIterate(std::move(point), std::move(x));
}

DualIterate make_iterate(const ProblemInstance& inst, const Vector& y, const SymMat& w) {
  if (y.size() != inst.m() || w.n() != inst.n()) {
    throw std::invalid_argument("make_iterate: dimension mismatch");
  }
  const Matrix excess = w.dense().cwiseAbs() - inst.rho().dense();
  if (excess.maxCoeff() > kBoxTolerance) {
    throw Infeasible(Infeasible::Reason::BoxViolated, "|W| exceeds rho");
  }
  const SymMat z = z_matrix(inst, y, w);
  try {
    CholeskyFactor f = cholesky(z);
    const double g = dual_value(inst, y, logdet_from_factor(f));
    return complete_iterate(inst, TrialPoint{y, w, std::move(f), g});
  } catch (const NotPositiveDefinite& e) {
    throw Infeasible(Infeasible::Reason::NotPositiveDefinite,
                     std::string("C + W - A^T(y) is not positive definite: ") + e.what());
  }
}

DualIterate make_initial_iterate(const ProblemInstance& inst) {
  return make_iterate(inst, Vector::Zero(inst.m()), SymMat::zeros(inst.n()));
}

double dual_objective(const ProblemInstance& inst, const DualIterate& it) {
  return dual_value(inst, it.y(), logdet_from_factor(it.z_factor()));
}

DualGradient dual_gradient(const ProblemInstance& inst, const DualIterate& it) {
  Vector gy = inst.m() > 0 ? Vector(inst.map().rhs() - apply_map(inst.map(), it.x())) : Vector();
  return {std::move(gy), it.x()};
}

double primal_objective(const ProblemInstance& inst, const SymMat& x) {
  const CholeskyFactor f = cholesky(x);
  const double penalty = inst.rho().dense().cwiseProduct(x.dense().cwiseAbs()).sum();
  return inst.c().dot(x) - inst.mu() * logdet_from_factor(f) + penalty;
}

SymMat recover_primal(const ProblemInstance& inst, const DualIterate& it, bool cleanup) {
  SymMat x = it.x();
  if (cleanup && inst.zero_pattern()) {
    for (const auto& [i, j] : *inst.zero_pattern()) x.set(i, j, 0.0);
  }
  return x;
}

KktResiduals kkt_residuals(const ProblemInstance& inst, const DualIterate& it) {
  return kkt_residuals(inst, it, it.x());
}

KktResiduals kkt_residuals(const ProblemInstance& inst, const DualIterate& it,
                           const SymMat& primal) {
  KktResiduals r;
  const Vector feas = inst.m() > 0 ? Vector(apply_map(inst.map(), it.x()) - inst.map().rhs())
                                   : Vector();
  const SymMat dw = project_box(it.w() + it.x(), inst.rho()) - it.w();
  r.direction_inf = pair_inf(feas, dw);
  r.primal_feas = vec_inf(feas);
  r.gap = it.g_val() - primal_objective(inst, primal);
  const double rho_abs = inst.rho().dense().cwiseProduct(primal.dense().cwiseAbs()).sum();
  r.compl_slack = std::abs(rho_abs - it.w().dot(primal));
  return r;
}

}  // namespace dspg
