#include "dspg/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dspg {

namespace {

void require_same_shape(const SymMat& a, const SymMat& b) {
  if (a.n() != b.n()) throw std::invalid_argument("matrix dimensions differ");
}

}  // namespace

double entropy_loss(const SymMat& sigma, const SymMat& x) {
  require_same_shape(sigma, x);
  const Index n = sigma.n();
  // Sigma X = L L^T X is similar to the symmetric L^T X L.
  const Matrix l = cholesky(sigma).lower();
  const SymMat s = SymMat::symmetrized(l.transpose() * x.dense() * l);
  const double trace = s.dense().trace();
  const double logdet = logdet_from_factor(cholesky(s));
  return (trace - logdet - static_cast<double>(n)) / static_cast<double>(n);
}

double quadratic_loss(const SymMat& sigma, const SymMat& x) {
  require_same_shape(sigma, x);
  const Index n = sigma.n();
  const Matrix r = sigma.dense() * x.dense() - Matrix::Identity(n, n);
  return r.norm() / static_cast<double>(n);
}

RecoveryReport support_scores(const SymMat& truth, const SymMat& x, double threshold) {
  require_same_shape(truth, x);
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  RecoveryReport r;
  r.threshold = threshold;
  const Index n = truth.n();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool actual = truth(i, j) != 0.0;
      const bool predicted = std::abs(x(i, j)) >= threshold;
      if (actual && predicted) ++r.tp;
      else if (actual) ++r.fn;
      else if (predicted) ++r.fp;
      else ++r.tn;
    }
  }
  r.sensitivity = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 1.0;
  r.specificity = r.tn + r.fp > 0 ? static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp) : 1.0;
  r.nnz = (x.dense().array().abs() >= threshold).count();
  return r;
}

RecoveryReport evaluate_recovery(const SymMat& truth, const SymMat& x, double threshold) {
  RecoveryReport r = support_scores(truth, x, threshold);
  const SymMat sigma = inverse_from_factor(cholesky(truth));
  r.loss_e = entropy_loss(sigma, x);
  r.loss_q = quadratic_loss(sigma, x);
  return r;
}

}  // namespace dspg
