#include "dspg/linalg.hpp"

#include <cmath>

namespace dspg {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("SymMat: non-finite entry");
  }
}

void require_square(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SymMat: matrix is not square");
  }
}

}  // namespace

SymMat unchecked_symmetric(Matrix m) { return SymMat(std::move(m), SymMat::Unchecked{}); }

SymMat::SymMat(Index n) : data_(Matrix::Zero(n, n)) {
  if (n < 0) throw std::invalid_argument("SymMat: negative dimension");
}

SymMat SymMat::identity(Index n) { return unchecked_symmetric(Matrix::Identity(n, n)); }

SymMat SymMat::constant(Index n, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("SymMat: non-finite entry");
  return unchecked_symmetric(Matrix::Constant(n, n, value));
}

SymMat SymMat::diagonal(const Vector& d) {
  if (!d.allFinite()) throw std::invalid_argument("SymMat: non-finite entry");
  return unchecked_symmetric(d.asDiagonal().toDenseMatrix());
}

SymMat SymMat::from_dense(const Matrix& m) {
  require_square(m);
  require_finite(m);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = j + 1; i < m.rows(); ++i) {
      if (m(i, j) != m(j, i)) {
        throw std::invalid_argument("SymMat: matrix is not exactly symmetric");
      }
    }
  }
  return unchecked_symmetric(m);
}

SymMat SymMat::from_upper(const Matrix& m) {
  require_square(m);
  Matrix out = m.triangularView<Eigen::Upper>();
  out.triangularView<Eigen::StrictlyLower>() = out.transpose();
  require_finite(out);
  return unchecked_symmetric(std::move(out));
}

SymMat SymMat::symmetrized(const Matrix& m) {
  require_square(m);
  Matrix out = 0.5 * (m + m.transpose());
  require_finite(out);
  return unchecked_symmetric(std::move(out));
}

void SymMat::set(Index i, Index j, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("SymMat: non-finite entry");
  data_(i, j) = v;
  data_(j, i) = v;
}

SymMat& SymMat::operator+=(const SymMat& o) {
  data_ += o.data_;
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  data_ -= o.data_;
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  data_ *= s;
  return *this;
}

CholeskyFactor cholesky(const SymMat& m) {
  Matrix work = m.dense();
  const Index failed = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(work);
  if (failed >= 0) throw NotPositiveDefinite(failed + 1);
  // A NaN pivot slips through the `<= 0` test; it only arises from overflow.
  for (Index i = 0; i < work.rows(); ++i) {
    const double d = work(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(i + 1);
  }
  work.triangularView<Eigen::StrictlyUpper>().setZero();
  return CholeskyFactor(std::move(work));
}

double logdet_from_factor(const CholeskyFactor& f) {
  double sum = 0.0;
  for (Index i = 0; i < f.n(); ++i) sum += std::log(f.lower()(i, i));
  return 2.0 * sum;
}

SymMat inverse_from_factor(const CholeskyFactor& f) {
  const Index n = f.n();
  Matrix linv = Matrix::Identity(n, n);
  f.lower().triangularView<Eigen::Lower>().solveInPlace(linv);
  Matrix inv(n, n);
  inv.setZero();
  inv.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());
  inv.triangularView<Eigen::StrictlyUpper>() = inv.transpose();
  return SymMat::symmetrized(inv);
}

double min_eig_congruence(const CholeskyFactor& f, const SymMat& m) {
  if (f.n() != m.n()) throw std::invalid_argument("min_eig_congruence: dimension mismatch");
  if (f.n() == 0) return 0.0;
  const auto l = f.lower().triangularView<Eigen::Lower>();
  // S = L^{-1} M L^{-T} = L^{-1} (L^{-1} M)^T since M is symmetric.
  Matrix half = m.dense();
  l.solveInPlace(half);
  Matrix s = half.transpose();
  l.solveInPlace(s);
  const SymMat sym = SymMat::symmetrized(s);
  return sym_eigenvalues(sym)(0);
}

Vector sym_eigenvalues(const SymMat& m) {
  if (m.n() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver did not converge");
  }
  return solver.eigenvalues();
}

double fro(const SymMat& m) { return m.dense().norm(); }

double inf_elem(const SymMat& m) {
  return m.n() == 0 ? 0.0 : m.dense().cwiseAbs().maxCoeff();
}

double vec2(const Vector& v) { return v.norm(); }

double vec_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double pair_inf(const Vector& y, const SymMat& w) { return std::max(vec_inf(y), inf_elem(w)); }

}  // namespace dspg
