#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dspg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a factorization meets a non-positive pivot.
class NotPositiveDefinite : public std::runtime_error {
public:
  /// `pivot` is 1-based.
  explicit NotPositiveDefinite(Index pivot)
      : std::runtime_error("matrix is not positive definite (pivot " +
                           std::to_string(pivot) + ")"),
        pivot_(pivot) {}

  Index pivot() const noexcept { return pivot_; }

private:
  Index pivot_;
};

/**
 * Dense symmetric matrix with both triangles stored.
 *
 * Public constructors reject non-finite entries and either require exact
 * symmetry or produce it (mirroring / averaging). Arithmetic between two
 * SymMat values is element-wise and therefore keeps exact symmetry.
 */
class SymMat {
public:
  SymMat() = default;

  /// n x n zero matrix.
  explicit SymMat(Index n);

  static SymMat zeros(Index n) { return SymMat(n); }
  static SymMat identity(Index n);
  static SymMat constant(Index n, double value);
  static SymMat diagonal(const Vector& d);

  /// Requires `m` square, finite and exactly symmetric.
  static SymMat from_dense(const Matrix& m);
  /// Copies the upper triangle of `m` into both triangles.
  static SymMat from_upper(const Matrix& m);
  /// Averages the (i,j) and (j,i) slots.
  static SymMat symmetrized(const Matrix& m);

  Index n() const noexcept { return data_.rows(); }
  double operator()(Index i, Index j) const { return data_(i, j); }
  /// Writes both (i,j) and (j,i).
  void set(Index i, Index j, double v);

  const Matrix& dense() const noexcept { return data_; }

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s);

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }

  /// Frobenius inner product W . V.
  double dot(const SymMat& o) const { return data_.cwiseProduct(o.data_).sum(); }

  friend bool operator==(const SymMat& a, const SymMat& b) {
    return a.n() == b.n() && a.data_ == b.data_;
  }

private:
  struct Unchecked {};
  SymMat(Matrix m, Unchecked) : data_(std::move(m)) {}
  friend SymMat unchecked_symmetric(Matrix m);

  Matrix data_;
};

/// Wraps a matrix already known to be exactly symmetric (internal use).
SymMat unchecked_symmetric(Matrix m);

/// Lower Cholesky factor L with L L^T = M and positive diagonal.
class CholeskyFactor {
public:
  Index n() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }

private:
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}
  friend CholeskyFactor cholesky(const SymMat& m);

  Matrix lower_;
};

/// Throws NotPositiveDefinite on the first pivot <= 0 (no regularization).
CholeskyFactor cholesky(const SymMat& m);

/// 2 * sum(log L_ii).
double logdet_from_factor(const CholeskyFactor& f);

/// M^{-1}, symmetrized.
SymMat inverse_from_factor(const CholeskyFactor& f);

/// Smallest eigenvalue of L^{-1} M L^{-T}.
double min_eig_congruence(const CholeskyFactor& f, const SymMat& m);

/// All eigenvalues in ascending order.
Vector sym_eigenvalues(const SymMat& m);

double fro(const SymMat& m);
double inf_elem(const SymMat& m);
double vec2(const Vector& v);
double vec_inf(const Vector& v);
/// max(vec_inf(y), inf_elem(W)).
double pair_inf(const Vector& y, const SymMat& w);

}  // namespace dspg
