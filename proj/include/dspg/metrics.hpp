#pragma once

#include <cstdint>

#include "dspg/linalg.hpp"

namespace dspg {

/// Default magnitude above which an estimated entry counts as nonzero.
inline constexpr double kDefaultSupportThreshold = 0.05;

struct RecoveryReport {
  double loss_e = 0.0;
  double loss_q = 0.0;
  double sensitivity = 1.0;
  double specificity = 1.0;
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t nnz = 0;  ///< entries of X (both triangles and diagonal) with |X_ij| >= threshold
  double threshold = kDefaultSupportThreshold;
};

/// (1/n)(tr(Sigma X) - log det(Sigma X) - n). Zero iff X = Sigma^{-1}.
/// Throws NotPositiveDefinite when Sigma or the product is not positive definite.
double entropy_loss(const SymMat& sigma, const SymMat& x);

/// (1/n) ||Sigma X - I||_F.
double quadratic_loss(const SymMat& sigma, const SymMat& x);

/// Confusion counts over the strictly upper off-diagonal positions. A rate
/// whose denominator is zero is reported as 1.
RecoveryReport support_scores(const SymMat& truth, const SymMat& x, double threshold);

/// Losses against Sigma = truth^{-1} plus support scores.
RecoveryReport evaluate_recovery(const SymMat& truth, const SymMat& x, double threshold);

}  // namespace dspg
