#pragma once

// Ordinary least squares for the multi-output linear model restricted to
// the span of the sampled features.

#include <vector>

#include "linpsi/design.hpp"
#include "linpsi/pareto.hpp"
#include "linpsi/types.hpp"

namespace linpsi {

/// One row per pull: the arm, its feature vector and the observed response.
struct PullLog {
  std::vector<std::size_t> arm_ids;
  Matrix x;  // N x h
  Matrix y;  // N x d
};

/// Sufficient statistics of a pull log grouped by arm: the same estimator
/// as PullLog without materializing N rows.
struct PullSummary {
  ArmSet arms;
  std::vector<Count> counts;
  Matrix features;       // |arms| x h
  Matrix response_sums;  // |arms| x d, sum of responses per arm
};

PullSummary summarize(const PullLog& log);

/// V_n = X^T X.
Matrix info_matrix(const PullLog& log);
Matrix info_matrix(const PullSummary& summary);

/// B (B^T V_n B)^{-1} B^T. Throws SingularMatrix when some direction of the
/// basis was never sampled.
Matrix pseudo_inverse(const Matrix& vn, const SubspaceBasis& basis);

/// V^dagger X^T Y.
Matrix ols_estimate(const PullLog& log, const Matrix& vdag);
Matrix ols_estimate(const PullSummary& summary, const Matrix& vdag);

/// Row i = theta_hat^T x_i.
MeanMatrix predicted_means(const Matrix& theta_hat, const Matrix& features);

}  // namespace linpsi
