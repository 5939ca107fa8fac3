#pragma once

// G-optimal experimental design over a finite set of feature vectors:
// subspace basis, continuous design, and integer rounding with a certified
// value bound.

#include <cstddef>
#include <optional>
#include <vector>

#include "linpsi/errors.hpp"
#include "linpsi/types.hpp"

namespace linpsi {

/// Orthonormal basis (h x h_S) of the span of a set of feature rows.
struct SubspaceBasis {
  Matrix basis;
  std::size_t rank() const noexcept { return static_cast<std::size_t>(basis.cols()); }
};

/// Left singular vectors of rows^T whose singular values exceed
/// rank_tol * sigma_max. Throws DegenerateInstance for a rank-0 set.
SubspaceBasis subspace_basis(const Matrix& rows, double rank_tol = 1e-9);

/// Coordinates of each row in the basis: rows * B (|S| x h_S).
Matrix transform_features(const Matrix& rows, const SubspaceBasis& basis);

struct DesignOptions {
  double tol = 1e-3;          // absolute, on max_i f_i - h_S
  int max_iter = 10000;       // total iterations across both phases
  int mirror_descent_iters = 1000;
};

struct Design {
  Vector weights;
  double value = 0.0;  // max_i x_i^T V(w)^{-1} x_i
  int iterations = 0;
};

/// Raised when the iteration budget runs out; carries the best design seen.
class DesignNotConverged : public Error {
 public:
  DesignNotConverged(const std::string& what, Design best)
      : Error(what), best_(std::move(best)) {}
  const Design& best() const noexcept { return best_; }

 private:
  Design best_;
};

/// `xt` must have full column rank (rows span R^{h_S}).
///
/// Runs entropic mirror descent from the uniform design with step
/// sqrt(2 ln|S|) / (L_f sqrt(t)), L_f = max_i |x_i|^2 / lambda_min(V(uniform)),
/// then, if the Kiefer-Wolfowitz gap is still above `tol`, finishes with
/// Wolfe-Atwood steps (Fedorov-Wynn toward the worst point, away from the
/// best supported one, exact line search on log det).
Design g_optimal_design(const Matrix& xt, const DesignOptions& options = {});

/// max_i x_i^T V(w)^{-1} x_i. Throws SingularMatrix if V(w) is singular.
double design_value(const Vector& weights, const Matrix& xt);

/// Per-arm leverage x_i^T V(w)^{-1} x_i.
Vector leverages(const Vector& weights, const Matrix& xt);

struct IntegerAllocation {
  std::vector<Count> counts;
  Count total = 0;
  double value = 0.0;  // max_i x_i^T (sum_j s_j x_j x_j^T)^{-1} x_i
};

/// Largest-remainder split of n units by `weights` after zeroing weights
/// below 1e-9. Counts sum to n.
std::vector<Count> apportion(const Vector& weights, Count n);

/// Smallest N with N >= 5 h_S / kappa^2.
Count min_rounding_budget(std::size_t h_s, double kappa);

/// Rounds `design` to `n` pulls. A design whose value exceeds
/// (1 + kappa) h_S (or is singular) is first replaced by g_optimal_design(xt). Requires kappa in (0, 1/3] and
/// n >= min_rounding_budget(h_S, kappa); the result satisfies
/// value <= (1 + 6 kappa) h_S / n, otherwise InternalError is thrown.
IntegerAllocation round_design(const Design& design, const Matrix& xt, Count n, double kappa);

}  // namespace linpsi
