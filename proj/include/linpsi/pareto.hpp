#pragma once

// Pareto dominance between mean vectors, PSI gaps and complexity measures.
//
// m(i,j) = min_c [mu_j(c) - mu_i(c)] is positive iff j strictly dominates i;
// M(i,j) = -m(i,j) is positive iff i is not dominated by j.

#include <cstddef>
#include <limits>
#include <vector>

#include "linpsi/types.hpp"

namespace linpsi {

/// K x d matrix of mean vectors, one row per arm. Entries must be finite.
class MeanMatrix {
 public:
  explicit MeanMatrix(Matrix values);

  std::size_t arms() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t objectives() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const noexcept { return values_; }
  auto row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)); }

  /// Rows `ids` of this matrix, in the given order.
  MeanMatrix select(const ArmSet& ids) const;

 private:
  Matrix values_;
};

enum class Dominance {
  weak,    // dominated: <= everywhere and < somewhere
  strict,  // < in every coordinate
};

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

double pairwise_m(const MeanMatrix& means, std::size_t i, std::size_t j);
inline double pairwise_big_m(const MeanMatrix& means, std::size_t i, std::size_t j) {
  return -pairwise_m(means, i, j);
}

/// True when arm i is dominated by arm j under `rel`.
bool dominated_by(const MeanMatrix& means, std::size_t i, std::size_t j, Dominance rel);

/// Arms not dominated by any other arm under `rel`. Never empty.
ArmSet pareto_set(const MeanMatrix& means, Dominance rel = Dominance::weak);

struct GapProfile {
  std::vector<bool> pareto;
  std::vector<double> delta_star;  // max_{j != i} m(i,j); -inf when K = 1
  std::vector<double> delta_opt;   // Pareto arms only, NaN otherwise
  std::vector<double> gap;
  ArmSet sorted_gaps;              // arm indices by ascending gap, stable
  bool degenerate = false;         // some gap <= 0

  ArmSet pareto_arms() const;
  std::size_t arms() const noexcept { return gap.size(); }
};

GapProfile true_gaps(const MeanMatrix& means);

struct EmpiricalGaps {
  ArmSet active;            // arm ids, ascending
  ArmSet pareto;            // S_r, subset of active
  std::vector<double> gap;  // aligned with `active`
  std::vector<bool> in_pareto;  // aligned with `active`
};

/// Gaps over an active set. Row k of `est_means` holds the estimate for
/// `active[k]`; S_r uses strict dominance, and the inner (.)_+ term of the
/// optimal-arm gap uses the estimate of the competitor j.
EmpiricalGaps empirical_gaps(const MeanMatrix& est_means, const ArmSet& active);

struct ComplexityMeasures {
  double h1 = 0.0;
  double h2 = 0.0;
  double h1_lin = 0.0;
  double h2_lin = 0.0;
};

/// Requires every gap finite and positive, 1 <= h <= K.
ComplexityMeasures complexities(const GapProfile& gaps, std::size_t h);
ComplexityMeasures complexities(std::vector<double> gaps, std::size_t h);

}  // namespace linpsi
