#include "linpsi/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "linpsi/errors.hpp"

namespace linpsi {

namespace {

void check_arm(const MeanMatrix& means, std::size_t i) {
  if (i >= means.arms()) {
    throw InvalidArgument("arm index " + std::to_string(i) + " out of range (K = " +
                          std::to_string(means.arms()) + ")");
  }
}

double pos(double x) { return std::max(x, 0.0); }

// Gaps of every row of `means` relative to the other rows, given the
// dominance relation that defines the Pareto set.
struct RawGaps {
  std::vector<bool> pareto;
  std::vector<double> delta_star;
  std::vector<double> delta_opt;
  std::vector<double> gap;
};

RawGaps compute_gaps(const MeanMatrix& means, Dominance rel) {
  const std::size_t k = means.arms();
  const Matrix& mu = means.values();

  // mm(i,j) = m(i,j)
  Matrix mm(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      mm(i, j) = (mu.row(j) - mu.row(i)).minCoeff();
    }
  }

  RawGaps out;
  out.pareto.assign(k, true);
  out.delta_star.assign(k, -kInfiniteGap);
  out.delta_opt.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.gap.assign(k, 0.0);

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      out.delta_star[i] = std::max(out.delta_star[i], mm(i, j));
      if (out.pareto[i] && dominated_by(means, i, j, rel)) out.pareto[i] = false;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!out.pareto[i]) {
      out.gap[i] = out.delta_star[i];
      continue;
    }
    double best = kInfiniteGap;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double big_m_ij = -mm(i, j);
      const double big_m_ji = -mm(j, i);
      best = std::min(best, std::min(big_m_ij, pos(big_m_ji) + pos(out.delta_star[j])));
    }
    out.delta_opt[i] = best;
    out.gap[i] = best;
  }
  return out;
}

}  // namespace

MeanMatrix::MeanMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InvalidArgument("mean matrix needs at least one arm and one objective");
  }
  if (!values_.allFinite()) throw InvalidArgument("mean matrix has non-finite entries");
}

MeanMatrix MeanMatrix::select(const ArmSet& ids) const {
  Matrix out(static_cast<Eigen::Index>(ids.size()), values_.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= arms()) throw InvalidArgument("arm index out of range in select");
    out.row(static_cast<Eigen::Index>(k)) = row(ids[k]);
  }
  return MeanMatrix(std::move(out));
}

double pairwise_m(const MeanMatrix& means, std::size_t i, std::size_t j) {
  check_arm(means, i);
  check_arm(means, j);
  return (means.row(j) - means.row(i)).minCoeff();
}

bool dominated_by(const MeanMatrix& means, std::size_t i, std::size_t j, Dominance rel) {
  check_arm(means, i);
  check_arm(means, j);
  if (i == j) return false;
  const auto a = means.row(i);
  const auto b = means.row(j);
  if (rel == Dominance::strict) return (a.array() < b.array()).all();
  return (a.array() <= b.array()).all() && (a.array() < b.array()).any();
}

ArmSet pareto_set(const MeanMatrix& means, Dominance rel) {
  ArmSet out;
  for (std::size_t i = 0; i < means.arms(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < means.arms() && !dominated; ++j) {
      dominated = dominated_by(means, i, j, rel);
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

ArmSet GapProfile::pareto_arms() const {
  ArmSet out;
  for (std::size_t i = 0; i < pareto.size(); ++i) {
    if (pareto[i]) out.push_back(i);
  }
  return out;
}

GapProfile true_gaps(const MeanMatrix& means) {
  RawGaps raw = compute_gaps(means, Dominance::weak);
  GapProfile g;
  g.pareto = std::move(raw.pareto);
  g.delta_star = std::move(raw.delta_star);
  g.delta_opt = std::move(raw.delta_opt);
  g.gap = std::move(raw.gap);
  g.sorted_gaps.resize(g.gap.size());
  std::iota(g.sorted_gaps.begin(), g.sorted_gaps.end(), std::size_t{0});
  std::stable_sort(g.sorted_gaps.begin(), g.sorted_gaps.end(),
                   [&](std::size_t a, std::size_t b) { return g.gap[a] < g.gap[b]; });
  g.degenerate = std::any_of(g.gap.begin(), g.gap.end(), [](double x) { return !(x > 0.0); });
  return g;
}

EmpiricalGaps empirical_gaps(const MeanMatrix& est_means, const ArmSet& active) {
  if (active.empty()) throw InvalidArgument("empirical gaps need a non-empty active set");
  if (active.size() != est_means.arms()) {
    throw InvalidArgument("estimated means must have one row per active arm");
  }
  RawGaps raw = compute_gaps(est_means, Dominance::strict);
  EmpiricalGaps out;
  out.active = active;
  out.gap = std::move(raw.gap);
  out.in_pareto = raw.pareto;
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (raw.pareto[k]) out.pareto.push_back(active[k]);
  }
  return out;
}

ComplexityMeasures complexities(std::vector<double> gaps, std::size_t h) {
  if (gaps.empty()) throw InvalidArgument("complexities need at least one gap");
  if (h < 1 || h > gaps.size()) {
    throw InvalidArgument("subspace dimension must satisfy 1 <= h <= K");
  }
  for (double g : gaps) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw DegenerateInstance("complexity measures need finite positive gaps");
    }
  }
  std::sort(gaps.begin(), gaps.end());
  ComplexityMeasures c;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double inv = 1.0 / (gaps[i] * gaps[i]);
    const double scaled = static_cast<double>(i + 1) * inv;
    c.h1 += inv;
    c.h2 = std::max(c.h2, scaled);
    if (i < h) {
      c.h1_lin += inv;
      c.h2_lin = std::max(c.h2_lin, scaled);
    }
  }
  return c;
}

ComplexityMeasures complexities(const GapProfile& gaps, std::size_t h) {
  return complexities(gaps.gap, h);
}

}  // namespace linpsi
