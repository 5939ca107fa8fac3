#include "linpsi/gege.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "linpsi/errors.hpp"
#include "linpsi/regression.hpp"

namespace linpsi {

namespace {

Matrix rows_of(const Matrix& m, const ArmSet& ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), m.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(ids[k]));
  }
  return out;
}

ArmSet all_arms(std::size_t k) {
  ArmSet a(k);
  std::iota(a.begin(), a.end(), std::size_t{0});
  return a;
}

void insert_sorted(ArmSet& set, std::size_t arm) {
  set.insert(std::upper_bound(set.begin(), set.end(), arm), arm);
}

ArmSet merged(const ArmSet& a, const ArmSet& b) {
  ArmSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void finish(RunResult& result, const Instance& instance) {
  result.correct = result.recommended == pareto_set(instance.means());
}

struct RoundEstimate {
  EmpiricalGaps gaps;
  std::size_t h_r = 0;
};

RoundEstimate estimate_round(const Instance& instance, const ArmSet& active, Count budget,
                             double kappa, RngStream& rng) {
  const EstimateResult est = opt_estimator(instance, active, budget, kappa, rng);
  const MeanMatrix mu_hat = predicted_means(est.theta_hat, rows_of(instance.features(), active));
  return {empirical_gaps(mu_hat, active), est.basis.rank()};
}

}  // namespace

EstimateResult opt_estimator(const Instance& instance, const ArmSet& arms, Count budget,
                             double kappa, RngStream& rng, const DesignOptions& design_options) {
  if (arms.empty()) throw InvalidArgument("estimator needs a non-empty arm set");
  for (std::size_t a : arms) {
    if (a >= instance.arms()) throw InvalidArgument("arm index out of range");
  }
  const Matrix x = rows_of(instance.features(), arms);
  SubspaceBasis basis = subspace_basis(x);
  const Matrix xt = transform_features(x, basis);

  Design design;
  try {
    design = g_optimal_design(xt, design_options);
  } catch (const DesignNotConverged& e) {
    // The rounding step re-certifies the value, so the best iterate is usable.
    design = e.best();
  }
  IntegerAllocation alloc = round_design(design, xt, budget, kappa);

  PullSummary summary;
  summary.features.resize(x.rows(), x.cols());
  summary.response_sums.resize(x.rows(), static_cast<Eigen::Index>(instance.objectives()));
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    const Count c = alloc.counts[k];
    if (c == 0) continue;
    summary.arms.push_back(arms[k]);
    summary.counts.push_back(c);
    summary.features.row(row) = x.row(static_cast<Eigen::Index>(k));
    summary.response_sums.row(row) = instance.sample_sum(arms[k], c, rng).transpose();
    ++row;
  }
  summary.features.conservativeResize(row, Eigen::NoChange);
  summary.response_sums.conservativeResize(row, Eigen::NoChange);

  const Matrix vdag = pseudo_inverse(info_matrix(summary), basis);
  Matrix theta_hat = ols_estimate(summary, vdag);
  return {std::move(theta_hat), std::move(basis), std::move(alloc), budget};
}

int fixed_budget_rounds(std::size_t h) {
  if (h <= 1) return 1;
  return static_cast<int>(std::bit_width(h - 1));  // ceil(log2 h)
}

Count min_fixed_budget(const Instance& instance) {
  const std::size_t h = subspace_basis(instance.features()).rank();
  return min_rounding_budget(h, 1.0 / 3.0) * fixed_budget_rounds(h);
}

RunResult gege_fixed_budget(const Instance& instance, Count budget, RngStream& rng) {
  const std::size_t k = instance.arms();
  const std::size_t h = subspace_basis(instance.features()).rank();
  const int rounds = fixed_budget_rounds(h);
  const Count per_round = budget / rounds;
  const Count needed = min_rounding_budget(h, 1.0 / 3.0);
  if (per_round < needed) {
    throw BudgetTooSmall("fixed budget " + std::to_string(budget) + " gives " +
                             std::to_string(per_round) + " pulls per round over " +
                             std::to_string(rounds) + " rounds, below " + std::to_string(needed),
                         needed * rounds);
  }

  RunResult result;
  ArmSet active = all_arms(k);
  ArmSet accepted;
  ArmSet rejected;
  for (int r = 1; r <= rounds; ++r) {
    RoundEstimate est = estimate_round(instance, active, per_round, 1.0 / 3.0, rng);

    const std::size_t keep = std::min(active.size(), (h + (std::size_t{1} << r) - 1) >> r);
    std::vector<std::size_t> order(active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (est.gaps.gap[a] != est.gaps.gap[b]) return est.gaps.gap[a] < est.gaps.gap[b];
      if (est.gaps.in_pareto[a] != est.gaps.in_pareto[b]) return bool(est.gaps.in_pareto[a]);
      return active[a] < active[b];
    });

    result.trace.push_back(RoundRecord{r, active, accepted, rejected, est.h_r, per_round, 0.0, 0.0,
                                       est.gaps.pareto, est.gaps.gap});
    result.total_samples += per_round;

    ArmSet next;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const std::size_t arm = active[order[pos]];
      if (pos < keep) {
        insert_sorted(next, arm);
      } else if (est.gaps.in_pareto[order[pos]]) {
        insert_sorted(accepted, arm);
      } else {
        insert_sorted(rejected, arm);
      }
    }
    active = std::move(next);
  }
  result.rounds = rounds;
  result.recommended = merged(accepted, active);
  finish(result, instance);
  return result;
}

double fixed_confidence_budget(double sigma, std::size_t h_r, std::size_t active, std::size_t d,
                               double eps_r, double delta_r) {
  const double hr = static_cast<double>(h_r);
  return 32.0 * (1.0 + 3.0 * eps_r) * sigma * sigma * hr / (eps_r * eps_r) *
         std::log(static_cast<double>(active) * static_cast<double>(d) / (2.0 * delta_r));
}

RunResult gege_fixed_confidence(const Instance& instance, double delta, RngStream& rng,
                                const FixedConfidenceOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(options.epsilon >= 0.0) || !std::isfinite(options.epsilon)) {
    throw InvalidArgument("epsilon must be finite and >= 0");
  }
  const double sigma = instance.sigma();
  const std::size_t d = instance.objectives();

  RunResult result;
  ArmSet active = all_arms(instance.arms());
  ArmSet accepted;
  ArmSet rejected;
  int r = 1;
  for (;; ++r) {
    const double eps_r = std::ldexp(1.0, -(r + 1));
    if (active.size() <= 1) break;
    if (r > options.max_rounds) {
      throw DegenerateInstance("fixed-confidence run did not finish within " +
                               std::to_string(options.max_rounds) +
                               " rounds; the instance likely has a zero gap");
    }
    const double delta_r = 6.0 * delta / (std::numbers::pi * std::numbers::pi * r * r);
    const std::size_t h_r = subspace_basis(rows_of(instance.features(), active)).rank();
    const double raw = std::ceil(fixed_confidence_budget(sigma, h_r, active.size(), d, eps_r, delta_r));
    if (!(raw <= 9007199254740992.0)) {
      throw DegenerateInstance("round " + std::to_string(r) + " budget exceeds 2^53 pulls");
    }
    const Count t_r = std::max(static_cast<Count>(raw), min_rounding_budget(h_r, eps_r));

    RoundEstimate est = estimate_round(instance, active, t_r, eps_r, rng);
    result.trace.push_back(RoundRecord{r, active, accepted, rejected, est.h_r, t_r, eps_r, delta_r,
                                       est.gaps.pareto, est.gaps.gap});
    result.total_samples += t_r;

    ArmSet next;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double g = est.gaps.gap[k];
      if (est.gaps.in_pareto[k] && g >= eps_r) {
        insert_sorted(accepted, active[k]);
      } else if (!est.gaps.in_pareto[k] && g >= eps_r / 2.0) {
        insert_sorted(rejected, active[k]);
      } else {
        next.push_back(active[k]);
      }
    }
    active = std::move(next);
    if (options.epsilon > 0.0 && !(eps_r > options.epsilon / 4.0)) {
      ++r;
      break;
    }
  }
  result.rounds = r - 1;
  result.recommended = merged(accepted, active);
  finish(result, instance);
  return result;
}

RunResult uniform_fixed_budget(const Instance& instance, Count budget, RngStream& rng) {
  const std::size_t k = instance.arms();
  const auto kc = static_cast<Count>(k);
  if (budget < kc) {
    throw BudgetTooSmall("uniform baseline needs at least one pull per arm", kc);
  }
  Matrix mu_hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(instance.objectives()));
  for (std::size_t i = 0; i < k; ++i) {
    const Count n = budget / kc + (static_cast<Count>(i) < budget % kc ? 1 : 0);
    mu_hat.row(static_cast<Eigen::Index>(i)) =
        instance.sample_sum(i, n, rng).transpose() / static_cast<double>(n);
  }
  RunResult result;
  result.total_samples = budget;
  result.rounds = 1;
  result.recommended = pareto_set(MeanMatrix(std::move(mu_hat)), Dominance::weak);
  finish(result, instance);
  return result;
}

Instance unstructured(const Instance& instance) {
  const auto k = static_cast<Eigen::Index>(instance.arms());
  return instance.with_features(Matrix::Identity(k, k));
}

}  // namespace linpsi
