#pragma once

// Phased elimination for Pareto set identification with G-optimal
// allocations: the per-round estimator, the fixed-budget and
// fixed-confidence variants, and a uniform-allocation baseline.

#include <cstddef>
#include <optional>
#include <vector>

#include "linpsi/design.hpp"
#include "linpsi/environment.hpp"
#include "linpsi/pareto.hpp"
#include "linpsi/types.hpp"

namespace linpsi {

/// Snapshot of one round, taken before its eliminations.
struct RoundRecord {
  int round = 0;       // 1-based
  ArmSet active;       // A_r
  ArmSet accepted;     // B_r
  ArmSet rejected;     // D_r
  std::size_t h_r = 0;
  Count budget = 0;
  double eps_r = 0.0;    // fixed-confidence only
  double delta_r = 0.0;  // fixed-confidence only
  ArmSet empirical_pareto;           // S_r
  std::vector<double> empirical_gap;  // aligned with `active`
};

struct RunResult {
  ArmSet recommended;
  Count total_samples = 0;
  int rounds = 0;
  std::vector<RoundRecord> trace;
  std::optional<bool> correct;  // against the instance's true Pareto set
};

struct EstimateResult {
  Matrix theta_hat;   // h x d
  SubspaceBasis basis;
  IntegerAllocation allocation;  // aligned with the requested arm set
  Count pulls = 0;
};

/// One round's estimator on `arms`: subspace basis, G-optimal design,
/// rounding to `budget` pulls with precision `kappa`, fresh pulls, OLS.
/// Throws BudgetTooSmall when budget < 5 h_S / kappa^2.
EstimateResult opt_estimator(const Instance& instance, const ArmSet& arms, Count budget,
                             double kappa, RngStream& rng, const DesignOptions& design = {});

/// Fixed budget T over R = max(1, ceil(log2 h)) rounds of floor(T / R)
/// pulls, h the rank of the feature matrix. Round r keeps the ceil(h / 2^r)
/// arms with the smallest empirical gaps. Requires floor(T / R) >= 45 h.
RunResult gege_fixed_budget(const Instance& instance, Count budget, RngStream& rng);

struct FixedConfidenceOptions {
  double epsilon = 0.0;  // 0 means exact identification
  int max_rounds = 64;
};

/// Fixed confidence 1 - delta with the noise scale of `instance`.
RunResult gege_fixed_confidence(const Instance& instance, double delta, RngStream& rng,
                                const FixedConfidenceOptions& options = {});

/// Round-robin over all arms, per-arm sample means, weak empirical Pareto set.
RunResult uniform_fixed_budget(const Instance& instance, Count budget, RngStream& rng);

/// The same instance seen through canonical-basis features (h = K).
Instance unstructured(const Instance& instance);

/// Fixed-budget round count for feature rank h.
int fixed_budget_rounds(std::size_t h);

/// Smallest budget gege_fixed_budget accepts on `instance`.
Count min_fixed_budget(const Instance& instance);

/// Round budget t_r of the fixed-confidence schedule, before the rounding floor.
double fixed_confidence_budget(double sigma, std::size_t h_r, std::size_t active,
                               std::size_t d, double eps_r, double delta_r);

}  // namespace linpsi
