#include "linpsi/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace linpsi {

namespace {

// Cholesky of a symmetric positive-definite matrix; singular or
// ill-conditioned inputs raise SingularMatrix.
Eigen::LLT<Matrix> factor_spd(const Matrix& v) {
  Eigen::LLT<Matrix> llt(v);
  if (llt.info() != Eigen::Success) throw SingularMatrix("moment matrix is singular");
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  const double lo = diag.cwiseAbs2().minCoeff();
  const double hi = diag.cwiseAbs2().maxCoeff();
  if (!(lo > 1e-14 * hi)) throw SingularMatrix("moment matrix is numerically singular");
  return llt;
}

Matrix moment_matrix(const Vector& weights, const Matrix& xt) {
  return xt.transpose() * weights.asDiagonal() * xt;
}

Vector leverages_from(const Eigen::LLT<Matrix>& llt, const Matrix& xt) {
  const Matrix z = llt.matrixL().solve(xt.transpose());
  return z.colwise().squaredNorm().transpose();
}

void check_design_inputs(const Vector& weights, const Matrix& xt) {
  if (weights.size() != xt.rows()) {
    throw InvalidArgument("design weights and feature rows differ in length");
  }
  if (xt.rows() == 0 || xt.cols() == 0) throw InvalidArgument("empty feature set");
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw InvalidArgument("design weights must be finite and non-negative");
  }
}

}  // namespace

SubspaceBasis subspace_basis(const Matrix& rows, double rank_tol) {
  if (rows.rows() == 0 || rows.cols() == 0) throw InvalidArgument("empty feature set");
  if (!rows.allFinite()) throw InvalidArgument("features have non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(rows.transpose(), Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) {
    throw DegenerateInstance("feature set has rank 0");
  }
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > rank_tol * sv(0)) ++rank;
  return SubspaceBasis{svd.matrixU().leftCols(rank)};
}

Matrix transform_features(const Matrix& rows, const SubspaceBasis& basis) {
  if (rows.cols() != basis.basis.rows()) {
    throw InvalidArgument("feature dimension does not match the basis");
  }
  return rows * basis.basis;
}

Vector leverages(const Vector& weights, const Matrix& xt) {
  check_design_inputs(weights, xt);
  return leverages_from(factor_spd(moment_matrix(weights, xt)), xt);
}

double design_value(const Vector& weights, const Matrix& xt) {
  return leverages(weights, xt).maxCoeff();
}

Design g_optimal_design(const Matrix& xt, const DesignOptions& options) {
  const Eigen::Index n = xt.rows();
  const Eigen::Index h = xt.cols();
  if (n == 0 || h == 0) throw InvalidArgument("empty feature set");
  if (n < h) throw InvalidArgument("transformed features cannot span their space");
  const double hd = static_cast<double>(h);

  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));

  double lipschitz = 1.0;
  {
    const Matrix v0 = moment_matrix(w, xt);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(v0, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0);
    if (!(lmin > 0.0)) throw SingularMatrix("features do not span the subspace");
    lipschitz = std::max(1.0, xt.rowwise().squaredNorm().maxCoeff() / lmin);
  }
  const double eta0 = std::sqrt(2.0 * std::log(static_cast<double>(n))) / lipschitz;

  Design best;
  best.value = std::numeric_limits<double>::infinity();
  bool mirror_phase = true;
  Vector prev = w;

  for (int iter = 0;; ++iter) {
    Vector g;
    try {
      g = leverages_from(factor_spd(moment_matrix(w, xt)), xt);
    } catch (const SingularMatrix&) {
      // Mirror descent drove some direction to zero mass; resume from the
      // last good iterate with exchange steps.
      if (!mirror_phase) throw;
      w = prev;
      mirror_phase = false;
      g = leverages_from(factor_spd(moment_matrix(w, xt)), xt);
    }
    Eigen::Index worst = 0;
    const double value = g.maxCoeff(&worst);
    if (value < best.value) {
      best.weights = w;
      best.value = value;
      best.iterations = iter;
    }
    if (std::abs(value - hd) < options.tol) {
      return Design{w, value, iter};
    }
    if (iter >= options.max_iter) {
      throw DesignNotConverged("G-optimal design did not reach tolerance " +
                                   std::to_string(options.tol) + " within " +
                                   std::to_string(options.max_iter) + " iterations",
                               best);
    }
    prev = w;

    if (mirror_phase && iter < options.mirror_descent_iters) {
      const double eta = eta0 / std::sqrt(static_cast<double>(iter + 1));
      w = (w.array() * (eta * (g.array() - value)).exp()).matrix();
      w /= w.sum();
      continue;
    }
    mirror_phase = false;

    // Best supported point (away-step candidate).
    Eigen::Index best_supp = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) > 0.0 && (best_supp < 0 || g(i) < g(best_supp))) best_supp = i;
    }
    if (value - hd >= hd - g(best_supp)) {
      const double alpha = (value - hd) / (hd * (value - 1.0));
      w *= (1.0 - alpha);
      w(worst) += alpha;
    } else {
      const double wk = w(best_supp);
      const double lower = -wk / (1.0 - wk);
      const double gk = g(best_supp);
      double alpha = gk > 1.0 ? (gk - hd) / (hd * (gk - 1.0)) : lower;
      alpha = std::max(alpha, lower);
      w *= (1.0 - alpha);
      w(best_supp) += alpha;
      if (alpha <= lower) w(best_supp) = 0.0;
    }
    w = w.cwiseMax(0.0);
    w /= w.sum();
  }
}

Count min_rounding_budget(std::size_t h_s, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("rounding precision must be positive");
  const double v = 5.0 * static_cast<double>(h_s) / (kappa * kappa);
  // 1/3 is not exact in binary; absorb the representation error.
  return static_cast<Count>(std::ceil(v * (1.0 - 1e-12)));
}

std::vector<Count> apportion(const Vector& weights, Count n) {
  if (weights.size() == 0 || !weights.allFinite() || (weights.array() < 0.0).any()) {
    throw InvalidArgument("apportionment needs finite non-negative weights");
  }
  if (n < 0) throw InvalidArgument("negative number of pulls");
  const Eigen::Index m = weights.size();
  const std::size_t ms = static_cast<std::size_t>(m);
  Vector w = weights;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (w(i) < 1e-9) w(i) = 0.0;
  }
  if (!(w.sum() > 0.0)) throw InvalidArgument("design has no support");
  w /= w.sum();

  // Largest remainder.
  std::vector<Count> counts(ms, 0);
  std::vector<double> frac(ms, 0.0);
  Count assigned = 0;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < ms; ++i) {
    const double target = nd * w(static_cast<Eigen::Index>(i));
    counts[i] = static_cast<Count>(std::floor(target));
    frac[i] = target - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(ms);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % ms) {
    if (w(static_cast<Eigen::Index>(order[k])) > 0.0) {
      ++counts[order[k]];
      ++assigned;
    }
  }
  while (assigned > n) {
    const auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

IntegerAllocation round_design(const Design& design, const Matrix& xt, Count n, double kappa) {
  check_design_inputs(design.weights, xt);
  if (!(kappa > 0.0) || kappa > 1.0 / 3.0 + 1e-12) {
    throw InvalidArgument("rounding precision kappa must lie in (0, 1/3]");
  }
  const std::size_t h_s = static_cast<std::size_t>(xt.cols());
  const Count minimal = min_rounding_budget(h_s, kappa);
  if (n < minimal) throw BudgetTooSmall("rounding budget below 5 h_S / kappa^2", minimal);

  const Eigen::Index m = xt.rows();
  const std::size_t ms = static_cast<std::size_t>(m);

  // The certificate is relative to h_S, so a design far from optimal is
  // replaced by a solved one before apportionment.
  Design start = design;
  double start_value = std::numeric_limits<double>::infinity();
  try {
    start_value = design_value(design.weights, xt);
  } catch (const SingularMatrix&) {
  }
  if (!(start_value <= (1.0 + kappa) * static_cast<double>(h_s))) {
    try {
      start = g_optimal_design(xt);
    } catch (const DesignNotConverged& e) {
      start = e.best();
    }
  }
  std::vector<Count> counts = apportion(start.weights, n);

  auto as_weights = [&]() {
    Vector s(m);
    for (std::size_t i = 0; i < ms; ++i) s(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]);
    return s;
  };

  // Every direction must be sampled: move single units onto arms outside
  // the span of the currently allocated rows.
  for (std::size_t repair = 0; repair <= h_s; ++repair) {
    std::vector<Eigen::Index> supp;
    for (std::size_t i = 0; i < ms; ++i) {
      if (counts[i] > 0) supp.push_back(static_cast<Eigen::Index>(i));
    }
    Matrix rows(static_cast<Eigen::Index>(supp.size()), xt.cols());
    for (std::size_t k = 0; k < supp.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = xt.row(supp[k]);
    const SubspaceBasis span = subspace_basis(rows);
    if (span.rank() == h_s) break;
    const Matrix resid = xt - (xt * span.basis) * span.basis.transpose();
    Eigen::Index add = 0;
    resid.rowwise().squaredNorm().maxCoeff(&add);
    const auto donor = std::max_element(counts.begin(), counts.end());
    --*donor;
    ++counts[static_cast<std::size_t>(add)];
  }

  Vector lev = leverages(as_weights(), xt);
  double value = lev.maxCoeff();
  const double bound = (1.0 + 6.0 * kappa) * static_cast<double>(h_s) / static_cast<double>(n);

  // Greedy single-unit swaps toward the worst-covered arm.
  const std::size_t max_swaps = 10 * ms + 100;
  for (std::size_t swap = 0; swap < max_swaps && value > bound; ++swap) {
    Eigen::Index worst = 0;
    lev.maxCoeff(&worst);
    const auto wi = static_cast<std::size_t>(worst);
    double best_value = value;
    std::size_t best_donor = ms;
    Vector best_lev;
    for (std::size_t j = 0; j < ms; ++j) {
      if (j == wi || counts[j] == 0) continue;
      --counts[j];
      ++counts[wi];
      try {
        Vector cand = leverages(as_weights(), xt);
        const double v = cand.maxCoeff();
        if (v < best_value) {
          best_value = v;
          best_donor = j;
          best_lev = std::move(cand);
        }
      } catch (const SingularMatrix&) {
      }
      ++counts[j];
      --counts[wi];
    }
    if (best_donor == ms) break;
    --counts[best_donor];
    ++counts[wi];
    value = best_value;
    lev = std::move(best_lev);
  }

  if (value > bound * (1.0 + 1e-12)) {
    throw InternalError("rounded allocation value " + std::to_string(value) +
                        " exceeds the certified bound " + std::to_string(bound));
  }
  return IntegerAllocation{std::move(counts), n, value};
}

}  // namespace linpsi
