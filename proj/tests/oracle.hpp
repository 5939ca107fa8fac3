#pragma once

// Brute-force reference routines and random instance generators shared by
// the unit and acceptance tests. Written independently of the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// i weakly dominated by j: <= everywhere, < somewhere.
inline bool weakly_dominated(const Mat& mu, int i, int j) {
  bool strict = false;
  for (int c = 0; c < mu.cols(); ++c) {
    if (mu(i, c) > mu(j, c)) return false;
    if (mu(i, c) < mu(j, c)) strict = true;
  }
  return strict;
}

inline bool strictly_dominated(const Mat& mu, int i, int j) {
  for (int c = 0; c < mu.cols(); ++c) {
    if (!(mu(i, c) < mu(j, c))) return false;
  }
  return true;
}

inline std::vector<std::size_t> pareto(const Mat& mu, bool strict = false) {
  std::vector<std::size_t> out;
  for (int i = 0; i < mu.rows(); ++i) {
    bool dominated = false;
    for (int j = 0; j < mu.rows() && !dominated; ++j) {
      if (i != j) dominated = strict ? strictly_dominated(mu, i, j) : weakly_dominated(mu, i, j);
    }
    if (!dominated) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

inline double m(const Mat& mu, int i, int j) {
  double v = kInf;
  for (int c = 0; c < mu.cols(); ++c) v = std::min(v, mu(j, c) - mu(i, c));
  return v;
}

// Gap of every arm over the rows listed in `ids`; `pareto_flags` marks
// the arms treated as optimal.
inline std::vector<double> gaps_over(const Mat& mu, const std::vector<bool>& pareto_flags) {
  const int k = static_cast<int>(mu.rows());
  std::vector<double> star(k, -kInf);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (j != i) star[i] = std::max(star[i], m(mu, i, j));
    }
  }
  std::vector<double> gap(k);
  for (int i = 0; i < k; ++i) {
    if (!pareto_flags[i]) {
      gap[i] = star[i];
      continue;
    }
    double g = kInf;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const double big_ij = -m(mu, i, j);
      const double big_ji = -m(mu, j, i);
      g = std::min(g, std::min(big_ij, std::max(big_ji, 0.0) + std::max(star[j], 0.0)));
    }
    gap[i] = g;
  }
  return gap;
}

inline std::vector<double> true_gaps(const Mat& mu) {
  std::vector<bool> flags(mu.rows(), false);
  for (auto i : pareto(mu)) flags[i] = true;
  return gaps_over(mu, flags);
}

// Random K x h features, h x d theta (standard normal), K >= h.
struct RandomLinear {
  Mat x;
  Mat theta;
  Mat mu;
};

inline RandomLinear random_linear(std::mt19937_64& gen, int k, int h, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  RandomLinear r{Mat(k, h), Mat(h, d), Mat()};
  for (int i = 0; i < k; ++i)
    for (int c = 0; c < h; ++c) r.x(i, c) = n(gen);
  for (int i = 0; i < h; ++i)
    for (int c = 0; c < d; ++c) r.theta(i, c) = n(gen);
  r.mu = r.x * r.theta;
  return r;
}

// Gaps pairwise separated and bounded away from zero.
inline bool well_separated(const std::vector<double>& gaps, double min_gap, double min_sep) {
  std::vector<double> g = gaps;
  std::sort(g.begin(), g.end());
  if (!(g.front() >= min_gap) || !std::isfinite(g.back())) return false;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i] - g[i - 1] < min_sep) return false;
  }
  return true;
}

// max_i x_i^T (X^T diag(w) X)^{-1} x_i by explicit inverse.
inline double g_value(const Vec& w, const Mat& x) {
  const Mat v = x.transpose() * w.asDiagonal() * x;
  const Mat inv = v.inverse();
  double best = 0.0;
  for (int i = 0; i < x.rows(); ++i) best = std::max(best, x.row(i).dot(inv * x.row(i).transpose()));
  return best;
}

}  // namespace oracle
