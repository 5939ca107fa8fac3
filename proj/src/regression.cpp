#include "linpsi/regression.hpp"

#include <map>

#include "linpsi/errors.hpp"

namespace linpsi {

namespace {

void check_log(const PullLog& log) {
  const auto n = static_cast<Eigen::Index>(log.arm_ids.size());
  if (n == 0) throw InvalidArgument("pull log is empty");
  if (log.x.rows() != n || log.y.rows() != n) {
    throw InvalidArgument("pull log rows disagree with the number of pulls");
  }
}

void check_summary(const PullSummary& s) {
  const auto m = static_cast<Eigen::Index>(s.arms.size());
  if (m == 0) throw InvalidArgument("pull summary is empty");
  if (static_cast<Eigen::Index>(s.counts.size()) != m || s.features.rows() != m ||
      s.response_sums.rows() != m) {
    throw InvalidArgument("pull summary fields disagree in length");
  }
}

}  // namespace

PullSummary summarize(const PullLog& log) {
  check_log(log);
  std::map<std::size_t, Eigen::Index> first_row;
  std::map<std::size_t, Count> counts;
  std::map<std::size_t, Vector> sums;
  for (Eigen::Index t = 0; t < log.x.rows(); ++t) {
    const std::size_t a = log.arm_ids[static_cast<std::size_t>(t)];
    if (!first_row.count(a)) {
      first_row[a] = t;
      sums[a] = Vector::Zero(log.y.cols());
    }
    ++counts[a];
    sums[a] += log.y.row(t).transpose();
  }
  PullSummary s;
  s.features.resize(static_cast<Eigen::Index>(first_row.size()), log.x.cols());
  s.response_sums.resize(static_cast<Eigen::Index>(first_row.size()), log.y.cols());
  Eigen::Index k = 0;
  for (const auto& [arm, row] : first_row) {
    s.arms.push_back(arm);
    s.counts.push_back(counts[arm]);
    s.features.row(k) = log.x.row(row);
    s.response_sums.row(k) = sums[arm].transpose();
    ++k;
  }
  return s;
}

Matrix info_matrix(const PullLog& log) {
  check_log(log);
  return log.x.transpose() * log.x;
}

Matrix info_matrix(const PullSummary& summary) {
  check_summary(summary);
  Vector c(static_cast<Eigen::Index>(summary.counts.size()));
  for (std::size_t i = 0; i < summary.counts.size(); ++i) {
    c(static_cast<Eigen::Index>(i)) = static_cast<double>(summary.counts[i]);
  }
  return summary.features.transpose() * c.asDiagonal() * summary.features;
}

Matrix pseudo_inverse(const Matrix& vn, const SubspaceBasis& basis) {
  const Matrix& b = basis.basis;
  if (vn.rows() != vn.cols() || vn.rows() != b.rows()) {
    throw InvalidArgument("information matrix and basis dimensions disagree");
  }
  const Matrix reduced = b.transpose() * vn * b;
  Eigen::LLT<Matrix> llt(reduced);
  bool ok = llt.info() == Eigen::Success;
  if (ok && reduced.rows() > 0) {
    const Vector d = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs2();
    ok = d.minCoeff() > 1e-14 * d.maxCoeff();
  }
  if (!ok) throw SingularMatrix("subspace direction unsampled");
  const Matrix inv = llt.solve(Matrix::Identity(reduced.rows(), reduced.cols()));
  Matrix out = b * inv * b.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix ols_estimate(const PullLog& log, const Matrix& vdag) {
  check_log(log);
  if (vdag.rows() != log.x.cols() || vdag.cols() != log.x.cols()) {
    throw InvalidArgument("pseudo-inverse does not match the feature dimension");
  }
  return vdag * (log.x.transpose() * log.y);
}

Matrix ols_estimate(const PullSummary& summary, const Matrix& vdag) {
  check_summary(summary);
  if (vdag.rows() != summary.features.cols() || vdag.cols() != summary.features.cols()) {
    throw InvalidArgument("pseudo-inverse does not match the feature dimension");
  }
  return vdag * (summary.features.transpose() * summary.response_sums);
}

MeanMatrix predicted_means(const Matrix& theta_hat, const Matrix& features) {
  if (features.cols() != theta_hat.rows()) {
    throw InvalidArgument("feature dimension does not match the parameter");
  }
  return MeanMatrix(features * theta_hat);
}

}  // namespace linpsi
