#include "linpsi/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "linpsi/errors.hpp"

namespace linpsi {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void check_features(const Matrix& features, const Matrix& means) {
  if (features.rows() < 1 || features.cols() < 1) throw InvalidArgument("empty feature matrix");
  if (!features.allFinite()) throw InvalidArgument("features have non-finite entries");
  if (features.rows() != means.rows()) {
    throw InvalidArgument("features and means differ in number of arms");
  }
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id), engine_(seeded_engine(master_seed, stream_id)) {}

double RngStream::normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::uniform() {
  return boost::random::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

Instance::Instance(Matrix features, MeanMatrix means, std::optional<Matrix> theta, NoiseKind kind,
                   double sigma, Matrix covariance)
    : features_(std::move(features)),
      means_(std::move(means)),
      theta_(std::move(theta)),
      kind_(kind),
      sigma_(sigma),
      covariance_(std::move(covariance)) {
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) throw InvalidArgument("sigma must be >= 0");
  if (kind_ == NoiseKind::gaussian_cov) {
    const auto d = static_cast<Eigen::Index>(means_.objectives());
    if (covariance_.rows() != d || covariance_.cols() != d) {
      throw InvalidArgument("noise covariance must be d x d");
    }
    if (!covariance_.isApprox(covariance_.transpose())) {
      throw InvalidArgument("noise covariance must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      throw InvalidArgument("noise covariance must be positive semidefinite");
    }
    // Symmetric square root handles the PSD (singular) case.
    cov_factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                  eig.eigenvectors().transpose();
  }
}

Instance Instance::linear(Matrix features, Matrix theta, double sigma) {
  if (features.cols() != theta.rows()) throw InvalidArgument("theta must be h x d");
  Matrix means = features * theta;
  check_features(features, means);
  return Instance(std::move(features), MeanMatrix(std::move(means)), std::move(theta),
                  NoiseKind::gaussian_iid, sigma, Matrix());
}

Instance Instance::linear(Matrix features, Matrix theta, Matrix covariance) {
  if (features.cols() != theta.rows()) throw InvalidArgument("theta must be h x d");
  Matrix means = features * theta;
  check_features(features, means);
  const double sigma = std::sqrt(std::max(0.0, covariance.diagonal().maxCoeff()));
  return Instance(std::move(features), MeanMatrix(std::move(means)), std::move(theta),
                  NoiseKind::gaussian_cov, sigma, std::move(covariance));
}

Instance Instance::fixed_means(Matrix features, Matrix means, double sigma) {
  check_features(features, means);
  return Instance(std::move(features), MeanMatrix(std::move(means)), std::nullopt,
                  NoiseKind::gaussian_iid, sigma, Matrix());
}

Instance Instance::with_features(Matrix features) const {
  check_features(features, means_.values());
  return Instance(std::move(features), means_, std::nullopt, kind_, sigma_, covariance_);
}

Vector Instance::sample(std::size_t arm, RngStream& rng) const {
  return sample_sum(arm, 1, rng);
}

Vector Instance::sample_sum(std::size_t arm, Count count, RngStream& rng) const {
  if (arm >= arms()) {
    throw InvalidArgument("arm index " + std::to_string(arm) + " out of range (K = " +
                          std::to_string(arms()) + ")");
  }
  if (count < 0) throw InvalidArgument("negative pull count");
  const auto d = static_cast<Eigen::Index>(objectives());
  Vector z(d);
  for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal();
  const double n = static_cast<double>(count);
  Vector noise = kind_ == NoiseKind::gaussian_cov ? Vector(cov_factor_ * z) : Vector(sigma_ * z);
  return n * means_.row(arm).transpose() + std::sqrt(n) * noise;
}

Instance synthetic_base(std::size_t h, std::size_t d, double sigma) {
  if (h < 1) throw InvalidArgument("synthetic family needs h >= 1");
  if (d < 2) throw InvalidArgument("synthetic family needs d >= 2");

  // Pareto arms: `ext` axis extremes plus knee points near the diagonal,
  // giving a concave front whose interior is deep. Remaining arms sit just
  // below the extremes at increasing offsets.
  constexpr double kLow = 0.05;
  constexpr double kKnee = 0.8;
  constexpr double kTilt = 0.12;
  constexpr double kOffsetLo = 0.12;
  constexpr double kOffsetHi = 0.24;
  constexpr double kScale = 2.0;

  const std::size_t pareto = std::max((h + 1) / 2, std::min(h, d + 1));
  const std::size_t ext = pareto > 1 ? std::min(d, pareto - 1) : 1;
  const std::size_t knees = pareto - ext;
  const std::size_t subs = h - pareto;
  const auto di = static_cast<Eigen::Index>(d);

  Matrix mu(static_cast<Eigen::Index>(h), di);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < ext; ++k, ++row) {
    mu.row(row).setConstant(kLow);
    mu(row, static_cast<Eigen::Index>(k)) = 1.0;
  }
  for (std::size_t j = 0; j < knees; ++j, ++row) {
    Vector w = Vector::Ones(di);
    if (knees > 1) {
      const double t = kTilt * (2.0 * static_cast<double>(j) / static_cast<double>(knees - 1) - 1.0);
      const auto a = static_cast<Eigen::Index>(d > 2 ? (j / 2) % d : 0);
      const auto b = (a + 1) % di;
      w(a) += t;
      w(b) -= t;
    }
    mu.row(row) = (kKnee * std::sqrt(static_cast<double>(d)) / w.norm()) * w.transpose();
  }
  for (std::size_t q = 0; q < subs; ++q, ++row) {
    const double off = kOffsetLo + (kOffsetHi - kOffsetLo) * static_cast<double>(q) /
                                       static_cast<double>(std::max<std::size_t>(1, subs - 1));
    mu.row(row) = mu.row(static_cast<Eigen::Index>(q % ext)).array() - off;
  }
  mu *= kScale;
  return Instance::linear(Matrix::Identity(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(h)),
                          std::move(mu), sigma);
}

Instance make_synthetic_family(std::size_t h, std::size_t d, std::size_t k, std::uint64_t seed,
                               const SyntheticOptions& options) {
  if (k < h) throw InvalidArgument("synthetic family needs K >= h");
  Instance base = synthetic_base(h, d, options.sigma);
  if (k == h) return base;

  const Matrix& theta = *base.theta();
  const GapProfile base_gaps = true_gaps(base.means());
  if (base_gaps.degenerate) throw InternalError("synthetic base instance is degenerate");
  const double max_base = *std::max_element(base_gaps.gap.begin(), base_gaps.gap.end());
  if (!std::isfinite(max_base)) {
    throw DegenerateInstance("synthetic base with h = " + std::to_string(h) +
                             " has no finite gap to pad against");
  }
  const double threshold = 1.05 * max_base;

  const auto hi = static_cast<Eigen::Index>(h);
  Matrix features(static_cast<Eigen::Index>(k), hi);
  Matrix means(static_cast<Eigen::Index>(k), theta.cols());
  features.topRows(hi) = base.features();
  means.topRows(hi) = base.means().values();

  RngStream rng(seed, 0);
  for (Eigen::Index next = hi; next < static_cast<Eigen::Index>(k); ++next) {
    bool accepted = false;
    for (int attempt = 0; attempt < options.attempts_per_arm && !accepted; ++attempt) {
      Vector x(hi);
      for (Eigen::Index c = 0; c < hi; ++c) x(c) = rng.uniform();
      if (!(x.sum() > 0.0)) continue;
      x /= x.sum();
      const Vector mu = theta.transpose() * x;

      // Own gap against every arm placed so far (later arms only raise it).
      double own = -kInfiniteGap;
      for (Eigen::Index j = 0; j < next; ++j) {
        own = std::max(own, (means.row(j).transpose() - mu).minCoeff());
      }
      if (!(own > threshold)) continue;
      // Must not dominate a base sub-optimal arm by more than its gap.
      bool keeps_base = true;
      for (std::size_t s = 0; s < h && keeps_base; ++s) {
        if (base_gaps.pareto[s]) continue;
        const double m = (mu - means.row(static_cast<Eigen::Index>(s)).transpose()).minCoeff();
        keeps_base = m <= base_gaps.delta_star[s];
      }
      if (!keeps_base) continue;
      features.row(next) = x.transpose();
      means.row(next) = mu.transpose();
      accepted = true;
    }
    if (!accepted) {
      throw DegenerateInstance("synthetic family (h=" + std::to_string(h) + ", d=" +
                               std::to_string(d) + ", K=" + std::to_string(k) +
                               ", seed=" + std::to_string(seed) +
                               "): no admissible padded arm after " +
                               std::to_string(options.attempts_per_arm) + " attempts");
    }
  }

  Instance out = Instance::linear(std::move(features), theta, options.sigma);
  const GapProfile gaps = true_gaps(out.means());
  for (std::size_t i = 0; i < k; ++i) {
    const bool ok = i < h ? std::abs(gaps.gap[i] - base_gaps.gap[i]) <= 1e-12
                          : gaps.gap[i] > threshold;
    if (!ok) throw InternalError("synthetic family lost its gap structure at arm " + std::to_string(i));
  }
  return out;
}

}  // namespace linpsi
