#pragma once

// Ground-truth bandit instances, seeded random streams and the synthetic
// instance family used by the benchmarks.

#include <cstdint>
#include <optional>
#include <random>

#include "linpsi/pareto.hpp"
#include "linpsi/types.hpp"

namespace linpsi {

/// Deterministic random stream identified by (master_seed, stream_id).
///
/// The engine and distributions are chosen for bit-identical draws across
/// standard libraries: mt19937_64 seeded through std::seed_seq, Boost's
/// ziggurat normal and uniform distributions.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  double normal();   // N(0, 1)
  double uniform();  // U[0, 1)

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

enum class NoiseKind { gaussian_iid, gaussian_cov };

/// A bandit world: features x_i, the means used for sampling, and the noise.
///
/// Linear instances have means = features * theta. Fixed-means instances
/// sample from arbitrary means while the algorithms still see `features`
/// (the misspecified setting).
class Instance {
 public:
  static Instance linear(Matrix features, Matrix theta, double sigma);
  static Instance linear(Matrix features, Matrix theta, Matrix covariance);
  static Instance fixed_means(Matrix features, Matrix means, double sigma);

  std::size_t arms() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  std::size_t objectives() const noexcept { return means_.objectives(); }

  const Matrix& features() const noexcept { return features_; }
  const MeanMatrix& means() const noexcept { return means_; }
  const std::optional<Matrix>& theta() const noexcept { return theta_; }
  double sigma() const noexcept { return sigma_; }
  NoiseKind noise_kind() const noexcept { return kind_; }
  const Matrix& covariance() const noexcept { return covariance_; }

  /// Same means and noise, different features (e.g. the canonical basis
  /// for structure-ignoring runs). The result is a fixed-means instance.
  Instance with_features(Matrix features) const;

  /// One response: mu_arm + noise.
  Vector sample(std::size_t arm, RngStream& rng) const;

  /// Sum of `count` independent responses of `arm`, drawn in one step
  /// (exact in distribution for Gaussian noise).
  Vector sample_sum(std::size_t arm, Count count, RngStream& rng) const;

 private:
  Instance(Matrix features, MeanMatrix means, std::optional<Matrix> theta, NoiseKind kind,
           double sigma, Matrix covariance);

  Matrix features_;
  MeanMatrix means_;
  std::optional<Matrix> theta_;
  NoiseKind kind_;
  double sigma_;
  Matrix covariance_;
  Matrix cov_factor_;
};

struct SyntheticOptions {
  double sigma = 1.0;
  int attempts_per_arm = 10000;
};

/// Base instance shared by every member of the family: h canonical
/// features and theta whose rows are the base means.
Instance synthetic_base(std::size_t h, std::size_t d, double sigma = 1.0);

/// The base instance padded with K - h arms drawn from normalized
/// U([0,1]^h) directions, each accepted only if it leaves the base gaps
/// untouched and its own gap exceeds 1.05 times the largest base gap.
/// Arms 0..h-1 therefore carry the h smallest gaps for every K.
Instance make_synthetic_family(std::size_t h, std::size_t d, std::size_t k, std::uint64_t seed,
                               const SyntheticOptions& options = {});

}  // namespace linpsi
