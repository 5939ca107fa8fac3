#pragma once

// Instance files, seeded replication runs and result tables.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "linpsi/environment.hpp"
#include "linpsi/gege.hpp"

namespace linpsi {

enum class LoadMode { linearize, raw };

struct LoadOptions {
  LoadMode mode = LoadMode::linearize;
  bool normalize = true;  // divide each feature column by its max |entry|
  double sigma = 1.0;
};

/// Parses `f1..fh,y1..yd` CSV. Linearize fits theta by least squares on
/// the span of the (normalized) features and samples from the fitted
/// means; raw samples from the objective columns as given.
/// Rank-deficient fits append a note to `warnings` when provided.
Instance parse_instance(std::istream& in, const LoadOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);
Instance load_instance(const std::string& path, const LoadOptions& options = {},
                       std::vector<std::string>* warnings = nullptr);

/// Writes features and true means in the instance file format.
void write_instance(std::ostream& out, const Instance& instance);

/// Headerless or headed numeric CSV, one feature row per line.
Matrix parse_matrix(std::istream& in);

enum class Algorithm { gege, uniform, gege_unstructured };
enum class Setting { fixed_budget, fixed_confidence };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  Setting setting = Setting::fixed_confidence;
  std::vector<Algorithm> algorithms{Algorithm::gege};
  std::vector<Instance> instances;  // one batch group per instance
  std::vector<double> params;       // budgets T or risks delta
  double epsilon = 0.0;
  int reps = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ResultRow {
  std::uint64_t stream_id = 0;
  std::string algorithm;
  std::size_t k = 0;
  std::size_t h = 0;
  std::size_t d = 0;
  double param = 0.0;
  Count total_samples = 0;
  int rounds = 0;
  std::optional<bool> correct;  // empty for failed runs
  ArmSet recommended;           // 0-based
  double wall_ms = 0.0;
  std::string error;            // non-empty for failed runs
};

/// Rows ordered by (instance, param, algorithm, stream_id) whatever the
/// thread count. Replication s of every batch uses RngStream(seed, s), so
/// algorithms are compared on paired streams.
std::vector<ResultRow> run_benchmark(const ExperimentConfig& config);

/// One replication; failures become error rows.
ResultRow run_single(const Instance& instance, Setting setting, Algorithm algorithm,
                     double param, double epsilon, std::uint64_t seed, std::uint64_t stream_id,
                     RunResult* trace = nullptr);

struct Summary {
  std::string algorithm;
  std::size_t k = 0;
  std::size_t h = 0;
  std::size_t d = 0;
  double param = 0.0;
  std::size_t runs = 0;      // successful runs
  std::size_t failures = 0;  // error rows
  std::size_t errors = 0;    // successful runs with a wrong answer
  double error_rate = 0.0;
  double mean_samples = 0.0;
  double median_samples = 0.0;
  double p90_samples = 0.0;
  double mean_rounds = 0.0;
};

/// q-quantile with linear interpolation between order statistics at
/// position q (n - 1).
double quantile(std::vector<double> values, double q);

/// One summary per (algorithm, K, h, d, param) batch in first-seen order.
std::vector<Summary> aggregate(const std::vector<ResultRow>& rows);

inline constexpr const char* kResultsHeader =
    "stream_id,algorithm,K,h,d,param,total_samples,rounds,correct,recommended,wall_ms";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                       bool include_wall = true);
void write_results_json(std::ostream& out, const std::vector<ResultRow>& rows,
                        bool include_wall = true);
std::vector<ResultRow> read_results_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<Summary>& rows);
void write_summary_json(std::ostream& out, const std::vector<Summary>& rows);

std::string format_number(double v);

}  // namespace linpsi
