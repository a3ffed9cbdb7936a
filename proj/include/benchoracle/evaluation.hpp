#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "benchoracle/benchmark_matrix.hpp"
#include "benchoracle/cf_engine.hpp"
#include "benchoracle/dense_matrix.hpp"

namespace benchoracle {

// Root mean square of the residuals. Throws on an empty list.
double rmse(std::span<const double> residuals);

// rmse / (max(R) - min(R)) over the full prediction matrix R.
double normalized_rmse(double rmse_value, const DenseMatrix& predictions);

// Fully observed (A * B^T) + N(0, noise_std), A and B uniform in [0, 1],
// shifted so the minimum is non-negative.
BenchmarkMatrix generate_synthetic(std::size_t techniques, std::size_t devices,
                                   std::size_t true_rank, double noise_std,
                                   std::uint64_t seed);

enum class Execution { serial, parallel };

std::vector<double> default_missing_fractions();

struct ExperimentConfig {
  std::vector<double> missing_fractions = default_missing_fractions();
  std::size_t replications = 5;
  Hyperparams hyperparams;
  BenchmarkMatrix dataset;
  std::uint64_t base_seed = 0;
  // When false the train_seconds column is written as 0 so that repeated runs
  // produce byte-identical output.
  bool record_timing = true;
  Execution execution = Execution::parallel;

  void validate() const;
};

struct ExperimentRow {
  double missing_fraction = 0.0;
  std::size_t replication = 0;
  std::size_t target_device = 0;
  std::size_t held_out = 0;
  double rmse = 0.0;
  double normalized_rmse = 0.0;
  double train_seconds = 0.0;
  bool failed = false;
  std::string failure;
};

struct FractionSummary {
  double missing_fraction = 0.0;
  double mean_normalized_rmse = 0.0;
  double mean_rmse = 0.0;
  std::size_t valid_replications = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  // ordered by (fraction, replication)
  std::vector<FractionSummary> summary;
  std::vector<std::string> warnings;
};

// Missing-benchmark protocol: for every (fraction, replication) pick a target
// device, hide that fraction of its observed entries, train on the rest and
// score the held-out cells.
ExperimentResult run_experiment(const ExperimentConfig& config);

// One replication, exposed for tests. Throws instead of recording a failure.
ExperimentRow run_replication(const ExperimentConfig& config, double fraction,
                              std::size_t replication);

inline constexpr std::string_view kDetailHeader =
    "missing_fraction,replication,target_device,rmse,normalized_rmse,train_seconds";
inline constexpr std::string_view kSummaryHeader =
    "missing_fraction,mean_normalized_rmse,mean_rmse,valid_replications";

void write_detail_csv(const ExperimentResult& result, std::ostream& out);
void write_summary_csv(const ExperimentResult& result, std::ostream& out);

// "<stem>_summary.csv" next to the detail file.
std::string summary_path_for(const std::string& detail_path);

// Writes the detail CSV at path and the summary CSV next to it.
void emit_results(const ExperimentResult& result, const std::string& path);
ExperimentResult load_results(const std::string& path);

// "a:b:step", inclusive of b up to rounding.
std::vector<double> parse_fraction_range(std::string_view text);

double spearman_correlation(std::span<const double> x,
                            std::span<const double> y);

}  // namespace benchoracle
