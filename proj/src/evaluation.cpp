#include "benchoracle/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "benchoracle/csv.hpp"
#include "benchoracle/errors.hpp"
#include "benchoracle/kernels.hpp"
#include "benchoracle/seeding.hpp"

namespace benchoracle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fraction_key(double fraction) {
  return static_cast<std::uint64_t>(std::llround(fraction * 1e9));
}

double round_fraction(double value) { return std::round(value * 1e10) / 1e10; }

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k + 1;
    while (end < order.size() && values[order[end]] == values[order[k]]) ++end;
    const double rank = 0.5 * static_cast<double>(k + end - 1) + 1.0;
    for (std::size_t t = k; t < end; ++t) ranks[order[t]] = rank;
    k = end;
  }
  return ranks;
}

}  // namespace

double rmse(std::span<const double> residuals) {
  if (residuals.empty()) {
    throw ValidationError("RMSE over an empty residual set");
  }
  double sum = 0.0;
  for (double e : residuals) sum += e * e;
  return std::sqrt(sum / static_cast<double>(residuals.size()));
}

double normalized_rmse(double rmse_value, const DenseMatrix& predictions) {
  if (predictions.data().empty()) {
    throw ValidationError("normalized RMSE needs a nonempty prediction matrix");
  }
  const double spread = predictions.max() - predictions.min();
  if (!(spread > 0.0)) {
    throw ValidationError("prediction matrix is constant; normalized RMSE undefined");
  }
  return rmse_value / spread;
}

BenchmarkMatrix generate_synthetic(std::size_t techniques, std::size_t devices,
                                   std::size_t true_rank, double noise_std,
                                   std::uint64_t seed) {
  if (techniques == 0 || devices == 0) {
    throw ValidationError("synthetic matrix needs positive dimensions");
  }
  if (true_rank < 1 || true_rank > std::min(techniques, devices)) {
    throw ValidationError("true rank " + std::to_string(true_rank) +
                          " must lie in [1, min(m, n)]");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ValidationError("noise standard deviation must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> a(techniques * true_rank);
  std::vector<double> b(devices * true_rank);
  for (double& v : a) v = uniform(rng);
  for (double& v : b) v = uniform(rng);

  DenseMatrix values(techniques, devices);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < techniques; ++i) {
    for (std::size_t j = 0; j < devices; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < true_rank; ++k) {
        v += a[i * true_rank + k] * b[j * true_rank + k];
      }
      if (noise_std > 0.0) v += noise_std * noise(rng);
      values(i, j) = v;
    }
  }
  const double shift = std::min(0.0, values.min());

  BenchmarkMatrix out;
  {
    std::vector<std::string> rows, cols;
    for (std::size_t i = 0; i < techniques; ++i) rows.push_back("task_" + std::to_string(i));
    for (std::size_t j = 0; j < devices; ++j) cols.push_back("device_" + std::to_string(j));
    out = BenchmarkMatrix(std::move(rows), std::move(cols));
  }
  for (std::size_t i = 0; i < techniques; ++i) {
    for (std::size_t j = 0; j < devices; ++j) {
      out.insert(i, j, values(i, j) - shift);
    }
  }
  return out;
}

std::vector<double> default_missing_fractions() {
  return {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

void ExperimentConfig::validate() const {
  if (missing_fractions.empty()) {
    throw ValidationError("experiment needs at least one missing fraction");
  }
  for (double f : missing_fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ValidationError("missing fraction " + csv::format_double(f) +
                            " must lie strictly between 0 and 1");
    }
  }
  if (replications < 1) {
    throw ValidationError("replications must be at least 1");
  }
  hyperparams.validate();
  std::size_t observed_cols = 0;
  std::set<std::size_t> cols;
  for (const auto& [cell, value] : dataset.entries()) cols.insert(cell.col);
  observed_cols = cols.size();
  if (observed_cols < 2) {
    throw ValidationError("dataset needs at least two devices with observed entries");
  }
}

ExperimentRow run_replication(const ExperimentConfig& config, double fraction,
                              std::size_t replication) {
  const BenchmarkMatrix& data = config.dataset;
  const std::uint64_t key = fraction_key(fraction);

  std::vector<std::size_t> candidates;
  {
    std::set<std::size_t> cols;
    for (const auto& [cell, value] : data.entries()) cols.insert(cell.col);
    candidates.assign(cols.begin(), cols.end());
  }
  std::mt19937_64 pick(derive_seed(config.base_seed, {key, replication, 1}));
  std::uniform_int_distribution<std::size_t> which(0, candidates.size() - 1);
  const std::size_t target = candidates[which(pick)];

  MaskResult mask = apply_mask(data, target, fraction,
                               derive_seed(config.base_seed, {key, replication, 2}));
  if (mask.held_out.empty()) {
    throw ValidationError("missing fraction " + csv::format_double(fraction) +
                          " holds out no entries of device '" +
                          data.col_labels()[target] + "'; empty evaluation");
  }
  if (mask.masked.empty()) {
    throw ValidationError("masking left no observed entries to train on");
  }

  const Normalizer scaler = fit_normalizer(mask.masked);
  const BenchmarkMatrix training = scaler.normalize(mask.masked);
  Hyperparams params = config.hyperparams;
  params.seed = derive_seed(config.base_seed, {key, replication, 3});

  const auto start = std::chrono::steady_clock::now();
  const TrainResult trained = train(training, params, TrainOptions{100});
  const auto stop = std::chrono::steady_clock::now();

  DenseMatrix predictions = kernels::serial::reconstruct(trained.model);
  for (double& v : predictions.data()) v = scaler.denormalize(v);

  std::vector<double> residuals;
  residuals.reserve(mask.held_out.size());
  for (const HeldOutEntry& entry : mask.held_out) {
    residuals.push_back(entry.value - predictions(entry.row, target));
  }

  ExperimentRow row;
  row.missing_fraction = fraction;
  row.replication = replication;
  row.target_device = target;
  row.held_out = mask.held_out.size();
  row.rmse = rmse(residuals);
  row.normalized_rmse = normalized_rmse(row.rmse, predictions);
  row.train_seconds =
      config.record_timing
          ? std::chrono::duration<double>(stop - start).count()
          : 0.0;
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = config.replications;
  const std::size_t tasks = config.missing_fractions.size() * reps;
  ExperimentResult result;
  result.rows.resize(tasks);

  // Fail fast on an empty evaluation rather than burning every replication.
  for (double f : config.missing_fractions) {
    bool any = false;
    for (std::size_t j = 0; j < config.dataset.cols() && !any; ++j) {
      const auto observed = config.dataset.observed_rows_in_col(j).size();
      any = std::llround(f * static_cast<double>(observed)) > 0;
    }
    if (!any) {
      throw ValidationError("missing fraction " + csv::format_double(f) +
                            " holds out no entries on any device; empty evaluation");
    }
  }

  auto run_task = [&](std::size_t t) {
    const double f = config.missing_fractions[t / reps];
    const std::size_t rep = t % reps;
    try {
      result.rows[t] = run_replication(config, f, rep);
    } catch (const Error& e) {
      ExperimentRow row;
      row.missing_fraction = f;
      row.replication = rep;
      row.rmse = kNaN;
      row.normalized_rmse = kNaN;
      row.failed = true;
      row.failure = e.what();
      result.rows[t] = row;
    }
  };

  if (config.execution == Execution::parallel) {
    const auto count = static_cast<std::int64_t>(tasks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = 0; t < count; ++t) run_task(static_cast<std::size_t>(t));
  } else {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  }

  for (std::size_t fi = 0; fi < config.missing_fractions.size(); ++fi) {
    FractionSummary summary;
    summary.missing_fraction = config.missing_fractions[fi];
    double sum_norm = 0.0, sum_rmse = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const ExperimentRow& row = result.rows[fi * reps + rep];
      if (row.failed) {
        result.warnings.push_back(
            "fraction " + csv::format_double(row.missing_fraction) +
            " replication " + std::to_string(rep) +
            " excluded from means: " + row.failure);
        continue;
      }
      sum_norm += row.normalized_rmse;
      sum_rmse += row.rmse;
      ++summary.valid_replications;
    }
    if (summary.valid_replications > 0) {
      const auto n = static_cast<double>(summary.valid_replications);
      summary.mean_normalized_rmse = sum_norm / n;
      summary.mean_rmse = sum_rmse / n;
    } else {
      summary.mean_normalized_rmse = kNaN;
      summary.mean_rmse = kNaN;
    }
    result.summary.push_back(summary);
  }
  return result;
}

void write_detail_csv(const ExperimentResult& result, std::ostream& out) {
  out << kDetailHeader << '\n';
  for (const ExperimentRow& row : result.rows) {
    out << csv::format_double(row.missing_fraction) << ',' << row.replication
        << ',' << row.target_device << ',' << csv::format_double(row.rmse)
        << ',' << csv::format_double(row.normalized_rmse) << ','
        << csv::format_double(row.train_seconds) << '\n';
  }
}

void write_summary_csv(const ExperimentResult& result, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const FractionSummary& s : result.summary) {
    out << csv::format_double(s.missing_fraction) << ','
        << csv::format_double(s.mean_normalized_rmse) << ','
        << csv::format_double(s.mean_rmse) << ',' << s.valid_replications
        << '\n';
  }
}

std::string summary_path_for(const std::string& detail_path) {
  std::filesystem::path p(detail_path);
  std::string stem = p.stem().string();
  std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (stem + "_summary" + ext)).string();
}

void emit_results(const ExperimentResult& result, const std::string& path) {
  if (result.rows.empty()) {
    throw ValidationError("refusing to emit an empty experiment result");
  }
  auto write = [](const std::string& file, auto&& writer) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write '" + file + "'");
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + file + "'");
  };
  write(path, [&](std::ostream& o) { write_detail_csv(result, o); });
  write(summary_path_for(path),
        [&](std::ostream& o) { write_summary_csv(result, o); });
}

ExperimentResult load_results(const std::string& path) {
  auto read_table = [](const std::string& file, std::string_view header,
                       std::size_t width) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file + "'");
    std::string line;
    std::size_t line_number = 0;
    if (!csv::next_line(in, line, line_number) || line != header) {
      throw CsvError("unexpected header in '" + file + "'", line_number, 0);
    }
    std::vector<std::vector<double>> rows;
    while (csv::next_line(in, line, line_number)) {
      auto fields = csv::split_record(line);
      if (fields.size() != width) {
        throw CsvError("ragged row in '" + file + "'", line_number, 0);
      }
      std::vector<double> values;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        auto v = csv::parse_double(fields[c]);
        if (!v) throw CsvError("bad number in '" + file + "'", line_number, c + 1);
        values.push_back(*v);
      }
      rows.push_back(std::move(values));
    }
    return rows;
  };

  ExperimentResult result;
  for (const auto& v : read_table(path, kDetailHeader, 6)) {
    ExperimentRow row;
    row.missing_fraction = v[0];
    row.replication = static_cast<std::size_t>(v[1]);
    row.target_device = static_cast<std::size_t>(v[2]);
    row.rmse = v[3];
    row.normalized_rmse = v[4];
    row.train_seconds = v[5];
    row.failed = std::isnan(row.rmse);
    result.rows.push_back(row);
  }
  for (const auto& v : read_table(summary_path_for(path), kSummaryHeader, 4)) {
    result.summary.push_back(FractionSummary{
        v[0], v[1], v[2], static_cast<std::size_t>(v[3])});
  }
  return result;
}

std::vector<double> parse_fraction_range(std::string_view text) {
  std::vector<std::string> parts;
  {
    std::string part;
    for (char c : text) {
      if (c == ':') {
        parts.push_back(part);
        part.clear();
      } else {
        part.push_back(c);
      }
    }
    parts.push_back(part);
  }
  std::vector<double> values;
  for (const auto& p : parts) {
    auto v = csv::parse_double(p);
    if (!v) {
      throw ValidationError("bad fraction range '" + std::string(text) +
                            "'; expected a:b:step or a single value");
    }
    values.push_back(*v);
  }
  if (values.size() == 1) return values;
  if (values.size() != 3 || !(values[2] > 0.0) || values[1] < values[0]) {
    throw ValidationError("bad fraction range '" + std::string(text) +
                          "'; expected a:b:step with a <= b and step > 0");
  }
  std::vector<double> out;
  const double eps = values[2] * 1e-6;
  for (std::size_t k = 0;; ++k) {
    const double f = values[0] + static_cast<double>(k) * values[2];
    if (f > values[1] + eps) break;
    out.push_back(round_fraction(f));
  }
  return out;
}

double spearman_correlation(std::span<const double> x,
                            std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("Spearman correlation needs two equal-length series");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    sxy += (rx[k] - mx) * (ry[k] - my);
    sxx += (rx[k] - mx) * (rx[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace benchoracle
