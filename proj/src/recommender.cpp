#include "benchoracle/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>

#include "benchoracle/csv.hpp"
#include "benchoracle/errors.hpp"
#include "benchoracle/kernels.hpp"
#include "benchoracle/seeding.hpp"

namespace benchoracle {

namespace {

constexpr std::uint64_t kSelectStream = 0x5e1ec7;

struct Workflow {
  Subject subject;
  std::string id;
  // Index of the new row (technique) or column (device).
  std::size_t index;
};

// Shared tail of both workflows: measure the sampled counterparts, train on
// all measured entries and fill the remaining cells of the new row/column.
RecommendationReport run_workflow(StoreSnapshot& work, const Workflow& w,
                                  const std::vector<std::string>& counterparts,
                                  std::size_t k, MeasurementSource& source,
                                  const Hyperparams& params) {
  const std::size_t count = counterparts.size();
  auto cell = [&](std::size_t other) {
    return w.subject == Subject::technique ? Cell{w.index, other}
                                           : Cell{other, w.index};
  };

  RecommendationReport report;
  report.subject_kind = w.subject;
  report.subject = w.id;

  const auto sampled =
      select_benchmark_subset(count, k, derive_seed(params.seed, {kSelectStream}));
  std::vector<bool> measured(count, false);
  for (std::size_t other : sampled) {
    const std::string& label = counterparts[other];
    const auto value = w.subject == Subject::technique
                           ? source.measure(w.id, label)
                           : source.measure(label, w.id);
    if (!value || !std::isfinite(*value) || *value < 0.0) {
      throw MeasurementError("measurement unavailable for (" +
                             (w.subject == Subject::technique ? w.id : label) +
                             ", " +
                             (w.subject == Subject::technique ? label : w.id) +
                             ")");
    }
    const Cell c = cell(other);
    work.record(c.row, c.col, *value, Provenance::measured);
    measured[other] = true;
    report.measured.push_back(ReportEntry{label, *value, Provenance::measured});
  }

  if (k == count) return report;

  const BenchmarkMatrix observed = work.measured_matrix();
  const Normalizer scaler = fit_normalizer(observed);
  const TrainResult trained = train(scaler.normalize(observed), params);
  DenseMatrix predictions = kernels::parallel::reconstruct(trained.model);
  for (double& v : predictions.data()) v = scaler.denormalize(v);

  ModelDiagnostics& diag = report.diagnostics;
  diag.trained = true;
  diag.final_objective = trained.final_objective();
  diag.epochs = params.epochs;
  diag.prediction_min = predictions.min();
  diag.prediction_max = predictions.max();

  const double lo = scaler.min_observed();
  const double hi = scaler.max_observed();
  const double delta = hi - lo;
  for (std::size_t other = 0; other < count; ++other) {
    if (measured[other]) continue;
    const Cell c = cell(other);
    double value = predictions(c.row, c.col);
    const std::string& label = counterparts[other];
    if (value < lo - delta || value > hi + delta) {
      diag.warnings.push_back("prediction for " + label + " (" +
                              csv::format_double(value) +
                              ") is far outside the observed range; "
                              "training may have diverged");
    }
    if (value < 0.0) {
      diag.warnings.push_back("prediction for " + label +
                              " was negative and is stored as 0");
      value = 0.0;
    }
    work.record(c.row, c.col, value, Provenance::predicted);
    report.predicted.push_back(ReportEntry{label, value, Provenance::predicted});
  }
  return report;
}

}  // namespace

std::optional<double> TableMeasurementSource::measure(std::string_view technique,
                                                      std::string_view device) {
  auto i = table_.find_row(technique);
  auto j = table_.find_col(device);
  if (!i || !j) return std::nullopt;
  return table_.lookup(*i, *j);
}

std::vector<std::size_t> select_benchmark_subset(std::size_t count_available,
                                                 std::size_t k,
                                                 std::uint64_t seed) {
  if (k < 1 || k > count_available) {
    throw ValidationError("benchmark sample size k=" + std::to_string(k) +
                          " must lie in [1, " + std::to_string(count_available) +
                          "]");
  }
  std::vector<std::size_t> indices(count_available);
  std::iota(indices.begin(), indices.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  indices.resize(k);
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::size_t default_benchmark_count(std::size_t counterparts) {
  const auto thirty = static_cast<std::size_t>(
      std::ceil(0.3 * static_cast<double>(counterparts)));
  return std::min(counterparts, std::max<std::size_t>(3, thirty));
}

RecommendationReport add_technique(StoreSnapshot& store,
                                   const TechniqueRecord& technique,
                                   std::size_t k, MeasurementSource& source,
                                   const Hyperparams& params) {
  params.validate();
  if (store.find_technique(technique.id)) {
    throw ValidationError("technique '" + technique.id +
                          "' already exists in the ML techniques store");
  }
  const std::size_t n = store.devices().size();
  if (k < 1 || k > n) {
    throw ValidationError("k=" + std::to_string(k) + " must lie in [1, " +
                          std::to_string(n) + "] devices");
  }
  StoreSnapshot work = store;
  const std::size_t row = work.register_technique(technique);
  RecommendationReport report =
      run_workflow(work, Workflow{Subject::technique, technique.id, row},
                   work.matrix().col_labels(), k, source, params);
  store = std::move(work);
  return report;
}

RecommendationReport add_device(StoreSnapshot& store, const DeviceRecord& device,
                                std::size_t k, MeasurementSource& source,
                                const Hyperparams& params) {
  params.validate();
  if (store.find_device(device.id)) {
    throw ValidationError("device '" + device.id + "' is already registered");
  }
  const std::size_t m = store.techniques().size();
  if (k < 1 || k > m) {
    throw ValidationError("k=" + std::to_string(k) + " must lie in [1, " +
                          std::to_string(m) + "] techniques");
  }
  StoreSnapshot work = store;
  const std::size_t col = work.register_device(device);
  RecommendationReport report =
      run_workflow(work, Workflow{Subject::device, device.id, col},
                   work.matrix().row_labels(), k, source, params);
  store = std::move(work);
  return report;
}

nlohmann::ordered_json to_json(const RecommendationReport& report) {
  auto entries = [](const std::vector<ReportEntry>& list) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& e : list) {
      out.push_back({{"counterpart", e.counterpart},
                     {"value", e.value},
                     {"source", to_string(e.source)}});
    }
    return out;
  };
  const auto& d = report.diagnostics;
  return {
      {"subject_kind", report.subject_kind == Subject::technique ? "technique" : "device"},
      {"subject", report.subject},
      {"measured", entries(report.measured)},
      {"predicted", entries(report.predicted)},
      {"model_diagnostics",
       {{"trained", d.trained},
        {"final_objective", d.final_objective},
        {"epochs", d.epochs},
        {"prediction_min", d.prediction_min},
        {"prediction_max", d.prediction_max},
        {"warnings", d.warnings}}},
  };
}

void print_report_table(const RecommendationReport& report, std::ostream& out) {
  const bool technique = report.subject_kind == Subject::technique;
  out << (technique ? "technique " : "device ") << report.subject << ": "
      << report.measured.size() << " measured, " << report.predicted.size()
      << " predicted\n";
  std::size_t width = technique ? 6 : 9;
  for (const auto* list : {&report.measured, &report.predicted}) {
    for (const auto& e : *list) width = std::max(width, e.counterpart.size());
  }
  out << std::left << std::setw(static_cast<int>(width))
      << (technique ? "device" : "technique") << "  " << std::setw(14)
      << "value"
      << "source\n";
  for (const auto* list : {&report.measured, &report.predicted}) {
    for (const auto& e : *list) {
      out << std::left << std::setw(static_cast<int>(width)) << e.counterpart
          << "  " << std::setw(14) << std::setprecision(6) << e.value
          << to_string(e.source) << '\n';
    }
  }
  out << std::right;
  const auto& d = report.diagnostics;
  if (d.trained) {
    out << "model: " << d.epochs << " epochs, final objective "
        << csv::format_double(d.final_objective) << '\n';
  }
  for (const auto& w : d.warnings) out << "warning: " << w << '\n';
}

}  // namespace benchoracle
