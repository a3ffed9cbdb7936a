#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "benchoracle/benchmark_matrix.hpp"
#include "benchoracle/cf_engine.hpp"
#include "benchoracle/knowledge_base.hpp"

namespace benchoracle {

// Stand-in for actually running a benchmark. Returns nullopt when the pair
// cannot be measured.
class MeasurementSource {
 public:
  virtual ~MeasurementSource() = default;
  virtual std::optional<double> measure(std::string_view technique,
                                        std::string_view device) = 0;
};

// Looks measurements up by label in a reference table.
class TableMeasurementSource : public MeasurementSource {
 public:
  explicit TableMeasurementSource(BenchmarkMatrix table)
      : table_(std::move(table)) {}

  std::optional<double> measure(std::string_view technique,
                                std::string_view device) override;

 private:
  BenchmarkMatrix table_;
};

class FunctionMeasurementSource : public MeasurementSource {
 public:
  using Fn = std::function<std::optional<double>(std::string_view, std::string_view)>;
  explicit FunctionMeasurementSource(Fn fn) : fn_(std::move(fn)) {}

  std::optional<double> measure(std::string_view technique,
                                std::string_view device) override {
    return fn_(technique, device);
  }

 private:
  Fn fn_;
};

enum class Subject { technique, device };

struct ReportEntry {
  std::string counterpart;
  double value = 0.0;
  Provenance source = Provenance::measured;
};

struct ModelDiagnostics {
  bool trained = false;
  double final_objective = 0.0;
  std::size_t epochs = 0;
  // Range of the full denormalized prediction matrix.
  double prediction_min = 0.0;
  double prediction_max = 0.0;
  std::vector<std::string> warnings;
};

struct RecommendationReport {
  Subject subject_kind = Subject::technique;
  std::string subject;
  std::vector<ReportEntry> measured;
  std::vector<ReportEntry> predicted;
  ModelDiagnostics diagnostics;
};

nlohmann::ordered_json to_json(const RecommendationReport& report);
void print_report_table(const RecommendationReport& report, std::ostream& out);

// k distinct indices in [0, count), sorted, deterministic per seed.
std::vector<std::size_t> select_benchmark_subset(std::size_t count_available,
                                                 std::size_t k,
                                                 std::uint64_t seed);

// max(3, ceil(0.3 * counterparts)), capped at the counterpart count.
std::size_t default_benchmark_count(std::size_t counterparts);

// Registers a new technique, measures it on k randomly chosen devices, trains
// on every measured entry and stores predictions for the rest of its row.
// The store is left untouched if any step fails.
RecommendationReport add_technique(StoreSnapshot& store,
                                   const TechniqueRecord& technique,
                                   std::size_t k, MeasurementSource& source,
                                   const Hyperparams& params);

// Column-wise counterpart of add_technique.
RecommendationReport add_device(StoreSnapshot& store, const DeviceRecord& device,
                                std::size_t k, MeasurementSource& source,
                                const Hyperparams& params);

}  // namespace benchoracle
