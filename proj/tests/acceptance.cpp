// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "benchoracle/cf_engine.hpp"
#include "benchoracle/errors.hpp"
#include "benchoracle/evaluation.hpp"
#include "benchoracle/intent.hpp"
#include "benchoracle/kernels.hpp"
#include "benchoracle/knowledge_base.hpp"
#include "benchoracle/recommender.hpp"
#include "oracles.hpp"

using namespace benchoracle;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Verdict gradient_check() {
  const auto start = Clock::now();
  const Hyperparams defaults;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (std::size_t rank : {1u, 5u, 10u}) {
    const int count = rank == 10 ? 34 : 33;
    for (int c = 0; c < count; ++c, ++cases) {
      std::vector<double> p(rank), q(rank);
      for (auto& v : p) v = u(rng);
      for (auto& v : q) v = u(rng);
      const double observed = 1.5 * u(rng) + 1.0;
      const double lambda = c % 3 == 0 ? defaults.regularization : 0.1 * (u(rng) + 1.0);

      FactorModel m(1, 1, rank, 0);
      std::copy(p.begin(), p.end(), m.technique_data().begin());
      std::copy(q.begin(), q.end(), m.device_data().begin());
      sgd_update(m, 0, 0, observed, defaults.learning_rate, lambda);
      const auto g = oracle::finite_difference_gradient(q, p, observed, lambda, 1e-6);

      double diff = 0.0, norm = 0.0;
      for (std::size_t k = 0; k < rank; ++k) {
        const double dq = (m.device_data()[k] - q[k]) / defaults.learning_rate;
        const double dp = (m.technique_data()[k] - p[k]) / defaults.learning_rate;
        diff += std::pow(dq + 0.5 * g.dq[k], 2) + std::pow(dp + 0.5 * g.dp[k], 2);
        norm += std::pow(0.5 * g.dq[k], 2) + std::pow(0.5 * g.dp[k], 2);
      }
      worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12));
    }
  }
  const double t = seconds_since(start);
  return {cases == 100 && worst <= 1e-5 && t < 1.0,
          fmt("%d cases, max relative error %.3g, %.3f s", cases, worst, t)};
}

Verdict low_rank_recovery() {
  const auto start = Clock::now();
  const BenchmarkMatrix raw = generate_synthetic(10, 10, 2, 0.0, 0);
  const Normalizer scaler = fit_normalizer(raw);
  const BenchmarkMatrix normalized = scaler.normalize(raw);
  const TrainResult result = train(normalized, Hyperparams{});
  const DenseMatrix pred = kernels::serial::reconstruct(result.model);
  std::vector<double> residuals;
  for (const auto& [cell, value] : normalized.entries())
    residuals.push_back(value - pred(cell.row, cell.col));
  const double err = rmse(residuals);
  const double t = seconds_since(start);
  return {err < 1e-2 && t < 5.0, fmt("RMSE %.3g on normalized scale, %.2f s", err, t)};
}

ExperimentConfig paper_scale_config(std::uint64_t base_seed) {
  ExperimentConfig cfg;
  const double range = fit_normalizer(generate_synthetic(42, 192, 10, 0.0, base_seed)).range();
  cfg.dataset = generate_synthetic(42, 192, 10, 0.01 * range, base_seed);
  cfg.base_seed = base_seed;
  cfg.record_timing = false;
  return cfg;
}

std::vector<ExperimentResult> experiment_runs;
double experiment_seconds = 0.0;

Verdict paper_scale_experiment() {
  const auto start = Clock::now();
  std::string detail;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    experiment_runs.push_back(run_experiment(paper_scale_config(seed)));
    const auto& s = experiment_runs.back().summary;
    const double lo = s.front().mean_normalized_rmse;
    const double hi = s.back().mean_normalized_rmse;
    ok = ok && lo <= 0.05 && hi > lo;
    for (const auto& w : experiment_runs.back().warnings) detail += "[" + w + "] ";
    detail += fmt("seed %d: %.4f at %.1f, %.4f at %.1f; ", int(seed), lo,
                  s.front().missing_fraction, hi, s.back().missing_fraction);
  }
  experiment_seconds = seconds_since(start);
  return {ok && experiment_seconds < 300.0, detail + fmt("%.1f s total", experiment_seconds)};
}

Verdict monotone_trend() {
  if (experiment_runs.size() != 3) return {false, "criterion 3 did not complete"};
  std::string detail;
  bool ok = true;
  for (std::size_t seed = 0; seed < 3; ++seed) {
    std::vector<double> fractions, means;
    for (const auto& s : experiment_runs[seed].summary) {
      fractions.push_back(s.missing_fraction);
      means.push_back(s.mean_normalized_rmse);
    }
    const double rho = spearman_correlation(fractions, means);
    ok = ok && fractions.size() == 7 && rho >= 0.8;
    detail += fmt("seed %d rho %.3f; ", int(seed), rho);
  }
  return {ok, detail};
}

// Expected JSON is assembled here independently of the serializer.
std::string device_json(const std::string& d, const std::string& dom) {
  return R"({"intent_name": "adding device", "device": ")" + d + R"(", "domain": ")" + dom + "\"}";
}
std::string technique_json(const std::string& t, const std::string& type) {
  return R"({"intent_name": "adding ML-technique", "ML-technique": ")" + t +
         R"(", "ML-technique_type": ")" + type + "\"}";
}

Verdict intent_conformance() {
  struct Case {
    std::string text;
    std::string expected;
  };
  std::vector<Case> corpus{
      {"add device device_id to domain domain_id", device_json("device_id", "domain_id")},
      {"add ML-technique MobileNet-V2-threat_1 to ML-technique type threat-detection",
       technique_json("MobileNet-V2-threat_1", "threat-detection")},
      {"add device edge_100 to domain warehouse_5", device_json("edge_100", "warehouse_5")},
      {"add ML-technique MobileNet-V2 to ML-technique type threat-detection",
       technique_json("MobileNet-V2", "threat-detection")},
  };
  const std::vector<std::string> devices{"edge_1", "Jetson-Nano", "rpi4.b", "gpu_node_07"};
  const std::vector<std::string> domains{"warehouse_1", "factory-floor", "Lab_A", "zone.9"};
  const std::vector<std::string> techniques{"Inception-V3", "VGG-19", "ResNet_50", "yolo.v5s"};
  const std::vector<std::string> types{"classification", "object-detection", "NLP_qa",
                                       "threat-detection"};
  const std::vector<std::string> device_forms{"add device {0} to domain {1}",
                                             "ADD Device {0} TO domain {1}",
                                             "  add   device {0}\tto domain {1}  ",
                                             "Add DEVICE {0} to Domain {1}"};
  const std::vector<std::string> technique_forms{
      "add ML-technique {0} to ML-technique type {1}", "ADD ml-technique {0} TO ml-TECHNIQUE TYPE {1}",
      "\tadd ML-technique  {0} to ML-technique type {1}\n", "Add Ml-Technique {0} To Ml-Technique Type {1}"};
  auto fill = [](std::string form, const std::string& a, const std::string& b) {
    form.replace(form.find("{0}"), 3, a);
    form.replace(form.find("{1}"), 3, b);
    return form;
  };
  for (std::size_t k = 0; k < 8; ++k) {
    corpus.push_back({fill(device_forms[k % 4], devices[k % 4], domains[(k + 1) % 4]),
                      device_json(devices[k % 4], domains[(k + 1) % 4])});
    corpus.push_back({fill(technique_forms[k % 4], techniques[k % 4], types[(k + 2) % 4]),
                      technique_json(techniques[k % 4], types[(k + 2) % 4])});
  }

  std::size_t correct = 0;
  std::string first_miss;
  for (const auto& c : corpus) {
    std::string got;
    try {
      got = to_structured_json(parse_intent(c.text));
    } catch (const std::exception& e) {
      got = e.what();
    }
    if (got == c.expected) ++correct;
    else if (first_miss.empty()) first_miss = " first miss: '" + c.text + "' -> " + got;
  }

  const std::vector<std::string> malformed{
      "",
      "   ",
      "remove device edge_1 from domain w1",
      "add router r1 to domain w1",
      "add device edge_1 into domain w1",
      "please add device edge_1 to domain w1 now",
      "add device edge_1 to domain w1 and reboot",
      "deploy ML-technique VGG-19 to ML-technique type detection",
      "add ML-technique VGG-19 to type detection extra words",
      "12345"};
  std::size_t rejected = 0;
  for (const auto& text : malformed) {
    try {
      parse_intent(text);
    } catch (const IntentParseError& e) {
      if (e.kind() == IntentParseError::Kind::no_template_match) ++rejected;
    } catch (...) {
    }
  }
  return {corpus.size() == 20 && correct == 20 && rejected == malformed.size(),
          fmt("%zu/%zu parsed exactly, %zu/%zu malformed rejected", correct, corpus.size(),
              rejected, malformed.size()) +
              first_miss};
}

Verdict workflow_integrity() {
  // Instance fixed before evaluation: generator seed 0, default hyperparameters.
  const BenchmarkMatrix truth = generate_synthetic(30, 16, 3, 0.0, 0);
  std::vector<std::string> cols(truth.col_labels().begin(), truth.col_labels().end() - 1);
  BenchmarkMatrix block(truth.row_labels(), cols);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 15; ++j) block.insert(i, j, *truth.lookup(i, j));
  StoreSnapshot store = StoreSnapshot::from_matrix(block, "classification", "lab");
  const StoreSnapshot before = store;

  TableMeasurementSource source(truth);
  const RecommendationReport r =
      add_device(store, {truth.col_labels().back(), "warehouse_5", true}, 5, source, {});

  std::vector<double> residuals;
  for (const auto& e : r.predicted)
    residuals.push_back(*truth.lookup(*truth.find_row(e.counterpart), 15) - e.value);
  const double nrmse =
      rmse(residuals) / (r.diagnostics.prediction_max - r.diagnostics.prediction_min);

  std::size_t identical = 0;
  for (const auto& [cell, value] : before.matrix().entries()) {
    const auto now = store.matrix().lookup(cell.row, cell.col);
    if (now && std::memcmp(&*now, &value, sizeof value) == 0 &&
        store.entry(cell.row, cell.col)->provenance == Provenance::measured)
      ++identical;
  }
  return {residuals.size() == 25 && nrmse < 0.05 && identical == 450,
          fmt("held-out normalized RMSE %.4f over %zu entries, %zu/450 entries unchanged", nrmse,
              residuals.size(), identical)};
}

std::string detail_csv(const ExperimentResult& r) {
  std::ostringstream s;
  write_detail_csv(r, s);
  return s.str();
}

Verdict determinism() {
  if (experiment_runs.empty()) return {false, "criterion 3 did not complete"};
  const std::string first = detail_csv(experiment_runs.front());
  const std::string second = detail_csv(run_experiment(paper_scale_config(0)));
  return {first == second && !first.empty(),
          fmt("base seed 0 rerun: %zu bytes, %s", first.size(),
              first == second ? "identical" : "different")};
}

Verdict persistence() {
  const BenchmarkMatrix m = generate_synthetic(42, 192, 10, 0.0, 8);
  StoreSnapshot store;
  for (const auto& t : m.row_labels()) store.register_technique({t, "classification", "t0"});
  for (std::size_t j = 0; j < m.cols(); ++j)
    store.register_device({m.col_labels()[j], "warehouse_5", j % 5 != 0});
  for (const auto& [cell, value] : m.entries())
    store.record(cell.row, cell.col, value,
                 (cell.row * 7 + cell.col) % 3 == 0 ? Provenance::predicted : Provenance::measured);

  const std::string path = oracle::temp_path("acceptance_store.json");
  save_store(store, path);
  const bool equal = load_store(path) == store;

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size * 2 / 3);
  std::string outcome = "loaded";
  bool clean = false;
  try {
    load_store(path);
  } catch (const IoError& e) {
    clean = true;
    outcome = e.what();
  } catch (const std::exception& e) {
    outcome = std::string("unexpected exception: ") + e.what();
  }
  std::filesystem::remove(path);
  return {equal && clean, fmt("roundtrip %s (%ju bytes); truncated load: ",
                              equal ? "equal" : "DIFFERS", std::uintmax_t(size)) + outcome};
}

}  // namespace

int main() {
  report(1, "gradient correctness", gradient_check);
  report(2, "low-rank recovery", low_rank_recovery);
  report(3, "42x192 experiment", paper_scale_experiment);
  report(4, "monotone trend", monotone_trend);
  report(5, "intent conformance", intent_conformance);
  report(6, "workflow integrity", workflow_integrity);
  report(7, "determinism", determinism);
  report(8, "persistence", persistence);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
