#include "benchoracle/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "benchoracle/benchmark_matrix.hpp"
#include "benchoracle/cf_engine.hpp"
#include "benchoracle/csv.hpp"
#include "benchoracle/evaluation.hpp"
#include "benchoracle/intent.hpp"
#include "benchoracle/knowledge_base.hpp"
#include "benchoracle/recommender.hpp"

namespace benchoracle::cli {

namespace {

enum class Format { table, json, csv };

struct Config {
  std::string store_path;
  std::uint64_t seed = 0;
  std::optional<std::size_t> rank;
  std::optional<double> lr;
  std::optional<double> reg;
  std::optional<std::size_t> epochs;
  Format format = Format::table;

  Hyperparams hyperparams() const {
    Hyperparams p;
    if (rank) p.rank = *rank;
    if (lr) p.learning_rate = *lr;
    if (reg) p.regularization = *reg;
    if (epochs) p.epochs = *epochs;
    p.seed = seed;
    p.validate();
    return p;
  }
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

std::pair<std::size_t, std::size_t> parse_shape(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) {
    throw ValidationError("shape '" + text + "' must look like 42x192");
  }
  auto m = csv::parse_double(text.substr(0, x));
  auto n = csv::parse_double(text.substr(x + 1));
  if (!m || !n || *m < 1 || *n < 1 || *m != std::floor(*m) || *n != std::floor(*n)) {
    throw ValidationError("shape '" + text + "' must look like 42x192");
  }
  return {static_cast<std::size_t>(*m), static_cast<std::size_t>(*n)};
}

// Noise is given relative to the value range of the noise-free matrix.
BenchmarkMatrix synthetic_dataset(const std::string& shape, std::size_t true_rank,
                                  double relative_noise, std::uint64_t seed) {
  auto [m, n] = parse_shape(shape);
  const double range = fit_normalizer(generate_synthetic(m, n, true_rank, 0.0, seed)).range();
  return generate_synthetic(m, n, true_rank, relative_noise * range, seed);
}

std::unique_ptr<MeasurementSource> measurement_source(const std::string& path) {
  if (path.empty()) {
    return std::make_unique<FunctionMeasurementSource>(
        [](std::string_view, std::string_view) -> std::optional<double> {
          return std::nullopt;
        });
  }
  return std::make_unique<TableMeasurementSource>(ingest_csv_file(path));
}

void print_report(const RecommendationReport& report, Format format, std::ostream& out) {
  if (format == Format::json) {
    out << to_json(report).dump(2) << '\n';
  } else if (format == Format::csv) {
    out << "counterpart,value,source\n";
    for (const auto* list : {&report.measured, &report.predicted}) {
      for (const auto& e : *list) {
        out << csv::escape_field(e.counterpart) << ',' << csv::format_double(e.value)
            << ',' << to_string(e.source) << '\n';
      }
    }
  } else {
    print_report_table(report, out);
  }
}

int cmd_ingest(const Config& cfg, const std::string& csv_path, Streams io) {
  BenchmarkMatrix matrix = ingest_csv_file(csv_path);
  const std::size_t m = matrix.rows(), n = matrix.cols(), s = matrix.observed_count();
  save_store(StoreSnapshot::from_matrix(std::move(matrix)), cfg.store_path);
  io.out << "ingested " << m << " techniques × " << n << " devices, " << s
         << " observed\n";
  return kOk;
}

struct WorkflowFlags {
  std::optional<std::size_t> k;
  std::string measurements;
  bool unreachable = false;
};

RecommendationReport run_add_device(StoreSnapshot& store, const Config& cfg,
                                    const WorkflowFlags& flags, DeviceRecord record) {
  auto source = measurement_source(flags.measurements);
  const std::size_t k = flags.k.value_or(default_benchmark_count(store.techniques().size()));
  return add_device(store, record, k, *source, cfg.hyperparams());
}

RecommendationReport run_add_technique(StoreSnapshot& store, const Config& cfg,
                                       const WorkflowFlags& flags, TechniqueRecord record) {
  auto source = measurement_source(flags.measurements);
  const std::size_t k = flags.k.value_or(default_benchmark_count(store.devices().size()));
  return add_technique(store, record, k, *source, cfg.hyperparams());
}

// Parse, check policies, run the workflow and persist. Returns an exit code.
int handle_intent_line(const Config& cfg, const WorkflowFlags& flags,
                       const std::string& text, Streams io) {
  const StructuredIntent intent = parse_intent(text);
  const std::string intent_json = to_structured_json(intent);

  StoreSnapshot store = load_store(cfg.store_path);
  std::optional<RecommendationReport> report;
  RecordConnectivityProber prober(store, !flags.unreachable);
  const PolicyOutcome outcome = configure_policies(
      intent, store, prober, [&](const StructuredIntent& triggered) {
        StoreSnapshot work = store;
        if (const auto* d = std::get_if<AddDevice>(&triggered)) {
          report = run_add_device(work, cfg, flags,
                                  DeviceRecord{d->device, d->domain, !flags.unreachable});
        } else {
          const auto& t = std::get<AddTechnique>(triggered);
          report = run_add_technique(work, cfg, flags,
                                     TechniqueRecord{t.technique, t.technique_type,
                                                     current_timestamp()});
        }
        save_store(work, cfg.store_path);
      });

  if (cfg.format == Format::json) {
    nlohmann::ordered_json doc;
    doc["intent"] = nlohmann::ordered_json::parse(intent_json);
    doc["policy"] = nlohmann::ordered_json::parse(to_json(outcome));
    if (report) doc["report"] = to_json(*report);
    io.out << doc.dump(2) << '\n';
  } else {
    io.out << intent_json << '\n';
    for (const auto& c : outcome.checks) {
      io.out << (c.passed ? "[pass] " : "[FAIL] ") << c.name << ": " << c.message << '\n';
    }
    if (report) print_report(*report, cfg.format, io.out);
  }
  for (const auto& alert : outcome.alerts) io.err << "alert: " << alert << '\n';
  return outcome.all_passed() ? kOk : kPolicy;
}

int report_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (const auto* p = dynamic_cast<const IntentParseError*>(&e); p && !p->hint().empty()) {
    err << "hint: " << p->hint() << '\n';
  }
  return exit_code_for(e.category());
}

int cmd_intent(const Config& cfg, const WorkflowFlags& flags,
               const std::optional<std::string>& text, Streams io) {
  if (text) return handle_intent_line(cfg, flags, *text, io);
  // REPL: one intent per line until EOF; errors are reported and skipped.
  int last = kOk;
  std::string line;
  while (std::getline(io.in, line)) {
    if (csv::trim(line).empty()) continue;
    try {
      last = handle_intent_line(cfg, flags, line, io);
    } catch (const Error& e) {
      last = report_error(e, io.err);
    }
  }
  return last;
}

int cmd_predict(const Config& cfg, const std::string& technique,
                const std::string& device, Streams io) {
  const StoreSnapshot store = load_store(cfg.store_path);
  const auto i = store.technique_index(technique);
  if (!i) {
    throw ValidationError("unknown technique '" + technique + "' (store has " +
                          std::to_string(store.techniques().size()) + " techniques)");
  }
  const auto j = store.device_index(device);
  if (!j) {
    throw ValidationError("unknown device '" + device + "' (store has " +
                          std::to_string(store.devices().size()) + " devices)");
  }
  const auto entry = store.entry(*i, *j);
  if (!entry) {
    throw ValidationError("no benchmark stored for (" + technique + ", " + device + ")");
  }
  const std::string value = csv::format_double(entry->value);
  const std::string_view source = to_string(entry->provenance);
  switch (cfg.format) {
    case Format::json:
      io.out << nlohmann::ordered_json{{"technique", technique},
                                       {"device", device},
                                       {"value", entry->value},
                                       {"provenance", source}}
                    .dump()
             << '\n';
      break;
    case Format::csv:
      io.out << "technique,device,value,provenance\n"
             << csv::escape_field(technique) << ',' << csv::escape_field(device) << ','
             << value << ',' << source << '\n';
      break;
    case Format::table:
      io.out << technique << " on " << device << ": " << value << " (" << source << ")\n";
      break;
  }
  return kOk;
}

struct ExperimentFlags {
  std::string synthetic;
  std::string csv_path;
  std::optional<std::size_t> true_rank;
  double noise = 0.01;
  std::string fractions = "0.3:0.9:0.1";
  std::size_t reps = 5;
  std::string out = "experiment.csv";
  bool no_timing = false;
  bool serial = false;
};

int cmd_experiment(const Config& cfg, const ExperimentFlags& flags, Streams io) {
  ExperimentConfig config;
  config.hyperparams = cfg.hyperparams();
  config.missing_fractions = parse_fraction_range(flags.fractions);
  config.replications = flags.reps;
  config.base_seed = cfg.seed;
  config.record_timing = !flags.no_timing;
  config.execution = flags.serial ? Execution::serial : Execution::parallel;
  if (!flags.csv_path.empty()) {
    config.dataset = ingest_csv_file(flags.csv_path);
  } else {
    const std::string shape = flags.synthetic.empty() ? "42x192" : flags.synthetic;
    config.dataset = synthetic_dataset(shape, flags.true_rank.value_or(config.hyperparams.rank),
                                       flags.noise, cfg.seed);
  }
  config.validate();

  const ExperimentResult result = run_experiment(config);
  emit_results(result, flags.out);

  if (cfg.format == Format::json) {
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (const auto& s : result.summary) {
      summary.push_back({{"missing_fraction", s.missing_fraction},
                         {"mean_normalized_rmse", s.mean_normalized_rmse},
                         {"mean_rmse", s.mean_rmse},
                         {"valid_replications", s.valid_replications}});
    }
    io.out << summary.dump(2) << '\n';
  } else if (cfg.format == Format::csv) {
    write_summary_csv(result, io.out);
  } else {
    io.out << "missing_fraction  mean_normalized_rmse  mean_rmse     replications\n";
    for (const auto& s : result.summary) {
      io.out << std::fixed << std::setprecision(2) << std::setw(16) << s.missing_fraction
             << std::setprecision(6) << std::setw(22) << s.mean_normalized_rmse
             << std::setw(11) << s.mean_rmse << std::setw(15) << s.valid_replications
             << '\n';
    }
    io.out.unsetf(std::ios::floatfield);
    io.out << "detail: " << flags.out << "\nsummary: " << summary_path_for(flags.out) << '\n';
  }
  for (const auto& w : result.warnings) io.err << "warning: " << w << '\n';
  const bool any_failed = std::any_of(result.rows.begin(), result.rows.end(),
                                      [](const ExperimentRow& r) { return r.failed; });
  return any_failed ? kDivergence : kOk;
}

struct GenerateFlags {
  std::string synthetic = "42x192";
  std::optional<std::size_t> true_rank;
  double noise = 0.0;
  std::string out;
};

int cmd_generate(const Config& cfg, const GenerateFlags& flags, Streams io) {
  const BenchmarkMatrix matrix = synthetic_dataset(
      flags.synthetic, flags.true_rank.value_or(cfg.rank.value_or(Hyperparams{}.rank)),
      flags.noise, cfg.seed);
  if (flags.out.empty() || flags.out == "-") {
    export_csv(matrix, io.out);
    return kOk;
  }
  std::ofstream file(flags.out, std::ios::binary);
  if (!file) throw IoError("cannot write '" + flags.out + "'");
  export_csv(matrix, file);
  if (!file.flush()) throw IoError("failed writing '" + flags.out + "'");
  io.out << "wrote " << matrix.rows() << "x" << matrix.cols() << " synthetic matrix to "
         << flags.out << '\n';
  return kOk;
}

}  // namespace

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::validation: return kUsage;
    case ErrorCategory::parse: return kParse;
    case ErrorCategory::policy: return kPolicy;
    case ErrorCategory::io: return kIo;
    case ErrorCategory::divergence: return kDivergence;
    case ErrorCategory::measurement: return kMeasurement;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Streams io{in, out, err};
  Config cfg;
  if (const char* env = std::getenv("BENCH_ORACLE_STORE"); env && *env) {
    cfg.store_path = env;
  } else {
    cfg.store_path = "benchoracle_store.json";
  }

  CLI::App app{"Benchmark prediction for ML techniques on heterogeneous devices", "bench_oracle"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--store", cfg.store_path, "Store file (default $BENCH_ORACLE_STORE)");
  app.add_option("--seed", cfg.seed, "Seed for every randomized step");
  app.add_option("--rank", cfg.rank, "Latent factors");
  app.add_option("--lr", cfg.lr, "SGD learning rate");
  app.add_option("--reg", cfg.reg, "Regularization factor");
  app.add_option("--epochs", cfg.epochs, "Passes over the observed entries");
  app.add_option("--format", cfg.format, "Output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{
              {"table", Format::table}, {"json", Format::json}, {"csv", Format::csv}},
          CLI::ignore_case));

  std::string csv_path;
  auto* ingest = app.add_subcommand("ingest", "Load a benchmark CSV into the store");
  ingest->add_option("csv", csv_path, "CSV file")->required();

  WorkflowFlags wf;
  std::optional<std::string> intent_text;
  auto* intent = app.add_subcommand("intent", "Handle an intent (REPL when no text given)");
  intent->add_option("text", intent_text, "Intent text");
  auto add_workflow_flags = [&](CLI::App* sub) {
    sub->add_option("--k", wf.k, "Benchmarks to measure");
    sub->add_option("--measurements", wf.measurements,
                    "CSV of real measurements used as the benchmark runner");
    sub->add_flag("--unreachable", wf.unreachable, "Mark the new device as unreachable");
  };
  add_workflow_flags(intent);

  std::string technique_id, device_id, domain = "default", technique_type = "unspecified";
  auto* predict = app.add_subcommand("predict", "Look up a stored benchmark");
  predict->add_option("technique", technique_id)->required();
  predict->add_option("device", device_id)->required();

  auto* add_dev = app.add_subcommand("add-device", "Benchmark a new device");
  add_dev->add_option("device", device_id)->required();
  add_dev->add_option("--domain", domain);
  add_workflow_flags(add_dev);

  auto* add_tech = app.add_subcommand("add-technique", "Benchmark a new ML technique");
  add_tech->add_option("technique", technique_id)->required();
  add_tech->add_option("--type", technique_type);
  add_workflow_flags(add_tech);

  ExperimentFlags ef;
  auto* experiment = app.add_subcommand("experiment", "Run the missing-benchmark experiment");
  experiment->add_option("--synthetic", ef.synthetic, "Synthetic dataset shape, e.g. 42x192");
  experiment->add_option("--csv", ef.csv_path, "Real benchmark CSV");
  experiment->add_option("--true-rank", ef.true_rank, "Rank of the synthetic generator");
  experiment->add_option("--noise", ef.noise, "Synthetic noise, relative to the value range");
  experiment->add_option("--fractions", ef.fractions, "Missing fractions a:b:step");
  experiment->add_option("--reps", ef.reps, "Replications per fraction");
  experiment->add_option("--out", ef.out, "Detail CSV path");
  experiment->add_flag("--no-timing", ef.no_timing, "Write 0 for train_seconds");
  experiment->add_flag("--serial", ef.serial, "Run replications serially");

  GenerateFlags gf;
  auto* generate = app.add_subcommand("generate", "Write a synthetic benchmark CSV");
  generate->add_option("--synthetic", gf.synthetic, "Shape, e.g. 42x192");
  generate->add_option("--true-rank", gf.true_rank, "Rank of the generator");
  generate->add_option("--noise", gf.noise, "Noise relative to the value range");
  generate->add_option("--out", gf.out, "Output CSV (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(cfg, csv_path, io);
    if (*intent) return cmd_intent(cfg, wf, intent_text, io);
    if (*predict) return cmd_predict(cfg, technique_id, device_id, io);
    if (*add_dev || *add_tech) {
      StoreSnapshot store = load_store(cfg.store_path);
      const RecommendationReport report =
          *add_dev ? run_add_device(store, cfg, wf, DeviceRecord{device_id, domain, true})
                   : run_add_technique(store, cfg, wf,
                                       TechniqueRecord{technique_id, technique_type,
                                                       current_timestamp()});
      save_store(store, cfg.store_path);
      print_report(report, cfg.format, out);
      return kOk;
    }
    if (*experiment) return cmd_experiment(cfg, ef, io);
    if (*generate) return cmd_generate(cfg, gf, io);
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

}  // namespace benchoracle::cli
