#include "benchoracle/cf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "benchoracle/csv.hpp"
#include "benchoracle/errors.hpp"
#include "benchoracle/kernels.hpp"
#include "benchoracle/seeding.hpp"

namespace benchoracle {

namespace {

constexpr std::string_view kModelMagic = "benchoracle-model";

inline double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

// Simultaneous update of p (technique) and q (device) from their old values.
inline double step(double* p, double* q, std::size_t rank, double observed,
                   double lr, double reg) {
  const double err = observed - dot(q, p, rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const double pk = p[k];
    const double qk = q[k];
    q[k] = qk + lr * (err * pk - reg * qk);
    p[k] = pk + lr * (err * qk - reg * pk);
  }
  return err;
}

}  // namespace

void Hyperparams::validate() const {
  if (rank < 1) throw ValidationError("rank must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be positive");
  }
  if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
    throw ValidationError("regularization must be non-negative");
  }
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ValidationError("init scale must be non-negative");
  }
}

FactorModel::FactorModel(std::size_t techniques, std::size_t devices,
                         std::size_t rank, std::uint64_t seed)
    : techniques_(techniques),
      devices_(devices),
      rank_(rank),
      seed_(seed),
      technique_data_(techniques * rank, 0.0),
      device_data_(devices * rank, 0.0) {}

void FactorModel::check_index(std::size_t i, std::size_t j) const {
  if (i >= techniques_ || j >= devices_) {
    throw ValidationError("index (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") outside " +
                          std::to_string(techniques_) + "x" +
                          std::to_string(devices_) + " factor model");
  }
}

bool FactorModel::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(technique_data_.begin(), technique_data_.end(), finite) &&
         std::all_of(device_data_.begin(), device_data_.end(), finite);
}

FactorModel init_factors(std::size_t techniques, std::size_t devices,
                         const Hyperparams& params) {
  params.validate();
  if (techniques == 0 || devices == 0) {
    throw ValidationError("factor model needs at least one technique and one device");
  }
  FactorModel model(techniques, devices, params.rank, params.seed);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (double& v : model.technique_data()) v = params.init_scale * uniform(rng);
  for (double& v : model.device_data()) v = params.init_scale * uniform(rng);
  return model;
}

double predict_entry(const FactorModel& model, std::size_t i, std::size_t j) {
  model.check_index(i, j);
  auto p = model.technique_factor(i);
  auto q = model.device_factor(j);
  return dot(q.data(), p.data(), model.rank());
}

double residual(const FactorModel& model, std::size_t i, std::size_t j,
                double observed) {
  return observed - predict_entry(model, i, j);
}

double sgd_update(FactorModel& model, std::size_t i, std::size_t j,
                  double observed, double learning_rate,
                  double regularization) {
  model.check_index(i, j);
  if (!(learning_rate > 0.0)) {
    throw ValidationError("learning rate must be positive");
  }
  auto p = model.technique_factor(i);
  auto q = model.device_factor(j);
  const double err = step(p.data(), q.data(), model.rank(), observed,
                          learning_rate, regularization);
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(p.begin(), p.end(), finite) ||
      !std::all_of(q.begin(), q.end(), finite)) {
    throw DivergenceError("SGD update produced a non-finite factor; "
                          "learning rate too high",
                          0);
  }
  return err;
}

double objective(const BenchmarkMatrix& matrix, const FactorModel& model,
                 double regularization) {
  if (matrix.rows() != model.techniques() || matrix.cols() != model.devices()) {
    throw ValidationError("model dimensions do not match the benchmark matrix");
  }
  const auto observed = matrix.observations();
  return kernels::serial::objective(observed, model, regularization);
}

TrainResult train(const BenchmarkMatrix& matrix, const Hyperparams& params,
                  const TrainOptions& options) {
  params.validate();
  if (options.trace_interval < 1) {
    throw ValidationError("trace interval must be at least 1");
  }
  if (matrix.empty()) {
    throw ValidationError("cannot train on an empty observed set");
  }
  TrainResult result{init_factors(matrix.rows(), matrix.cols(), params), {}, {}};
  FactorModel& model = result.model;
  result.objective_trace.reserve(params.epochs / options.trace_interval + 1);

  std::vector<Observation> order = matrix.observations();
  std::mt19937_64 shuffle_rng(derive_seed(params.seed, {0x5eed}));
  const std::size_t rank = model.rank();
  double* techniques = model.technique_data().data();
  double* devices = model.device_data().data();

  for (std::size_t epoch = 1; epoch <= params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (const Observation& obs : order) {
      step(techniques + obs.row * rank, devices + obs.col * rank, rank,
           obs.value, params.learning_rate, params.regularization);
    }
    if (!model.all_finite()) {
      throw DivergenceError("training diverged at epoch " +
                                std::to_string(epoch) +
                                "; learning rate too high",
                            epoch);
    }
    if (epoch % options.trace_interval == 0 || epoch == params.epochs) {
      result.objective_trace.push_back(
          kernels::serial::objective(order, model, params.regularization));
      result.trace_epochs.push_back(epoch);
    }
  }
  return result;
}

DenseMatrix complete(const BenchmarkMatrix& matrix, const FactorModel& model) {
  if (matrix.rows() != model.techniques() || matrix.cols() != model.devices()) {
    throw ValidationError(
        "model is " + std::to_string(model.techniques()) + "x" +
        std::to_string(model.devices()) + " but matrix is " +
        std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()));
  }
  return kernels::parallel::reconstruct(model);
}

void save_model(const FactorModel& model, std::ostream& out) {
  out << kModelMagic << " v" << kModelFormatVersion << '\n';
  out << model.techniques() << ' ' << model.devices() << ' ' << model.rank()
      << ' ' << model.seed() << '\n';
  auto write_rows = [&](const std::vector<double>& data, std::size_t count) {
    for (std::size_t row = 0; row < count; ++row) {
      for (std::size_t k = 0; k < model.rank(); ++k) {
        if (k) out << ' ';
        out << csv::format_double(data[row * model.rank() + k]);
      }
      out << '\n';
    }
  };
  write_rows(model.technique_data(), model.techniques());
  write_rows(model.device_data(), model.devices());
}

FactorModel load_model(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != kModelMagic) {
    throw CorruptionError("not a benchoracle model file");
  }
  if (version != "v" + std::to_string(kModelFormatVersion)) {
    throw CorruptionError("model format version " + version +
                          " is not supported (expected v" +
                          std::to_string(kModelFormatVersion) + ")");
  }
  std::size_t m = 0, n = 0, r = 0;
  std::uint64_t seed = 0;
  if (!(in >> m >> n >> r >> seed)) {
    throw CorruptionError("model header is truncated");
  }
  FactorModel model(m, n, r, seed);
  auto read_values = [&](std::vector<double>& data) {
    std::string token;
    for (double& v : data) {
      if (!(in >> token)) throw CorruptionError("model file is truncated");
      auto parsed = csv::parse_double(token);
      if (!parsed) throw CorruptionError("bad factor value '" + token + "'");
      v = *parsed;
    }
  };
  read_values(model.technique_data());
  read_values(model.device_data());
  return model;
}

void save_model_file(const FactorModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  save_model(model, out);
  if (!out) throw IoError("failed writing model file '" + path + "'");
}

FactorModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace benchoracle
