#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "benchoracle/benchmark_matrix.hpp"
#include "benchoracle/dense_matrix.hpp"

namespace benchoracle {

struct Hyperparams {
  std::size_t rank = 10;
  double learning_rate = 0.04;
  double regularization = 5e-6;
  std::size_t epochs = 5000;
  std::uint64_t seed = 0;
  double init_scale = 0.1;

  // Throws ValidationError unless rank >= 1, learning_rate > 0,
  // regularization >= 0, epochs >= 1 and init_scale >= 0.
  void validate() const;
};

// Latent factors: one length-r vector per technique (row) and per device
// (column). Prediction for (i, j) is the dot product of the two.
class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(std::size_t techniques, std::size_t devices, std::size_t rank,
              std::uint64_t seed = 0);

  std::size_t techniques() const noexcept { return techniques_; }
  std::size_t devices() const noexcept { return devices_; }
  std::size_t rank() const noexcept { return rank_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<double> technique_factor(std::size_t i) {
    return {technique_data_.data() + i * rank_, rank_};
  }
  std::span<const double> technique_factor(std::size_t i) const {
    return {technique_data_.data() + i * rank_, rank_};
  }
  std::span<double> device_factor(std::size_t j) {
    return {device_data_.data() + j * rank_, rank_};
  }
  std::span<const double> device_factor(std::size_t j) const {
    return {device_data_.data() + j * rank_, rank_};
  }

  std::vector<double>& technique_data() noexcept { return technique_data_; }
  const std::vector<double>& technique_data() const noexcept {
    return technique_data_;
  }
  std::vector<double>& device_data() noexcept { return device_data_; }
  const std::vector<double>& device_data() const noexcept {
    return device_data_;
  }

  void check_index(std::size_t i, std::size_t j) const;
  bool all_finite() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;

 private:
  std::size_t techniques_ = 0;
  std::size_t devices_ = 0;
  std::size_t rank_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> technique_data_;
  std::vector<double> device_data_;
};

// Components uniform in [0, init_scale], deterministic per params.seed.
FactorModel init_factors(std::size_t techniques, std::size_t devices,
                         const Hyperparams& params);

double predict_entry(const FactorModel& model, std::size_t i, std::size_t j);

// observed - prediction.
double residual(const FactorModel& model, std::size_t i, std::size_t j,
                double observed);

// One regularized SGD step at (i, j). Both factors are updated from their
// pre-update values; returns the residual used. Throws DivergenceError if a
// component becomes non-finite.
double sgd_update(FactorModel& model, std::size_t i, std::size_t j,
                  double observed, double learning_rate, double regularization);

// Sum over observed entries of the squared error plus
// lambda * (|q_j|^2 + |p_i|^2) for that entry's pair of factors.
double objective(const BenchmarkMatrix& matrix, const FactorModel& model,
                 double regularization);

struct TrainOptions {
  // Objective is recorded every trace_interval epochs and after the last one.
  std::size_t trace_interval = 1;
};

struct TrainResult {
  FactorModel model;
  std::vector<double> objective_trace;
  std::vector<std::size_t> trace_epochs;  // 1-based epoch of each trace value

  double final_objective() const {
    return objective_trace.empty() ? 0.0 : objective_trace.back();
  }
};

// Runs params.epochs passes over the observed set, each in a freshly
// shuffled order. Throws DivergenceError naming the epoch (1-based).
TrainResult train(const BenchmarkMatrix& matrix, const Hyperparams& params,
                  const TrainOptions& options = {});

// Dense reconstruction of every cell, observed ones included.
DenseMatrix complete(const BenchmarkMatrix& matrix, const FactorModel& model);

// Versioned plain-text model file.
inline constexpr int kModelFormatVersion = 1;
void save_model(const FactorModel& model, std::ostream& out);
FactorModel load_model(std::istream& in);
void save_model_file(const FactorModel& model, const std::string& path);
FactorModel load_model_file(const std::string& path);

}  // namespace benchoracle
