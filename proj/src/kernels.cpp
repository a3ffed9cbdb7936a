#include "benchoracle/kernels.hpp"

#include <cstdint>

#include "benchoracle/cf_engine.hpp"

namespace benchoracle {

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

inline double entry_loss(const Observation& obs, const double* techniques,
                         const double* devices, std::size_t rank, double reg) {
  const double* p = techniques + obs.row * rank;
  const double* q = devices + obs.col * rank;
  const double err = obs.value - dot(q, p, rank);
  double loss = err * err;
  if (reg != 0.0) loss += reg * (dot(q, q, rank) + dot(p, p, rank));
  return loss;
}

}  // namespace

namespace kernels::serial {

double objective(std::span<const Observation> observed,
                 const FactorModel& model, double regularization) {
  const double* p = model.technique_data().data();
  const double* q = model.device_data().data();
  double total = 0.0;
  for (const Observation& obs : observed) {
    total += entry_loss(obs, p, q, model.rank(), regularization);
  }
  return total;
}

double sum_squared_error(std::span<const Observation> observed,
                         const FactorModel& model) {
  return objective(observed, model, 0.0);
}

DenseMatrix reconstruct(const FactorModel& model) {
  DenseMatrix out(model.techniques(), model.devices());
  const std::size_t r = model.rank();
  const double* p = model.technique_data().data();
  const double* q = model.device_data().data();
  for (std::size_t i = 0; i < model.techniques(); ++i) {
    for (std::size_t j = 0; j < model.devices(); ++j) {
      out(i, j) = dot(q + j * r, p + i * r, r);
    }
  }
  return out;
}

}  // namespace kernels::serial

namespace kernels::parallel {

double objective(std::span<const Observation> observed,
                 const FactorModel& model, double regularization) {
  const double* p = model.technique_data().data();
  const double* q = model.device_data().data();
  const std::size_t r = model.rank();
  const auto count = static_cast<std::int64_t>(observed.size());
  const Observation* data = observed.data();
  double total = 0.0;
#pragma omp parallel for reduction(+ : total) schedule(static)
  for (std::int64_t k = 0; k < count; ++k) {
    total += entry_loss(data[k], p, q, r, regularization);
  }
  return total;
}

double sum_squared_error(std::span<const Observation> observed,
                         const FactorModel& model) {
  return objective(observed, model, 0.0);
}

DenseMatrix reconstruct(const FactorModel& model) {
  DenseMatrix out(model.techniques(), model.devices());
  const std::size_t r = model.rank();
  const double* p = model.technique_data().data();
  const double* q = model.device_data().data();
  const auto m = static_cast<std::int64_t>(model.techniques());
  const auto n = static_cast<std::int64_t>(model.devices());
  double* dst = out.data().data();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      dst[i * n + j] = dot(q + j * r, p + i * r, r);
    }
  }
  return out;
}

}  // namespace kernels::parallel

}  // namespace benchoracle
