#pragma once

#include <span>

#include "benchoracle/benchmark_matrix.hpp"
#include "benchoracle/dense_matrix.hpp"

namespace benchoracle {

class FactorModel;

// Data-parallel kernels over a trained model. The serial namespace is the
// reference; the parallel one uses OpenMP and must agree with it (exactly
// for reconstruct, to rounding for the reductions).
namespace kernels::serial {

double objective(std::span<const Observation> observed,
                 const FactorModel& model, double regularization);
double sum_squared_error(std::span<const Observation> observed,
                         const FactorModel& model);
DenseMatrix reconstruct(const FactorModel& model);

}  // namespace kernels::serial

namespace kernels::parallel {

double objective(std::span<const Observation> observed,
                 const FactorModel& model, double regularization);
double sum_squared_error(std::span<const Observation> observed,
                         const FactorModel& model);
DenseMatrix reconstruct(const FactorModel& model);

}  // namespace kernels::parallel

}  // namespace benchoracle
