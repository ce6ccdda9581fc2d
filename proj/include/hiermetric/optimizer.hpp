#pragma once

#include <cstdint>

#include "hiermetric/core_math.hpp"

namespace hiermetric {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// First and second moment estimates for one parameter block.
struct AdamMoments {
  Matrix first;
  Matrix second;

  static AdamMoments zeros_like(const Matrix& param) {
    return {Matrix::Zero(param.rows(), param.cols()), Matrix::Zero(param.rows(), param.cols())};
  }
};

/// One bias-corrected Adam update. `step` is 1-based.
void adam_update(Matrix& param, const Matrix& grad, AdamMoments& moments, std::int64_t step,
                 const OptimizerConfig& config);

}  // namespace hiermetric
