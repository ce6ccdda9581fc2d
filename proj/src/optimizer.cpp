#include "hiermetric/optimizer.hpp"

#include <cmath>

#include "hiermetric/error.hpp"

namespace hiermetric {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidConfig, "learning_rate must be > 0");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw Error(ErrorKind::InvalidConfig, "beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw Error(ErrorKind::InvalidConfig, "beta2 must be in (0,1)");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "epsilon must be > 0");
}

void adam_update(Matrix& param, const Matrix& grad, AdamMoments& moments, std::int64_t step,
                 const OptimizerConfig& config) {
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  moments.first = b1 * moments.first + (1.0 - b1) * grad;
  moments.second = b2 * moments.second + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  param.array() -= config.learning_rate * (moments.first.array() / c1) /
                   ((moments.second.array() / c2).sqrt() + config.epsilon);
}

}  // namespace hiermetric
