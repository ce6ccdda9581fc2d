#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hiermetric {

using Vector = Eigen::VectorXd;
/// Batches are stored one sample per row.
using Matrix = Eigen::MatrixXd;

/// Norms at or below this are treated as zero.
inline constexpr double kNormFloor = 1e-12;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<double> per_coordinate_errors;
  double step = 0.0;
};

[[noreturn]] void throw_non_finite(std::string_view what);

/// Throws NonFinite naming `what` if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, std::string_view what) {
  if (!values.allFinite()) throw_non_finite(what);
}

Vector unit_normalize(const Vector& v);

/// Row-wise unit normalization of a batch. Throws ZeroNorm naming the row.
Matrix normalize_rows(const Matrix& m);

double cosine_sim(const Vector& a, const Vector& b);

/// Cosine similarity together with its gradient with respect to both inputs.
/// The value is clamped to [-1, 1]; the gradients are those of the
/// unclamped expression.
struct CosineGrad {
  double value = 0.0;
  Vector grad_a;
  Vector grad_b;
};
CosineGrad cosine_sim_grad(const Vector& a, const Vector& b);

/// Backpropagates through u = v / ||v||: returns (I - u u^T) g / ||v||.
Vector normalize_backward(const Vector& v, const Vector& upstream);

/// Row-wise version of normalize_backward for a batch.
Matrix normalize_rows_backward(const Matrix& raw, const Matrix& upstream);

/// Compares `analytic_grad` against central differences of `f` at `x`.
/// Relative error per coordinate is |fd - g| / max(1, |fd|, |g|).
GradCheckReport grad_check(const std::function<double(const Vector&)>& f, const Vector& x,
                           const Vector& analytic_grad, double step);

}  // namespace hiermetric
