#include "hiermetric/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hiermetric/error.hpp"

namespace hiermetric {

void throw_non_finite(std::string_view what) {
  throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf");
}

Vector unit_normalize(const Vector& v) {
  require_finite(v, "vector");
  const double n = v.norm();
  if (n <= kNormFloor) throw Error(ErrorKind::ZeroNorm, "cannot normalize a zero vector");
  return v / n;
}

Matrix normalize_rows(const Matrix& m) {
  require_finite(m, "batch");
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n <= kNormFloor) {
      throw Error(ErrorKind::ZeroNorm, "row " + std::to_string(i) + " has zero norm");
    }
    out.row(i) = m.row(i) / n;
  }
  return out;
}

namespace {
void check_pair(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cosine of vectors with lengths " +
                                                  std::to_string(a.size()) + " and " +
                                                  std::to_string(b.size()));
  }
  require_finite(a, "first vector");
  require_finite(b, "second vector");
}
}  // namespace

double cosine_sim(const Vector& a, const Vector& b) {
  check_pair(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kNormFloor || nb <= kNormFloor) {
    throw Error(ErrorKind::ZeroNorm, "cosine of a zero vector");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

CosineGrad cosine_sim_grad(const Vector& a, const Vector& b) {
  check_pair(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kNormFloor || nb <= kNormFloor) {
    throw Error(ErrorKind::ZeroNorm, "cosine of a zero vector");
  }
  const Vector ua = a / na;
  const Vector ub = b / nb;
  const double c = ua.dot(ub);
  return {std::clamp(c, -1.0, 1.0), (ub - c * ua) / na, (ua - c * ub) / nb};
}

Vector normalize_backward(const Vector& v, const Vector& upstream) {
  const double n = v.norm();
  if (n <= kNormFloor) throw Error(ErrorKind::ZeroNorm, "normalization of a zero vector");
  const Vector u = v / n;
  return (upstream - u * u.dot(upstream)) / n;
}

Matrix normalize_rows_backward(const Matrix& raw, const Matrix& upstream) {
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double n = raw.row(i).norm();
    if (n <= kNormFloor) {
      throw Error(ErrorKind::ZeroNorm, "row " + std::to_string(i) + " has zero norm");
    }
    const Eigen::RowVectorXd u = raw.row(i) / n;
    out.row(i) = (upstream.row(i) - u * u.dot(upstream.row(i))) / n;
  }
  return out;
}

GradCheckReport grad_check(const std::function<double(const Vector&)>& f, const Vector& x,
                           const Vector& analytic_grad, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "grad_check step must be > 0");
  if (analytic_grad.size() != x.size()) {
    throw Error(ErrorKind::DimensionMismatch, "analytic gradient length differs from x");
  }
  GradCheckReport report;
  report.step = step;
  report.per_coordinate_errors.reserve(static_cast<std::size_t>(x.size()));
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorKind::NonFinite,
                  "function is not finite at probe of coordinate " + std::to_string(i));
    }
    const double fd = (up - down) / (2.0 * step);
    const double g = analytic_grad[i];
    const double rel = std::abs(fd - g) / std::max({1.0, std::abs(fd), std::abs(g)});
    report.per_coordinate_errors.push_back(rel);
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  return report;
}

}  // namespace hiermetric
