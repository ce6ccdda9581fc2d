#include "hiermetric/mds.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hiermetric/error.hpp"

namespace hiermetric {

namespace {
constexpr double kSymmetryTol = 1e-9;
}

Matrix pairwise_distances(const Matrix& points) {
  require_finite(points, "points");
  const auto n = points.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
    }
  }
  return d;
}

Mds2D classical_mds(const Matrix& distances) {
  const auto n = distances.rows();
  if (distances.cols() != n) throw Error(ErrorKind::DimensionMismatch, "distance matrix is not square");
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "MDS needs at least 3 points");
  require_finite(distances, "distances");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(distances(i, i)) > kSymmetryTol * scale) {
      throw Error(ErrorKind::AsymmetricInput, "non-zero diagonal at " + std::to_string(i));
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(distances(i, j) - distances(j, i)) > kSymmetryTol * scale) {
        throw Error(ErrorKind::AsymmetricInput,
                    "d(" + std::to_string(i) + "," + std::to_string(j) + ") != d(" +
                        std::to_string(j) + "," + std::to_string(i) + ")");
      }
    }
  }
  if (distances.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::DegenerateDistances, "all distances are zero");
  }

  const Matrix sym = 0.5 * (distances + distances.transpose());
  const Matrix sq = sym.array().square().matrix();
  // -1/2 J D^2 J without forming J.
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const Vector row_mean = sq.rowwise().mean();
  const double all_mean = sq.mean();
  Matrix gram = sq;
  gram.rowwise() -= col_mean;
  gram.colwise() -= row_mean;
  gram.array() += all_mean;
  gram *= -0.5;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFinite, "eigen-decomposition failed");
  }
  // Eigenvalues this small relative to the largest are round-off.
  const double floor = 1e-12 * std::max(solver.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  Mds2D out;
  out.coords.resize(n, 2);
  for (int k = 0; k < 2; ++k) {
    // Eigenvalues come back in ascending order.
    const Eigen::Index idx = n - 1 - k;
    const double lambda = solver.eigenvalues()[idx];
    Vector v = solver.eigenvectors().col(idx);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.eigenvalues[k] = lambda;
    out.coords.col(k) = v * (lambda > floor ? std::sqrt(lambda) : 0.0);
  }
  // Null-space eigenvectors may carry a component along the ones vector.
  out.coords.rowwise() -= out.coords.colwise().mean();

  const Matrix recovered = pairwise_distances(out.coords);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double diff = recovered(i, j) - sym(i, j);
      num += diff * diff;
      den += sym(i, j) * sym(i, j);
    }
  }
  out.stress = std::sqrt(num / den);
  return out;
}

Mds2D classical_mds_points(const Matrix& points) { return classical_mds(pairwise_distances(points)); }

}  // namespace hiermetric
