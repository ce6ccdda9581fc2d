#pragma once

#include "hiermetric/core_math.hpp"

namespace hiermetric {

/// Two-dimensional classical (Torgerson) MDS result.
struct Mds2D {
  Matrix coords;  ///< N x 2, centered
  double eigenvalues[2] = {0.0, 0.0};
  double stress = 0.0;
};

/// Euclidean distances between the rows of `points`.
Matrix pairwise_distances(const Matrix& points);

/// Classical MDS of a symmetric, zero-diagonal distance matrix (N >= 3).
/// Each eigenvector's largest-magnitude entry is made positive.
Mds2D classical_mds(const Matrix& distances);

/// classical_mds(pairwise_distances(points)).
Mds2D classical_mds_points(const Matrix& points);

}  // namespace hiermetric
