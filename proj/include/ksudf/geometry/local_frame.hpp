#pragma once

#include <Eigen/Core>
#include <span>

#include "ksudf/geometry/kdtree.hpp"
#include "ksudf/geometry/types.hpp"

namespace ksudf {

template <int N>
struct SymmetricEigen {
    Eigen::Matrix<double, N, 1> values;   // descending
    Eigen::Matrix<double, N, N> vectors;  // column i pairs with values[i]
    int sweeps = 0;
};

/// Cyclic Jacobi eigen-decomposition of a symmetric N x N matrix (N = 2, 3).
/// At most 32 sweeps; stops once the off-diagonal Frobenius norm drops
/// below 1e-12 of the full norm. Eigenvalues are sorted descending and each
/// eigenvector has its largest-magnitude component (first on ties) positive.
template <int N>
SymmetricEigen<N> jacobi_eigen(const Eigen::Matrix<double, N, N>& m);

/// Mean and covariance of a point set with divisor equal to the point count.
template <int N>
void mean_and_covariance(std::span<const Eigen::Matrix<double, N, 1>> points,
                         Eigen::Matrix<double, N, 1>& mean, Eigen::Matrix<double, N, N>& cov);

struct LocalFrame {
    Vec3 mean;
    Vec3 eigenvalues;  // lambda_1 >= lambda_2 >= lambda_3 >= 0
    Mat3 eigenvectors; // columns e_1, e_2, e_3

    Vec3 axis(int i) const { return eigenvectors.col(i); }
    double trace() const { return eigenvalues.sum(); }
};

/// Covariance frame of the k+1 points {centroid, neighbors} (divisor k+1).
/// Throws DegenerateFrameError when the trace falls below 1e-15.
LocalFrame local_frame(const Neighborhood& nbhd);
LocalFrame local_frame(std::span<const Vec3> points);

/// Coordinates (x . e_1, x . e_2) of the centroid followed by each neighbor.
Points2 project_to_average_plane(const Neighborhood& nbhd, const LocalFrame& frame);

}  // namespace ksudf
