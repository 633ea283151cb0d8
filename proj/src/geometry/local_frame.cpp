#include "ksudf/geometry/local_frame.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "ksudf/common/error.hpp"

namespace ksudf {

namespace {

constexpr int kMaxSweeps = 32;
constexpr double kOffDiagonalTolerance = 1e-12;

template <int N>
double off_diagonal_norm(const Eigen::Matrix<double, N, N>& a) {
    double s = 0.0;
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q)
            if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
}

}  // namespace

template <int N>
SymmetricEigen<N> jacobi_eigen(const Eigen::Matrix<double, N, N>& m) {
    using Mat = Eigen::Matrix<double, N, N>;
    Mat a = 0.5 * (m + m.transpose());
    Mat v = Mat::Identity();
    const double scale = a.norm();

    SymmetricEigen<N> out;
    while (out.sweeps < kMaxSweeps && scale > 0.0 &&
           off_diagonal_norm<N>(a) > kOffDiagonalTolerance * scale) {
        ++out.sweeps;
        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int r = 0; r < N; ++r) {
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (int r = 0; r < N; ++r) {
                    const double apr = a(p, r), aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
                a(p, q) = a(q, p) = 0.0;
                for (int r = 0; r < N; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    std::array<int, N> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
    for (int i = 0; i < N; ++i) {
        out.values[i] = a(order[i], order[i]);
        Eigen::Matrix<double, N, 1> col = v.col(order[i]);
        int best = 0;
        for (int r = 1; r < N; ++r)
            if (std::abs(col[r]) > std::abs(col[best])) best = r;
        if (col[best] < 0) col = -col;
        out.vectors.col(i) = col;
    }
    return out;
}

template SymmetricEigen<2> jacobi_eigen<2>(const Eigen::Matrix<double, 2, 2>&);
template SymmetricEigen<3> jacobi_eigen<3>(const Eigen::Matrix<double, 3, 3>&);

template <int N>
void mean_and_covariance(std::span<const Eigen::Matrix<double, N, 1>> points,
                         Eigen::Matrix<double, N, 1>& mean, Eigen::Matrix<double, N, N>& cov) {
    if (points.empty()) throw InvalidInputError("covariance of an empty point set");
    mean.setZero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    cov.setZero();
    for (const auto& p : points) {
        const Eigen::Matrix<double, N, 1> d = p - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());
}

template void mean_and_covariance<2>(std::span<const Vec2>, Vec2&, Eigen::Matrix2d&);
template void mean_and_covariance<3>(std::span<const Vec3>, Vec3&, Mat3&);

LocalFrame local_frame(std::span<const Vec3> points) {
    LocalFrame f;
    Mat3 cov;
    mean_and_covariance<3>(points, f.mean, cov);
    if (!(cov.trace() > 1e-15)) throw DegenerateFrameError("neighborhood points coincide");
    const auto eig = jacobi_eigen<3>(cov);
    f.eigenvalues = eig.values.cwiseMax(0.0);
    f.eigenvectors = eig.vectors;
    return f;
}

LocalFrame local_frame(const Neighborhood& nbhd) {
    std::vector<Vec3> pts;
    pts.reserve(nbhd.k() + 1);
    pts.push_back(nbhd.centroid);
    pts.insert(pts.end(), nbhd.neighbors.begin(), nbhd.neighbors.end());
    return local_frame(std::span<const Vec3>(pts));
}

Points2 project_to_average_plane(const Neighborhood& nbhd, const LocalFrame& frame) {
    if (!(frame.eigenvalues[0] > 0.0)) throw DegenerateFrameError("average plane is undefined");
    const Vec3 e1 = frame.axis(0), e2 = frame.axis(1);
    Points2 out;
    out.reserve(nbhd.k() + 1);
    out.emplace_back(nbhd.centroid.dot(e1), nbhd.centroid.dot(e2));
    for (const auto& x : nbhd.neighbors) out.emplace_back(x.dot(e1), x.dot(e2));
    return out;
}

}  // namespace ksudf
