#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ksudf/geometry/types.hpp"

namespace ksudf {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Maps any finite angle to [-pi, pi).
double wrap_angle(double angle);

struct PolarSample {
    std::vector<double> radii;
    std::vector<double> angles;  // in [-pi, pi)
    std::size_t excluded = 0;    // inputs with radius below the cutoff

    std::size_t size() const { return angles.size(); }
};

inline constexpr double kMinPolarRadius = 1e-12;

/// Polar coordinates about the origin. Points closer than kMinPolarRadius
/// have no defined angle and are dropped (counted in `excluded`). Throws
/// InsufficientSampleError when nothing remains.
PolarSample to_polar(std::span<const Vec2> points);

/// Arc length between two angles on the unit circle, in [0, pi].
double angular_distance(double a, double b);

/// Sum of squared angular distances from `center` to each angle.
double frechet_objective(std::span<const double> angles, double center);

/// Circular Frechet mean. Each cut of the circle at a data point unwraps the
/// sample onto a line; the linear mean of that unwrapping is a candidate, and
/// the global minimizer is among the candidates. Ties go to the smallest
/// wrapped value.
double frechet_mean(std::span<const double> angles);

/// wrap(angle - frechet_mean(angles)) for every angle.
std::vector<double> center_angles(std::span<const double> angles);

struct KsTestResult {
    double statistic = 0.0;  // A_k
    double p_value = 1.0;
    std::size_t sample_size = 0;
};

/// Kolmogorov distance between the sample's empirical CDF and the uniform
/// CDF on [-pi, pi). Any nonempty sample.
double ks_statistic(std::span<const double> angles);

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

/// Kolmogorov-Smirnov test of uniformity on [-pi, pi), p-value from the
/// asymptotic distribution with Stephens' finite-sample correction.
/// Requires at least 5 angles.
KsTestResult ks_uniformity_test(std::span<const double> angles);

double standard_normal_cdf(double x);

struct SignTestResult {
    std::size_t k_plus = 0;
    std::size_t sample_size = 0;
    double statistic = 0.0;  // (2 k_plus - k) / sqrt(k)
    double p_value = 1.0;
};

/// Two-sided sign test of symmetry about zero under the normal
/// approximation. Zeros count as positive. Requires at least 5 values.
SignTestResult sign_test(std::span<const double> values);

}  // namespace ksudf
