#include "ksudf/circular/circular_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ksudf/common/error.hpp"

namespace ksudf {

double wrap_angle(double angle) {
    double r = std::fmod(angle + kPi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    const double w = r - kPi;
    return w >= kPi ? -kPi : w;
}

PolarSample to_polar(std::span<const Vec2> points) {
    PolarSample s;
    s.radii.reserve(points.size());
    s.angles.reserve(points.size());
    for (const auto& p : points) {
        const double r = p.norm();
        if (r < kMinPolarRadius) {
            ++s.excluded;
            continue;
        }
        s.radii.push_back(r);
        s.angles.push_back(wrap_angle(std::atan2(p.y(), p.x())));
    }
    if (s.angles.empty()) throw InsufficientSampleError("no point with a defined polar angle");
    return s;
}

double angular_distance(double a, double b) {
    const double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, kTwoPi - d);
}

double frechet_objective(std::span<const double> angles, double center) {
    double sum = 0.0;
    for (double a : angles) {
        const double d = angular_distance(a, center);
        sum += d * d;
    }
    return sum;
}

double frechet_mean(std::span<const double> angles) {
    if (angles.empty()) throw InsufficientSampleError("Frechet mean of an empty sample");
    std::vector<double> sorted(angles.size());
    std::transform(angles.begin(), angles.end(), sorted.begin(), wrap_angle);
    std::sort(sorted.begin(), sorted.end());

    const auto n = static_cast<double>(sorted.size());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);

    // Cutting just below sorted[c] lifts sorted[0..c-1] by 2 pi.
    double best_value = 0.0, best_center = 0.0;
    bool have_best = false;
    for (std::size_t c = 0; c < sorted.size(); ++c) {
        if (c > 0 && sorted[c] == sorted[c - 1]) continue;
        const double mean = (total + kTwoPi * static_cast<double>(c)) / n;
        const double center = wrap_angle(mean);
        const double value = frechet_objective(sorted, center);
        const double tol = 1e-12 * std::max(1.0, std::abs(value));
        if (!have_best || value < best_value - tol ||
            (std::abs(value - best_value) <= tol && center < best_center)) {
            best_value = value;
            best_center = center;
            have_best = true;
        }
    }
    return best_center;
}

std::vector<double> center_angles(std::span<const double> angles) {
    const double mean = frechet_mean(angles);
    std::vector<double> out(angles.size());
    std::transform(angles.begin(), angles.end(), out.begin(),
                   [mean](double a) { return wrap_angle(a - mean); });
    return out;
}

double ks_statistic(std::span<const double> angles) {
    if (angles.empty()) throw InsufficientSampleError("KS statistic of an empty sample");
    std::vector<double> cdf(angles.size());
    std::transform(angles.begin(), angles.end(), cdf.begin(),
                   [](double a) { return (wrap_angle(a) + kPi) / kTwoPi; });
    std::sort(cdf.begin(), cdf.end());
    const auto k = static_cast<double>(cdf.size());
    double d = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        const double above = static_cast<double>(i + 1) / k - cdf[i];
        const double below = cdf[i] - static_cast<double>(i) / k;
        d = std::max({d, above, below});
    }
    return d;
}

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    double q;
    if (lambda < 1.18) {
        // Jacobi-theta form of the same series; the alternating series
        // converges too slowly near zero.
        const double c = -kPi * kPi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 100; ++j) {
            const double m = 2.0 * j - 1.0;
            const double term = std::exp(c * m * m);
            sum += term;
            if (term < 1e-12) break;
        }
        q = 1.0 - std::sqrt(kTwoPi) / lambda * sum;
    } else {
        const double c = -2.0 * lambda * lambda;
        double sum = 0.0;
        for (int j = 1; j <= 100; ++j) {
            const double term = std::exp(c * j * j);
            sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
            if (term < 1e-12) break;
        }
        q = sum;
    }
    return std::clamp(q, 0.0, 1.0);
}

KsTestResult ks_uniformity_test(std::span<const double> angles) {
    if (angles.size() < 5) {
        throw InsufficientSampleError("KS test needs at least 5 angles, got " + std::to_string(angles.size()));
    }
    KsTestResult r;
    r.sample_size = angles.size();
    r.statistic = ks_statistic(angles);
    const double sk = std::sqrt(static_cast<double>(angles.size()));
    r.p_value = kolmogorov_survival((sk + 0.12 + 0.11 / sk) * r.statistic);
    return r;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SignTestResult sign_test(std::span<const double> values) {
    if (values.size() < 5) {
        throw InsufficientSampleError("sign test needs at least 5 values, got " + std::to_string(values.size()));
    }
    SignTestResult r;
    r.sample_size = values.size();
    r.k_plus = static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return v >= 0.0; }));
    const auto k = static_cast<double>(r.sample_size);
    r.statistic = (2.0 * static_cast<double>(r.k_plus) - k) / std::sqrt(k);
    // 2 (1 - Phi(|v|)) written through erfc to keep precision in the tail.
    r.p_value = std::clamp(std::erfc(std::abs(r.statistic) / std::sqrt(2.0)), 0.0, 1.0);
    return r;
}

}  // namespace ksudf
