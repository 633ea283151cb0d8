#include "ksudf/eval/reconstruction.hpp"

#include <algorithm>
#include <cmath>

#include "ksudf/common/error.hpp"
#include "ksudf/eval/point_cloud_metrics.hpp"
#include "ksudf/geometry/surface_sampling.hpp"

namespace ksudf {

void ReconstructionConfig::validate() const {
    if (n_r < 1) throw InvalidArgumentError("n_r must be at least 1");
    if (!(step_size > 0.0)) throw InvalidArgumentError("descent step size must be positive");
    if (!(divergence_norm > 0.0)) throw InvalidArgumentError("divergence norm must be positive");
}

ResidualStats residual_stats(const std::vector<double>& v) {
    ResidualStats s;
    if (v.empty()) return s;
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    s.median = sorted[(sorted.size() - 1) / 2];
    s.max = sorted.back();
    return s;
}

ReconstructionReport descend_to_zero_set(const DifferentiableField& field, Points3 initial,
                                         const ReconstructionConfig& cfg) {
    cfg.validate();
    if (initial.empty()) throw InvalidInputError("reconstruction needs initial points");
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    ReconstructionReport rep;
    rep.initial = std::move(initial);
    const std::size_t n = rep.initial.size();
    Points3 x = rep.initial;
    std::vector<Vec3> m(n, Vec3::Zero()), v(n, Vec3::Zero());
    std::vector<double> f;
    std::vector<Vec3> g;

    field.evaluate(x, &f, nullptr);
    rep.initial_residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) rep.initial_residual[i] = std::abs(f[i]);

    double b1t = 1.0, b2t = 1.0;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        field.evaluate(x, &f, &g);
        b1t *= beta1;
        b2t *= beta2;
        for (std::size_t i = 0; i < n; ++i) {
            // d|f| = sign(f) grad f, zero on the level set itself.
            const double sgn = f[i] > 0.0 ? 1.0 : (f[i] < 0.0 ? -1.0 : 0.0);
            const Vec3 grad = sgn * g[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad;
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad.cwiseProduct(grad);
            const Vec3 mhat = m[i] / (1.0 - b1t);
            const Vec3 vhat = v[i] / (1.0 - b2t);
            x[i] -= cfg.step_size * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
        }
    }

    field.evaluate(x, &f, nullptr);
    rep.final_residual.resize(n);
    std::size_t reduced = 0;
    for (std::size_t i = 0; i < n; ++i) {
        rep.final_residual[i] = std::abs(f[i]);
        if (rep.final_residual[i] < rep.initial_residual[i]) ++reduced;
        if (!std::isfinite(x[i].squaredNorm()) || x[i].norm() > cfg.divergence_norm) rep.diverged.push_back(i);
    }
    rep.reduced_fraction = static_cast<double>(reduced) / static_cast<double>(n);
    rep.reconstructed = std::move(x);
    rep.initial_stats = residual_stats(rep.initial_residual);
    rep.final_stats = residual_stats(rep.final_residual);

    if (rep.diverged.size() == n) {
        throw DivergenceError("every reconstructed point left the ball of radius " +
                                  std::to_string(cfg.divergence_norm),
                              static_cast<int>(cfg.steps));
    }
    if (rep.diverged.empty()) {
        rep.delta = hausdorff(rep.initial, rep.reconstructed);
    } else {
        rep.warnings.push_back(std::to_string(rep.diverged.size()) +
                               " diverged points excluded from the reconstruction error");
        Points3 a, b;
        std::size_t next = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (next < rep.diverged.size() && rep.diverged[next] == i) {
                ++next;
                continue;
            }
            a.push_back(rep.initial[i]);
            b.push_back(rep.reconstructed[i]);
        }
        rep.delta = hausdorff(a, b);
    }
    return rep;
}

ReconstructionReport reconstruct_zero_set(const DifferentiableField& field, const TriangleMesh& mesh,
                                          const ReconstructionConfig& cfg) {
    cfg.validate();
    return descend_to_zero_set(field, sample_surface_uniform(mesh, cfg.n_r, cfg.seed).points, cfg);
}

double edge_error(const DifferentiableField& field, const EdgeLabeledCloud& cloud) {
    if (cloud.edge.empty()) throw UndefinedMetricError("edge error is undefined without edge points");
    Points3 pts;
    pts.reserve(cloud.edge.size());
    for (std::size_t i : cloud.edge) pts.push_back(cloud.points.points[i]);
    std::vector<double> f;
    field.evaluate(pts, &f, nullptr);
    double sum = 0.0;
    for (double y : f) sum += std::abs(y);
    return sum / static_cast<double>(f.size());
}

}  // namespace ksudf
