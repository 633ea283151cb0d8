#include "ksudf/geometry/surface_sampling.hpp"

#include <algorithm>
#include <cmath>

#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"

namespace ksudf {

SurfaceSample sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgumentError("sample count must be at least 1");
    if (mesh.empty()) throw InvalidInputError("cannot sample an empty mesh");

    std::vector<double> cdf(mesh.triangle_count());
    double acc = 0.0;
    for (std::size_t t = 0; t < cdf.size(); ++t) {
        acc += mesh.areas()[t];
        cdf[t] = acc;
    }

    Rng rng(seed);
    SurfaceSample out;
    out.cloud.points.reserve(n);
    out.triangle.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double target = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        if (it == cdf.end()) --it;
        const auto t = static_cast<std::size_t>(it - cdf.begin());

        const double s = std::sqrt(rng.uniform());
        const double r = rng.uniform();
        const auto [a, b, c] = mesh.corners(t);
        out.cloud.points.push_back((1.0 - s) * a + s * (1.0 - r) * b + s * r * c);
        out.triangle.push_back(t);
    }
    return out;
}

}  // namespace ksudf
