#include "ksudf/edge/edge_detect.hpp"

#include <string>

#include "ksudf/circular/circular_stats.hpp"
#include "ksudf/common/error.hpp"
#include "ksudf/geometry/surface_sampling.hpp"

namespace ksudf {

void DetectorConfig::validate() const {
    if (k < 5) throw InvalidArgumentError("k must be at least 5, got " + std::to_string(k));
    if (n_s <= k) throw InvalidArgumentError("n_s must exceed k");
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw InvalidArgumentError("p0 must lie in [0, 1]");
}

double pauly_descriptor(const LocalFrame& frame) {
    const double trace = frame.trace();
    if (!(trace > 1e-15)) throw DegenerateFrameError("surface variation of a degenerate frame");
    return frame.eigenvalues[2] / trace;
}

double pauly_descriptor(const Neighborhood& nbhd) { return pauly_descriptor(local_frame(nbhd)); }

namespace {

KsDescriptor ks_from_frame(const Neighborhood& nbhd, const LocalFrame& frame, double p0) {
    const Points2 projected = project_to_average_plane(nbhd, frame);
    Points2 offsets;
    offsets.reserve(nbhd.k());
    for (std::size_t i = 1; i < projected.size(); ++i) offsets.push_back(projected[i] - projected[0]);

    const PolarSample polar = to_polar(offsets);
    if (polar.size() < 5) {
        throw InsufficientSampleError("only " + std::to_string(polar.size()) + " usable angles");
    }
    const auto centered = center_angles(polar.angles);
    const auto test = ks_uniformity_test(centered);

    KsDescriptor d;
    d.p_value = test.p_value;
    d.statistic = test.statistic;
    d.edge = test.p_value <= p0;
    d.usable_angles = polar.size();
    return d;
}

}  // namespace

KsDescriptor ks_descriptor(const Neighborhood& nbhd, double p0) {
    if (nbhd.k() < 5) throw InsufficientSampleError("KS descriptor needs k >= 5");
    return ks_from_frame(nbhd, local_frame(nbhd), p0);
}

EdgeLabeledCloud label_cloud(Points3 points, std::size_t k, double p0) {
    if (k < 5) throw InvalidArgumentError("k must be at least 5");
    const KdTree tree(std::move(points));
    const std::size_t n = tree.size();

    EdgeLabeledCloud out;
    out.points.points = tree.points();
    out.pauly.assign(n, 0.0);
    out.p_value.assign(n, 1.0);
    out.ks_label.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const Neighborhood nbhd = tree.knn_member(i, k);
        try {
            const LocalFrame frame = local_frame(nbhd);
            out.pauly[i] = pauly_descriptor(frame);
            const KsDescriptor d = ks_from_frame(nbhd, frame, p0);
            out.p_value[i] = d.p_value;
            out.ks_label[i] = d.edge ? 1 : 0;
        } catch (const InsufficientSampleError&) {
            ++out.insufficient;
        } catch (const DegenerateFrameError&) {
            ++out.insufficient;
        }
        (out.ks_label[i] ? out.edge : out.flat).push_back(i);
    }
    return out;
}

EdgeLabeledCloud detect_edges(const TriangleMesh& mesh, const DetectorConfig& cfg) {
    cfg.validate();
    return label_cloud(sample_surface_uniform(mesh, cfg.n_s, cfg.seed).points, cfg.k, cfg.p0);
}

namespace {

std::vector<ScalarColumn> edge_columns(const EdgeLabeledCloud& c) {
    return {{"pauly", c.pauly},
            {"p_value", c.p_value},
            {"ks_label", std::vector<double>(c.ks_label.begin(), c.ks_label.end())}};
}

}  // namespace

void write_edge_csv(const EdgeLabeledCloud& cloud, const std::filesystem::path& path) {
    write_csv(cloud.points.points, edge_columns(cloud), path);
}

void write_edge_ply(const EdgeLabeledCloud& cloud, const std::filesystem::path& path) {
    write_ply(cloud.points.points, edge_columns(cloud), path);
}

namespace {

struct Frame2 {
    Vec2 e1;
    Eigen::Vector2d values;
};

Frame2 frame_2d(const Vec2& centroid, std::span<const Vec2> neighbors) {
    std::vector<Vec2> pts;
    pts.reserve(neighbors.size() + 1);
    pts.push_back(centroid);
    pts.insert(pts.end(), neighbors.begin(), neighbors.end());
    Vec2 mean;
    Eigen::Matrix2d cov;
    mean_and_covariance<2>(std::span<const Vec2>(pts), mean, cov);
    if (!(cov.trace() > 1e-15)) throw DegenerateFrameError("2D neighborhood points coincide");
    const auto eig = jacobi_eigen<2>(cov);
    return {eig.vectors.col(0), eig.values.cwiseMax(0.0)};
}

}  // namespace

OddsRatioDescriptor odds_ratio_descriptor_2d(const Vec2& centroid, std::span<const Vec2> neighbors, double p0) {
    if (neighbors.size() < 5) throw InsufficientSampleError("odds-ratio descriptor needs k >= 5");
    const Frame2 frame = frame_2d(centroid, neighbors);
    std::vector<double> projections;
    projections.reserve(neighbors.size());
    for (const auto& x : neighbors) projections.push_back((x - centroid).dot(frame.e1));
    const auto test = sign_test(projections);
    OddsRatioDescriptor d;
    d.p_value = test.p_value;
    d.statistic = test.statistic;
    d.k_plus = test.k_plus;
    d.edge = test.p_value <= p0;
    return d;
}

double pauly_descriptor_2d(const Vec2& centroid, std::span<const Vec2> neighbors) {
    const Frame2 frame = frame_2d(centroid, neighbors);
    return frame.values[1] / frame.values.sum();
}

}  // namespace ksudf
