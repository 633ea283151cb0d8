#include "ksudf/geometry/point_cloud.hpp"

#include <fstream>
#include <iomanip>

#include "ksudf/common/error.hpp"

namespace ksudf {

namespace {

std::vector<ScalarColumn> label_columns(const PointCloud& cloud) {
    std::vector<ScalarColumn> cols;
    if (cloud.labels) {
        if (cloud.labels->size() != cloud.size()) throw InvalidInputError("label count mismatch");
        cols.push_back({"label", std::vector<double>(cloud.labels->begin(), cloud.labels->end())});
    }
    return cols;
}

void check_columns(const Points3& points, const std::vector<ScalarColumn>& columns) {
    for (const auto& c : columns) {
        if (c.values.size() != points.size()) {
            throw InvalidInputError("column '" + c.name + "' has wrong length");
        }
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_csv(const PointCloud& cloud, const std::filesystem::path& path) {
    write_csv(cloud.points, label_columns(cloud), path);
}

void write_csv(const Points3& points, const std::vector<ScalarColumn>& columns,
               const std::filesystem::path& path) {
    check_columns(points, columns);
    auto out = open_out(path);
    out << "x,y,z";
    for (const auto& c : columns) out << ',' << c.name;
    out << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        out << p.x() << ',' << p.y() << ',' << p.z();
        for (const auto& c : columns) out << ',' << c.values[i];
        out << '\n';
    }
}

void write_ply(const Points3& points, const std::vector<ScalarColumn>& columns,
               const std::filesystem::path& path) {
    check_columns(points, columns);
    auto out = open_out(path);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\n";
    for (const auto& c : columns) out << "property double " << c.name << '\n';
    out << "end_header\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        out << p.x() << ' ' << p.y() << ' ' << p.z();
        for (const auto& c : columns) out << ' ' << c.values[i];
        out << '\n';
    }
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    write_ply(cloud.points, label_columns(cloud), path);
}

}  // namespace ksudf
