#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ksudf/geometry/types.hpp"

namespace ksudf {

struct PointCloud {
    Points3 points;
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Extra per-point column written next to x,y,z.
struct ScalarColumn {
    std::string name;
    std::vector<double> values;
};

/// `x,y,z[,label]` CSV.
void write_csv(const PointCloud& cloud, const std::filesystem::path& path);

/// `x,y,z,<col>...` CSV; each column must have one value per point.
void write_csv(const Points3& points, const std::vector<ScalarColumn>& columns,
               const std::filesystem::path& path);

/// ASCII PLY with one double vertex property per column.
void write_ply(const Points3& points, const std::vector<ScalarColumn>& columns,
               const std::filesystem::path& path);

void write_ply(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace ksudf
