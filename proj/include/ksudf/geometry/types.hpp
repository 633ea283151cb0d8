#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace ksudf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Points3 = std::vector<Vec3>;
using Points2 = std::vector<Vec2>;

}  // namespace ksudf
