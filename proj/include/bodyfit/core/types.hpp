#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace bodyfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Working range of the emulated structured-light sensor, meters.
inline constexpr double kSensorMinRange = 0.8;
inline constexpr double kSensorMaxRange = 4.0;

}  // namespace bodyfit
