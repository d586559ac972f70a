#pragma once

#include "bodyfit/core/point_cloud.hpp"

namespace bodyfit {

inline constexpr double kDefaultNormalRadius = 0.025;

// Surface normal per point from the covariance of its radius neighbourhood:
// the eigenvector of the smallest eigenvalue, oriented toward `viewpoint`.
// Points with fewer than three neighbours (self included) receive
// PointCloud::degenerate_normal().
PointCloud estimate_normals(const PointCloud& cloud, double radius, const Vec3& viewpoint);

}  // namespace bodyfit
