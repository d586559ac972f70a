#pragma once

#include <optional>
#include <vector>

#include "bodyfit/core/camera.hpp"
#include "bodyfit/core/types.hpp"

namespace bodyfit {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;             // empty, or parallel to points
  std::vector<PixelCoord> source_pixel;  // empty, or parallel to points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty() && normals.size() == points.size(); }

  // Flag value for points whose neighbourhood was too small to fit a plane.
  static Vec3 degenerate_normal() { return Vec3::Zero(); }
  bool normal_valid(std::size_t i) const { return has_normals() && normals[i].squaredNorm() > 0.5; }
};

// One point per valid pixel, with source_pixel filled in.
PointCloud unproject(const DepthFrame& frame);

// Same, restricted to pixels where mask is non-zero.
PointCloud unproject(const DepthFrame& frame, const std::vector<std::uint8_t>& mask);

// Same points, each with its depth replaced by the intercept of a local
// linear fit z(col, row) over the masked pixels of a (2*half_cols+1) x
// (2*half_rows+1) window whose depth lies within `gate` meters of the centre
// (a fit in rows only when half_cols is 0). Planar patches are reproduced
// exactly; sensor noise is averaged down. Falls back to the raw depth when
// too few pixels qualify. Both half sizes 0 is plain unproject.
PointCloud unproject_smoothed(const DepthFrame& frame, const std::vector<std::uint8_t>& mask, int half_cols,
                              int half_rows, double gate);

// Applies x -> R x + t to points and R to normals.
PointCloud transformed(const PointCloud& cloud, const Mat3& rotation, const Vec3& translation);

// Replaces the points falling in each cubic voxel of side `voxel` by their
// centroid. Output order follows the first occurrence of each voxel in the
// input, so the result does not depend on hash iteration order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

}  // namespace bodyfit
