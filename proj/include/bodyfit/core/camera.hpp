#pragma once

#include <cstdint>
#include <vector>

#include "bodyfit/core/types.hpp"

namespace bodyfit {

// Pinhole intrinsics without distortion. World frame is y-up, z forward;
// image rows grow downward.
struct CameraIntrinsics {
  double fx = 588.0;
  double fy = 588.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  double depth_unit = 0.001;  // meters per stored depth unit

  // 57 x 43 degree field of view at 640x480 (first-generation structured
  // light sensor).
  static CameraIntrinsics kinect_v1() { return {}; }

  // 640x480 with a ~77 x 62 degree field of view. A standing adult with
  // arms lowered fits entirely at 2 m, which the narrow lens cannot do.
  static CameraIntrinsics wide_vga() { return {400.0, 400.0, 320.0, 240.0, 640, 480, 0.001}; }

  void validate() const;
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Single-channel depth image, row-major, 0 marks an invalid pixel.
struct DepthFrame {
  CameraIntrinsics intrinsics;
  std::vector<std::uint16_t> data;

  DepthFrame() = default;
  explicit DepthFrame(const CameraIntrinsics& intr)
      : intrinsics(intr), data(intr.pixel_count(), 0) {}

  int width() const { return intrinsics.width; }
  int height() const { return intrinsics.height; }
  std::uint16_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width() + col]; }
  std::uint16_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width() + col]; }
  double meters(int row, int col) const { return at(row, col) * intrinsics.depth_unit; }

  void validate() const;
};

struct PixelCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

// Ray through pixel (col, row) scaled to depth z.
inline Vec3 unproject_pixel(double col, double row, double z, const CameraIntrinsics& in) {
  return {(col - in.cx) * z / in.fx, -(row - in.cy) * z / in.fy, z};
}

// Real-valued (col, row) of a camera-space point. Throws NonPositiveDepth
// when z <= 0.
Vec2 project(const Vec3& point, const CameraIntrinsics& intrinsics);

}  // namespace bodyfit
