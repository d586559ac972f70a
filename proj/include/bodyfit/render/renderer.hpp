#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bodyfit/core/camera.hpp"
#include "bodyfit/core/skeleton.hpp"
#include "bodyfit/synth/body_model.hpp"

namespace bodyfit {

enum class View { Frontal, Back };

struct RenderConfig {
  // 640x480 with a wider field of view than the Kinect v1 so a standing
  // adult fits at 2 m.
  CameraIntrinsics intrinsics = CameraIntrinsics::wide_vga();
  double camera_distance = 2.0;  // m, from the camera to the model's z = 0 plane
  View view = View::Frontal;
  double noise_sd_mm = 0.0;
  std::uint64_t noise_seed = 0;

  void validate() const;
};

struct RenderResult {
  DepthFrame frame;
  Skeleton15 skeleton;                      // camera space
  std::array<Vec2, kJointCount> joint_pixels;  // (col, row)
  std::size_t covered_pixels = 0;           // pixels hit by at least one triangle
};

// Rigid transform taking model space to camera space for `cfg`: the camera
// looks at the model's mid-height from the front (or from behind).
std::pair<Mat3, Vec3> camera_pose(const BodyModel& model, const RenderConfig& cfg);

// Z-buffer rasterization of camera-space triangles. Pixel centres sit on
// integer coordinates, nearest depth wins, shared edges use a top-left rule,
// depth is interpolated perspective-correctly. Uncovered pixels read 0.
// Optional Gaussian noise (mm) is added before rounding to whole depth units.
DepthFrame rasterize(const std::vector<Vec3>& vertices, const std::vector<std::array<std::uint32_t, 3>>& triangles,
                     const CameraIntrinsics& intrinsics, double noise_sd_mm = 0.0, std::uint64_t noise_seed = 0,
                     std::size_t* covered_pixels = nullptr);

// Throws ModelOutOfFrustum when fewer than half of the mesh vertices project
// inside the image.
RenderResult render_depth(const BodyModel& model, const RenderConfig& cfg = {});

// Throws NonPositiveDepth for a joint at or behind the camera plane.
std::array<Vec2, kJointCount> project_joints(const Skeleton15& skeleton, const CameraIntrinsics& intrinsics);

}  // namespace bodyfit
