#include "bodyfit/render/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bodyfit/core/random.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

void RenderConfig::validate() const {
  intrinsics.validate();
  if (!(camera_distance >= kSensorMinRange && camera_distance <= kSensorMaxRange))
    fail(ErrorCode::InvalidArgument, "camera distance outside the sensor range");
  if (!(noise_sd_mm >= 0.0)) fail(ErrorCode::InvalidArgument, "noise sd must be non-negative");
}

std::pair<Mat3, Vec3> camera_pose(const BodyModel& model, const RenderConfig& cfg) {
  const double mid = 0.5 * model.params.height;
  Mat3 R = Mat3::Identity();
  if (cfg.view == View::Back) R.diagonal() << -1.0, 1.0, -1.0;
  return {R, Vec3(0.0, -mid, cfg.camera_distance)};
}

namespace {

// Pixels on an edge belong to the triangle for which the edge runs downward,
// or leftward when horizontal; for two triangles sharing an edge exactly one
// of them claims it.
bool owns_edge(double dx, double dy) { return dy > 0.0 || (dy == 0.0 && dx < 0.0); }

}  // namespace

DepthFrame rasterize(const std::vector<Vec3>& vertices, const std::vector<std::array<std::uint32_t, 3>>& triangles,
                     const CameraIntrinsics& in, double noise_sd_mm, std::uint64_t noise_seed,
                     std::size_t* covered_pixels) {
  in.validate();
  const int W = in.width, H = in.height;
  std::vector<double> zbuf(in.pixel_count(), std::numeric_limits<double>::infinity());
  constexpr double kNear = 1e-3;

  for (const auto& tri : triangles) {
    Vec3 P[3];
    double sx[3], sy[3];
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      if (tri[k] >= vertices.size()) fail(ErrorCode::InvalidArgument, "triangle index out of range");
      P[k] = vertices[tri[k]];
      if (!(P[k].z() > kNear)) ok = false;
      sx[k] = in.cx + in.fx * P[k].x() / P[k].z();
      sy[k] = in.cy - in.fy * P[k].y() / P[k].z();
    }
    if (!ok) continue;
    double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
    if (area == 0.0 || !std::isfinite(area)) continue;
    int idx[3] = {0, 1, 2};
    if (area < 0.0) {
      std::swap(idx[1], idx[2]);
      area = -area;
    }
    const double ax = sx[idx[0]], ay = sy[idx[0]], bx = sx[idx[1]], by = sy[idx[1]], cx = sx[idx[2]],
                 cy = sy[idx[2]];
    const double iz0 = 1.0 / P[idx[0]].z(), iz1 = 1.0 / P[idx[1]].z(), iz2 = 1.0 / P[idx[2]].z();
    const int c0 = std::max(0, static_cast<int>(std::ceil(std::min({ax, bx, cx}))));
    const int c1 = std::min(W - 1, static_cast<int>(std::floor(std::max({ax, bx, cx}))));
    const int r0 = std::max(0, static_cast<int>(std::ceil(std::min({ay, by, cy}))));
    const int r1 = std::min(H - 1, static_cast<int>(std::floor(std::max({ay, by, cy}))));
    if (c0 > c1 || r0 > r1) continue;
    // Edge e_k is opposite vertex k: e0 = b->c, e1 = c->a, e2 = a->b.
    const bool own0 = owns_edge(cx - bx, cy - by), own1 = owns_edge(ax - cx, ay - cy),
               own2 = owns_edge(bx - ax, by - ay);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double px = c, py = r;
        const double w0 = (cx - bx) * (py - by) - (cy - by) * (px - bx);
        const double w1 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx);
        const double w2 = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        if ((w0 == 0.0 && !own0) || (w1 == 0.0 && !own1) || (w2 == 0.0 && !own2)) continue;
        const double inv_z = (w0 * iz0 + w1 * iz1 + w2 * iz2) / area;
        const double z = 1.0 / inv_z;
        double& dst = zbuf[static_cast<std::size_t>(r) * W + c];
        if (z < dst) dst = z;
      }
    }
  }

  DepthFrame frame(in);
  std::size_t covered = 0;
  std::mt19937_64 rng = stream_rng(noise_seed, 0x6e6f697365ull);
  const double unit_mm = in.depth_unit * 1000.0;
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (!std::isfinite(zbuf[i])) continue;
    ++covered;
    double mm = zbuf[i] * 1000.0;
    if (noise_sd_mm > 0.0) mm += noise_sd_mm * standard_normal(rng);
    const double units = std::round(mm / unit_mm);
    frame.data[i] = static_cast<std::uint16_t>(std::clamp(units, 1.0, 65535.0));
  }
  if (covered_pixels) *covered_pixels = covered;
  return frame;
}

std::array<Vec2, kJointCount> project_joints(const Skeleton15& sk, const CameraIntrinsics& in) {
  std::array<Vec2, kJointCount> out;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    try {
      out[i] = project(sk.joints[i], in);
    } catch (Error& e) {
      throw e.with_context(std::string("joint ") + std::string(joint_name(static_cast<JointId>(i))));
    }
  }
  return out;
}

RenderResult render_depth(const BodyModel& model, const RenderConfig& cfg) {
  cfg.validate();
  const auto [R, t] = camera_pose(model, cfg);
  std::vector<Vec3> cam;
  cam.reserve(model.mesh.vertices.size());
  std::size_t inside = 0;
  const auto& in = cfg.intrinsics;
  for (const Vec3& v : model.mesh.vertices) {
    const Vec3 p = R * v + t;
    cam.push_back(p);
    if (p.z() <= 0.0) continue;
    const double c = in.cx + in.fx * p.x() / p.z(), r = in.cy - in.fy * p.y() / p.z();
    if (c >= -0.5 && c < in.width - 0.5 && r >= -0.5 && r < in.height - 0.5) ++inside;
  }
  if (2 * inside < cam.size())
    fail(ErrorCode::ModelOutOfFrustum, std::to_string(inside) + " of " + std::to_string(cam.size()) +
                                           " vertices project inside the image");
  RenderResult out;
  out.frame = rasterize(cam, model.mesh.triangles, in, cfg.noise_sd_mm, cfg.noise_seed, &out.covered_pixels);
  out.skeleton = model.skeleton.transformed(R, t);
  out.joint_pixels = project_joints(out.skeleton, in);
  return out;
}

}  // namespace bodyfit
