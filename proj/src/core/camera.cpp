#include "bodyfit/core/camera.hpp"

#include <cmath>
#include <unordered_map>

#include "bodyfit/core/point_cloud.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::NoSubject: return "NoSubject";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::ModelOutOfFrustum: return "ModelOutOfFrustum";
    case ErrorCode::MissingSourceJoint: return "MissingSourceJoint";
    case ErrorCode::Posture: return "PostureError";
    case ErrorCode::DegenerateSkeleton: return "DegenerateSkeleton";
    case ErrorCode::InsufficientContour: return "InsufficientContour";
    case ErrorCode::EmptySection: return "EmptySection";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NotAnEllipse: return "NotAnEllipse";
    case ErrorCode::SparseNeighborhood: return "SparseNeighborhood";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::MissingDescriptor: return "MissingDescriptor";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::Internal: return "InternalError";
  }
  return "UnknownError";
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvalidArgument, "focal lengths must be positive");
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    fail(ErrorCode::InvalidArgument, "principal point outside the image");
  if (!(depth_unit > 0.0)) fail(ErrorCode::InvalidArgument, "depth_unit must be positive");
}

void DepthFrame::validate() const {
  intrinsics.validate();
  if (data.size() != intrinsics.pixel_count())
    fail(ErrorCode::InvalidArgument, "depth buffer size does not match width*height");
}

Vec2 project(const Vec3& p, const CameraIntrinsics& in) {
  if (!(p.z() > 0.0)) fail(ErrorCode::NonPositiveDepth, "cannot project a point with z <= 0");
  return {in.cx + in.fx * p.x() / p.z(), in.cy - in.fy * p.y() / p.z()};
}

PointCloud unproject(const DepthFrame& frame) {
  return unproject(frame, {});
}

PointCloud unproject(const DepthFrame& frame, const std::vector<std::uint8_t>& mask) {
  frame.validate();
  const bool masked = !mask.empty();
  if (masked && mask.size() != frame.data.size())
    fail(ErrorCode::InvalidArgument, "mask size does not match frame");
  PointCloud cloud;
  const auto& in = frame.intrinsics;
  for (int r = 0; r < in.height; ++r) {
    for (int c = 0; c < in.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * in.width + c;
      if (frame.data[i] == 0 || (masked && !mask[i])) continue;
      cloud.points.push_back(unproject_pixel(c, r, frame.data[i] * in.depth_unit, in));
      cloud.source_pixel.push_back({r, c});
    }
  }
  return cloud;
}

PointCloud unproject_smoothed(const DepthFrame& frame, const std::vector<std::uint8_t>& mask, int hc, int hr,
                              double gate) {
  if (hc < 0 || hr < 0) fail(ErrorCode::InvalidArgument, "smoothing window must be non-negative");
  if (hc == 0 && hr == 0) return unproject(frame, mask);
  frame.validate();
  if (mask.size() != frame.data.size()) fail(ErrorCode::InvalidArgument, "mask size does not match frame");
  if (!(gate > 0.0)) fail(ErrorCode::InvalidArgument, "smoothing gate must be positive");
  const auto& in = frame.intrinsics;
  const int W = in.width, H = in.height;
  const double g = gate / in.depth_unit;  // in depth units
  PointCloud cloud;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * W + c;
      if (frame.data[i] == 0 || !mask[i]) continue;
      const double z0 = frame.data[i];
      // Normal equations of z = a + b du + e dv, accumulated around z0.
      double n = 0, su = 0, sv = 0, suu = 0, suv = 0, svv = 0, sz = 0, szu = 0, szv = 0;
      for (int dr = std::max(-hr, -r); dr <= std::min(hr, H - 1 - r); ++dr) {
        const std::size_t row = static_cast<std::size_t>(r + dr) * W;
        for (int dc = std::max(-hc, -c); dc <= std::min(hc, W - 1 - c); ++dc) {
          const std::size_t j = row + c + dc;
          if (frame.data[j] == 0 || !mask[j]) continue;
          const double z = frame.data[j] - z0;
          if (std::abs(z) > g) continue;
          n += 1;
          su += dc, sv += dr;
          suu += dc * dc, suv += dc * dr, svv += dr * dr;
          sz += z, szu += z * dc, szv += z * dr;
        }
      }
      double z = z0;
      if (hc == 0 || hr == 0) {
        // Line fit along the single varying axis.
        const double s1 = hc == 0 ? sv : su, s2 = hc == 0 ? svv : suu, sz1 = hc == 0 ? szv : szu;
        const double det = n * s2 - s1 * s1;
        if (n >= 3 && std::abs(det) > 1e-9) z = z0 + (sz * s2 - s1 * sz1) / det;
      } else if (n >= 6) {
        // Cramer's rule on the 3x3 system for the intercept.
        const double det = n * (suu * svv - suv * suv) - su * (su * svv - suv * sv) + sv * (su * suv - suu * sv);
        if (std::abs(det) > 1e-9) {
          const double da = sz * (suu * svv - suv * suv) - su * (szu * svv - suv * szv) + sv * (szu * suv - suu * szv);
          z = z0 + da / det;
        }
      }
      cloud.points.push_back(unproject_pixel(c, r, z * in.depth_unit, in));
      cloud.source_pixel.push_back({r, c});
    }
  }
  return cloud;
}

PointCloud transformed(const PointCloud& cloud, const Mat3& R, const Vec3& t) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = R * p + t;
  for (auto& n : out.normals) n = R * n;
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) fail(ErrorCode::InvalidArgument, "voxel size must be positive");
  struct Acc {
    Vec3 sum = Vec3::Zero();
    std::size_t n = 0;
  };
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<Acc> acc;
  slot.reserve(cloud.size());
  const double inv = 1.0 / voxel;
  for (const Vec3& p : cloud.points) {
    const auto key_of = [&](double v) {
      return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(v * inv)) + (1 << 20)) & 0x1FFFFF;
    };
    const std::uint64_t key = (key_of(p.x()) << 42) | (key_of(p.y()) << 21) | key_of(p.z());
    auto [it, inserted] = slot.try_emplace(key, acc.size());
    if (inserted) acc.emplace_back();
    acc[it->second].sum += p;
    acc[it->second].n += 1;
  }
  PointCloud out;
  out.points.reserve(acc.size());
  for (const auto& a : acc) out.points.push_back(a.sum / static_cast<double>(a.n));
  return out;
}

}  // namespace bodyfit
