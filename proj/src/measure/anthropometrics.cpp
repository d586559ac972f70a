#include "bodyfit/measure/anthropometrics.hpp"

#include <algorithm>
#include <cmath>

#include "bodyfit/error.hpp"

namespace bodyfit {

namespace {

constexpr double kTiny = 1e-9;

template <typename F>
auto tagged(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context(what);
  }
}

}  // namespace

void Tolerances::validate() const {
  for (double e : {eps1, eps2, eps3})
    if (!(e > 0.0 && e < 0.5)) fail(ErrorCode::InvalidArgument, "tolerances must lie in (0, 0.5)");
  if (!(section_radius > 0.0) ||
      std::any_of(section_shoulder_ratio.begin(), section_shoulder_ratio.end(), [](double r) { return !(r > 0.0); }))
    fail(ErrorCode::InvalidArgument, "section clip parameters must be positive");
  if (smoothing_half_cols < 0 || smoothing_half_rows < 0 || !(smoothing_gate > 0.0))
    fail(ErrorCode::InvalidArgument, "smoothing window must be non-negative with a positive gate");
}

PrincipalAxes principal_axes(const Skeleton15& sk, const Tolerances& tol) {
  using J = JointId;
  if (!sk.all_finite()) fail(ErrorCode::DegenerateSkeleton, "skeleton has non-finite joints");
  const Vec3 down = sk[J::TO] - sk[J::NE];
  if (down.norm() < kTiny) fail(ErrorCode::DegenerateSkeleton, "NE and TO coincide");
  const Vec3 across = sk[J::RS] - sk[J::LS];
  if (across.norm() < kTiny) fail(ErrorCode::DegenerateSkeleton, "LS and RS coincide");
  PrincipalAxes ax;
  ax.u = down.normalized();
  const Vec3 v = across - across.dot(ax.u) * ax.u;
  if (v.norm() < kTiny * across.norm()) fail(ErrorCode::DegenerateSkeleton, "shoulder line parallel to torso");
  ax.v = v.normalized();
  ax.w = ax.u.cross(ax.v).normalized();

  const Vec3 to_hips = 0.5 * (sk[J::LH] + sk[J::RH]) - sk[J::TO];
  if (to_hips.norm() < kTiny) fail(ErrorCode::DegenerateSkeleton, "hip midpoint coincides with TO");
  const Vec3 d = to_hips.normalized();
  const double score = tol.literal_verticality ? std::abs(ax.u.dot(d)) : ax.u.cross(d).norm();
  if (!(score < tol.eps1))
    fail(ErrorCode::Posture, "posture is not vertical (score " + std::to_string(score) + ")");
  return ax;
}

double estimate_height(const Contour2D& contour, const DepthFrame& frame, const Skeleton15& sk,
                       const PrincipalAxes& axes, const Tolerances& tol) {
  if (contour.points.empty()) fail(ErrorCode::InsufficientContour, "empty contour");
  const auto& in = frame.intrinsics;
  const Vec3& to = sk[JointId::TO];
  const Vec2 t2 = project(to, in);
  const Vec2 v2 = (project(to + 0.1 * axes.v, in) - t2).normalized();

  const PixelCoord* top = nullptr;
  const PixelCoord* bottom = nullptr;
  double top_lat = 0.0, bottom_lat = 0.0;
  std::size_t selected = 0;
  for (const auto& p : contour.points) {
    const Vec2 d(p.col - t2.x(), p.row - t2.y());
    const double len = d.norm();
    if (len == 0.0) continue;
    const double lat = std::abs(d.dot(v2)) / len;
    if (!(lat < tol.eps2)) continue;
    ++selected;
    if (!top || p.row < top->row || (p.row == top->row && lat < top_lat)) {
      top = &p;
      top_lat = lat;
    }
    if (!bottom || p.row > bottom->row || (p.row == bottom->row && lat < bottom_lat)) {
      bottom = &p;
      bottom_lat = lat;
    }
  }
  if (selected < 2 || top->row == bottom->row)
    fail(ErrorCode::InsufficientContour, std::to_string(selected) + " contour points near the body axis");
  const auto lift = [&](const PixelCoord& p) {
    const std::uint16_t raw = frame.at(p.row, p.col);
    if (raw == 0) fail(ErrorCode::InsufficientContour, "contour pixel without depth");
    return unproject_pixel(p.col, p.row, raw * in.depth_unit, in);
  };
  return 100.0 * (lift(*top) - lift(*bottom)).norm();
}

LimbLengths limb_lengths(const Skeleton15& sk) {
  using J = JointId;
  if (!sk.all_finite()) fail(ErrorCode::DegenerateSkeleton, "skeleton has non-finite joints");
  const auto d = [&](J a, J b) {
    const double len = (sk[a] - sk[b]).norm();
    if (len < kTiny)
      fail(ErrorCode::DegenerateSkeleton,
           std::string(joint_name(a)) + " and " + std::string(joint_name(b)) + " coincide");
    return len;
  };
  LimbLengths out;
  out.sleeve = 50.0 * (d(J::LA, J::LE) + d(J::LE, J::LS) + d(J::LS, J::NE) + d(J::RA, J::RE) + d(J::RE, J::RS) +
                       d(J::RS, J::NE));
  out.leg = 50.0 * (d(J::LH, J::LK) + d(J::LK, J::LF) + d(J::RH, J::RK) + d(J::RK, J::RF));
  out.shoulder = 100.0 * d(J::LS, J::RS);
  return out;
}

std::array<Vec3, 5> derived_joints(const Skeleton15& sk) {
  using J = JointId;
  std::array<Vec3, 5> x;
  x[static_cast<int>(Girth::Neck)] = 0.5 * (sk[J::NE] + sk[J::HE]);
  x[static_cast<int>(Girth::Shoulder)] = 0.5 * (x[static_cast<int>(Girth::Neck)] + 0.5 * (sk[J::LS] + sk[J::RS]));
  x[static_cast<int>(Girth::Chest)] = 0.5 * (sk[J::NE] + sk[J::TO]);
  x[static_cast<int>(Girth::Waist)] = sk[J::TO];
  x[static_cast<int>(Girth::Hip)] = 0.5 * (sk[J::LH] + sk[J::RH]);
  return x;
}

std::vector<Vec2> cross_section_points(const PointCloud& cloud, const PrincipalAxes& axes, const Vec3& anchor,
                                       const Tolerances& tol, double clip_radius) {
  if (cloud.empty()) fail(ErrorCode::EmptyCloud, "cross-section of an empty cloud");
  std::vector<Vec2> out;
  const double clip2 = clip_radius * clip_radius;
  for (const Vec3& p : cloud.points) {
    const Vec3 d = p - anchor;
    const double n2 = d.squaredNorm();
    if (!(n2 < clip2)) continue;
    const double along = std::abs(d.dot(axes.u));
    // |d.u| / |d| < eps3, with a point at the anchor itself counted in.
    if (n2 > 0.0 && !(along < tol.eps3 * std::sqrt(n2))) continue;
    out.emplace_back(d.dot(axes.v), d.dot(axes.w));
  }
  if (out.size() < 6) fail(ErrorCode::EmptySection, std::to_string(out.size()) + " points in the cross-section");
  return out;
}

double section_clip_radius(const Skeleton15& sk, const Tolerances& tol, Girth girth) {
  return std::min(tol.section_radius, tol.section_shoulder_ratio[static_cast<std::size_t>(girth)] *
                                          (sk[JointId::LS] - sk[JointId::RS]).norm());
}

std::array<GirthDetail, 5> measure_girths(const PointCloud& cloud, const Skeleton15& sk, const PrincipalAxes& axes,
                                          const Tolerances& tol) {
  const auto anchors = derived_joints(sk);
  std::array<GirthDetail, 5> out;
  for (Girth g : kAllGirths) {
    const auto i = static_cast<std::size_t>(g);
    tagged(std::string("girth_") + std::string(girth_name(g)), [&] {
      out[i].points = cross_section_points(cloud, axes, anchors[i], tol, section_clip_radius(sk, tol, g));
      out[i].fit = fit_ellipse(out[i].points);
      out[i].girth_cm = 100.0 * ellipse_perimeter(out[i].fit);
      return 0;
    });
  }
  return out;
}

MeasurementDetail measure_all_detailed(const DepthFrame& frame, const Skeleton15& sk, const Tolerances& tol) {
  tol.validate();
  MeasurementDetail r;
  r.silhouette = tagged("silhouette", [&] { return extract_silhouette_contour(frame); });
  r.cloud = unproject_smoothed(frame, r.silhouette.mask, tol.smoothing_half_cols, tol.smoothing_half_rows,
                               tol.smoothing_gate);
  r.axes = tagged("posture", [&] { return principal_axes(sk, tol); });
  Measurements& m = r.measurements;
  m.height = tagged("height", [&] { return estimate_height(r.silhouette.contour, frame, sk, r.axes, tol); });
  const LimbLengths limbs = tagged("limb_lengths", [&] { return limb_lengths(sk); });
  m.sleeve_length = limbs.sleeve;
  m.leg_length = limbs.leg;
  m.shoulder_length = limbs.shoulder;
  r.girths = measure_girths(r.cloud, sk, r.axes, tol);
  m.girth_neck = r.girths[static_cast<int>(Girth::Neck)].girth_cm;
  m.girth_shoulder = r.girths[static_cast<int>(Girth::Shoulder)].girth_cm;
  m.girth_chest = r.girths[static_cast<int>(Girth::Chest)].girth_cm;
  m.girth_waist = r.girths[static_cast<int>(Girth::Waist)].girth_cm;
  m.girth_hip = r.girths[static_cast<int>(Girth::Hip)].girth_cm;
  return r;
}

Measurements measure_all(const DepthFrame& frame, const Skeleton15& sk, const Tolerances& tol) {
  return measure_all_detailed(frame, sk, tol).measurements;
}

}  // namespace bodyfit
