#pragma once

#include <array>
#include <limits>
#include <vector>

#include "bodyfit/core/camera.hpp"
#include "bodyfit/core/point_cloud.hpp"
#include "bodyfit/core/silhouette.hpp"
#include "bodyfit/core/skeleton.hpp"
#include "bodyfit/measure/ellipse.hpp"
#include "bodyfit/measure/measurements.hpp"

namespace bodyfit {

struct PrincipalAxes {
  Vec3 u = Vec3::UnitY();  // down the torso, NE -> TO
  Vec3 v = Vec3::UnitX();  // across the shoulders, LS -> RS
  Vec3 w = Vec3::UnitZ();  // u x v
};

struct Tolerances {
  double eps1 = 0.1;  // verticality
  double eps2 = 0.1;  // contour selection for height
  double eps3 = 0.1;  // cross-section slab
  // Cross-section points must lie within min(section_radius,
  // section_shoulder_ratio[girth] * |LS - RS|) of the anchor. The tighter
  // upper-body ratios keep the arms out of the shoulder and chest slabs.
  double section_radius = 0.45;
  std::array<double, 5> section_shoulder_ratio = {0.9, 0.75, 0.75, 0.9, 0.9};
  // Depth smoothing before the girth sections (see unproject_smoothed).
  // Mostly vertical, since sections are horizontal and the body changes
  // slowly with height; 0 x 0 disables it.
  int smoothing_half_cols = 1;  // pixels
  int smoothing_half_rows = 4;
  double smoothing_gate = 0.03;  // m
  // Accept the posture when |u . d| < eps1 instead of |u x d| < eps1.
  bool literal_verticality = false;

  void validate() const;  // InvalidArgument
};

// Throws DegenerateSkeleton (coincident NE/TO or LS/RS) or Posture.
PrincipalAxes principal_axes(const Skeleton15& sk, const Tolerances& tol = {});

// Height in cm from the silhouette contour. Throws InsufficientContour.
double estimate_height(const Contour2D& contour, const DepthFrame& frame, const Skeleton15& sk,
                       const PrincipalAxes& axes, const Tolerances& tol = {});

// Sleeve, leg and shoulder lengths in cm. Throws DegenerateSkeleton.
LimbLengths limb_lengths(const Skeleton15& sk);

// Cross-section anchors, indexed by Girth: neck, shoulder, chest, waist, hip.
std::array<Vec3, 5> derived_joints(const Skeleton15& sk);

// Points of `cloud` in the slab |(x - p) . u| / |x - p| < eps3 around `anchor`
// and within `clip_radius`, expressed in the (v, w) plane coordinates
// relative to the anchor. Throws EmptySection when fewer than 6 survive.
std::vector<Vec2> cross_section_points(const PointCloud& cloud, const PrincipalAxes& axes, const Vec3& anchor,
                                       const Tolerances& tol = {},
                                       double clip_radius = std::numeric_limits<double>::infinity());

// Clip radius used by measure_all for one girth.
double section_clip_radius(const Skeleton15& sk, const Tolerances& tol, Girth girth);

struct GirthDetail {
  std::vector<Vec2> points;
  EllipseFit fit;
  double girth_cm = 0.0;
};

struct MeasurementDetail {
  Measurements measurements;
  Silhouette silhouette;
  PointCloud cloud;  // frontal points of the subject, depth-smoothed
  PrincipalAxes axes;
  std::array<GirthDetail, 5> girths;
};

// Five girths (cm) from a cloud and skeleton, indexed by Girth.
std::array<GirthDetail, 5> measure_girths(const PointCloud& cloud, const Skeleton15& sk, const PrincipalAxes& axes,
                                          const Tolerances& tol = {});

// The full frontal pipeline. Errors carry the name of the failing
// measurement in their context.
MeasurementDetail measure_all_detailed(const DepthFrame& frame, const Skeleton15& sk, const Tolerances& tol = {});
Measurements measure_all(const DepthFrame& frame, const Skeleton15& sk, const Tolerances& tol = {});

}  // namespace bodyfit
