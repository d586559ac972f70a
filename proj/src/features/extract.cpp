#include "bodyfit/features/extract.hpp"

#include <limits>

#include "bodyfit/core/normals.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

void FeatureOptions::validate() const {
  if (!(voxel > 0.0) || !(normal_radius > 0.0) || !(geodesic_voxel >= 0.0)) fail(ErrorCode::InvalidArgument, "voxel and normal radius must be positive");
  tolerances.validate();
  weights.validate();
}

std::uint32_t surface_point_on_ray(const std::vector<Vec3>& points, const Vec3& viewpoint, const Vec3& target) {
  if (points.empty()) fail(ErrorCode::EmptyCloud, "no surface points");
  const Vec3 dir = target - viewpoint;
  if (!(dir.norm() > 0.0)) fail(ErrorCode::InvalidArgument, "ray target coincides with the viewpoint");
  const Vec3 d = dir.normalized();
  std::uint32_t best = 0;
  double best_off = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Vec3 q = points[i] - viewpoint;
    const double off = (q - q.dot(d) * d).squaredNorm();
    if (off < best_off) {
      best_off = off;
      best = i;
    }
  }
  return best;
}

GenderRatios gender_ratios(const SurfaceGraph& graph, const Skeleton15& sk, const Measurements& m,
                           const Vec3& viewpoint) {
  if (!(m.girth_waist > 0.0) || !(m.girth_hip > 0.0)) fail(ErrorCode::EmptySection, "hip or waist girth missing");
  const auto& pts = graph.points();
  const std::uint32_t a = surface_point_on_ray(pts, viewpoint, sk[JointId::LS]);
  const std::uint32_t b = surface_point_on_ray(pts, viewpoint, sk[JointId::RS]);
  const double euclid = (pts[a] - pts[b]).norm();
  if (!(euclid > 0.0)) fail(ErrorCode::DegenerateSkeleton, "LS and RS map to the same surface point");
  GenderRatios r;
  r.ratio1 = graph.distance_between(a, b) / euclid;
  r.ratio2 = m.girth_hip / m.girth_waist;
  return r;
}

GenderRatios gender_ratios(const PointCloud& cloud, const Skeleton15& sk, const Measurements& m,
                           const GeodesicOptions& options, const Vec3& viewpoint) {
  return gender_ratios(SurfaceGraph(cloud, options), sk, m, viewpoint);
}

JointDescriptors joint_descriptors(const PointCloud& cloud, const Skeleton15& sk, const FpfhOptions& options) {
  FpfhEstimator est(cloud, options);
  JointDescriptors out;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const auto id = static_cast<JointId>(j);
    try {
      out[j] = est.at(sk[id]);
    } catch (const Error& e) {
      throw e.with_context(std::string("fpfh ") + std::string(joint_name(id)));
    }
  }
  return out;
}

ExtractedFeatures extract_features(const DepthFrame& frame, const Skeleton15& sk, const FeatureOptions& options) {
  options.validate();
  ExtractedFeatures x;
  x.detail = measure_all_detailed(frame, sk, options.tolerances);
  x.sampled = estimate_normals(voxel_downsample(x.detail.cloud, options.voxel), options.normal_radius, Vec3::Zero());
  try {
    const PointCloud& surface = x.detail.cloud;
    x.ratios = options.geodesic_voxel > 0.0
                   ? gender_ratios(voxel_downsample(surface, options.geodesic_voxel), sk, x.detail.measurements,
                                   options.geodesic)
                   : gender_ratios(surface, sk, x.detail.measurements, options.geodesic);
  } catch (const Error& e) {
    throw e.with_context("gender_ratios");
  }
  x.descriptors = joint_descriptors(x.sampled, sk, options.fpfh);
  x.vector = assemble_feature_vector(x.detail.measurements, x.ratios, x.descriptors, options.weights);
  return x;
}

}  // namespace bodyfit
