#pragma once

#include "bodyfit/features/feature_vector.hpp"
#include "bodyfit/features/geodesic.hpp"
#include "bodyfit/measure/anthropometrics.hpp"

namespace bodyfit {

struct FeatureOptions {
  double voxel = 0.025;          // m, downsampling before normals and FPFH
  double normal_radius = 0.08;   // m
  double geodesic_voxel = 0.01;  // m, 0 keeps the full cloud for the surface graph
  FpfhOptions fpfh;
  GeodesicOptions geodesic;
  Tolerances tolerances;
  GroupWeights weights;

  void validate() const;
};

// Cloud point closest to the ray from `viewpoint` through `target`, i.e. the
// visible surface point in front of a joint.
std::uint32_t surface_point_on_ray(const std::vector<Vec3>& points, const Vec3& viewpoint, const Vec3& target);

// ratio1 = geodesic / Euclidean distance between the surface points in
// front of LS and RS; ratio2 = hip / waist girth.
GenderRatios gender_ratios(const SurfaceGraph& graph, const Skeleton15& sk, const Measurements& m,
                           const Vec3& viewpoint = Vec3::Zero());
GenderRatios gender_ratios(const PointCloud& cloud, const Skeleton15& sk, const Measurements& m,
                           const GeodesicOptions& options = {}, const Vec3& viewpoint = Vec3::Zero());

// Descriptors at the 15 joints of `sk`, computed over `cloud` (with normals).
JointDescriptors joint_descriptors(const PointCloud& cloud, const Skeleton15& sk, const FpfhOptions& options = {});

struct ExtractedFeatures {
  MeasurementDetail detail;
  PointCloud sampled;  // voxel-downsampled cloud with normals
  GenderRatios ratios;
  JointDescriptors descriptors;
  FeatureVector vector;
};

// Measurements, gender ratios and joint descriptors from one frontal frame.
// Errors carry the failing stage in their context.
ExtractedFeatures extract_features(const DepthFrame& frame, const Skeleton15& sk, const FeatureOptions& options = {});

}  // namespace bodyfit
