#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bodyfit/core/point_cloud.hpp"
#include "bodyfit/core/skeleton.hpp"
#include "bodyfit/synth/body_model.hpp"

namespace bodyfit {

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform then(const RigidTransform& next) const;  // next o this
  RigidTransform inverse() const;
};

// Least-squares rigid transform mapping src[i] onto dst[i] (Kabsch).
// Throws DegenerateSkeleton when the points are (nearly) collinear.
RigidTransform kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

// Transform mapping the source skeleton's joints onto the target's.
RigidTransform skeleton_align_init(const Skeleton15& source, const Skeleton15& target);

struct IcpOptions {
  std::size_t max_iterations = 30;
  double convergence_delta = 1e-4;  // m
  double reject_factor = 3.0;       // pairs beyond this times the median distance are dropped
};

struct IcpReport {
  RigidTransform transform;
  std::vector<double> errors;  // mean kept-pair distance per iteration, m
  std::size_t iterations = 0;
  bool converged = false;
};

// Point-to-point ICP moving `source` onto `target`. errors[i] is the mean
// correspondence distance measured at the start of iteration i + 1, so
// errors[0] reflects `init`. Throws EmptyCloud.
IcpReport icp_register(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                       const IcpOptions& options = {});

// Area-weighted uniform samples of a mesh surface.
PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

std::string icp_report_to_json(const IcpReport& report);

}  // namespace bodyfit
