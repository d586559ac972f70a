#include "bodyfit/registration/icp.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "bodyfit/core/kdtree.hpp"
#include "bodyfit/core/random.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

RigidTransform RigidTransform::then(const RigidTransform& next) const {
  return {next.rotation * rotation, next.rotation * translation + next.translation};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

RigidTransform kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size() || src.size() < 3)
    fail(ErrorCode::InvalidArgument, "kabsch needs at least 3 corresponding points");
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());
  Mat3 H = Mat3::Zero(), S = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    H += (src[i] - cs) * (dst[i] - cd).transpose();
    S += (src[i] - cs) * (src[i] - cs).transpose();
  }
  const Eigen::JacobiSVD<Mat3> spread(S);
  const auto sv = spread.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) fail(ErrorCode::DegenerateSkeleton, "points are collinear");
  const Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 U = svd.matrixU(), V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  D(2, 2) = (V * U.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  RigidTransform t;
  t.rotation = V * D * U.transpose();
  t.translation = cd - t.rotation * cs;
  return t;
}

RigidTransform skeleton_align_init(const Skeleton15& source, const Skeleton15& target) {
  if (!source.all_finite() || !target.all_finite()) fail(ErrorCode::DegenerateSkeleton, "skeleton has non-finite joints");
  return kabsch(std::vector<Vec3>(source.joints.begin(), source.joints.end()),
                std::vector<Vec3>(target.joints.begin(), target.joints.end()));
}

IcpReport icp_register(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                       const IcpOptions& options) {
  if (source.empty() || target.empty()) fail(ErrorCode::EmptyCloud, "ICP needs non-empty source and target");
  if (options.max_iterations < 1 || !(options.reject_factor > 0.0) || !(options.convergence_delta >= 0.0))
    fail(ErrorCode::InvalidArgument, "bad ICP options");
  const KdTree3 tree(target.points);
  IcpReport rep;
  RigidTransform current = init;
  std::vector<Vec3> moved(source.size());
  std::vector<std::uint32_t> match(source.size());
  std::vector<double> dist(source.size()), sorted;
  std::vector<Vec3> src, dst;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < source.size(); ++i) {
      moved[i] = current.apply(source.points[i]);
      const auto [j, d2] = tree.nearest(moved[i]);
      match[i] = j;
      dist[i] = std::sqrt(d2);
    }
    sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double cutoff = options.reject_factor * sorted[sorted.size() / 2];
    src.clear();
    dst.clear();
    double sum = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (dist[i] > cutoff) continue;
      src.push_back(moved[i]);
      dst.push_back(target.points[match[i]]);
      sum += dist[i];
    }
    const double err = sum / static_cast<double>(src.size());
    if (!rep.errors.empty() && err > rep.errors.back()) {
      // The previous pose was better under its own correspondences; keep it.
      current = rep.transform;
      rep.converged = true;
      break;
    }
    rep.transform = current;
    rep.errors.push_back(err);
    if (rep.errors.size() >= 2 && rep.errors[rep.errors.size() - 2] - err < options.convergence_delta) {
      rep.converged = true;
      break;
    }
    if (err == 0.0 || src.size() < 3) {
      rep.converged = true;
      break;
    }
    RigidTransform step;
    try {
      step = kabsch(src, dst);
    } catch (const Error&) {
      break;
    }
    current = current.then(step);
  }
  rep.iterations = rep.errors.size();
  return rep;
}

PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.triangles.empty()) fail(ErrorCode::EmptyCloud, "mesh has no triangles");
  std::vector<double> cum;
  cum.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    total += 0.5 * (b - a).cross(c - a).norm();
    cum.push_back(total);
  }
  if (!(total > 0.0)) fail(ErrorCode::EmptyCloud, "mesh has zero area");
  std::mt19937_64 rng = stream_rng(seed, 0x6d657368ull);
  PointCloud out;
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = uniform01(rng) * total;
    const std::size_t ti =
        std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin(), cum.size() - 1);
    const auto& t = mesh.triangles[ti];
    const double r1 = std::sqrt(uniform01(rng)), r2 = uniform01(rng);
    out.points.push_back((1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                         r1 * r2 * mesh.vertices[t[2]]);
  }
  return out;
}

std::string icp_report_to_json(const IcpReport& r) {
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["errors_m"] = r.errors;
  std::vector<double> rot;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) rot.push_back(r.transform.rotation(a, b));
  j["rotation"] = rot;
  j["translation"] = {r.transform.translation.x(), r.transform.translation.y(), r.transform.translation.z()};
  j["converged"] = r.converged;
  return j.dump(2) + "\n";
}

}  // namespace bodyfit
