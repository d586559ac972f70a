#include "bodyfit/core/normals.hpp"

#include <Eigen/Eigenvalues>

#include "bodyfit/core/kdtree.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

PointCloud estimate_normals(const PointCloud& cloud, double radius, const Vec3& viewpoint) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "normal radius must be positive");
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), PointCloud::degenerate_normal());
  if (cloud.empty()) return out;
  KdTree3 tree(cloud.points);
  std::vector<std::uint32_t> nbrs;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    tree.radius_search(cloud.points[i], radius, nbrs);
    if (nbrs.size() < 3) continue;
    Vec3 mean = Vec3::Zero();
    for (auto j : nbrs) mean += cloud.points[j];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (auto j : nbrs) {
      const Vec3 d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    Vec3 n = es.eigenvectors().col(0);
    if (!n.allFinite() || n.squaredNorm() < 0.5) continue;
    n.normalize();
    if (n.dot(viewpoint - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

}  // namespace bodyfit
