#pragma once

#include <memory>
#include <vector>

#include "bodyfit/core/kdtree.hpp"
#include "bodyfit/core/point_cloud.hpp"

namespace bodyfit {

struct GeodesicOptions {
  std::size_t k = 8;         // neighbours per point, edges symmetrised
  double max_edge = 0.04;    // m, longer edges are dropped
  double max_snap = 0.05;    // m, endpoints must lie this close to the cloud
};

// k-NN surface graph with Euclidean edge weights.
class SurfaceGraph {
 public:
  explicit SurfaceGraph(const PointCloud& cloud, GeodesicOptions options = {});

  // Shortest-path length between the cloud points nearest to a and b.
  // Throws Disconnected when no path exists or an endpoint is farther than
  // max_snap from every cloud point.
  double distance(const Vec3& a, const Vec3& b) const;
  double distance_between(std::uint32_t a, std::uint32_t b) const;

  std::uint32_t snap(const Vec3& p) const;  // Disconnected when too far
  std::uint32_t nearest(const Vec3& p) const;  // no distance limit
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Edge {
    std::uint32_t to;
    double w;
  };
  GeodesicOptions opt_;
  std::vector<Vec3> points_;
  std::unique_ptr<KdTree3> tree_;
  std::vector<std::vector<Edge>> adj_;
};

double geodesic_distance(const PointCloud& cloud, const Vec3& a, const Vec3& b, const GeodesicOptions& options = {});

}  // namespace bodyfit
