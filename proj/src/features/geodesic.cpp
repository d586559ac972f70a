#include "bodyfit/features/geodesic.hpp"

#include <limits>
#include <queue>

#include "bodyfit/error.hpp"

namespace bodyfit {

SurfaceGraph::SurfaceGraph(const PointCloud& cloud, GeodesicOptions options)
    : opt_(options), points_(cloud.points) {
  if (points_.empty()) fail(ErrorCode::EmptyCloud, "surface graph over an empty cloud");
  if (opt_.k < 1 || !(opt_.max_edge > 0.0)) fail(ErrorCode::InvalidArgument, "bad surface graph options");
  tree_ = std::make_unique<KdTree3>(points_);
  adj_.resize(points_.size());
  std::vector<std::uint32_t> idx;
  std::vector<double> d2;
  const double max2 = opt_.max_edge * opt_.max_edge;
  for (std::uint32_t i = 0; i < points_.size(); ++i) {
    tree_->knn(points_[i], opt_.k + 1, idx, d2);
    for (std::size_t n = 0; n < idx.size(); ++n) {
      if (idx[n] == i || d2[n] > max2) continue;
      const double w = std::sqrt(d2[n]);
      adj_[i].push_back({idx[n], w});
      adj_[idx[n]].push_back({i, w});
    }
  }
}

std::uint32_t SurfaceGraph::snap(const Vec3& p) const {
  const auto [i, d2] = tree_->nearest(p);
  if (d2 > opt_.max_snap * opt_.max_snap)
    fail(ErrorCode::Disconnected, "endpoint is " + std::to_string(std::sqrt(d2)) + " m from the surface");
  return i;
}

std::uint32_t SurfaceGraph::nearest(const Vec3& p) const { return tree_->nearest(p).first; }

double SurfaceGraph::distance_between(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return 0.0;
  std::vector<double> dist(points_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[a] = 0.0;
  pq.push({0.0, a});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == b) return d;
    for (const Edge& e : adj_[u]) {
      const double nd = d + e.w;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        pq.push({nd, e.to});
      }
    }
  }
  fail(ErrorCode::Disconnected, "no surface path between the endpoints");
}

double SurfaceGraph::distance(const Vec3& a, const Vec3& b) const { return distance_between(snap(a), snap(b)); }

double geodesic_distance(const PointCloud& cloud, const Vec3& a, const Vec3& b, const GeodesicOptions& options) {
  return SurfaceGraph(cloud, options).distance(a, b);
}

}  // namespace bodyfit
