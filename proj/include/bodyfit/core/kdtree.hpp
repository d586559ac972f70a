#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bodyfit/core/types.hpp"

namespace bodyfit {

// Static 3-d tree over a borrowed point array. Query results are returned in
// ascending index order (radius search) or ascending distance with index
// tie-break (k-nearest), so callers see the same neighbourhoods no matter
// how the tree happened to split.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::span<const Vec3> points, int leaf_size = 12);

  std::size_t size() const { return points_.size(); }

  // Indices of all points with |p - query| <= radius.
  void radius_search(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const;

  // k nearest points; `out_dist2` receives squared distances.
  void knn(const Vec3& query, std::size_t k, std::vector<std::uint32_t>& out,
           std::vector<double>& out_dist2) const;

  // Index and squared distance of the nearest point. Tree must be non-empty.
  std::pair<std::uint32_t, double> nearest(const Vec3& query) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
    Eigen::AlignedBox3d box;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int leaf_size);

  std::span<const Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace bodyfit
