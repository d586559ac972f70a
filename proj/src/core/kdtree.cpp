#include "bodyfit/core/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "bodyfit/error.hpp"

namespace bodyfit {

KdTree3::KdTree3(std::span<const Vec3> points, int leaf_size) : points_(points) {
  if (leaf_size < 1) fail(ErrorCode::InvalidArgument, "kd-tree leaf size must be positive");
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / leaf_size + 1);
    build(0, static_cast<std::uint32_t>(points.size()), leaf_size);
  }
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end, int leaf_size) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Eigen::AlignedBox3d box;
  for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  nodes_[id].box = box;
  if (end - begin <= static_cast<std::uint32_t>(leaf_size)) return id;

  int axis;
  (box.max() - box.min()).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const std::int32_t l = build(begin, mid, leaf_size);
  const std::int32_t r = build(mid, end, leaf_size);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void KdTree3::radius_search(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (nodes_.empty()) return;
  const double r2 = radius * radius;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (n.box.squaredExteriorDistance(query) > r2) continue;
    if (n.axis < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::uint32_t idx = order_[i];
        if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
      }
      continue;
    }
    stack[top++] = n.left;
    stack[top++] = n.right;
  }
  std::sort(out.begin(), out.end());
}

void KdTree3::knn(const Vec3& query, std::size_t k, std::vector<std::uint32_t>& out,
                  std::vector<double>& out_dist2) const {
  out.clear();
  out_dist2.clear();
  if (nodes_.empty() || k == 0) return;
  using Entry = std::pair<double, std::uint32_t>;  // max-heap on (dist2, index)
  std::priority_queue<Entry> heap;
  const auto worst = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
  };
  const auto visit = [&](auto&& self, std::int32_t id) -> void {
    const Node& n = nodes_[id];
    if (n.box.squaredExteriorDistance(query) > worst()) return;
    if (n.axis < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Entry e{(points_[idx] - query).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const bool go_left = query[n.axis] < n.split;
    self(self, go_left ? n.left : n.right);
    self(self, go_left ? n.right : n.left);
  };
  visit(visit, 0);
  std::vector<Entry> sorted;
  sorted.reserve(heap.size());
  while (!heap.empty()) {
    sorted.push_back(heap.top());
    heap.pop();
  }
  std::reverse(sorted.begin(), sorted.end());
  for (const auto& [d2, idx] : sorted) {
    out.push_back(idx);
    out_dist2.push_back(d2);
  }
}

std::pair<std::uint32_t, double> KdTree3::nearest(const Vec3& query) const {
  if (nodes_.empty()) fail(ErrorCode::EmptyCloud, "nearest-neighbour query on an empty tree");
  std::vector<std::uint32_t> idx;
  std::vector<double> d2;
  knn(query, 1, idx, d2);
  return {idx[0], d2[0]};
}

}  // namespace bodyfit
