#include "bodyfit/features/fpfh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "bodyfit/error.hpp"

namespace bodyfit {

namespace {

// Darboux-frame quantities of a pair; theta = atan2(ty, tx).
bool darboux(const Vec3& p1, const Vec3& n1, const Vec3& p2, const Vec3& n2, double& alpha, double& phi, double& ty,
             double& tx) {
  Vec3 d = p2 - p1;
  const double len = d.norm();
  if (len == 0.0) return false;
  d /= len;
  const double a1 = n1.dot(d), a2 = n2.dot(d);
  const Vec3* ns = &n1;
  const Vec3* nt = &n2;
  phi = a1;
  // Source is the endpoint whose normal is closer to the connecting line.
  // Ties go to the lexicographically smaller point so the result does not
  // depend on argument order.
  const bool swap = std::abs(a1) < std::abs(a2) ||
                    (std::abs(a1) == std::abs(a2) &&
                     std::lexicographical_compare(p2.data(), p2.data() + 3, p1.data(), p1.data() + 3));
  if (swap) {
    std::swap(ns, nt);
    d = -d;
    phi = -a2;
  }
  Vec3 v = d.cross(*ns);
  const double vn = v.norm();
  if (vn == 0.0) return false;
  v /= vn;
  const Vec3 w = ns->cross(v);
  alpha = v.dot(*nt);
  ty = w.dot(*nt);
  tx = ns->dot(*nt);
  return true;
}

// angle_bin(atan2(y, x)) without the libm call in the common case: a
// polynomial arctangent (error < 1e-5 rad) decides the bin unless the value
// falls close to a bin edge.
int theta_bin(double y, double x) {
  const double ax = std::abs(x), ay = std::abs(y);
  const double mx = std::max(ax, ay);
  if (mx == 0.0) return angle_bin(std::atan2(y, x));
  const double a = std::min(ax, ay) / mx, s = a * a;
  double t = a * (0.9998660 + s * (-0.3302995 + s * (0.1801410 + s * (-0.0851330 + s * 0.0208351))));
  if (ay > ax) t = std::numbers::pi / 2 - t;
  if (x < 0.0) t = std::numbers::pi - t;
  if (y < 0.0) t = -t;
  const double u = kFpfhBins * (t + std::numbers::pi) / (2.0 * std::numbers::pi);
  if (std::abs(u - std::round(u)) < 1e-3) return angle_bin(std::atan2(y, x));
  return std::clamp(static_cast<int>(std::floor(u)), 0, kFpfhBins - 1);
}

}  // namespace

bool pair_features(const Vec3& p1, const Vec3& n1, const Vec3& p2, const Vec3& n2, double& alpha, double& phi,
                   double& theta) {
  double ty, tx;
  if (!darboux(p1, n1, p2, n2, alpha, phi, ty, tx)) return false;
  theta = std::atan2(ty, tx);
  return true;
}

int unit_bin(double f) {
  const int b = static_cast<int>(std::floor(kFpfhBins * (f + 1.0) * 0.5));
  return std::clamp(b, 0, kFpfhBins - 1);
}

int angle_bin(double theta) {
  const int b = static_cast<int>(std::floor(kFpfhBins * (theta + std::numbers::pi) / (2.0 * std::numbers::pi)));
  return std::clamp(b, 0, kFpfhBins - 1);
}

namespace {

void normalize_blocks(std::array<double, kFpfhSize>& h) {
  for (int b = 0; b < 3; ++b) {
    double sum = 0.0;
    for (int i = 0; i < kFpfhBins; ++i) sum += h[b * kFpfhBins + i];
    if (sum > 0.0)
      for (int i = 0; i < kFpfhBins; ++i) h[b * kFpfhBins + i] /= sum;
  }
}

}  // namespace

FpfhEstimator::FpfhEstimator(const PointCloud& cloud, FpfhOptions options) : opt_(options) {
  if (!(opt_.radius > 0.0)) fail(ErrorCode::InvalidArgument, "FPFH radius must be positive");
  if (cloud.empty()) fail(ErrorCode::EmptyCloud, "FPFH on an empty cloud");
  if (!cloud.has_normals()) fail(ErrorCode::InvalidArgument, "FPFH needs a cloud with normals");
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.normal_valid(i)) continue;
    points_.push_back(cloud.points[i]);
    normals_.push_back(cloud.normals[i]);
  }
  tree_ = std::make_unique<KdTree3>(points_);
}

void FpfhEstimator::build_spfh() {
  spfh_.assign(points_.size(), {});
  // Unordered pairs within the radius, found through a grid of radius-sized
  // cells; each pair contributes to both endpoints' histograms.
  const double r = opt_.radius, r2 = r * r;
  const auto cell_of = [&](const Vec3& p) {
    return Eigen::Vector3i(static_cast<int>(std::floor(p.x() / r)), static_cast<int>(std::floor(p.y() / r)),
                           static_cast<int>(std::floor(p.z() / r)));
  };
  const auto key = [](const Eigen::Vector3i& c) {
    return (static_cast<std::uint64_t>(c.x() + (1 << 20)) << 42) | (static_cast<std::uint64_t>(c.y() + (1 << 20)) << 21) |
           static_cast<std::uint64_t>(c.z() + (1 << 20));
  };
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
  for (std::uint32_t i = 0; i < points_.size(); ++i) grid[key(cell_of(points_[i]))].push_back(i);
  for (std::uint32_t i = 0; i < points_.size(); ++i) {
    const Eigen::Vector3i c = cell_of(points_[i]);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(key(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == grid.end()) continue;
          for (std::uint32_t j : it->second) {
            if (j <= i || (points_[j] - points_[i]).squaredNorm() > r2) continue;
            double alpha, phi, ty, tx;
            if (!darboux(points_[i], normals_[i], points_[j], normals_[j], alpha, phi, ty, tx)) continue;
            const int b0 = unit_bin(alpha), b1 = kFpfhBins + unit_bin(phi), b2 = 2 * kFpfhBins + theta_bin(ty, tx);
            for (auto* h : {&spfh_[i], &spfh_[j]}) {
              (*h)[b0] += 1.0;
              (*h)[b1] += 1.0;
              (*h)[b2] += 1.0;
            }
          }
        }
  }
  for (auto& h : spfh_) normalize_blocks(h);
}

FpfhDescriptor FpfhEstimator::at(const Vec3& query) {
  if (points_.empty()) fail(ErrorCode::EmptyCloud, "no points with valid normals");
  const std::uint32_t c = tree_->nearest(query).first;
  std::vector<std::uint32_t> nbrs;
  tree_->radius_search(points_[c], opt_.radius, nbrs);
  const std::size_t k = nbrs.size() - 1;
  if (k < opt_.min_neighbors)
    fail(ErrorCode::SparseNeighborhood, std::to_string(k) + " neighbours within the FPFH radius");
  if (spfh_.empty()) build_spfh();
  std::array<double, kFpfhSize> acc{};
  for (std::uint32_t j : nbrs) {
    if (j == c) continue;
    const double w = (points_[j] - points_[c]).norm();
    if (w == 0.0) continue;
    for (int b = 0; b < kFpfhSize; ++b) acc[b] += spfh_[j][b] / w;
  }
  FpfhDescriptor out;
  for (int b = 0; b < kFpfhSize; ++b) out.bins[b] = spfh_[c][b] + acc[b] / static_cast<double>(k);
  normalize_blocks(out.bins);
  return out;
}

FpfhDescriptor fpfh_at(const PointCloud& cloud, const Vec3& query, const FpfhOptions& options) {
  FpfhEstimator est(cloud, options);
  return est.at(query);
}

}  // namespace bodyfit
