#pragma once

#include <array>
#include <memory>
#include <vector>

#include "bodyfit/core/kdtree.hpp"
#include "bodyfit/core/point_cloud.hpp"

namespace bodyfit {

inline constexpr int kFpfhBins = 11;
inline constexpr int kFpfhSize = 3 * kFpfhBins;

// Three 11-bin histograms over (alpha, phi, theta), each summing to 1.
struct FpfhDescriptor {
  std::array<double, kFpfhSize> bins{};
};

struct FpfhOptions {
  double radius = 0.20;  // m, used both for SPFH and for the weighted sum
  std::size_t min_neighbors = 10;
};

// Darboux-frame angles of an oriented point pair, with the source chosen as
// the point whose normal makes the smaller angle with the connecting line.
// Returns false for coincident points or a degenerate frame.
bool pair_features(const Vec3& p1, const Vec3& n1, const Vec3& p2, const Vec3& n2, double& alpha, double& phi,
                   double& theta);

// Bin index in [0, 11) for alpha/phi in [-1, 1] and theta in [-pi, pi].
int unit_bin(double f);
int angle_bin(double theta);

// FPFH estimator over a cloud with normals. Points whose normal is
// degenerate are ignored. SPFH histograms for the whole cloud are built on
// the first query, visiting each unordered pair once, and reused after.
class FpfhEstimator {
 public:
  FpfhEstimator(const PointCloud& cloud, FpfhOptions options = {});

  // Descriptor centred on the valid cloud point nearest to `query`.
  // Throws SparseNeighborhood or EmptyCloud.
  FpfhDescriptor at(const Vec3& query);

  std::size_t valid_points() const { return points_.size(); }

 private:
  void build_spfh();

  FpfhOptions opt_;
  std::vector<Vec3> points_, normals_;
  std::unique_ptr<KdTree3> tree_;
  std::vector<std::array<double, kFpfhSize>> spfh_;
};

FpfhDescriptor fpfh_at(const PointCloud& cloud, const Vec3& query, const FpfhOptions& options = {});

}  // namespace bodyfit
