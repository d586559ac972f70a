#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "bodyfit/features/feature_vector.hpp"

namespace bodyfit {

struct IndexEntry {
  std::uint64_t id = 0;
  std::vector<float> vector;
  GroupWeights weights;  // weights already applied to `vector`
};

struct Neighbor {
  std::uint64_t id = 0;
  double distance = 0.0;  // L2
  bool operator==(const Neighbor&) const = default;
};

// Ascending distance, ties by ascending id.
using QueryResult = std::vector<Neighbor>;

struct IndexBuildOptions {
  // Replace w_local by the variance-balancing value; otherwise the entries'
  // common weights are kept.
  bool balance_local_weight = true;
};

// Immutable feature database. Records are stored exactly as in the IM2F
// file ([u64 id][dim x f32]), either in an owned buffer or a read-only
// memory map, sorted by id.
class FeatureIndex {
 public:
  FeatureIndex();
  ~FeatureIndex();
  FeatureIndex(FeatureIndex&&) noexcept;
  FeatureIndex& operator=(FeatureIndex&&) noexcept;

  // Throws DimensionMismatch, DuplicateId, InvalidArgument (empty input).
  static FeatureIndex build(std::vector<IndexEntry> entries, const IndexBuildOptions& options = {});
  static FeatureIndex build(const std::vector<std::uint64_t>& ids, const std::vector<FeatureVector>& vectors,
                            const IndexBuildOptions& options = {});

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  const GroupWeights& weights() const { return weights_; }
  std::uint64_t id(std::size_t row) const;
  const float* vector(std::size_t row) const;
  std::size_t row_of(std::uint64_t id) const;  // InvalidArgument when absent
  bool mapped() const;

  // Exact k nearest neighbours by full scan. Throws DimensionMismatch or
  // InvalidArgument (k outside [1, size]).
  QueryResult query(std::span<const float> q, std::size_t k) const;
  // Reweights q to the index's group weights first.
  QueryResult query(const FeatureVector& q, std::size_t k) const;

  void save(const std::filesystem::path& path) const;
  // Reads the whole file. Io / Format.
  static FeatureIndex load(const std::filesystem::path& path);
  // Maps the file read-only; records are paged in on demand.
  static FeatureIndex load_mapped(const std::filesystem::path& path);

 private:
  struct Storage;
  static FeatureIndex from_storage(std::shared_ptr<Storage> storage, bool check_order);

  std::shared_ptr<Storage> storage_;
  const std::uint8_t* records_ = nullptr;
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  GroupWeights weights_;
};

inline constexpr std::size_t kIndexHeaderBytes = 28;

// w_local that makes the mean squared within-group distance of the local
// block equal that of the global block, given unweighted vectors.
double balanced_local_weight(const std::vector<std::vector<float>>& unweighted, double w_global);

}  // namespace bodyfit
