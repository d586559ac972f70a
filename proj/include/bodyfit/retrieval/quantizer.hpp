#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bodyfit/retrieval/index.hpp"

namespace bodyfit {

// 8-bit codes with a per-dimension offset and one step shared by all
// dimensions, so code distances scale uniformly back to L2.
struct ScalarQuantizer {
  std::vector<float> lo;
  double step = 1.0;

  static ScalarQuantizer fit(const float* lo, const float* hi, std::size_t dim);
  std::size_t dim() const { return lo.size(); }
  std::size_t code_stride() const { return (dim() + 31) / 32 * 32; }
  // Writes code_stride() bytes (zero padded); returns |v - decode(code)|.
  double encode(const float* v, std::uint8_t* code) const;
};

// Prefilter over byte codes with per-row residual norms. Every row's true
// distance lies within code distance +- (r_query + r_row), so rows whose
// lower bound exceeds the k-th upper bound are skipped and the rest are
// re-ranked exactly. The final answer equals the exhaustive scan.
class QuantizedIndex {
 public:
  // Copies `row`'s exact vector into `out`.
  using Fetch = std::function<void(std::size_t row, float* out)>;

  QuantizedIndex() = default;
  explicit QuantizedIndex(ScalarQuantizer q, std::size_t reserve_rows = 0);
  static QuantizedIndex from_index(const FeatureIndex& index);

  void add(std::uint64_t id, const float* v);
  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return q_.dim(); }
  std::uint64_t id(std::size_t row) const { return ids_[row]; }
  const ScalarQuantizer& quantizer() const { return q_; }

  struct Stats {
    std::size_t candidates = 0;
    std::size_t reranked = 0;
  };
  QueryResult query(std::span<const float> q, std::size_t k, const Fetch& fetch, Stats* stats = nullptr) const;

 private:
  ScalarQuantizer q_;
  std::vector<std::uint8_t> codes_;
  std::vector<float> residual_;  // rounded up so the bounds stay valid
  std::vector<std::uint64_t> ids_;
};

// Fetch from the exact records of `index` (rows must correspond).
QuantizedIndex::Fetch index_fetch(const FeatureIndex& index);

}  // namespace bodyfit
