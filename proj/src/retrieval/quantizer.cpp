#include "bodyfit/retrieval/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <queue>

#include "bodyfit/error.hpp"
#include "bodyfit/retrieval/kernels.hpp"

namespace bodyfit {

ScalarQuantizer ScalarQuantizer::fit(const float* lo, const float* hi, std::size_t dim) {
  if (dim == 0) fail(ErrorCode::InvalidArgument, "quantizer needs at least one dimension");
  ScalarQuantizer q;
  q.lo.assign(lo, lo + dim);
  double range = 0.0;
  for (std::size_t i = 0; i < dim; ++i) range = std::max(range, static_cast<double>(hi[i]) - lo[i]);
  q.step = range > 0.0 ? range / 255.0 : 1.0;
  return q;
}

double ScalarQuantizer::encode(const float* v, std::uint8_t* code) const {
  const std::size_t n = dim();
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::clamp(std::round((v[i] - static_cast<double>(lo[i])) / step), 0.0, 255.0);
    code[i] = static_cast<std::uint8_t>(c);
    const double e = v[i] - (lo[i] + step * c);
    r2 += e * e;
  }
  std::memset(code + n, 0, code_stride() - n);
  return std::sqrt(r2);
}

QuantizedIndex::QuantizedIndex(ScalarQuantizer q, std::size_t reserve_rows) : q_(std::move(q)) {
  codes_.reserve(reserve_rows * q_.code_stride());
  residual_.reserve(reserve_rows);
  ids_.reserve(reserve_rows);
}

QuantizedIndex QuantizedIndex::from_index(const FeatureIndex& index) {
  const std::size_t dim = index.dim();
  std::vector<float> lo(dim, std::numeric_limits<float>::infinity()), hi(dim, -std::numeric_limits<float>::infinity());
  for (std::size_t r = 0; r < index.size(); ++r) {
    const float* v = index.vector(r);
    for (std::size_t i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  QuantizedIndex out(ScalarQuantizer::fit(lo.data(), hi.data(), dim), index.size());
  for (std::size_t r = 0; r < index.size(); ++r) out.add(index.id(r), index.vector(r));
  return out;
}

void QuantizedIndex::add(std::uint64_t id, const float* v) {
  const std::size_t stride = q_.code_stride();
  codes_.resize(codes_.size() + stride);
  const double r = q_.encode(v, codes_.data() + codes_.size() - stride);
  float rf = static_cast<float>(r);
  if (static_cast<double>(rf) < r) rf = std::nextafter(rf, std::numeric_limits<float>::infinity());
  residual_.push_back(rf);
  ids_.push_back(id);
}

namespace {

struct Candidate {
  double lb;
  std::size_t row;
};

struct Exact {
  double d2;
  std::uint64_t id;
  bool operator<(const Exact& o) const { return d2 < o.d2 || (d2 == o.d2 && id < o.id); }
};

}  // namespace

QueryResult QuantizedIndex::query(std::span<const float> q, std::size_t k, const Fetch& fetch, Stats* stats) const {
  const std::size_t n = size(), dim = q_.dim(), stride = q_.code_stride();
  if (q.size() != dim) fail(ErrorCode::DimensionMismatch, "query dimension differs from the quantizer");
  if (k < 1 || k > n) fail(ErrorCode::InvalidArgument, "k must lie in [1, " + std::to_string(n) + "]");
  std::vector<std::uint8_t> qc(stride);
  const double rq = q_.encode(q.data(), qc.data());
  // Covers rounding in the code distance and in the exact distance.
  const auto slack = [](double d) { return 1e-9 * (1.0 + d); };

  std::priority_queue<double> ub_heap;  // k smallest upper bounds
  std::vector<Candidate> cand;
  double threshold = std::numeric_limits<double>::infinity();
  const auto prune = [&] {
    cand.erase(std::remove_if(cand.begin(), cand.end(), [&](const Candidate& c) { return c.lb > threshold; }),
               cand.end());
  };
  std::size_t prune_at = 4 * k + 4096;
  constexpr std::size_t kBlock = 256;
  std::int64_t ssd[kBlock];
  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t rows = std::min(kBlock, n - base);
    ssd_u8_rows(qc.data(), codes_.data() + base * stride, stride, stride, rows, ssd);
    for (std::size_t j = 0; j < rows; ++j) {
      const std::size_t row = base + j;
      const double dq = q_.step * std::sqrt(static_cast<double>(ssd[j]));
      const double bound = rq + residual_[row] + slack(dq);
      const double lb = dq - bound, ub = dq + bound;
      if (ub_heap.size() < k) {
        ub_heap.push(ub);
        if (ub_heap.size() == k) threshold = ub_heap.top();
      } else if (ub < threshold) {
        ub_heap.pop();
        ub_heap.push(ub);
        threshold = ub_heap.top();
      }
      if (lb <= threshold) {
        cand.push_back({lb, row});
        if (cand.size() >= prune_at) {
          prune();
          prune_at = std::max(prune_at, 2 * cand.size());
        }
      }
    }
  }
  prune();
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    return a.lb < b.lb || (a.lb == b.lb && a.row < b.row);
  });

  std::priority_queue<Exact> top;
  std::vector<float> buf(dim);
  std::size_t reranked = 0;
  for (const Candidate& c : cand) {
    if (top.size() == k && c.lb > std::sqrt(top.top().d2)) break;
    fetch(c.row, buf.data());
    ++reranked;
    const Exact e{l2sq(q.data(), buf.data(), dim), ids_[c.row]};
    if (top.size() < k) {
      top.push(e);
    } else if (e < top.top()) {
      top.pop();
      top.push(e);
    }
  }
  if (stats) *stats = {cand.size(), reranked};
  QueryResult out(top.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {top.top().id, std::sqrt(top.top().d2)};
    top.pop();
  }
  return out;
}

QuantizedIndex::Fetch index_fetch(const FeatureIndex& index) {
  return [&index](std::size_t row, float* out) { std::memcpy(out, index.vector(row), index.dim() * sizeof(float)); };
}

}  // namespace bodyfit
