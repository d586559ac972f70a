#include "bodyfit/retrieval/index.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>

#include "bodyfit/error.hpp"
#include "bodyfit/retrieval/kernels.hpp"

namespace bodyfit {

namespace {

constexpr char kMagic[4] = {'I', 'M', '2', 'F'};
constexpr std::uint32_t kVersion = 1;

std::size_t record_bytes(std::size_t dim) { return 8 + 4 * dim; }

template <typename T>
T read_as(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void write_as(std::uint8_t* p, T v) {
  std::memcpy(p, &v, sizeof(T));
}

struct Scored {
  double d2;
  std::uint64_t id;
  bool operator<(const Scored& o) const { return d2 < o.d2 || (d2 == o.d2 && id < o.id); }
};

// Keeps the k best (smallest) items; top() is the worst kept one.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}
  bool full() const { return heap_.size() == k_; }
  const Scored& worst() const { return heap_.top(); }
  void offer(const Scored& s) {
    if (heap_.size() < k_) {
      heap_.push(s);
    } else if (s < heap_.top()) {
      heap_.pop();
      heap_.push(s);
    }
  }
  QueryResult finish() {
    QueryResult out(heap_.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = {heap_.top().id, std::sqrt(heap_.top().d2)};
      heap_.pop();
    }
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<Scored> heap_;
};

void scale_groups(std::span<float> v, const GroupWeights& from, const GroupWeights& to) {
  const auto scale = [&](std::size_t off, std::size_t n, double f, double t) {
    const double k = f == 0.0 ? 0.0 : t / f;
    for (std::size_t i = off; i < off + n; ++i) v[i] = static_cast<float>(v[i] * k);
  };
  scale(kGlobalOffset, kGlobalCount, from.global, to.global);
  scale(kGenderOffset, kGenderCount, from.gender, to.gender);
  scale(kLocalOffset, kLocalCount, from.local, to.local);
}

GroupWeights float_rounded(const GroupWeights& w) {
  return {static_cast<float>(w.global), static_cast<float>(w.gender), static_cast<float>(w.local)};
}

}  // namespace

struct FeatureIndex::Storage {
  std::vector<std::uint8_t> owned;
  void* map = nullptr;
  std::size_t map_len = 0;

  const std::uint8_t* data() const { return map ? static_cast<const std::uint8_t*>(map) : owned.data(); }
  std::size_t bytes() const { return map ? map_len : owned.size(); }
  ~Storage() {
    if (map) munmap(map, map_len);
  }
};

FeatureIndex::FeatureIndex() = default;
FeatureIndex::~FeatureIndex() = default;
FeatureIndex::FeatureIndex(FeatureIndex&&) noexcept = default;
FeatureIndex& FeatureIndex::operator=(FeatureIndex&&) noexcept = default;

double balanced_local_weight(const std::vector<std::vector<float>>& unweighted, double w_global) {
  if (unweighted.size() < 2) return 1.0;
  const std::size_t n = unweighted.size();
  const auto block_variance = [&](std::size_t off, std::size_t len) {
    double total = 0.0;
    for (std::size_t i = off; i < off + len; ++i) {
      double mean = 0.0;
      for (const auto& v : unweighted) mean += v[i];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& v : unweighted) var += (v[i] - mean) * (v[i] - mean);
      total += var / static_cast<double>(n);
    }
    return total;
  };
  const double vg = block_variance(kGlobalOffset, kGlobalCount);
  const double vl = block_variance(kLocalOffset, kLocalCount);
  if (!(vl > 0.0) || !(vg > 0.0)) return 1.0;
  return w_global * std::sqrt(vg / vl);
}

FeatureIndex FeatureIndex::build(std::vector<IndexEntry> entries, const IndexBuildOptions& options) {
  if (entries.empty()) fail(ErrorCode::InvalidArgument, "index needs at least one entry");
  const std::size_t dim = entries.front().vector.size();
  if (dim == 0) fail(ErrorCode::DimensionMismatch, "zero-dimensional vectors");
  for (const auto& e : entries)
    if (e.vector.size() != dim)
      fail(ErrorCode::DimensionMismatch,
           "entry " + std::to_string(e.id) + " has " + std::to_string(e.vector.size()) + " dims, expected " +
               std::to_string(dim));
  std::sort(entries.begin(), entries.end(), [](const IndexEntry& a, const IndexEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].id == entries[i - 1].id) fail(ErrorCode::DuplicateId, "duplicate id " + std::to_string(entries[i].id));

  GroupWeights target = entries.front().weights;
  if (dim == kFeatureDim) {
    if (options.balance_local_weight) {
      std::vector<std::vector<float>> raw;
      raw.reserve(entries.size());
      for (const auto& e : entries) {
        if (e.weights.global == 0.0 || e.weights.local == 0.0)
          fail(ErrorCode::InvalidArgument, "cannot balance weights of vectors with a zero group weight");
        std::vector<float> v = e.vector;
        scale_groups(v, e.weights, GroupWeights{1.0, 1.0, 1.0});
        raw.push_back(std::move(v));
      }
      target.local = balanced_local_weight(raw, target.global);
    }
    target = float_rounded(target);
    for (auto& e : entries) {
      scale_groups(e.vector, e.weights, target);
      e.weights = target;
    }
  } else {
    target = float_rounded(target);
  }

  auto st = std::make_shared<Storage>();
  const std::size_t rb = record_bytes(dim);
  st->owned.resize(kIndexHeaderBytes + entries.size() * rb);
  std::uint8_t* p = st->owned.data();
  std::memcpy(p, kMagic, 4);
  write_as<std::uint32_t>(p + 4, kVersion);
  write_as<std::uint32_t>(p + 8, static_cast<std::uint32_t>(entries.size()));
  write_as<std::uint32_t>(p + 12, static_cast<std::uint32_t>(dim));
  write_as<float>(p + 16, static_cast<float>(target.global));
  write_as<float>(p + 20, static_cast<float>(target.gender));
  write_as<float>(p + 24, static_cast<float>(target.local));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::uint8_t* r = p + kIndexHeaderBytes + i * rb;
    write_as<std::uint64_t>(r, entries[i].id);
    std::memcpy(r + 8, entries[i].vector.data(), 4 * dim);
  }
  return from_storage(std::move(st), false);
}

FeatureIndex FeatureIndex::build(const std::vector<std::uint64_t>& ids, const std::vector<FeatureVector>& vectors,
                                 const IndexBuildOptions& options) {
  if (ids.size() != vectors.size()) fail(ErrorCode::InvalidArgument, "ids and vectors differ in length");
  std::vector<IndexEntry> entries;
  entries.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    entries.push_back({ids[i], std::vector<float>(vectors[i].values.begin(), vectors[i].values.end()),
                       vectors[i].weights});
  return build(std::move(entries), options);
}

FeatureIndex FeatureIndex::from_storage(std::shared_ptr<Storage> st, bool check_order) {
  const std::uint8_t* p = st->data();
  const std::size_t bytes = st->bytes();
  if (bytes < kIndexHeaderBytes || std::memcmp(p, kMagic, 4) != 0) fail(ErrorCode::Format, "not an index file (bad magic)");
  const auto version = read_as<std::uint32_t>(p + 4);
  if (version != kVersion) fail(ErrorCode::Format, "unsupported index version " + std::to_string(version));
  const std::size_t count = read_as<std::uint32_t>(p + 8);
  const std::size_t dim = read_as<std::uint32_t>(p + 12);
  if (dim == 0) fail(ErrorCode::Format, "index dimension is zero");
  if (bytes != kIndexHeaderBytes + count * record_bytes(dim))
    fail(ErrorCode::Format, "index file is truncated or has trailing bytes");
  if (count == 0) fail(ErrorCode::Format, "index has no entries");
  FeatureIndex idx;
  idx.dim_ = dim;
  idx.count_ = count;
  idx.weights_ = {read_as<float>(p + 16), read_as<float>(p + 20), read_as<float>(p + 24)};
  idx.records_ = p + kIndexHeaderBytes;
  idx.storage_ = std::move(st);
  if (check_order)
    for (std::size_t i = 1; i < count; ++i)
      if (!(idx.id(i - 1) < idx.id(i))) fail(ErrorCode::Format, "index ids are not strictly ascending");
  return idx;
}

std::uint64_t FeatureIndex::id(std::size_t row) const { return read_as<std::uint64_t>(records_ + row * record_bytes(dim_)); }

const float* FeatureIndex::vector(std::size_t row) const {
  return reinterpret_cast<const float*>(records_ + row * record_bytes(dim_) + 8);
}

std::size_t FeatureIndex::row_of(std::uint64_t target) const {
  std::size_t lo = 0, hi = count_;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (id(mid) < target)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo == count_ || id(lo) != target) fail(ErrorCode::InvalidArgument, "id " + std::to_string(target) + " not in index");
  return lo;
}

bool FeatureIndex::mapped() const { return storage_ && storage_->map; }

QueryResult FeatureIndex::query(std::span<const float> q, std::size_t k) const {
  if (q.size() != dim_)
    fail(ErrorCode::DimensionMismatch, "query has " + std::to_string(q.size()) + " dims, index " + std::to_string(dim_));
  if (k < 1 || k > count_) fail(ErrorCode::InvalidArgument, "k must lie in [1, " + std::to_string(count_) + "]");
  TopK top(k);
  for (std::size_t i = 0; i < count_; ++i) top.offer({l2sq(q.data(), vector(i), dim_), id(i)});
  return top.finish();
}

QueryResult FeatureIndex::query(const FeatureVector& q, std::size_t k) const {
  if (dim_ != kFeatureDim) fail(ErrorCode::DimensionMismatch, "index is not a 501-dimensional feature index");
  const FeatureVector r = reweighted(q, weights_);
  return query(std::span<const float>(r.values.data(), r.values.size()), k);
}

void FeatureIndex::save(const std::filesystem::path& path) const {
  if (!storage_) fail(ErrorCode::InvalidArgument, "saving an empty index");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(storage_->data()), static_cast<std::streamsize>(storage_->bytes()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

FeatureIndex FeatureIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  auto st = std::make_shared<Storage>();
  st->owned.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(st->owned.data()), static_cast<std::streamsize>(st->owned.size()));
  if (!in) fail(ErrorCode::Io, "read failed for " + path.string());
  try {
    return from_storage(std::move(st), true);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

FeatureIndex FeatureIndex::load_mapped(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) fail(ErrorCode::Io, "cannot open " + path.string());
  struct stat sb {};
  if (::fstat(fd, &sb) != 0) {
    ::close(fd);
    fail(ErrorCode::Io, "cannot stat " + path.string());
  }
  auto st = std::make_shared<Storage>();
  if (sb.st_size > 0) {
    void* m = ::mmap(nullptr, static_cast<std::size_t>(sb.st_size), PROT_READ, MAP_PRIVATE, fd, 0);
    if (m == MAP_FAILED) {
      ::close(fd);
      fail(ErrorCode::Io, "cannot map " + path.string());
    }
    st->map = m;
    st->map_len = static_cast<std::size_t>(sb.st_size);
  }
  ::close(fd);
  try {
    return from_storage(std::move(st), false);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace bodyfit
