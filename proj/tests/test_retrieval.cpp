#include <algorithm>
#include <fstream>
#include <thread>

#include "bodyfit/retrieval/index.hpp"
#include "bodyfit/retrieval/kernels.hpp"
#include "bodyfit/retrieval/quantizer.hpp"
#include "helpers.hpp"

using namespace bodyfit;
using namespace bodyfit::test;

namespace {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, double spread = 1.0) {
  std::uniform_real_distribution<float> u(-spread, spread);
  std::vector<float> v(dim);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<IndexEntry> random_entries(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::vector<IndexEntry> e;
  for (std::size_t i = 0; i < n; ++i) e.push_back({1000 + 7 * i, random_vector(rng, dim), {}});
  return e;
}

// Exhaustive reference: long double accumulation, ascending distance then id.
QueryResult brute_force(const std::vector<IndexEntry>& entries, const std::vector<float>& q, std::size_t k) {
  std::vector<std::pair<long double, std::uint64_t>> all;
  for (const auto& e : entries) {
    long double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) s += ((long double)e.vector[i] - q[i]) * ((long double)e.vector[i] - q[i]);
    all.push_back({s, e.id});
  }
  std::sort(all.begin(), all.end());
  QueryResult r;
  for (std::size_t i = 0; i < k; ++i) r.push_back({all[i].second, std::sqrt((double)all[i].first)});
  return r;
}

void check_same(const QueryResult& got, const QueryResult& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].id == want[i].id);
    CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-9));
  }
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("SIMD kernels match the scalar kernels bit for bit") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 7u, 15u, 16u, 17u, 31u, 64u, 100u, 501u, 1023u}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = random_vector(rng, n, 10), b = random_vector(rng, n, 10);
      const double s = l2sq_scalar(a.data(), b.data(), n);
      long double ref = 0;
      for (std::size_t i = 0; i < n; ++i) ref += ((long double)a[i] - b[i]) * ((long double)a[i] - b[i]);
      CHECK(s == doctest::Approx((double)ref).epsilon(1e-12));
      if (cpu_has_avx2()) CHECK(l2sq_avx2(a.data(), b.data(), n) == s);

      std::vector<std::uint8_t> ca(n), cb(n);
      for (std::size_t i = 0; i < n; ++i) ca[i] = rng() & 0xff, cb[i] = rng() & 0xff;
      std::int64_t naive = 0;
      for (std::size_t i = 0; i < n; ++i) naive += (int(ca[i]) - cb[i]) * (int(ca[i]) - cb[i]);
      CHECK(ssd_u8_scalar(ca.data(), cb.data(), n) == naive);
      if (cpu_has_avx2()) CHECK(ssd_u8_avx2(ca.data(), cb.data(), n) == naive);
    }
  }
  // Row kernel over a padded code table.
  const std::size_t n = 501, stride = 512, rows = 37;
  std::vector<std::uint8_t> q(stride), codes(stride * rows);
  for (auto& c : q) c = rng() & 0xff;
  for (auto& c : codes) c = rng() & 0xff;
  std::vector<std::int64_t> s(rows), v(rows);
  ssd_u8_rows_scalar(q.data(), codes.data(), n, stride, rows, s.data());
  for (std::size_t r = 0; r < rows; ++r) CHECK(s[r] == ssd_u8_scalar(q.data(), codes.data() + r * stride, n));
  if (cpu_has_avx2()) {
    ssd_u8_rows_avx2(q.data(), codes.data(), n, stride, rows, v.data());
    CHECK(v == s);
  }
}

TEST_CASE("kernel dispatch follows the override") {
  const KernelIsa before = active_kernel_isa();
  std::mt19937_64 rng(2);
  const auto a = random_vector(rng, 501), b = random_vector(rng, 501);
  set_kernel_isa(KernelIsa::Scalar);
  CHECK(active_kernel_isa() == KernelIsa::Scalar);
  CHECK(l2sq(a.data(), b.data(), 501) == l2sq_scalar(a.data(), b.data(), 501));
  if (cpu_has_avx2()) {
    set_kernel_isa(KernelIsa::Avx2);
    CHECK(active_kernel_isa() == KernelIsa::Avx2);
    CHECK(l2sq(a.data(), b.data(), 501) == l2sq_scalar(a.data(), b.data(), 501));
  } else {
    CHECK_THROWS_CODE(set_kernel_isa(KernelIsa::Avx2), ErrorCode::InvalidArgument);
  }
  set_kernel_isa(before);
}

TEST_CASE("index build validation") {
  std::mt19937_64 rng(3);
  auto e = random_entries(rng, 3, 8);
  CHECK(FeatureIndex::build(e).size() == 3);
  auto dup = e;
  dup[2].id = dup[0].id;
  CHECK_THROWS_CODE(FeatureIndex::build(dup), ErrorCode::DuplicateId);
  auto ragged = e;
  ragged[1].vector.pop_back();
  CHECK_THROWS_CODE(FeatureIndex::build(ragged), ErrorCode::DimensionMismatch);
  CHECK_THROWS_CODE(FeatureIndex::build(std::vector<IndexEntry>{}), ErrorCode::InvalidArgument);
}

TEST_CASE("self query, ties and full ranking") {
  std::mt19937_64 rng(4);
  auto e = random_entries(rng, 50, 501);
  e[17].id = 17;
  const FeatureIndex idx = FeatureIndex::build(e, {.balance_local_weight = false});
  const auto top = idx.query(e[17].vector, 1);
  CHECK(top[0] == Neighbor{17, 0.0});

  const auto all = idx.query(e[3].vector, idx.size());
  CHECK(all.size() == 50);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].distance <= all[i].distance);

  // Identical vectors under different ids come back in id order.
  std::vector<IndexEntry> twins;
  for (std::uint64_t id : {9u, 4u, 6u}) twins.push_back({id, e[0].vector, {}});
  twins.push_back({1, e[1].vector, {}});
  const auto t = FeatureIndex::build(twins, {.balance_local_weight = false}).query(e[0].vector, 3);
  CHECK(t[0].id == 4);
  CHECK(t[1].id == 6);
  CHECK(t[2].id == 9);

  CHECK_THROWS_CODE(idx.query(e[0].vector, 0), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(idx.query(e[0].vector, 51), ErrorCode::InvalidArgument);
  const std::vector<float> short_q(500, 0.0f);
  CHECK_THROWS_CODE(idx.query(short_q, 1), ErrorCode::DimensionMismatch);
}

TEST_CASE("kNN equals the exhaustive scan (1000-entry index, 100 queries)") {
  std::mt19937_64 rng(5);
  const auto e = random_entries(rng, 1000, 501);
  const FeatureIndex idx = FeatureIndex::build(e, {.balance_local_weight = false});
  for (int i = 0; i < 100; ++i) {
    const auto q = random_vector(rng, 501);
    check_same(idx.query(q, 10), brute_force(e, q, 10));
  }
}

TEST_CASE("kNN equals the exhaustive scan (1000 random trials)") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> size(1, 300), dim(1, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng), d = dim(rng);
    auto e = random_entries(rng, n, d);
    // Coarse values make exact ties common.
    if (trial % 3 == 0)
      for (auto& x : e)
        for (auto& v : x.vector) v = std::round(v * 2) / 2;
    const FeatureIndex idx = FeatureIndex::build(e);
    const std::size_t k = std::min<std::size_t>(n, 1 + rng() % 12);
    auto q = random_vector(rng, d);
    if (trial % 3 == 0)
      for (auto& v : q) v = std::round(v * 2) / 2;
    check_same(idx.query(q, k), brute_force(e, q, k));
  }
}

TEST_CASE("quantized prefilter returns the exact answer") {
  std::mt19937_64 rng(7);
  const auto e = random_entries(rng, 2000, 501);
  const FeatureIndex idx = FeatureIndex::build(e, {.balance_local_weight = false});
  const QuantizedIndex qi = QuantizedIndex::from_index(idx);
  const auto fetch = index_fetch(idx);
  for (int i = 0; i < 50; ++i) {
    // Half the queries sit near an entry, as real queries do.
    auto q = i % 2 ? random_vector(rng, 501) : e[rng() % e.size()].vector;
    if (i % 2 == 0)
      for (auto& v : q) v += 0.01f * float(rng() % 3) - 0.01f;
    QuantizedIndex::Stats st;
    const auto got = qi.query(q, 10, fetch, &st);
    const auto want = idx.query(q, 10);
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < got.size(); ++j) {
      CHECK(got[j].id == want[j].id);
      CHECK(got[j].distance == want[j].distance);
    }
    CHECK(st.reranked <= idx.size());
  }
}

TEST_CASE("concurrent queries match serial ones") {
  std::mt19937_64 rng(8);
  const auto e = random_entries(rng, 500, 501);
  const FeatureIndex idx = FeatureIndex::build(e, {.balance_local_weight = false});
  std::vector<std::vector<float>> qs;
  for (int i = 0; i < 40; ++i) qs.push_back(random_vector(rng, 501));
  std::vector<QueryResult> serial, parallel(qs.size());
  for (const auto& q : qs) serial.push_back(idx.query(q, 5));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < qs.size(); i += 4) parallel[i] = idx.query(qs[i], 5);
    });
  for (auto& t : threads) t.join();
  CHECK(parallel == serial);
}

TEST_CASE("index files round-trip and reject damage") {
  std::mt19937_64 rng(9);
  auto e = random_entries(rng, 40, 501);
  TempDir dir("index");
  const FeatureIndex idx = FeatureIndex::build(e);
  idx.save(dir.path / "a.im2f");
  std::shuffle(e.begin(), e.end(), rng);
  FeatureIndex::build(e).save(dir.path / "b.im2f");
  const auto bytes = file_bytes(dir.path / "a.im2f");
  CHECK(bytes == file_bytes(dir.path / "b.im2f"));
  CHECK(bytes.size() == kIndexHeaderBytes + 40 * (8 + 4 * 501));
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "IM2F");

  for (const FeatureIndex& back : {FeatureIndex::load(dir.path / "a.im2f"), FeatureIndex::load_mapped(dir.path / "a.im2f")}) {
    REQUIRE(back.size() == idx.size());
    CHECK(back.dim() == 501);
    CHECK(back.weights() == idx.weights());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      CHECK(back.id(r) == idx.id(r));
      CHECK(std::equal(back.vector(r), back.vector(r) + 501, idx.vector(r)));
    }
  }
  CHECK(FeatureIndex::load_mapped(dir.path / "a.im2f").mapped());

  {
    std::ofstream out(dir.path / "cut.im2f", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size() - 100);
  }
  CHECK_THROWS_CODE(FeatureIndex::load(dir.path / "cut.im2f"), ErrorCode::Format);
  auto bad = bytes;
  bad[1] = 'X';
  {
    std::ofstream out(dir.path / "magic.im2f", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bad.data()), bad.size());
  }
  CHECK_THROWS_CODE(FeatureIndex::load(dir.path / "magic.im2f"), ErrorCode::Format);
  CHECK_THROWS_CODE(FeatureIndex::load(dir.path / "absent.im2f"), ErrorCode::Io);
}

TEST_CASE("variance-balanced local weight") {
  std::mt19937_64 rng(10);
  std::vector<std::vector<float>> raw;
  for (int i = 0; i < 30; ++i) {
    auto v = random_vector(rng, 501, 0.05);
    for (int g = 0; g < 4; ++g) v[g] = 1.0f + 0.3f * float(rng() % 100) / 100;
    raw.push_back(v);
  }
  // Oracle: mean pairwise squared distance of each block.
  const auto pair_mean = [&](std::size_t off, std::size_t len) {
    double s = 0;
    for (std::size_t i = 0; i < raw.size(); ++i)
      for (std::size_t j = 0; j < raw.size(); ++j)
        for (std::size_t d = off; d < off + len; ++d) s += double(raw[i][d] - raw[j][d]) * (raw[i][d] - raw[j][d]);
    return s;
  };
  const double w = balanced_local_weight(raw, 1.0);
  CHECK(w * w * pair_mean(kLocalOffset, kLocalCount) == doctest::Approx(pair_mean(kGlobalOffset, kGlobalCount)).epsilon(1e-6));

  // Build applies it and stores it; queries are brought to the same weights.
  std::vector<std::uint64_t> ids;
  std::vector<FeatureVector> fv;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    FeatureVector f;
    std::copy(raw[i].begin(), raw[i].end(), f.values.begin());
    ids.push_back(i);
    fv.push_back(f);
  }
  const FeatureIndex idx = FeatureIndex::build(ids, fv);
  CHECK(idx.weights().local == doctest::Approx(w).epsilon(1e-6));
  CHECK(idx.vector(5)[kLocalOffset] == doctest::Approx(raw[5][kLocalOffset] * w).epsilon(1e-6));
  const auto r = idx.query(fv[5], 1);
  CHECK(r[0].id == 5);
  CHECK(r[0].distance < 1e-6);
}
