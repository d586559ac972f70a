#include "bodyfit/pipeline/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "bodyfit/core/random.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/pipeline/dataset.hpp"
#include "bodyfit/retrieval/index.hpp"
#include "bodyfit/retrieval/quantizer.hpp"
#include "bodyfit/synth/body_model.hpp"

namespace bodyfit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<HeightEvalRow> eval_height(const HeightEvalOptions& o) {
  const auto params = sample_population(o.table, o.count, o.seed, o.sampler);
  std::vector<HeightEvalRow> rows(params.size());
  parallel_for(params.size(), o.threads, [&](std::size_t i) {
    HeightEvalRow& r = rows[i];
    r.index = i;
    r.params = params[i];
    const BodyModel model = build_mesh(params[i]);
    r.truth_cm = model.truth.height;
    RenderConfig rc;
    rc.noise_sd_mm = o.noise_sd_mm;
    rc.noise_seed = splitmix64(o.seed ^ (0x68656967ull + i));
    r.estimate_cm = std::numeric_limits<double>::quiet_NaN();
    try {
      const RenderResult rr = render_depth(model, rc);
      r.estimate_cm = measure_all(rr.frame, rr.skeleton).height;
    } catch (const Error& e) {
      r.failure = e.what();
    }
  });
  return rows;
}

double mean_abs_height_error(const std::vector<HeightEvalRow>& rows) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.failure.empty()) {
      sum += std::abs(r.estimate_cm - r.truth_cm);
      ++n;
    }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

std::string height_eval_csv(const std::vector<HeightEvalRow>& rows) {
  std::string s = "index,age_group,gender,height_m,weight_kg,truth_cm,estimate_cm,error_cm,failure\n";
  for (const auto& r : rows) {
    s += std::to_string(r.index) + "," + std::string(to_string(r.params.age_group)) + "," +
         std::string(to_string(r.params.gender)) + "," + fmt("%.4f", r.params.height) + "," +
         fmt("%.2f", r.params.weight) + "," + fmt("%.3f", r.truth_cm) + ",";
    if (r.failure.empty())
      s += fmt("%.3f", r.estimate_cm) + "," + fmt("%.3f", r.estimate_cm - r.truth_cm) + ",\n";
    else
      s += ",,\"" + r.failure + "\"\n";
  }
  return s;
}

std::vector<GenderSample> gender_samples(const GenderEvalOptions& o) {
  const auto params = sample_population(DemographicTable::defaults(), o.pairs, o.seed, o.sampler);
  std::vector<GenderSample> out(2 * params.size());
  parallel_for(out.size(), o.threads, [&](std::size_t j) {
    BodyParams p = params[j / 2];
    p.gender = j % 2 ? Gender::Female : Gender::Male;
    RenderConfig rc;
    rc.noise_sd_mm = o.noise_sd_mm;
    rc.noise_seed = splitmix64(o.seed ^ (0x67656e64ull + j));
    const ExtractedFeatures f = model_features(build_mesh(p), rc, o.features);
    out[j] = {j / 2, p.gender, f.ratios};
  });
  return out;
}

Gender GenderClassifier::predict(const GenderRatios& r) const {
  return a * r.ratio1 + b * r.ratio2 > threshold ? Gender::Female : Gender::Male;
}

GenderClassifier fit_gender_classifier(const std::vector<GenderSample>& train) {
  if (train.empty()) fail(ErrorCode::InvalidArgument, "no training samples");
  // Standardize so the direction sweep is not dominated by ratio scale.
  double m1 = 0, m2 = 0, s1 = 0, s2 = 0;
  for (const auto& t : train) m1 += t.ratios.ratio1, m2 += t.ratios.ratio2;
  m1 /= train.size();
  m2 /= train.size();
  for (const auto& t : train)
    s1 += (t.ratios.ratio1 - m1) * (t.ratios.ratio1 - m1), s2 += (t.ratios.ratio2 - m2) * (t.ratios.ratio2 - m2);
  s1 = std::sqrt(s1 / train.size());
  s2 = std::sqrt(s2 / train.size());
  if (!(s1 > 0)) s1 = 1;
  if (!(s2 > 0)) s2 = 1;

  GenderClassifier best;
  std::size_t best_correct = 0;
  bool have = false;
  std::vector<std::pair<double, bool>> proj(train.size());
  for (int step = 0; step < 180; ++step) {
    const double th = step * std::numbers::pi / 180.0;
    const double a = std::cos(th) / s1, b = std::sin(th) / s2;
    for (std::size_t i = 0; i < train.size(); ++i)
      proj[i] = {a * train[i].ratios.ratio1 + b * train[i].ratios.ratio2, train[i].gender == Gender::Female};
    std::sort(proj.begin(), proj.end());
    // Both orientations: threshold below proj[i] predicts female above it.
    std::size_t females = 0;
    for (const auto& p : proj) females += p.second;
    std::size_t males_below = 0, females_below = 0;
    for (std::size_t i = 0; i <= proj.size(); ++i) {
      if (i == 0 || i == proj.size() || proj[i].first != proj[i - 1].first) {
        const double t = i == 0 ? proj[0].first - 1.0
                         : i == proj.size() ? proj.back().first + 1.0
                                            : 0.5 * (proj[i - 1].first + proj[i].first);
        const std::size_t up = males_below + (females - females_below);       // female above
        const std::size_t down = proj.size() - up;                             // female below
        for (int sign : {1, -1}) {
          const std::size_t c = sign > 0 ? up : down;
          if (!have || c > best_correct) {
            have = true;
            best_correct = c;
            best = {sign * a, sign * b, sign * t};
          }
        }
      }
      if (i < proj.size()) (proj[i].second ? females_below : males_below)++;
    }
  }
  return best;
}

double gender_accuracy(const GenderClassifier& c, const std::vector<GenderSample>& samples) {
  if (samples.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& s : samples) ok += c.predict(s.ratios) == s.gender;
  return static_cast<double>(ok) / samples.size();
}

std::string gender_samples_csv(const std::vector<GenderSample>& samples) {
  std::string s = "pair,gender,ratio1,ratio2\n";
  for (const auto& g : samples)
    s += std::to_string(g.pair) + "," + std::string(to_string(g.gender)) + "," + fmt("%.6f", g.ratios.ratio1) + "," +
         fmt("%.6f", g.ratios.ratio2) + "\n";
  return s;
}

IcpReport register_to_model(const PointCloud& frontal, const Skeleton15& skeleton, const BodyModel& model,
                            const RegistrationOptions& o) {
  const PointCloud target = sample_mesh(model.mesh, o.target_samples, o.seed);
  const PointCloud source = o.source_voxel > 0 ? voxel_downsample(frontal, o.source_voxel) : frontal;
  return icp_register(source, target, skeleton_align_init(skeleton, model.skeleton), o.icp);
}

std::string icp_errors_csv(const IcpReport& report) {
  std::string s = "iteration,mean_error_m\n";
  for (std::size_t i = 0; i < report.errors.size(); ++i) s += std::to_string(i) + "," + fmt("%.6f", report.errors[i]) + "\n";
  return s;
}

void bench_vector(std::uint64_t seed, std::uint64_t i, std::size_t dim, float* out) {
  auto rng = stream_rng(seed, i);
  for (std::size_t j = 0; j < dim; ++j) out[j] = static_cast<float>(uniform01(rng));
}

std::vector<BenchRow> bench_query(const BenchOptions& o, const std::function<void(const BenchRow&)>& on_row) {
  if (o.dim == 0 || o.queries == 0 || o.k == 0) fail(ErrorCode::InvalidArgument, "bench needs dim, queries and k > 0");
  std::vector<BenchRow> rows;
  const std::uint64_t query_seed = splitmix64(o.seed ^ 0x7175657279ull);
  std::vector<std::vector<float>> queries(o.queries, std::vector<float>(o.dim));
  for (std::size_t q = 0; q < o.queries; ++q) bench_vector(query_seed, q, o.dim, queries[q].data());
  auto emit = [&](const BenchRow& r) {
    rows.push_back(r);
    if (on_row) on_row(r);
  };

  for (const std::size_t n : o.sizes) {
    if (n < o.k) fail(ErrorCode::InvalidArgument, "bench size below k");
    std::vector<QueryResult> exact_results;
    const bool run_exact = n * o.dim * sizeof(float) <= o.exact_limit_bytes;
    if (run_exact) {
      BenchRow row{n, "exact"};
      auto t0 = Clock::now();
      std::vector<IndexEntry> entries(n);
      for (std::size_t i = 0; i < n; ++i) {
        entries[i].id = i;
        entries[i].vector.resize(o.dim);
        bench_vector(o.seed, i, o.dim, entries[i].vector.data());
      }
      IndexBuildOptions bo;
      bo.balance_local_weight = false;
      const FeatureIndex index = FeatureIndex::build(std::move(entries), bo);
      row.build_s = seconds_since(t0);
      std::vector<double> ms;
      for (const auto& q : queries) {
        t0 = Clock::now();
        exact_results.push_back(index.query(q, o.k));
        ms.push_back(1e3 * seconds_since(t0));
      }
      row.median_ms = median(ms);
      row.max_ms = *std::max_element(ms.begin(), ms.end());
      emit(row);
    }

    BenchRow row{n, "quantized"};
    auto t0 = Clock::now();
    ScalarQuantizer sq;
    sq.lo.assign(o.dim, 0.0f);  // uniform01 values lie in (0, 1)
    sq.step = 1.0 / 255.0;
    QuantizedIndex qi(sq, n);
    std::vector<float> v(o.dim);
    for (std::size_t i = 0; i < n; ++i) {
      bench_vector(o.seed, i, o.dim, v.data());
      qi.add(i, v.data());
    }
    row.build_s = seconds_since(t0);
    const std::size_t dim = o.dim;
    const std::uint64_t seed = o.seed;
    const QuantizedIndex::Fetch fetch = [dim, seed](std::size_t r, float* out) { bench_vector(seed, r, dim, out); };
    std::vector<double> ms;
    double cand = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      QuantizedIndex::Stats st;
      t0 = Clock::now();
      const QueryResult res = qi.query(queries[q], o.k, fetch, &st);
      ms.push_back(1e3 * seconds_since(t0));
      cand += st.candidates;
      if (run_exact && res != exact_results[q]) row.matches_exact = false;
    }
    row.median_ms = median(ms);
    row.max_ms = *std::max_element(ms.begin(), ms.end());
    row.mean_candidates = cand / queries.size();
    emit(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string s = "size,method,build_s,median_ms,max_ms,mean_candidates,matches_exact\n";
  for (const auto& r : rows)
    s += std::to_string(r.size) + "," + r.method + "," + fmt("%.3f", r.build_s) + "," + fmt("%.3f", r.median_ms) + "," +
         fmt("%.3f", r.max_ms) + "," + fmt("%.1f", r.mean_candidates) + "," + (r.matches_exact ? "1" : "0") + "\n";
  return s;
}

}  // namespace bodyfit
