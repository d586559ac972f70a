// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. BODYFIT_ACCEPTANCE=1,3,... restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "bodyfit/core/normals.hpp"
#include "bodyfit/core/random.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/features/extract.hpp"
#include "bodyfit/measure/ellipse.hpp"
#include "bodyfit/pipeline/dataset.hpp"
#include "bodyfit/pipeline/evaluation.hpp"
#include "bodyfit/registration/icp.hpp"
#include "bodyfit/retrieval/index.hpp"
#include "bodyfit/sizing/size_chart.hpp"

using namespace bodyfit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("[%s] C%d %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void progress(const char* what, std::size_t done, std::size_t total) {
  std::fprintf(stderr, "  %s %zu/%zu\n", what, done, total);
}

// Trapezoid rule on the periodic integrand converges geometrically.
double arc_length(double a, double b) {
  const int n = 4096;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * M_PI * i / n;
    s += std::hypot(a * std::sin(t), b * std::cos(t));
  }
  return s * 2 * M_PI / n;
}

// ---------------------------------------------------------------- C1
void height_round_trip() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  for (double noise : {0.0, 5.0}) {
    HeightEvalOptions o;
    o.count = 100;
    o.seed = 101;
    o.noise_sd_mm = noise;
    const auto rows = eval_height(o);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += !r.failure.empty();
    const double mae = mean_abs_height_error(rows);
    ok = ok && failed == 0 && mae <= 2.0;
    detail += fmt("noise %.0f mm: ", noise) + fmt("mean |err| %.3f cm", mae) + ", " + std::to_string(failed) +
              " failed; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120;
  report(1, ok, "height round-trip, 100 bodies: " + detail + fmt("%.1f s", secs) + " (limits 2.0 cm, 120 s)");
}

// ---------------------------------------------------------------- C2
void gender_ratios_criterion() {
  GenderEvalOptions o;
  o.pairs = 100;
  o.seed = 202;
  const auto samples = gender_samples(o);
  std::vector<GenderSample> train, test;
  for (const auto& s : samples) (s.pair < o.pairs / 2 ? train : test).push_back(s);
  const GenderClassifier c = fit_gender_classifier(train);
  const double acc = gender_accuracy(c, test);
  report(2, acc >= 0.95,
         "gender ratios, 200 paired models: held-out accuracy " + fmt("%.1f%%", 100 * acc) + " (limit 95%)");
}

// ---------------------------------------------------------------- C3, C5
struct Database {
  std::vector<BodyParams> params;
  FeatureIndex index;
};

Database build_database(std::size_t n, std::uint64_t seed) {
  Database db;
  db.params = sample_population(DemographicTable::defaults(), n, seed);
  std::vector<FeatureVector> vectors(n);
  std::vector<std::uint64_t> ids(n);
  std::vector<std::string> errors(n);
  std::size_t done = 0;
  parallel_for(n, 0, [&](std::size_t i) {
    ids[i] = i;
    try {
      vectors[i] = model_features(build_mesh(db.params[i])).vector;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
    if (++done % 1000 == 0) progress("features", done, n);
  });
  std::vector<std::uint64_t> kept_ids;
  std::vector<FeatureVector> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i].empty()) kept_ids.push_back(ids[i]), kept.push_back(vectors[i]);
    else std::fprintf(stderr, "  model %zu skipped: %s\n", i, errors[i].c_str());
  db.index = FeatureIndex::build(kept_ids, kept);
  return db;
}

void retrieval_self_consistency(const Database& db, std::uint64_t seed) {
  const FeatureIndex& idx = db.index;
  std::size_t self_ok = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto top = idx.query(std::span<const float>(idx.vector(r), idx.dim()), 1);
    self_ok += top[0].id == idx.id(r) && top[0].distance == 0.0;
  }
  // Noisy re-renders of 100 random members.
  std::mt19937_64 rng(seed);
  std::size_t top3 = 0, trials = 0, failed = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t row = rng() % idx.size();
    const std::uint64_t id = idx.id(row);
    RenderConfig rc;
    rc.noise_sd_mm = 5;
    rc.noise_seed = splitmix64(seed + t);
    ++trials;
    try {
      const auto x = model_features(build_mesh(db.params[id]), rc);
      const auto res = idx.query(x.vector, 3);
      top3 += std::any_of(res.begin(), res.end(), [&](const Neighbor& n) { return n.id == id; });
    } catch (const Error& e) {
      ++failed;
    }
  }
  const bool ok = self_ok == idx.size() && top3 >= 90 * trials / 100;
  report(3, ok,
         "retrieval, " + std::to_string(idx.size()) + "-model index: self top-1 at distance 0 " +
             std::to_string(self_ok) + "/" + std::to_string(idx.size()) + " (limit 100%); noisy 5 mm top-3 " +
             std::to_string(top3) + "/" + std::to_string(trials) + " (limit 90%), " + std::to_string(failed) +
             " extraction failures");
}

void icp_criterion(const Database& db, std::uint64_t seed) {
  const auto subjects = sample_population(DemographicTable::defaults(), 10, seed);
  std::size_t ok_count = 0;
  double worst = 0;
  std::string failures_text;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    RenderConfig rc;
    rc.noise_sd_mm = 5;
    rc.noise_seed = splitmix64(seed ^ s);
    try {
      const BodyModel subject = build_mesh(subjects[s]);
      const RenderResult rr = render_depth(subject, rc);
      FeatureOptions fo;
      const ExtractedFeatures x = extract_features(rr.frame, rr.skeleton, fo);
      const auto top = db.index.query(x.vector, 1);
      const BodyModel retrieved = build_mesh(db.params[top[0].id]);
      RegistrationOptions ro;
      ro.seed = seed + s;
      const IcpReport rep = register_to_model(x.detail.cloud, rr.skeleton, retrieved, ro);
      bool monotone = true;
      for (std::size_t i = 1; i < rep.errors.size(); ++i) monotone = monotone && rep.errors[i] <= rep.errors[i - 1];
      // errors[i] is measured after i updates.
      const double at6 = rep.errors[std::min<std::size_t>(6, rep.errors.size() - 1)];
      worst = std::max(worst, at6);
      if (monotone && at6 < 0.09) ++ok_count;
      else failures_text += " subject " + std::to_string(s) + (monotone ? "" : " (increasing)");
    } catch (const Error& e) {
      failures_text += " subject " + std::to_string(s) + " (" + e.what() + ")";
    }
  }
  report(5, ok_count == subjects.size(),
         "ICP, 10 noisy subjects vs top-1 model: " + std::to_string(ok_count) +
             "/10 non-increasing and < 9 cm after 6 iterations, worst " + fmt("%.2f cm", 100 * worst) +
             failures_text);
}

// ---------------------------------------------------------------- C4
void latency_criterion() {
  BenchOptions o;
  o.sizes = {50000, 5000000};
  o.queries = 5;
  o.seed = 404;
  double ms_small = INFINITY, ms_large = INFINITY;
  bool exact = true;
  std::string rows;
  bench_query(o, [&](const BenchRow& r) {
    std::fprintf(stderr, "  bench %zu %s median %.2f ms\n", r.size, r.method.c_str(), r.median_ms);
    exact = exact && r.matches_exact;
    if (r.size == 50000) ms_small = std::min(ms_small, r.median_ms);
    if (r.size == 5000000) ms_large = std::min(ms_large, r.median_ms);
    rows += " " + std::to_string(r.size) + "/" + r.method + fmt(" %.1f ms;", r.median_ms);
  });
  report(4, exact && ms_small < 50 && ms_large < 500,
         "query latency, 501-dim, single thread: 5e4 " + fmt("%.2f ms", ms_small) + " (limit 50 ms), 5e6 " +
             fmt("%.1f ms", ms_large) + " (limit 500 ms), results exact: " + (exact ? "yes" : "no") + ";" + rows);
}

// ---------------------------------------------------------------- C6
void ellipse_criterion() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> major(0.1, 0.3), ratio(1.0, 5.0), angle(-M_PI / 2, M_PI / 2), off(-1, 1);
  std::normal_distribution<double> noise(0, 0.001);
  double worst_param = 0, worst_perim_noisy = 0, worst_formula = 0;
  std::size_t fit_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = major(rng), b = a / ratio(rng), th = angle(rng);
    const Vec2 c(off(rng), off(rng));
    const Eigen::Rotation2Dd R(th);
    std::vector<Vec2> exact, noisy;
    for (int k = 0; k < 100; ++k) {
      const double t = 2 * M_PI * k / 100;
      exact.push_back(c + R * Vec2(a * std::cos(t), b * std::sin(t)));
      noisy.push_back(exact.back() + Vec2(noise(rng), noise(rng)));
    }
    const double truth = arc_length(a, b);
    worst_formula = std::max(worst_formula, std::abs(ellipse_perimeter(a, b) / truth - 1));
    try {
      const EllipseFit e = fit_ellipse(exact);
      double dth = std::remainder(e.angle - th, M_PI);
      if (std::abs(a - b) < 1e-6) dth = 0;  // circle: any orientation
      worst_param = std::max({worst_param, std::abs(e.a - a), std::abs(e.b - b), (e.center - c).norm(),
                              std::abs(dth) * a});
      const EllipseFit en = fit_ellipse(noisy);
      worst_perim_noisy = std::max(worst_perim_noisy, std::abs(ellipse_perimeter(en) / truth - 1));
    } catch (const Error&) {
      ++fit_failures;
    }
  }
  report(6, fit_failures == 0 && worst_param < 1e-6 && worst_perim_noisy < 0.015 && worst_formula < 1e-4,
         "ellipse oracle, 1000 ellipses a/b <= 5: worst parameter error " + fmt("%.2e m", worst_param) +
             " (limit 1e-6), worst noisy perimeter error " + fmt("%.3f%%", 100 * worst_perim_noisy) +
             " (limit 1.5%), worst formula error " + fmt("%.2e", worst_formula) + " (limit 1e-4), " +
             std::to_string(fit_failures) + " fit failures");
}

// ---------------------------------------------------------------- C7
void fpfh_criterion() {
  const BodyModel m = build_mesh(BodyParams{});
  const RenderResult rr = render_depth(m);
  const ExtractedFeatures x = extract_features(rr.frame, rr.skeleton);
  const Vec3 q = rr.skeleton[JointId::TO];
  const FpfhDescriptor base = fpfh_at(x.sampled, q);
  std::mt19937_64 rng(707);
  std::normal_distribution<double> n(0, 1);
  double worst_l1 = 0, worst_norm = 0;
  const auto check_norm = [&](const FpfhDescriptor& d) {
    for (int h = 0; h < 3; ++h) {
      double s = 0;
      for (int b = 0; b < kFpfhBins; ++b) s += d.bins[h * kFpfhBins + b];
      worst_norm = std::max(worst_norm, std::abs(s - 1));
    }
  };
  check_norm(base);
  for (const auto& d : x.descriptors) check_norm(*d);
  for (int i = 0; i < 100; ++i) {
    const Mat3 R = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
    const Vec3 t(n(rng), n(rng), n(rng));
    // Normals are re-estimated on the moved cloud, viewed from the moved camera.
    PointCloud moved = transformed(x.sampled, R, t);
    moved.normals.clear();
    const FpfhDescriptor d = fpfh_at(estimate_normals(moved, FeatureOptions{}.normal_radius, t), R * q + t);
    check_norm(d);
    double l1 = 0;
    for (int b = 0; b < kFpfhSize; ++b) l1 += std::abs(d.bins[b] - base.bins[b]);
    worst_l1 = std::max(worst_l1, l1);
  }
  report(7, worst_l1 <= 0.02 && worst_norm <= 1e-6 && base.bins.size() == 33 && kFeatureDim == 501,
         "FPFH, 100 random rigid transforms (normals re-estimated): worst L1 " + fmt("%.2e", worst_l1) +
             " (limit 0.02), length " + std::to_string(base.bins.size()) + ", worst sub-histogram sum error " +
             fmt("%.1e", worst_norm) + " (limit 1e-6)");
}

// ---------------------------------------------------------------- C8
void knn_criterion() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<float> u(-1, 1);
  std::size_t discrepancies = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 1000;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 20);
    const bool coarse = trial % 4 == 0;  // many exact ties
    std::vector<IndexEntry> entries(n);
    for (std::size_t i = 0; i < n; ++i) {
      entries[i].id = rng() % 1000000 * 1000 + i;
      entries[i].vector.resize(kFeatureDim);
      for (auto& v : entries[i].vector) v = coarse ? std::round(u(rng)) : u(rng);
    }
    std::vector<float> q(kFeatureDim);
    for (auto& v : q) v = coarse ? std::round(u(rng)) : u(rng);
    const FeatureIndex idx = FeatureIndex::build(entries, {.balance_local_weight = false});
    const auto got = idx.query(q, k);
    std::vector<std::pair<long double, std::uint64_t>> all;
    for (const auto& e : entries) {
      long double s = 0;
      for (std::size_t d = 0; d < kFeatureDim; ++d) s += ((long double)e.vector[d] - q[d]) * ((long double)e.vector[d] - q[d]);
      all.push_back({s, e.id});
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < k; ++i) discrepancies += got[i].id != all[i].second;
  }
  report(8, discrepancies == 0,
         "k-NN exactness, 1000 random instances vs exhaustive scan: " + std::to_string(discrepancies) +
             " ranking discrepancies (limit 0)");
}

// ---------------------------------------------------------------- C9
void throughput_criterion() {
  const fs::path dir = fs::temp_directory_path() / ("bodyfit_accept_gen_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  DatasetOptions o;
  o.count = 300;
  o.seed = 909;
  const auto t0 = Clock::now();
  generate_dataset(dir, o);
  const double secs = seconds_since(t0);
  std::uintmax_t bytes = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) bytes += e.file_size();
  fs::remove_all(dir);
  const double rate = o.count / secs, projected_min = 50000 / rate / 60;
  report(9, rate >= 10 && projected_min < 90,
         "generation with export, 300 models: " + fmt("%.1f models/s", rate) + " (limit 10), 50k projected " +
             fmt("%.1f min", projected_min) + " (limit 90 min), " + fmt("%.2f MB/model", bytes / 1e6 / o.count));
}

// ---------------------------------------------------------------- C10
void not_reproducible() {
  // Substitute evidence for the sizing claim: the chart is total, monotone
  // and deterministic over its domain.
  const SizeChart c = SizeChart::defaults();
  bool ok = true;
  std::string last;
  std::vector<std::string> order;
  for (const auto& b : c.bands) order.push_back(b.label);
  int last_rank = -1;
  for (double chest = 70; chest <= 140; chest += 0.01) {
    Measurements m;
    m.girth_chest = chest;
    m.height = 175;
    const std::string s = predict_size(m, c);
    ok = ok && s == predict_size(m, c);
    const int r = int(std::find(order.begin(), order.end(), s) - order.begin());
    ok = ok && r >= last_rank;
    last_rank = r;
  }
  report(10, ok,
         "real-subject results (1.87 cm height error, 100% gender, 87.5% size accuracy on 83 people) are not "
         "reproducible without the human dataset; substituted by C1-C3 and the sizing properties (total, "
         "monotone, deterministic over 70-140 cm: " +
             std::string(ok ? "holds" : "violated") + ")");
}

}  // namespace

int main() {
  std::set<int> only;
  if (const char* env = std::getenv("BODYFIT_ACCEPTANCE")) {
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
  }
  const auto want = [&](int id) { return only.empty() || only.count(id); };
  try {
    if (want(6)) ellipse_criterion();
    if (want(7)) fpfh_criterion();
    if (want(8)) knn_criterion();
    if (want(10)) not_reproducible();
    if (want(1)) height_round_trip();
    if (want(2)) gender_ratios_criterion();
    if (want(9)) throughput_criterion();
    if (want(4)) latency_criterion();
    if (want(3) || want(5)) {
      const auto t0 = Clock::now();
      const Database db = build_database(10000, 303);
      std::fprintf(stderr, "  database built in %.0f s\n", seconds_since(t0));
      if (want(3)) retrieval_self_consistency(db, 313);
      if (want(5)) icp_criterion(db, 505);
    }
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
