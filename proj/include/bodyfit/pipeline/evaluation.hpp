#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bodyfit/features/extract.hpp"
#include "bodyfit/registration/icp.hpp"
#include "bodyfit/render/renderer.hpp"
#include "bodyfit/synth/demographics.hpp"

namespace bodyfit {

// Height round trip: sample, build, render at 2 m, measure.
struct HeightEvalRow {
  std::uint64_t index = 0;
  BodyParams params;
  double truth_cm = 0.0;
  double estimate_cm = 0.0;  // NaN when measurement failed
  std::string failure;
};

struct HeightEvalOptions {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  double noise_sd_mm = 0.0;
  SamplerOptions sampler;
  DemographicTable table = DemographicTable::defaults();
  std::size_t threads = 0;
};

std::vector<HeightEvalRow> eval_height(const HeightEvalOptions& options);
double mean_abs_height_error(const std::vector<HeightEvalRow>& rows);  // over successful rows
std::string height_eval_csv(const std::vector<HeightEvalRow>& rows);

// Gender pairs: the same age group, height and weight built once as male and
// once as female.
struct GenderSample {
  std::uint64_t pair = 0;
  Gender gender = Gender::Male;
  GenderRatios ratios;
};

struct GenderEvalOptions {
  std::size_t pairs = 100;
  std::uint64_t seed = 0;
  double noise_sd_mm = 0.0;
  FeatureOptions features;
  SamplerOptions sampler;
  std::size_t threads = 0;
};

std::vector<GenderSample> gender_samples(const GenderEvalOptions& options);

// Female when a*ratio1 + b*ratio2 > threshold.
struct GenderClassifier {
  double a = 0.0, b = 1.0, threshold = 0.0;
  Gender predict(const GenderRatios& r) const;
};

// Linear threshold fit by sweeping 180 projection directions and taking the
// best training accuracy (first direction and lowest threshold on ties).
GenderClassifier fit_gender_classifier(const std::vector<GenderSample>& train);
double gender_accuracy(const GenderClassifier& c, const std::vector<GenderSample>& samples);
std::string gender_samples_csv(const std::vector<GenderSample>& samples);

// ICP of a frontal cloud onto `count` samples of the model surface, started
// from the skeleton alignment. The source is voxel-downsampled first.
struct RegistrationOptions {
  std::size_t target_samples = 50000;
  double source_voxel = 0.01;  // m, 0 keeps every point
  std::uint64_t seed = 0;
  IcpOptions icp;
};
IcpReport register_to_model(const PointCloud& frontal, const Skeleton15& skeleton, const BodyModel& model,
                            const RegistrationOptions& options = {});

std::string icp_errors_csv(const IcpReport& report);

// Query latency on uniform random vectors. Sizes whose exact records fit in
// `exact_limit_bytes` are timed with the exhaustive scan; every size is also
// timed with the quantized prefilter, which regenerates exact vectors from
// their seed for re-ranking so the records never need to be resident.
struct BenchOptions {
  std::vector<std::size_t> sizes = {10000, 100000, 5000000};
  std::size_t dim = 501;
  std::size_t queries = 5;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t exact_limit_bytes = std::size_t{1} << 30;
};

struct BenchRow {
  std::size_t size = 0;
  std::string method;  // "exact" or "quantized"
  double build_s = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
  double mean_candidates = 0.0;  // quantized only
  bool matches_exact = true;     // quantized vs exact where both ran
};

// Element j of random vector i of stream `seed`.
void bench_vector(std::uint64_t seed, std::uint64_t i, std::size_t dim, float* out);

std::vector<BenchRow> bench_query(const BenchOptions& options, const std::function<void(const BenchRow&)>& on_row = {});
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace bodyfit
