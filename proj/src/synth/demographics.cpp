#include "bodyfit/synth/demographics.hpp"

#include <cmath>
#include <json.hpp>
#include <numbers>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/core/random.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

using nlohmann::json;

std::string_view to_string(AgeGroup g) {
  switch (g) {
    case AgeGroup::Age18To24: return "18-24";
    case AgeGroup::Age25To44: return "25-44";
    case AgeGroup::Age45To64: return "45-64";
    case AgeGroup::Age65To74: return "65-74";
  }
  return "?";
}

std::string_view to_string(Gender g) { return g == Gender::Male ? "male" : "female"; }

std::optional<AgeGroup> parse_age_group(std::string_view s) {
  for (AgeGroup g : kAllAgeGroups)
    if (to_string(g) == s) return g;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  return std::nullopt;
}

void BodyParams::validate() const {
  if (!(height >= kMinHeight && height <= kMaxHeight))
    fail(ErrorCode::ParamOutOfRange, "height " + std::to_string(height) + " m outside [1.3, 2.2]");
  if (!(weight >= kMinWeight && weight <= kMaxWeight))
    fail(ErrorCode::ParamOutOfRange, "weight " + std::to_string(weight) + " kg outside [35, 180]");
}

std::string params_to_json(const BodyParams& p) {
  json j = {{"age_group", to_string(p.age_group)},
            {"gender", to_string(p.gender)},
            {"height_m", p.height},
            {"weight_kg", p.weight}};
  return j.dump(2) + "\n";
}

BodyParams params_from_json(const std::string& text) {
  BodyParams p;
  try {
    const json j = json::parse(text);
    const auto age = parse_age_group(j.at("age_group").get<std::string>());
    const auto gender = parse_gender(j.at("gender").get<std::string>());
    if (!age || !gender) fail(ErrorCode::Format, "unknown age_group or gender");
    p.age_group = *age;
    p.gender = *gender;
    p.height = j.at("height_m").get<double>();
    p.weight = j.at("weight_kg").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("params: ") + e.what());
  }
  p.validate();
  return p;
}

void DemographicTable::validate() const {
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "demographic table is empty");
  double sum = 0.0;
  for (const auto& r : rows) {
    if (!(r.height_sd_cm > 0.0) || !(r.weight_sd_kg > 0.0))
      fail(ErrorCode::InvalidArgument, "demographic sd must be positive");
    if (!(r.group_weight >= 0.0)) fail(ErrorCode::InvalidArgument, "group weight must be non-negative");
    sum += r.group_weight;
  }
  if (std::abs(sum - 1.0) > 1e-6) fail(ErrorCode::InvalidArgument, "group weights must sum to 1");
}

DemographicTable DemographicTable::defaults() {
  using A = AgeGroup;
  using G = Gender;
  DemographicTable t;
  t.rows = {
      {A::Age18To24, G::Male, 176.7, 0.3, 83.4, 0.7, 0.125},
      {A::Age25To44, G::Male, 176.8, 0.3, 87.6, 0.8, 0.125},
      {A::Age45To64, G::Male, 175.8, 0.3, 88.8, 0.9, 0.125},
      {A::Age65To74, G::Male, 174.4, 0.3, 87.1, 0.6, 0.125},
      {A::Age18To24, G::Female, 162.8, 0.3, 71.1, 0.9, 0.125},
      {A::Age25To44, G::Female, 163.2, 0.3, 75.3, 1.0, 0.125},
      {A::Age45To64, G::Female, 162.3, 0.3, 76.9, 1.1, 0.125},
      {A::Age65To74, G::Female, 160.0, 0.2, 74.9, 0.6, 0.125},
  };
  return t;
}

DemographicTable DemographicTable::load(const std::filesystem::path& path) {
  DemographicTable t;
  try {
    const json j = json::parse(io::read_text_file(path));
    for (const auto& r : j.at("rows")) {
      const auto age = parse_age_group(r.at("age_group").get<std::string>());
      const auto gender = parse_gender(r.at("gender").get<std::string>());
      if (!age || !gender) fail(ErrorCode::Format, path.string() + ": unknown age_group or gender");
      t.rows.push_back({*age, *gender, r.at("height_mean_cm").get<double>(), r.at("height_sd_cm").get<double>(),
                        r.at("weight_mean_kg").get<double>(), r.at("weight_sd_kg").get<double>(),
                        r.at("group_weight").get<double>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  t.validate();
  return t;
}

std::string DemographicTable::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"age_group", to_string(r.age_group)},
                      {"gender", to_string(r.gender)},
                      {"height_mean_cm", r.height_mean_cm},
                      {"height_sd_cm", r.height_sd_cm},
                      {"weight_mean_kg", r.weight_mean_kg},
                      {"weight_sd_kg", r.weight_sd_kg},
                      {"group_weight", r.group_weight}});
  return json{{"rows", rows_j}}.dump(2) + "\n";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "normal quantile needs p in (0, 1)");
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double truncated_normal_cdf(double x, double mean, double sd, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double fa = normal_cdf((lo - mean) / sd), fb = normal_cdf((hi - mean) / sd);
  return (normal_cdf((x - mean) / sd) - fa) / (fb - fa);
}

namespace {

double draw_truncated(std::mt19937_64& rng, double mean, double sd, double lo, double hi) {
  const double fa = normal_cdf((lo - mean) / sd), fb = normal_cdf((hi - mean) / sd);
  const double p = fa + uniform01(rng) * (fb - fa);
  const double x = mean + sd * normal_quantile(std::clamp(p, 1e-300, 1.0 - 1e-16));
  return std::clamp(x, lo, hi);
}

}  // namespace

BodyParams sample_one(const DemographicTable& table, std::uint64_t seed, std::uint64_t index,
                      const SamplerOptions& options) {
  if (!(options.height_sd_scale > 0.0) || !(options.weight_sd_scale > 0.0))
    fail(ErrorCode::InvalidArgument, "sd scale must be positive");
  std::mt19937_64 rng = stream_rng(seed, index);
  const double g = uniform01(rng);
  std::size_t pick = table.rows.size() - 1;
  double cum = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    cum += table.rows[i].group_weight;
    if (g < cum) {
      pick = i;
      break;
    }
  }
  const auto& row = table.rows[pick];
  BodyParams p;
  p.age_group = row.age_group;
  p.gender = row.gender;
  p.height = draw_truncated(rng, row.height_mean_cm / 100.0, row.height_sd_cm * options.height_sd_scale / 100.0,
                            kMinHeight, kMaxHeight);
  p.weight = draw_truncated(rng, row.weight_mean_kg, row.weight_sd_kg * options.weight_sd_scale, kMinWeight,
                            kMaxWeight);
  return p;
}

std::vector<BodyParams> sample_population(const DemographicTable& table, std::size_t n, std::uint64_t seed,
                                          const SamplerOptions& options) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "population size must be at least 1");
  table.validate();
  std::vector<BodyParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(table, seed, i, options));
  return out;
}

}  // namespace bodyfit
