#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bodyfit {

enum class AgeGroup { Age18To24, Age25To44, Age45To64, Age65To74 };
enum class Gender { Male, Female };

inline constexpr AgeGroup kAllAgeGroups[] = {AgeGroup::Age18To24, AgeGroup::Age25To44, AgeGroup::Age45To64,
                                             AgeGroup::Age65To74};

std::string_view to_string(AgeGroup g);  // "18-24", ...
std::string_view to_string(Gender g);    // "male" / "female"
std::optional<AgeGroup> parse_age_group(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);

inline constexpr double kMinHeight = 1.3, kMaxHeight = 2.2;   // m
inline constexpr double kMinWeight = 35.0, kMaxWeight = 180.0;  // kg

struct BodyParams {
  AgeGroup age_group = AgeGroup::Age25To44;
  Gender gender = Gender::Male;
  double height = 1.75;  // m
  double weight = 75.0;  // kg

  // Throws ParamOutOfRange.
  void validate() const;
  bool operator==(const BodyParams&) const = default;
};

std::string params_to_json(const BodyParams& p);
BodyParams params_from_json(const std::string& text);  // FormatError / ParamOutOfRange

struct DemographicRow {
  AgeGroup age_group;
  Gender gender;
  double height_mean_cm, height_sd_cm;
  double weight_mean_kg, weight_sd_kg;
  double group_weight;
};

struct DemographicTable {
  std::vector<DemographicRow> rows;

  // Group weights must sum to 1 (within 1e-6) and every sd must be positive.
  void validate() const;

  // NHANES 1999-2002 means and published +- values, uniform group weights.
  static DemographicTable defaults();
  static DemographicTable load(const std::filesystem::path& path);
  std::string to_json() const;
};

struct SamplerOptions {
  double height_sd_scale = 23.3;
  double weight_sd_scale = 15.0;
};

// Draw `index` of the population identified by `seed`. Each draw has its own
// counter-derived generator, so any subset can be produced independently and
// in any order.
BodyParams sample_one(const DemographicTable& table, std::uint64_t seed, std::uint64_t index,
                      const SamplerOptions& options = {});

std::vector<BodyParams> sample_population(const DemographicTable& table, std::size_t n, std::uint64_t seed,
                                          const SamplerOptions& options = {});

// Standard normal helpers, exposed for the sampler tests.
double normal_cdf(double x);
double normal_quantile(double p);
// CDF of N(mean, sd^2) truncated to [lo, hi].
double truncated_normal_cdf(double x, double mean, double sd, double lo, double hi);

}  // namespace bodyfit
