#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "bodyfit/core/skeleton.hpp"
#include "bodyfit/features/fpfh.hpp"
#include "bodyfit/measure/measurements.hpp"

namespace bodyfit {

inline constexpr std::size_t kFeatureDim = 4 + 2 + kFpfhSize * kJointCount;  // 501
inline constexpr std::size_t kGlobalOffset = 0, kGlobalCount = 4;
inline constexpr std::size_t kGenderOffset = 4, kGenderCount = 2;
inline constexpr std::size_t kLocalOffset = 6, kLocalCount = kFpfhSize * kJointCount;

struct GroupWeights {
  double global = 1.0;
  double gender = 1.0;
  double local = 1.0;

  void validate() const;  // InvalidArgument when negative or all zero
  bool operator==(const GroupWeights&) const = default;
};

struct GenderRatios {
  double ratio1 = 1.0;  // geodesic / Euclidean LS-RS distance
  double ratio2 = 1.0;  // hip girth / waist girth
};

// Layout: [height, sleeve, leg, shoulder (m) | ratio1, ratio2 | FPFH x 15 in
// JointId order], each group already multiplied by its weight.
struct FeatureVector {
  std::array<float, kFeatureDim> values{};
  GroupWeights weights;
};

using JointDescriptors = std::array<std::optional<FpfhDescriptor>, kJointCount>;

// Throws MissingDescriptor naming the first absent joint.
FeatureVector assemble_feature_vector(const Measurements& m, const GenderRatios& r, const JointDescriptors& fpfh,
                                      const GroupWeights& w = {});

// Same vector under different group weights. A group whose old weight is
// zero cannot be recovered and stays zero.
FeatureVector reweighted(const FeatureVector& f, const GroupWeights& w);

void write_feature_vector(const std::filesystem::path& path, const FeatureVector& f);
FeatureVector read_feature_vector(const std::filesystem::path& path);  // Io / Format
std::vector<std::uint8_t> encode_feature_vector(const FeatureVector& f);
FeatureVector decode_feature_vector(const std::vector<std::uint8_t>& bytes);  // Format

}  // namespace bodyfit
