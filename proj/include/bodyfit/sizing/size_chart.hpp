#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bodyfit/measure/measurements.hpp"

namespace bodyfit {

struct Range {
  double lo = 0.0, hi = 0.0;  // cm
};

struct SizeBand {
  std::string label;
  Range chest;                  // [lo, hi), the last band also includes hi
  std::optional<Range> height;  // inclusive
};

// Ordered T-shirt size bands. Chest ranges must be contiguous and cover
// [70, 140] cm; height ranges, where present, must not decrease from band to
// band and adjacent ones must touch or overlap, which keeps the prediction
// monotone in chest girth.
struct SizeChart {
  std::vector<SizeBand> bands;

  void validate() const;  // InvalidArgument
  static SizeChart defaults();
  static SizeChart load(const std::filesystem::path& path);  // Io / Format / InvalidArgument
  std::string to_json() const;
};

// Band containing the chest girth, moved one band toward a violated height
// range. Throws OutOfChart.
std::string predict_size(const Measurements& m, const SizeChart& chart = SizeChart::defaults());

}  // namespace bodyfit
