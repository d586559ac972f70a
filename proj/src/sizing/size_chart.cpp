#include "bodyfit/sizing/size_chart.hpp"

#include <cmath>
#include <json.hpp>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

using nlohmann::json;

void SizeChart::validate() const {
  if (bands.empty()) fail(ErrorCode::InvalidArgument, "size chart has no bands");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    if (b.label.empty()) fail(ErrorCode::InvalidArgument, "size band without a label");
    if (!(b.chest.lo < b.chest.hi)) fail(ErrorCode::InvalidArgument, "band " + b.label + " has an empty chest range");
    if (i > 0 && bands[i - 1].chest.hi != b.chest.lo)
      fail(ErrorCode::InvalidArgument, "chest ranges of " + bands[i - 1].label + " and " + b.label + " are not contiguous");
    if (b.height && !(b.height->lo <= b.height->hi))
      fail(ErrorCode::InvalidArgument, "band " + b.label + " has an empty height range");
  }
  if (bands.front().chest.lo > 70.0 || bands.back().chest.hi < 140.0)
    fail(ErrorCode::InvalidArgument, "chest bands must cover [70, 140] cm");
  const SizeBand* prev = nullptr;
  for (const auto& b : bands) {
    if (!b.height) continue;
    if (prev && (b.height->lo < prev->height->lo || b.height->hi < prev->height->hi || b.height->lo > prev->height->hi))
      fail(ErrorCode::InvalidArgument, "height ranges of " + prev->label + " and " + b.label + " are inconsistent");
    prev = &b;
  }
}

SizeChart SizeChart::defaults() {
  SizeChart c;
  c.bands = {{"XS", {70, 86}, {}},  {"S", {86, 94}, {}},    {"M", {94, 100}, {}},  {"L", {100, 108}, {}},
             {"XL", {108, 116}, {}}, {"2XL", {116, 126}, {}}, {"3XL", {126, 140}, {}}};
  return c;
}

SizeChart SizeChart::load(const std::filesystem::path& path) {
  SizeChart c;
  try {
    const json j = json::parse(io::read_text_file(path));
    for (const auto& b : j.at("bands")) {
      SizeBand band;
      band.label = b.at("label").get<std::string>();
      band.chest = {b.at("chest_cm").at(0).get<double>(), b.at("chest_cm").at(1).get<double>()};
      if (b.contains("height_cm") && !b.at("height_cm").is_null())
        band.height = Range{b.at("height_cm").at(0).get<double>(), b.at("height_cm").at(1).get<double>()};
      c.bands.push_back(band);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

std::string SizeChart::to_json() const {
  json bands_j = json::array();
  for (const auto& b : bands) {
    json x = {{"label", b.label}, {"chest_cm", {b.chest.lo, b.chest.hi}}};
    if (b.height) x["height_cm"] = {b.height->lo, b.height->hi};
    bands_j.push_back(x);
  }
  return json{{"bands", bands_j}}.dump(2) + "\n";
}

std::string predict_size(const Measurements& m, const SizeChart& chart) {
  chart.validate();
  const double chest = m.girth_chest;
  const std::size_t n = chart.bands.size();
  std::size_t idx = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = chart.bands[i].chest;
    if (chest >= r.lo && (chest < r.hi || (i + 1 == n && chest == r.hi))) {
      idx = i;
      break;
    }
  }
  if (idx == n || !std::isfinite(chest))
    fail(ErrorCode::OutOfChart, "chest girth " + std::to_string(chest) + " cm is outside the chart");
  if (const auto& h = chart.bands[idx].height) {
    if (m.height < h->lo && idx > 0)
      --idx;
    else if (m.height > h->hi && idx + 1 < n)
      ++idx;
  }
  return chart.bands[idx].label;
}

}  // namespace bodyfit
