#include "bodyfit/measure/measurements.hpp"

#include <json.hpp>

#include "bodyfit/error.hpp"

namespace bodyfit {

using nlohmann::json;

const std::array<std::string_view, Measurements::kCount>& Measurements::keys() {
  static const std::array<std::string_view, kCount> k = {
      "height_cm",         "sleeve_cm",      "leg_cm",         "shoulder_cm", "girth_neck_cm",
      "girth_shoulder_cm", "girth_chest_cm", "girth_waist_cm", "girth_hip_cm"};
  return k;
}

std::array<double, Measurements::kCount> Measurements::values() const {
  return {height,     sleeve_length, leg_length,  shoulder_length, girth_neck,
          girth_shoulder, girth_chest,   girth_waist, girth_hip};
}

std::string_view girth_name(Girth g) {
  static constexpr std::string_view names[] = {"neck", "shoulder", "chest", "waist", "hip"};
  return names[static_cast<int>(g)];
}

std::string measurements_to_json(const Measurements& m) {
  json j = json::object();
  const auto v = m.values();
  for (std::size_t i = 0; i < Measurements::kCount; ++i) j[std::string(Measurements::keys()[i])] = v[i];
  return j.dump(2) + "\n";
}

Measurements measurements_from_json(const std::string& text) {
  Measurements m;
  try {
    const json j = json::parse(text);
    double* fields[] = {&m.height,     &m.sleeve_length, &m.leg_length,  &m.shoulder_length, &m.girth_neck,
                        &m.girth_shoulder, &m.girth_chest,   &m.girth_waist, &m.girth_hip};
    for (std::size_t i = 0; i < Measurements::kCount; ++i)
      *fields[i] = j.at(std::string(Measurements::keys()[i])).get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("measurements: ") + e.what());
  }
  return m;
}

}  // namespace bodyfit
