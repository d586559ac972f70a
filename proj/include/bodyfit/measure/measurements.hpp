#pragma once

#include <array>
#include <string>
#include <string_view>

namespace bodyfit {

// All values in centimeters.
struct Measurements {
  double height = 0.0;
  double sleeve_length = 0.0;
  double leg_length = 0.0;
  double shoulder_length = 0.0;
  double girth_neck = 0.0;
  double girth_shoulder = 0.0;
  double girth_chest = 0.0;
  double girth_waist = 0.0;
  double girth_hip = 0.0;

  static constexpr std::size_t kCount = 9;
  // JSON key order: height_cm, sleeve_cm, leg_cm, shoulder_cm, girth_*_cm.
  static const std::array<std::string_view, kCount>& keys();
  std::array<double, kCount> values() const;
  bool operator==(const Measurements&) const = default;
};

enum class Girth { Neck, Shoulder, Chest, Waist, Hip };
inline constexpr std::array<Girth, 5> kAllGirths = {Girth::Neck, Girth::Shoulder, Girth::Chest, Girth::Waist,
                                                     Girth::Hip};
std::string_view girth_name(Girth g);  // "neck", "shoulder", ...

struct LimbLengths {
  double sleeve = 0.0, leg = 0.0, shoulder = 0.0;  // cm
};

std::string measurements_to_json(const Measurements& m);
Measurements measurements_from_json(const std::string& text);  // FormatError

}  // namespace bodyfit
