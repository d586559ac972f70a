#include "bodyfit/core/skeleton.hpp"

#include <cmath>

namespace bodyfit {

namespace {
constexpr std::array<std::string_view, kJointCount> kNames = {
    "HE", "NE", "TO", "LA", "RA", "LE", "RE", "LS", "RS", "LH", "RH", "LK", "RK", "LF", "RF"};
}

std::string_view joint_name(JointId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<JointId> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i)
    if (kNames[i] == name) return static_cast<JointId>(i);
  return std::nullopt;
}

bool Skeleton15::all_finite() const {
  for (const auto& j : joints)
    if (!j.allFinite()) return false;
  return true;
}

Skeleton15 Skeleton15::transformed(const Mat3& R, const Vec3& t) const {
  Skeleton15 out = *this;
  for (auto& j : out.joints) j = R * j + t;
  return out;
}

}  // namespace bodyfit
