#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "bodyfit/core/types.hpp"

namespace bodyfit {

// Fixed order used everywhere a per-joint array appears (feature layout,
// file formats).
enum class JointId : int { HE, NE, TO, LA, RA, LE, RE, LS, RS, LH, RH, LK, RK, LF, RF };

inline constexpr std::size_t kJointCount = 15;

inline constexpr std::array<JointId, kJointCount> kAllJoints = {
    JointId::HE, JointId::NE, JointId::TO, JointId::LA, JointId::RA,
    JointId::LE, JointId::RE, JointId::LS, JointId::RS, JointId::LH,
    JointId::RH, JointId::LK, JointId::RK, JointId::LF, JointId::RF};

std::string_view joint_name(JointId id);
std::optional<JointId> joint_from_name(std::string_view name);

struct Skeleton15 {
  std::array<Vec3, kJointCount> joints{};
  std::array<double, kJointCount> confidence{};

  Skeleton15() { confidence.fill(1.0); }

  const Vec3& operator[](JointId id) const { return joints[static_cast<std::size_t>(id)]; }
  Vec3& operator[](JointId id) { return joints[static_cast<std::size_t>(id)]; }

  bool all_finite() const;

  // Applies x -> R x + t to every joint.
  Skeleton15 transformed(const Mat3& rotation, const Vec3& translation) const;
};

}  // namespace bodyfit
