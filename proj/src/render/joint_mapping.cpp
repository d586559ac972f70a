#include "bodyfit/render/joint_mapping.hpp"

#include <json.hpp>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

using nlohmann::json;

void JointMapping::validate() const {
  for (std::size_t i = 0; i < kJointCount; ++i)
    if (sources[i].empty())
      fail(ErrorCode::InvalidArgument,
           "joint mapping has no source for " + std::string(joint_name(static_cast<JointId>(i))));
}

JointMapping JointMapping::identity() {
  JointMapping m;
  for (JointId id : kAllJoints) m.sources[static_cast<std::size_t>(id)] = {std::string(joint_name(id))};
  return m;
}

JointMapping JointMapping::default_rig() {
  using J = JointId;
  JointMapping m;
  const auto set = [&](J id, std::vector<std::string> src) { m.sources[static_cast<std::size_t>(id)] = std::move(src); };
  set(J::HE, {"head"});
  set(J::NE, {"clavicle.L", "clavicle.R"});
  set(J::TO, {"spine03"});
  set(J::LA, {"hand.L"});
  set(J::RA, {"hand.R"});
  set(J::LE, {"lowerarm01.L"});
  set(J::RE, {"lowerarm01.R"});
  set(J::LS, {"shoulder01.L"});
  set(J::RS, {"shoulder01.R"});
  set(J::LH, {"upperleg01.L"});
  set(J::RH, {"upperleg01.R"});
  set(J::LK, {"lowerleg01.L"});
  set(J::RK, {"lowerleg01.R"});
  set(J::LF, {"foot.L"});
  set(J::RF, {"foot.R"});
  return m;
}

JointMapping JointMapping::load(const std::filesystem::path& path) {
  JointMapping m;
  try {
    const json j = json::parse(io::read_text_file(path));
    for (const auto& [key, value] : j.items()) {
      const auto id = joint_from_name(key);
      if (!id) fail(ErrorCode::Format, path.string() + ": unknown target joint " + key);
      auto& dst = m.sources[static_cast<std::size_t>(*id)];
      if (value.is_string()) dst = {value.get<std::string>()};
      else dst = value.get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

std::string JointMapping::to_json() const {
  json j = json::object();
  for (JointId id : kAllJoints) j[std::string(joint_name(id))] = sources[static_cast<std::size_t>(id)];
  return j.dump(2) + "\n";
}

Skeleton15 remap_skeleton(const std::map<std::string, Vec3>& named, const JointMapping& mapping) {
  mapping.validate();
  Skeleton15 sk;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    Vec3 sum = Vec3::Zero();
    for (const auto& name : mapping.sources[i]) {
      const auto it = named.find(name);
      if (it == named.end()) fail(ErrorCode::MissingSourceJoint, "source joint '" + name + "' is missing");
      sum += it->second;
    }
    sk.joints[i] = sum / static_cast<double>(mapping.sources[i].size());
  }
  return sk;
}

}  // namespace bodyfit
