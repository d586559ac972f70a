#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bodyfit/core/skeleton.hpp"

namespace bodyfit {

// Each of the 15 targets is one source joint or the midpoint of several.
struct JointMapping {
  std::array<std::vector<std::string>, kJointCount> sources;

  void validate() const;  // InvalidArgument when a target has no source

  static JointMapping identity();     // target name -> same name
  static JointMapping default_rig();  // names of the generator's 32-joint rig
  static JointMapping load(const std::filesystem::path& path);
  std::string to_json() const;
};

// Throws MissingSourceJoint naming the first absent source.
Skeleton15 remap_skeleton(const std::map<std::string, Vec3>& named_joints, const JointMapping& mapping);

}  // namespace bodyfit
