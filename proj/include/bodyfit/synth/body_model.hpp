#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bodyfit/core/skeleton.hpp"
#include "bodyfit/measure/measurements.hpp"
#include "bodyfit/synth/demographics.hpp"

namespace bodyfit {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;  // counter-clockwise seen from outside
  std::vector<std::uint16_t> triangle_segment;          // index into segment_names
  std::vector<std::string> segment_names;

  std::size_t segment_id(const std::string& name) const;  // InvalidArgument if absent
};

// Generating ellipse of one girth: horizontal, centred at `center`, semi-axes
// along model x and z.
struct SectionTruth {
  Vec3 center = Vec3::Zero();
  double semi_x = 0.0;
  double semi_z = 0.0;
  std::string segment;  // mesh segment that owns the section
};

// Model space: y up, soles on y = 0, top of the head at y = height, the body
// faces -z and its left side is at -x.
struct BodyModel {
  BodyParams params;
  TriangleMesh mesh;
  Skeleton15 skeleton;
  std::map<std::string, Vec3> rig;  // 32 named joints of the internal rig
  Measurements truth;
  std::array<SectionTruth, 5> sections;  // indexed by Girth
};

// Throws ParamOutOfRange.
BodyModel build_mesh(const BodyParams& params);

inline const Measurements& ground_truth_measurements(const BodyModel& model) { return model.truth; }

}  // namespace bodyfit
