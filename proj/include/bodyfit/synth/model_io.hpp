#pragma once

#include <filesystem>

#include "bodyfit/synth/body_model.hpp"

namespace bodyfit {

// Bundle layout: model.obj, skeleton.json, rig.json, params.json, truth.json.
void export_model(const BodyModel& model, const std::filesystem::path& directory);
BodyModel import_model(const std::filesystem::path& directory);  // IoError, FormatError

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::filesystem::path& path);

}  // namespace bodyfit
