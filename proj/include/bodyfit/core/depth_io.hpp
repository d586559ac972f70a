#pragma once

#include <filesystem>
#include <string>

#include "bodyfit/core/camera.hpp"
#include "bodyfit/core/skeleton.hpp"

namespace bodyfit::io {

// Binary PGM (P5), maxval 65535, big-endian samples, values in depth units.
void write_depth_pgm(const std::filesystem::path& path, const DepthFrame& frame);
// Reads the samples; the intrinsics come from the sidecar and must agree on
// the image size.
DepthFrame read_depth_pgm(const std::filesystem::path& path, const CameraIntrinsics& intrinsics);

// Maxval 255 preview: 0 stays invalid, [0.8 m, 4.0 m] maps onto 1..255.
void write_preview_pgm(const std::filesystem::path& path, const DepthFrame& frame);

// {fx, fy, cx, cy, width, height, depth_unit}
void write_intrinsics_json(const std::filesystem::path& path, const CameraIntrinsics& intrinsics);
CameraIntrinsics read_intrinsics_json(const std::filesystem::path& path);

// Object keyed by the 15 joint ids, each [x, y, z] in meters, plus a
// parallel "confidence" object.
void write_skeleton_json(const std::filesystem::path& path, const Skeleton15& skeleton);
Skeleton15 read_skeleton_json(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bodyfit::io
