#include "bodyfit/core/depth_io.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bodyfit/error.hpp"

namespace bodyfit::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

namespace {

json parse_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

// Skips whitespace and '#' comments between PGM header tokens.
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (!std::isspace(ch)) break;
  }
  if (ch == EOF) return false;
  tok.push_back(static_cast<char>(ch));
  while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#') tok.push_back(static_cast<char>(in.get()));
  return true;
}

long parse_header_int(std::istream& in, const fs::path& path) {
  std::string tok;
  if (!next_token(in, tok)) fail(ErrorCode::Format, path.string() + ": truncated PGM header");
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::Format, path.string() + ": bad PGM header token '" + tok + "'");
  }
}

void write_pgm(const fs::path& path, int width, int height, int maxval, const std::vector<std::uint8_t>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

void write_depth_pgm(const fs::path& path, const DepthFrame& frame) {
  frame.validate();
  std::vector<std::uint8_t> payload(frame.data.size() * 2);
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    payload[2 * i] = static_cast<std::uint8_t>(frame.data[i] >> 8);
    payload[2 * i + 1] = static_cast<std::uint8_t>(frame.data[i] & 0xFF);
  }
  write_pgm(path, frame.width(), frame.height(), 65535, payload);
}

DepthFrame read_depth_pgm(const fs::path& path, const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string magic;
  if (!next_token(in, magic) || magic != "P5") fail(ErrorCode::Format, path.string() + ": not a binary PGM");
  const long w = parse_header_int(in, path);
  const long h = parse_header_int(in, path);
  const long maxval = parse_header_int(in, path);
  in.get();  // single whitespace before the raster
  if (w != intrinsics.width || h != intrinsics.height)
    fail(ErrorCode::Format, path.string() + ": image size disagrees with intrinsics");
  if (maxval <= 0 || maxval > 65535) fail(ErrorCode::Format, path.string() + ": bad maxval");
  DepthFrame frame(intrinsics);
  const std::size_t n = frame.data.size();
  if (maxval < 256) {
    std::vector<std::uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) fail(ErrorCode::Format, path.string() + ": truncated raster");
    for (std::size_t i = 0; i < n; ++i) frame.data[i] = raw[i];
  } else {
    std::vector<std::uint8_t> raw(2 * n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      fail(ErrorCode::Format, path.string() + ": truncated raster");
    for (std::size_t i = 0; i < n; ++i)
      frame.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return frame;
}

void write_preview_pgm(const fs::path& path, const DepthFrame& frame) {
  frame.validate();
  std::vector<std::uint8_t> payload(frame.data.size(), 0);
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    if (frame.data[i] == 0) continue;
    const double z = frame.data[i] * frame.intrinsics.depth_unit;
    const double t = std::clamp((z - kSensorMinRange) / (kSensorMaxRange - kSensorMinRange), 0.0, 1.0);
    payload[i] = static_cast<std::uint8_t>(1 + std::lround(t * 254.0));
  }
  write_pgm(path, frame.width(), frame.height(), 255, payload);
}

void write_intrinsics_json(const fs::path& path, const CameraIntrinsics& in) {
  json j = {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy},
            {"width", in.width}, {"height", in.height}, {"depth_unit", in.depth_unit}};
  write_text_file(path, j.dump(2) + "\n");
}

CameraIntrinsics read_intrinsics_json(const fs::path& path) {
  const json j = parse_json_file(path);
  CameraIntrinsics in;
  try {
    in.fx = j.at("fx").get<double>();
    in.fy = j.at("fy").get<double>();
    in.cx = j.at("cx").get<double>();
    in.cy = j.at("cy").get<double>();
    in.width = j.at("width").get<int>();
    in.height = j.at("height").get<int>();
    in.depth_unit = j.value("depth_unit", 0.001);
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  in.validate();
  return in;
}

void write_skeleton_json(const fs::path& path, const Skeleton15& sk) {
  json j = json::object();
  json conf = json::object();
  for (JointId id : kAllJoints) {
    const Vec3& p = sk[id];
    j[std::string(joint_name(id))] = {p.x(), p.y(), p.z()};
    conf[std::string(joint_name(id))] = sk.confidence[static_cast<std::size_t>(id)];
  }
  j["confidence"] = conf;
  write_text_file(path, j.dump(2) + "\n");
}

Skeleton15 read_skeleton_json(const fs::path& path) {
  const json j = parse_json_file(path);
  Skeleton15 sk;
  try {
    for (JointId id : kAllJoints) {
      const std::string name(joint_name(id));
      if (!j.contains(name)) fail(ErrorCode::Format, path.string() + ": missing joint " + name);
      const auto& a = j.at(name);
      if (!a.is_array() || a.size() != 3) fail(ErrorCode::Format, path.string() + ": joint " + name + " is not [x,y,z]");
      sk[id] = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
      if (j.contains("confidence") && j["confidence"].contains(name))
        sk.confidence[static_cast<std::size_t>(id)] = j["confidence"][name].get<double>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  if (!sk.all_finite()) fail(ErrorCode::Format, path.string() + ": non-finite joint position");
  return sk;
}

}  // namespace bodyfit::io
