#include "bodyfit/synth/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit {

namespace fs = std::filesystem;
using nlohmann::json;

void write_obj(const fs::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  char buf[128];
  out << "# generalized-cylinder body mesh\n";
  for (const Vec3& v : mesh.vertices) {
    const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out.write(buf, n);
  }
  int current = -1;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const int seg = mesh.triangle_segment.empty() ? 0 : mesh.triangle_segment[t];
    if (seg != current && !mesh.segment_names.empty()) {
      out << "g " << mesh.segment_names[seg] << '\n';
      current = seg;
    }
    const auto& tri = mesh.triangles[t];
    out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

TriangleMesh read_obj(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  int seg = -1;
  const auto bad = [&](const std::string& why) {
    fail(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) bad("bad vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "g" || tag == "o") {
      std::string name;
      ls >> name;
      auto it = std::find(mesh.segment_names.begin(), mesh.segment_names.end(), name);
      seg = static_cast<int>(it - mesh.segment_names.begin());
      if (it == mesh.segment_names.end()) mesh.segment_names.push_back(name);
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string tok;
      while (ls >> tok) {
        long v = 0;
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        const auto res = std::from_chars(head.data(), head.data() + head.size(), v);
        if (res.ec != std::errc() || v == 0) bad("bad face index '" + tok + "'");
        if (v < 0) v += static_cast<long>(mesh.vertices.size()) + 1;
        if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size()) bad("face index out of range");
        idx.push_back(static_cast<std::uint32_t>(v - 1));
      }
      if (idx.size() < 3) bad("face with fewer than 3 vertices");
      if (seg < 0) {
        mesh.segment_names.push_back("default");
        seg = static_cast<int>(mesh.segment_names.size()) - 1;
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
        mesh.triangle_segment.push_back(static_cast<std::uint16_t>(seg));
      }
    }
  }
  if (mesh.triangles.empty()) fail(ErrorCode::Format, path.string() + ": no faces");
  return mesh;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw json::type_error::create(302, "expected [x, y, z]", nullptr);
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void require(const fs::path& p) {
  if (!fs::exists(p)) fail(ErrorCode::Format, "model bundle is missing " + p.filename().string());
}

}  // namespace

void export_model(const BodyModel& model, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_obj(dir / "model.obj", model.mesh);
  io::write_skeleton_json(dir / "skeleton.json", model.skeleton);
  json rig = json::object();
  for (const auto& [name, p] : model.rig) rig[name] = vec_json(p);
  io::write_text_file(dir / "rig.json", rig.dump(2) + "\n");
  io::write_text_file(dir / "params.json", params_to_json(model.params));

  json truth = json::parse(measurements_to_json(model.truth));
  json sections = json::object();
  for (Girth g : kAllGirths) {
    const auto& s = model.sections[static_cast<std::size_t>(g)];
    sections[std::string(girth_name(g))] = {{"center", vec_json(s.center)}, {"semi_x", s.semi_x}, {"semi_z", s.semi_z},
                          {"segment", s.segment}};
  }
  truth["sections"] = sections;
  io::write_text_file(dir / "truth.json", truth.dump(2) + "\n");
}

BodyModel import_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  for (const char* f : {"model.obj", "skeleton.json", "params.json", "truth.json"}) require(dir / f);
  BodyModel model;
  model.mesh = read_obj(dir / "model.obj");
  model.skeleton = io::read_skeleton_json(dir / "skeleton.json");
  model.params = params_from_json(io::read_text_file(dir / "params.json"));
  const std::string truth_text = io::read_text_file(dir / "truth.json");
  model.truth = measurements_from_json(truth_text);
  try {
    if (fs::exists(dir / "rig.json")) {
      const json rig = json::parse(io::read_text_file(dir / "rig.json"));
      for (const auto& [name, v] : rig.items()) model.rig[name] = vec_from(v);
    }
    const json truth = json::parse(truth_text);
    if (truth.contains("sections")) {
      for (Girth g : kAllGirths) {
        const json& s = truth.at("sections").at(std::string(girth_name(g)));
        model.sections[static_cast<std::size_t>(g)] = {vec_from(s.at("center")), s.at("semi_x").get<double>(), s.at("semi_z").get<double>(),
                             s.at("segment").get<std::string>()};
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, dir.string() + ": " + e.what());
  }
  return model;
}

}  // namespace bodyfit
