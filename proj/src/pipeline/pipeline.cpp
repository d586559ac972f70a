#include "bodyfit/pipeline/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/synth/model_io.hpp"

namespace bodyfit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context(name);
  }
}

void write_contour_csv(const fs::path& path, const Contour2D& contour) {
  std::string text = "col,row\n";
  for (const auto& p : contour.points) text += std::to_string(p.col) + "," + std::to_string(p.row) + "\n";
  io::write_text_file(path, text);
}

}  // namespace

void write_ply(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  const bool normals = cloud.has_normals();
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
  out << "end_header\n";
  char buf[160];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    int n = std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f", p.x(), p.y(), p.z());
    if (normals) {
      const Vec3& q = cloud.normals[i];
      n += std::snprintf(buf + n, sizeof buf - n, " %.6f %.6f %.6f", q.x(), q.y(), q.z());
    }
    out.write(buf, n);
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::string query_result_to_json(const QueryResult& r) {
  json j = json::array();
  for (const auto& n : r) j.push_back({{"id", n.id}, {"distance", n.distance}});
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const DepthFrame& frame, const Skeleton15& skeleton, const FeatureIndex& index,
                            const Sidecar* sidecar, const SizeChart& chart, const PipelineConfig& cfg) {
  PipelineResult res;
  res.features = stage("measure", [&] { return extract_features(frame, skeleton, cfg.features); });
  res.neighbors = stage("retrieval", [&] { return index.query(res.features.vector, std::min(cfg.k, index.size())); });
  res.size = stage("sizing", [&] { return predict_size(res.features.detail.measurements, chart); });
  if (cfg.run_icp) {
    res.icp = stage("registration", [&] {
      if (!sidecar) fail(ErrorCode::InvalidArgument, "ICP needs the index sidecar to locate models");
      const DatasetEntry* e = sidecar->find(res.neighbors.front().id);
      if (!e) fail(ErrorCode::Format, "top-1 id " + std::to_string(res.neighbors.front().id) + " missing from sidecar");
      const BodyModel model = import_model(sidecar->dataset / e->bundle);
      return register_to_model(res.features.detail.cloud, skeleton, model, cfg.registration);
    });
  }
  if (cfg.intermediates) {
    const fs::path& dir = *cfg.intermediates;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string());
    write_ply(dir / "cloud.ply", res.features.detail.cloud);
    write_ply(dir / "cloud_sampled.ply", res.features.sampled);
    write_contour_csv(dir / "contour.csv", res.features.detail.silhouette.contour);
    write_feature_vector(dir / "features.imfv", res.features.vector);
    io::write_text_file(dir / "measurements.json", measurements_to_json(res.features.detail.measurements));
    io::write_text_file(dir / "neighbors.json", query_result_to_json(res.neighbors));
    if (res.icp) io::write_text_file(dir / "icp.json", icp_report_to_json(*res.icp));
  }
  return res;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  struct Inputs {
    DepthFrame frame;
    Skeleton15 skeleton;
    FeatureIndex index;
    std::optional<Sidecar> sidecar;
    SizeChart chart;
  };
  Inputs in = stage("input", [&] {
    for (const fs::path& p : {cfg.depth, cfg.skeleton, cfg.intrinsics, cfg.index})
      if (!fs::exists(p)) fail(ErrorCode::Io, "missing input file " + p.string());
    Inputs x;
    x.frame = io::read_depth_pgm(cfg.depth, io::read_intrinsics_json(cfg.intrinsics));
    x.skeleton = io::read_skeleton_json(cfg.skeleton);
    x.index = FeatureIndex::load(cfg.index);
    if (fs::exists(sidecar_path(cfg.index))) x.sidecar = read_sidecar(sidecar_path(cfg.index));
    x.chart = cfg.chart ? SizeChart::load(*cfg.chart) : SizeChart::defaults();
    return x;
  });
  return run_pipeline(in.frame, in.skeleton, in.index, in.sidecar ? &*in.sidecar : nullptr, in.chart, cfg);
}

std::string pipeline_result_to_json(const PipelineResult& r) {
  json j;
  j["measurements"] = json::parse(measurements_to_json(r.features.detail.measurements));
  j["ratios"] = {{"ratio1", r.features.ratios.ratio1}, {"ratio2", r.features.ratios.ratio2}};
  j["neighbors"] = json::parse(query_result_to_json(r.neighbors));
  j["size"] = r.size;
  if (r.icp) j["icp"] = json::parse(icp_report_to_json(*r.icp));
  return j.dump(2) + "\n";
}

}  // namespace bodyfit
