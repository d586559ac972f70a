#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "bodyfit/features/extract.hpp"
#include "bodyfit/pipeline/dataset.hpp"
#include "bodyfit/pipeline/evaluation.hpp"
#include "bodyfit/registration/icp.hpp"
#include "bodyfit/retrieval/index.hpp"
#include "bodyfit/sizing/size_chart.hpp"

namespace bodyfit {

struct PipelineConfig {
  std::filesystem::path depth, skeleton, intrinsics, index;
  std::optional<std::filesystem::path> chart;
  std::optional<std::filesystem::path> intermediates;  // directory, written when set
  FeatureOptions features;
  std::size_t k = 5;
  bool run_icp = false;
  RegistrationOptions registration;  // its seed drives the mesh sampling
};

struct PipelineResult {
  ExtractedFeatures features;
  QueryResult neighbors;
  std::string size;
  std::optional<IcpReport> icp;
};

// measure -> features -> k-NN -> size -> optional ICP against the top-1
// model. Errors carry the stage name ("input", "measure", "retrieval",
// "sizing", "registration") as context.
PipelineResult run_pipeline(const DepthFrame& frame, const Skeleton15& skeleton, const FeatureIndex& index,
                            const Sidecar* sidecar, const SizeChart& chart, const PipelineConfig& cfg);

// Loads the inputs named in cfg and runs the pipeline.
PipelineResult run_pipeline(const PipelineConfig& cfg);

std::string pipeline_result_to_json(const PipelineResult& r);
std::string query_result_to_json(const QueryResult& r);

// ASCII PLY with optional normals.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace bodyfit
