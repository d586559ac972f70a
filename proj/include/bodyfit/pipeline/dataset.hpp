#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bodyfit/features/extract.hpp"
#include "bodyfit/render/renderer.hpp"
#include "bodyfit/retrieval/index.hpp"
#include "bodyfit/synth/demographics.hpp"

namespace bodyfit {

struct DatasetOptions {
  std::size_t count = 1;
  std::uint64_t seed = 0;
  SamplerOptions sampler;
  DemographicTable table = DemographicTable::defaults();
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct DatasetEntry {
  std::uint64_t id = 0;
  std::string bundle;  // relative to the dataset directory
  BodyParams params;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

// Bundle directory name for a model id, e.g. "models/000042".
std::string bundle_name(std::uint64_t id);

// Samples `count` bodies and writes each bundle plus manifest.json. The
// content depends only on (seed, count, sampler, table).
std::vector<DatasetEntry> generate_dataset(const std::filesystem::path& out, const DatasetOptions& options,
                                           const Progress& progress = {});
std::vector<DatasetEntry> read_manifest(const std::filesystem::path& dataset);  // Io / Format

// Renders the model's frontal view and extracts its feature vector.
ExtractedFeatures model_features(const BodyModel& model, const RenderConfig& render = {},
                                 const FeatureOptions& features = {});

struct IndexBuildReport {
  std::size_t indexed = 0;
  std::vector<std::pair<std::uint64_t, std::string>> skipped;  // id, reason
};

// Features for every dataset model, the balanced index at `index_path`, and
// its sidecar (see sidecar_path).
IndexBuildReport build_dataset_index(const std::filesystem::path& dataset, const std::filesystem::path& index_path,
                                     const FeatureOptions& features = {}, const RenderConfig& render = {},
                                     std::size_t threads = 0, const Progress& progress = {});

// "<index>.meta.json": dataset directory and per-id bundle path and params.
std::filesystem::path sidecar_path(const std::filesystem::path& index_path);
struct Sidecar {
  std::filesystem::path dataset;
  std::vector<DatasetEntry> entries;
  const DatasetEntry* find(std::uint64_t id) const;
};
void write_sidecar(const std::filesystem::path& path, const Sidecar& sidecar);
Sidecar read_sidecar(const std::filesystem::path& path);

// Runs fn(i) for i in [0, n) on `threads` workers (0: hardware concurrency).
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace bodyfit
