#include "bodyfit/pipeline/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/synth/model_io.hpp"

namespace bodyfit {

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string bundle_name(std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "models/%06llu", static_cast<unsigned long long>(id));
  return buf;
}

namespace {

json entry_json(const DatasetEntry& e) {
  return {{"id", e.id}, {"bundle", e.bundle}, {"params", json::parse(params_to_json(e.params))}};
}

DatasetEntry entry_from(const json& j) {
  return {j.at("id").get<std::uint64_t>(), j.at("bundle").get<std::string>(), params_from_json(j.at("params").dump())};
}

}  // namespace

std::vector<DatasetEntry> generate_dataset(const fs::path& out, const DatasetOptions& options, const Progress& progress) {
  options.table.validate();
  const auto params = sample_population(options.table, options.count, options.seed, options.sampler);
  std::error_code ec;
  fs::create_directories(out / "models", ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + (out / "models").string() + ": " + ec.message());
  std::vector<DatasetEntry> entries(params.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(params.size(), options.threads, [&](std::size_t i) {
    entries[i] = {i, bundle_name(i), params[i]};
    export_model(build_mesh(params[i]), out / entries[i].bundle);
    const std::size_t d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(d, params.size());
    }
  });
  json manifest = {{"seed", options.seed},
                   {"count", options.count},
                   {"height_sd_scale", options.sampler.height_sd_scale},
                   {"weight_sd_scale", options.sampler.weight_sd_scale},
                   {"table", json::parse(options.table.to_json())},
                   {"models", json::array()}};
  for (const auto& e : entries) manifest["models"].push_back(entry_json(e));
  io::write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
  return entries;
}

std::vector<DatasetEntry> read_manifest(const fs::path& dataset) {
  const fs::path path = dataset / "manifest.json";
  if (!fs::exists(path)) fail(ErrorCode::Io, "no manifest.json in " + dataset.string());
  std::vector<DatasetEntry> out;
  try {
    const json j = json::parse(io::read_text_file(path));
    for (const auto& e : j.at("models")) out.push_back(entry_from(e));
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  return out;
}

ExtractedFeatures model_features(const BodyModel& model, const RenderConfig& render, const FeatureOptions& features) {
  const RenderResult r = render_depth(model, render);
  return extract_features(r.frame, r.skeleton, features);
}

fs::path sidecar_path(const fs::path& index_path) {
  fs::path p = index_path;
  p += ".meta.json";
  return p;
}

const DatasetEntry* Sidecar::find(std::uint64_t id) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), id,
                                   [](const DatasetEntry& e, std::uint64_t v) { return e.id < v; });
  return it != entries.end() && it->id == id ? &*it : nullptr;
}

void write_sidecar(const fs::path& path, const Sidecar& s) {
  json j = {{"dataset", s.dataset.string()}, {"entries", json::array()}};
  for (const auto& e : s.entries) j["entries"].push_back(entry_json(e));
  io::write_text_file(path, j.dump(2) + "\n");
}

Sidecar read_sidecar(const fs::path& path) {
  Sidecar s;
  try {
    const json j = json::parse(io::read_text_file(path));
    s.dataset = j.at("dataset").get<std::string>();
    for (const auto& e : j.at("entries")) s.entries.push_back(entry_from(e));
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  std::sort(s.entries.begin(), s.entries.end(), [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });
  return s;
}

IndexBuildReport build_dataset_index(const fs::path& dataset, const fs::path& index_path, const FeatureOptions& features,
                                     const RenderConfig& render, std::size_t threads, const Progress& progress) {
  const auto entries = read_manifest(dataset);
  if (entries.empty()) fail(ErrorCode::InvalidArgument, "dataset has no models");
  std::vector<std::optional<FeatureVector>> vectors(entries.size());
  std::vector<std::string> errors(entries.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    try {
      vectors[i] = model_features(import_model(dataset / entries[i].bundle), render, features).vector;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Io || e.code() == ErrorCode::Format) throw;
      errors[i] = e.what();
    }
    const std::size_t d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(d, entries.size());
    }
  });
  IndexBuildReport report;
  std::vector<std::uint64_t> ids;
  std::vector<FeatureVector> kept;
  Sidecar sidecar;
  sidecar.dataset = fs::absolute(dataset);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!vectors[i]) {
      report.skipped.emplace_back(entries[i].id, errors[i]);
      continue;
    }
    ids.push_back(entries[i].id);
    kept.push_back(*vectors[i]);
    sidecar.entries.push_back(entries[i]);
  }
  if (ids.empty()) fail(ErrorCode::InvalidArgument, "no model produced a feature vector");
  FeatureIndex::build(ids, kept).save(index_path);
  write_sidecar(sidecar_path(index_path), sidecar);
  report.indexed = ids.size();
  return report;
}

}  // namespace bodyfit
