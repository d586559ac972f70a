// Command-line front end: dataset generation, rendering, measurement,
// retrieval, evaluation harnesses and benchmarks.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "bodyfit/core/depth_io.hpp"
#include "bodyfit/error.hpp"
#include "bodyfit/features/extract.hpp"
#include "bodyfit/pipeline/dataset.hpp"
#include "bodyfit/pipeline/evaluation.hpp"
#include "bodyfit/pipeline/pipeline.hpp"
#include "bodyfit/retrieval/kernels.hpp"
#include "bodyfit/sizing/size_chart.hpp"
#include "bodyfit/synth/model_io.hpp"

using namespace bodyfit;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInput = 2, kMeasurement = 3, kFormat = 4, kInternal = 5 };

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPositiveDepth:
    case ErrorCode::ParamOutOfRange:
    case ErrorCode::Io:
    case ErrorCode::MissingSourceJoint:
    case ErrorCode::DuplicateId:
      return kInput;
    case ErrorCode::NoSubject:
    case ErrorCode::ModelOutOfFrustum:
    case ErrorCode::Posture:
    case ErrorCode::DegenerateSkeleton:
    case ErrorCode::InsufficientContour:
    case ErrorCode::EmptySection:
    case ErrorCode::DegenerateInput:
    case ErrorCode::NotAnEllipse:
    case ErrorCode::SparseNeighborhood:
    case ErrorCode::Disconnected:
    case ErrorCode::MissingDescriptor:
    case ErrorCode::EmptyCloud:
    case ErrorCode::OutOfChart:
      return kMeasurement;
    case ErrorCode::Format:
    case ErrorCode::DimensionMismatch:
      return kFormat;
    case ErrorCode::Internal:
      return kInternal;
  }
  return kInternal;
}

// Render outputs share a prefix: PREFIX.depth.pgm, PREFIX.intrinsics.json,
// PREFIX.skeleton.json, PREFIX.preview.pgm.
fs::path with_suffix(const std::string& prefix, const char* suffix) { return fs::path(prefix + suffix); }

// Sibling of a PREFIX.depth.pgm file, or empty when the name does not follow
// the render convention.
fs::path sibling_of_depth(const fs::path& depth, const char* suffix) {
  const std::string s = depth.string();
  const std::string tail = ".depth.pgm";
  if (s.size() <= tail.size() || s.compare(s.size() - tail.size(), tail.size(), tail) != 0) return {};
  return fs::path(s.substr(0, s.size() - tail.size()) + suffix);
}

fs::path resolve_intrinsics(const std::string& given, const fs::path& depth) {
  if (!given.empty()) return given;
  const fs::path p = sibling_of_depth(depth, ".intrinsics.json");
  if (p.empty()) fail(ErrorCode::InvalidArgument, "--intrinsics is required for " + depth.string());
  return p;
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) fail(ErrorCode::Io, "missing input file " + p.string());
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_text_file(out, text);
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string tok = list.substr(start, end - start);
    double v = 0.0;
    try {
      v = std::stod(tok);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad size '" + tok + "'");
    }
    if (!(v >= 1.0) || v != std::floor(v)) fail(ErrorCode::InvalidArgument, "bad size '" + tok + "'");
    sizes.push_back(static_cast<std::size_t>(v));
    start = end + 1;
  }
  return sizes;
}

struct Frame {
  DepthFrame depth;
  Skeleton15 skeleton;
};

Frame load_frame(const fs::path& depth, const fs::path& skeleton, const fs::path& intrinsics) {
  for (const fs::path& p : {depth, skeleton, intrinsics}) require_file(p);
  return {io::read_depth_pgm(depth, io::read_intrinsics_json(intrinsics)), io::read_skeleton_json(skeleton)};
}

void progress_line(const char* what, std::size_t done, std::size_t total) {
  if (done == total || done % 100 == 0) std::fprintf(stderr, "\r%s %zu/%zu", what, done, total);
  if (done == total) std::fprintf(stderr, "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Body measurement, retrieval and sizing from a single depth frame"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  app.add_option("--seed", seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads, 0 for all cores")->capture_default_str();

  // synth gen
  auto* synth = app.add_subcommand("synth", "Synthetic body models");
  synth->require_subcommand(1);
  auto* gen = synth->add_subcommand("gen", "Generate a dataset of model bundles");
  std::size_t gen_count = 1;
  std::string gen_out;
  std::optional<double> sd_scale, height_sd_scale, weight_sd_scale;
  std::string table_path;
  gen->add_option("--count", gen_count)->required();
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--sd-scale", sd_scale, "Scale both sd columns of the table");
  gen->add_option("--height-sd-scale", height_sd_scale);
  gen->add_option("--weight-sd-scale", weight_sd_scale);
  gen->add_option("--table", table_path, "Demographic table JSON");

  // render
  auto* render = app.add_subcommand("render", "Render a model bundle to a depth frame");
  std::string render_model, render_out, render_view = "frontal";
  double render_noise = 0.0;
  render->add_option("--model", render_model)->required();
  render->add_option("--out", render_out, "Output prefix")->required();
  render->add_option("--view", render_view)->check(CLI::IsMember({"frontal", "back"}));
  render->add_option("--noise-sd", render_noise, "Depth noise sd in mm");

  // measure / features
  std::string depth_path, skeleton_path, intrinsics_path, out_path;
  auto* measure = app.add_subcommand("measure", "Anthropometric measurements of one frame");
  measure->add_option("--depth", depth_path)->required();
  measure->add_option("--skeleton", skeleton_path)->required();
  measure->add_option("--intrinsics", intrinsics_path);
  measure->add_option("-o,--out", out_path);

  auto* features = app.add_subcommand("features", "Feature vector of one frame");
  features->add_option("--depth", depth_path)->required();
  features->add_option("--skeleton", skeleton_path)->required();
  features->add_option("--intrinsics", intrinsics_path);
  features->add_option("-o,--out", out_path)->required();

  // index
  auto* index = app.add_subcommand("index", "Feature index");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Index every model of a dataset");
  std::string dataset_dir;
  index_build->add_option("--dataset", dataset_dir)->required();
  index_build->add_option("-o,--out", out_path)->required();
  auto* index_query = index->add_subcommand("query", "k nearest models of a feature file");
  std::string index_path, features_path;
  std::size_t k = 5;
  index_query->add_option("--index", index_path)->required();
  index_query->add_option("--features", features_path)->required();
  index_query->add_option("-k", k)->capture_default_str();
  index_query->add_option("-o,--out", out_path);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluation harnesses");
  eval->require_subcommand(1);
  auto* eval_height_cmd = eval->add_subcommand("height", "Height round-trip error table");
  std::size_t eval_count = 100;
  std::vector<double> noise_levels = {0.0, 5.0};
  eval_height_cmd->add_option("--count", eval_count)->capture_default_str();
  eval_height_cmd->add_option("--noise-sd", noise_levels, "Noise levels in mm")->delimiter(',');
  eval_height_cmd->add_option("-o,--out", out_path, "CSV of per-model errors");

  auto* eval_gender_cmd = eval->add_subcommand("gender", "Gender-ratio classifier on paired models");
  std::size_t gender_pairs = 100;
  double gender_noise = 0.0;
  eval_gender_cmd->add_option("--pairs", gender_pairs)->capture_default_str();
  eval_gender_cmd->add_option("--noise-sd", gender_noise);
  eval_gender_cmd->add_option("-o,--out", out_path, "CSV of ratios");

  auto* eval_icp_cmd = eval->add_subcommand("icp", "ICP error curve of a frame against a model");
  std::string icp_source, icp_target;
  std::size_t icp_iters = 30;
  eval_icp_cmd->add_option("--source", icp_source, "PREFIX.depth.pgm of a rendered frame")->required();
  eval_icp_cmd->add_option("--target", icp_target, "Model bundle directory")->required();
  eval_icp_cmd->add_option("--iters", icp_iters)->capture_default_str();
  eval_icp_cmd->add_option("--skeleton", skeleton_path);
  eval_icp_cmd->add_option("--intrinsics", intrinsics_path);
  eval_icp_cmd->add_option("-o,--out", out_path, "CSV of per-iteration errors");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  auto* bench_query_cmd = bench->add_subcommand("query", "k-NN query latency on random vectors");
  std::string sizes = "1e4,5e4,1e5,5e6";
  std::size_t bench_queries = 5, bench_k = 10;
  std::string kernel = "auto";
  bench_query_cmd->add_option("--sizes", sizes)->capture_default_str();
  bench_query_cmd->add_option("--queries", bench_queries)->capture_default_str();
  bench_query_cmd->add_option("-k", bench_k)->capture_default_str();
  bench_query_cmd->add_option("--kernel", kernel)->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  bench_query_cmd->add_option("-o,--out", out_path, "CSV of timings");

  // size
  auto* size = app.add_subcommand("size", "T-shirt size from measurements");
  std::string measurements_path, chart_path;
  size->add_option("--measurements", measurements_path)->required();
  size->add_option("--chart", chart_path);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Measure, retrieve, size and optionally register one frame");
  std::string keep_dir;
  bool run_icp = false;
  pipeline->add_option("--depth", depth_path)->required();
  pipeline->add_option("--skeleton", skeleton_path)->required();
  pipeline->add_option("--intrinsics", intrinsics_path);
  pipeline->add_option("--index", index_path)->required();
  pipeline->add_option("--chart", chart_path);
  pipeline->add_option("-k", k)->capture_default_str();
  pipeline->add_flag("--icp", run_icp, "Register the frame to the top-1 model");
  pipeline->add_option("--keep-intermediates", keep_dir, "Directory for intermediate artifacts");
  pipeline->add_option("-o,--out", out_path, "Result JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*gen) {
      DatasetOptions o;
      o.count = gen_count;
      o.seed = seed;
      o.threads = threads;
      if (!table_path.empty()) o.table = DemographicTable::load(table_path);
      if (sd_scale) o.sampler.height_sd_scale = o.sampler.weight_sd_scale = *sd_scale;
      if (height_sd_scale) o.sampler.height_sd_scale = *height_sd_scale;
      if (weight_sd_scale) o.sampler.weight_sd_scale = *weight_sd_scale;
      const auto entries = generate_dataset(gen_out, o, [](std::size_t d, std::size_t t) { progress_line("models", d, t); });
      std::cout << "wrote " << entries.size() << " models to " << gen_out << "\n";
    } else if (*render) {
      require_file(fs::path(render_model) / "model.obj");
      const BodyModel model = import_model(render_model);
      RenderConfig rc;
      rc.view = render_view == "back" ? View::Back : View::Frontal;
      rc.noise_sd_mm = render_noise;
      rc.noise_seed = seed;
      const RenderResult r = render_depth(model, rc);
      io::write_depth_pgm(with_suffix(render_out, ".depth.pgm"), r.frame);
      io::write_intrinsics_json(with_suffix(render_out, ".intrinsics.json"), r.frame.intrinsics);
      io::write_skeleton_json(with_suffix(render_out, ".skeleton.json"), r.skeleton);
      io::write_preview_pgm(with_suffix(render_out, ".preview.pgm"), r.frame);
      std::cout << "rendered " << r.covered_pixels << " pixels to " << render_out << ".*\n";
    } else if (*measure) {
      const Frame f = load_frame(depth_path, skeleton_path, resolve_intrinsics(intrinsics_path, depth_path));
      write_or_print(out_path, measurements_to_json(measure_all(f.depth, f.skeleton)));
    } else if (*features) {
      const Frame f = load_frame(depth_path, skeleton_path, resolve_intrinsics(intrinsics_path, depth_path));
      const ExtractedFeatures x = extract_features(f.depth, f.skeleton);
      write_feature_vector(out_path, x.vector);
      std::printf("ratio1 %.4f ratio2 %.4f height %.1f cm\n", x.ratios.ratio1, x.ratios.ratio2,
                  x.detail.measurements.height);
    } else if (*index_build) {
      const IndexBuildReport rep = build_dataset_index(dataset_dir, out_path, {}, {}, threads,
                                                       [](std::size_t d, std::size_t t) { progress_line("features", d, t); });
      for (const auto& [id, why] : rep.skipped) std::fprintf(stderr, "skipped %llu: %s\n", (unsigned long long)id, why.c_str());
      std::cout << "indexed " << rep.indexed << " models, skipped " << rep.skipped.size() << "\n";
    } else if (*index_query) {
      require_file(index_path);
      require_file(features_path);
      const FeatureIndex idx = FeatureIndex::load_mapped(index_path);
      write_or_print(out_path, query_result_to_json(idx.query(read_feature_vector(features_path), k)));
    } else if (*eval_height_cmd) {
      std::string csv;
      for (std::size_t li = 0; li < noise_levels.size(); ++li) {
        HeightEvalOptions o;
        o.count = eval_count;
        o.seed = seed;
        o.noise_sd_mm = noise_levels[li];
        o.threads = threads;
        const auto rows = eval_height(o);
        std::size_t failed = 0;
        for (const auto& r : rows) failed += !r.failure.empty();
        std::printf("noise %.1f mm: mean |height error| %.3f cm over %zu models (%zu failed)\n", o.noise_sd_mm,
                    mean_abs_height_error(rows), rows.size() - failed, failed);
        std::string part = height_eval_csv(rows);
        if (li > 0) part.erase(0, part.find('\n') + 1);
        // Prefix every line with the noise level.
        std::string tagged;
        std::size_t pos = 0;
        bool header = li == 0;
        while (pos < part.size()) {
          const std::size_t nl = part.find('\n', pos);
          char tag[32];
          std::snprintf(tag, sizeof tag, "%.1f,", o.noise_sd_mm);
          tagged += (header ? std::string("noise_sd_mm,") : std::string(tag)) + part.substr(pos, nl - pos + 1);
          header = false;
          pos = nl + 1;
        }
        csv += tagged;
      }
      if (!out_path.empty()) io::write_text_file(out_path, csv);
    } else if (*eval_gender_cmd) {
      GenderEvalOptions o;
      o.pairs = gender_pairs;
      o.seed = seed;
      o.noise_sd_mm = gender_noise;
      o.threads = threads;
      const auto samples = gender_samples(o);
      // Fit on the first half of the pairs, test on the rest.
      std::vector<GenderSample> train, test;
      for (const auto& s : samples) (s.pair < gender_pairs / 2 ? train : test).push_back(s);
      const GenderClassifier c = fit_gender_classifier(train);
      std::printf("train accuracy %.3f, test accuracy %.3f (female when %.4f*ratio1 + %.4f*ratio2 > %.4f)\n",
                  gender_accuracy(c, train), gender_accuracy(c, test), c.a, c.b, c.threshold);
      if (!out_path.empty()) io::write_text_file(out_path, gender_samples_csv(samples));
    } else if (*eval_icp_cmd) {
      const fs::path depth = icp_source;
      const fs::path sk = skeleton_path.empty() ? sibling_of_depth(depth, ".skeleton.json") : fs::path(skeleton_path);
      if (sk.empty()) fail(ErrorCode::InvalidArgument, "--skeleton is required for " + depth.string());
      const Frame f = load_frame(depth, sk, resolve_intrinsics(intrinsics_path, depth));
      require_file(fs::path(icp_target) / "model.obj");
      const BodyModel model = import_model(icp_target);
      const MeasurementDetail d = measure_all_detailed(f.depth, f.skeleton);
      RegistrationOptions ro;
      ro.seed = seed;
      ro.icp.max_iterations = icp_iters;
      const IcpReport rep = register_to_model(d.cloud, f.skeleton, model, ro);
      for (std::size_t i = 0; i < rep.errors.size(); ++i) std::printf("iteration %zu: %.2f cm\n", i, 100.0 * rep.errors[i]);
      std::printf("%s after %zu iterations\n", rep.converged ? "converged" : "stopped", rep.iterations);
      if (!out_path.empty()) io::write_text_file(out_path, icp_errors_csv(rep));
    } else if (*bench_query_cmd) {
      if (kernel == "scalar") set_kernel_isa(KernelIsa::Scalar);
      if (kernel == "avx2") set_kernel_isa(KernelIsa::Avx2);
      BenchOptions o;
      o.sizes = parse_sizes(sizes);
      o.queries = bench_queries;
      o.k = bench_k;
      o.seed = seed;
      std::printf("kernel %s, k %zu, %zu queries per size\n", std::string(to_string(active_kernel_isa())).c_str(), o.k,
                  o.queries);
      const auto rows = bench_query(o, [](const BenchRow& r) {
        std::printf("%9zu %-9s build %7.2f s  median %9.3f ms  max %9.3f ms", r.size, r.method.c_str(), r.build_s,
                    r.median_ms, r.max_ms);
        if (r.method == "quantized") std::printf("  candidates %.0f%s", r.mean_candidates, r.matches_exact ? "" : "  MISMATCH");
        std::printf("\n");
        std::fflush(stdout);
      });
      if (!out_path.empty()) io::write_text_file(out_path, bench_csv(rows));
    } else if (*size) {
      require_file(measurements_path);
      const SizeChart chart = chart_path.empty() ? SizeChart::defaults() : SizeChart::load(chart_path);
      std::cout << predict_size(measurements_from_json(io::read_text_file(measurements_path)), chart) << "\n";
    } else if (*pipeline) {
      PipelineConfig cfg;
      cfg.depth = depth_path;
      cfg.skeleton = skeleton_path;
      cfg.intrinsics = resolve_intrinsics(intrinsics_path, depth_path);
      cfg.index = index_path;
      if (!chart_path.empty()) cfg.chart = chart_path;
      if (!keep_dir.empty()) cfg.intermediates = keep_dir;
      cfg.k = k;
      cfg.run_icp = run_icp;
      cfg.registration.seed = seed;
      const PipelineResult r = run_pipeline(cfg);
      const Measurements& m = r.features.detail.measurements;
      std::printf("height %.1f cm, chest %.1f cm, waist %.1f cm, hip %.1f cm\n", m.height, m.girth_chest, m.girth_waist,
                  m.girth_hip);
      std::printf("top-1 model %llu (distance %.4f), size %s\n", (unsigned long long)r.neighbors.front().id,
                  r.neighbors.front().distance, r.size.c_str());
      if (r.icp) std::printf("ICP final error %.2f cm after %zu iterations\n", 100.0 * r.icp->errors.back(), r.icp->iterations);
      if (!out_path.empty()) io::write_text_file(out_path, pipeline_result_to_json(r));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
