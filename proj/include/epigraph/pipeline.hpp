#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "epigraph/denoise.hpp"
#include "epigraph/haralick.hpp"
#include "epigraph/imaging.hpp"
#include "epigraph/nn.hpp"
#include "epigraph/segment.hpp"

namespace epigraph::pipeline {

inline constexpr std::string_view kVersion = "1.0.0";

struct SegmentationConfig {
  WindowConfig window;
  Size input_dims{20, 20};
  double threshold = nn::kDecisionThreshold;
};

struct SynthSettings {
  SynthConfig render;
  int corpus_images = 20;   // renders used for the labeled window corpus
  int labeled_kernels = 40; // kernels handed to the dictionary builder
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  int levels = 16;
  HaralickOptions haralick;
  DenoiseConfig denoise;
  SegmentationConfig segmentation;
  std::vector<int> layers{400, 64, 1};
  nn::TrainConfig train;
  SynthSettings synth;
  std::filesystem::path session_dir = "session";
  std::filesystem::path output_dir = "runs";
};

/// Throws ConfigError naming the offending field.
void validate(const PipelineConfig& cfg);

std::string to_json(const PipelineConfig& cfg);
/// Strict: unknown keys are rejected and `seed` is mandatory.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

/// Every command writes its artifacts into `out_dir` together with
/// "{command}_manifest.json" (input file names and hashes, config hash, version).
struct CommandResult {
  std::vector<std::filesystem::path> artifacts;
  std::string summary;
};

CommandResult run_synth(const PipelineConfig& cfg, const std::filesystem::path& out_dir);
CommandResult run_features(const PipelineConfig& cfg, const std::filesystem::path& image,
                           const std::filesystem::path& out_dir);
CommandResult run_build_dict(const PipelineConfig& cfg, const std::filesystem::path& labels_csv,
                             const std::filesystem::path& out_dir);
CommandResult run_denoise(const PipelineConfig& cfg, const std::filesystem::path& image,
                          const std::filesystem::path& dictionary,
                          const std::filesystem::path& out_dir);
CommandResult run_windows(const PipelineConfig& cfg, const std::filesystem::path& image,
                          const std::filesystem::path& out_dir);
CommandResult run_train(const PipelineConfig& cfg, const std::filesystem::path& dataset_dir,
                        const std::filesystem::path& out_dir);
CommandResult run_segment(const PipelineConfig& cfg, const std::filesystem::path& image,
                          const std::filesystem::path& model,
                          const std::filesystem::path& out_dir);
/// `split_file` (optional, from `train`) restricts evaluation to rows whose
/// split equals `split`.
CommandResult run_evaluate(const PipelineConfig& cfg, const std::filesystem::path& model,
                           const std::filesystem::path& dataset_dir,
                           const std::filesystem::path& out_dir,
                           const std::filesystem::path& split_file = {},
                           std::string_view split = "test");

}  // namespace epigraph::pipeline
