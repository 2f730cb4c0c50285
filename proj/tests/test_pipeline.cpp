#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epigraph/error.hpp"
#include "epigraph/pipeline.hpp"

using namespace epigraph;
using namespace epigraph::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("epigraph_test_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig small_config() {
  PipelineConfig cfg = parse_config(R"({"seed": 3})");
  cfg.synth.corpus_images = 2;
  return cfg;
}

}  // namespace

TEST_CASE("config round trip") {
  PipelineConfig cfg = parse_config(R"({"seed": 11})");
  cfg.haralick.mcc_mode = MccMode::Literal;
  cfg.denoise.fill_mode = FillMode::FullKernel;
  cfg.denoise.replace_classes = {KernelClass::Noise, KernelClass::MostlyNoise};
  cfg.train.init = nn::InitMode::Constant09;
  cfg.train.learning_rate = 0.125;
  cfg.segmentation.threshold = 0.7;
  cfg.synth.render.noise_density = 0.3;
  cfg.session_dir = "s";
  const std::string once = to_json(cfg);
  const PipelineConfig back = parse_config(once);
  CHECK(to_json(back) == once);
  CHECK(back.seed == 11);
  CHECK(back.haralick.mcc_mode == MccMode::Literal);
  CHECK(back.denoise.replace_classes.size() == 2);
  CHECK(back.train.learning_rate == 0.125);
  CHECK(back.synth.render.noise_density == 0.3);
  CHECK(to_json(parse_config(to_json(PipelineConfig{}))) == to_json(PipelineConfig{}));
}

TEST_CASE("config validation is strict") {
  CHECK_THROWS_WITH_AS(parse_config("{}"), "config: 'seed' is required", ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "colour": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "train": {"iters": 2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "levels": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "levels": "sixteen"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "network": {"layers": [100, 64, 1]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "denoise": {"fill_mode": "blur"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "train": {"split_ratio": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
  const auto cfg = parse_config(R"({"seed": 1, "segmentation": {"window": [24, 24]}})");
  CHECK(cfg.segmentation.window.stride == Size{12, 12});
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("train writes a 2000-row curve") {
  const PipelineConfig cfg = small_config();
  const fs::path dir = fresh_dir("train");
  run_synth(cfg, dir / "synth");
  run_train(cfg, dir / "synth" / "dataset", dir / "train");
  std::ifstream curve(dir / "train" / "curve.csv");
  std::string line;
  int rows = -1;
  while (std::getline(curve, line)) ++rows;
  CHECK(rows == 2000);
  const auto report = nlohmann::json::parse(slurp(dir / "train" / "train_report.json"));
  CHECK(report["iterations"] == 2000);
  CHECK(report["final_cost"].get<double>() < report["initial_cost"].get<double>());
  CHECK(fs::exists(dir / "train" / "model.json"));
  CHECK(fs::exists(dir / "train" / "split.csv"));
  fs::remove_all(dir);
}

TEST_CASE("denoise with a dictionary without noise leaves the image unchanged") {
  const PipelineConfig cfg = small_config();
  const fs::path dir = fresh_dir("denoise");
  run_synth(cfg, dir / "synth");
  fs::create_directories(dir / "dict");
  { std::ofstream(dir / "dict" / "labels.csv") << "kernel_id,mcc,class\na,0.9,Text\nb,0.85,MostlyText\n"; }
  run_build_dict(cfg, dir / "dict" / "labels.csv", dir / "dict");
  run_denoise(cfg, dir / "synth" / "image.png", dir / "dict" / "dictionary.json", dir / "out");
  CHECK(load_quantized(dir / "out" / "denoised.png", 16) == load_quantized(dir / "synth" / "image.png", 16));
  CHECK(slurp(dir / "out" / "denoised.png") == slurp(dir / "synth" / "image.png"));
  fs::remove_all(dir);
}

TEST_CASE("manifests record names and hashes only") {
  const PipelineConfig cfg = small_config();
  const fs::path dir = fresh_dir("manifest");
  run_synth(cfg, dir / "synth");
  const auto res = run_features(cfg, dir / "synth" / "image.png", dir / "features");
  CHECK(res.summary.find("kernels") != std::string::npos);
  const auto m = nlohmann::json::parse(slurp(dir / "features" / "features_manifest.json"));
  CHECK(m["command"] == "features");
  CHECK(m["version"] == std::string(kVersion));
  CHECK(m["config_sha256"] == sha256_hex(to_json(cfg)));
  CHECK(m["inputs"][0]["name"] == "image.png");
  CHECK(m["inputs"][0]["sha256"] == sha256_hex(slurp(dir / "synth" / "image.png")));
  CHECK(m["artifacts"][0] == "features.csv");
  CHECK(slurp(dir / "features" / "features_manifest.json").find(dir.string()) == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("missing inputs are I/O errors") {
  const PipelineConfig cfg = small_config();
  const fs::path dir = fresh_dir("missing");
  CHECK_THROWS_AS(run_features(cfg, dir / "none.png", dir / "out"), IoError);
  CHECK_THROWS_AS(run_build_dict(cfg, dir / "none.csv", dir / "out"), IoError);
  CHECK_THROWS_AS(run_train(cfg, dir / "nodata", dir / "out"), IoError);
  CHECK_THROWS_AS(run_segment(cfg, dir / "none.png", dir / "m.json", dir / "out"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("synth is reproducible") {
  const PipelineConfig cfg = small_config();
  const fs::path a = fresh_dir("synth_a"), b = fresh_dir("synth_b");
  const auto ra = run_synth(cfg, a);
  run_synth(cfg, b);
  for (const fs::path& p : ra.artifacts) {
    const fs::path rel = fs::relative(p, a);
    INFO(rel.string());
    CHECK(slurp(a / rel) == slurp(b / rel));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}
