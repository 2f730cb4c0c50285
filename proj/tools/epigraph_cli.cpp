// epigraph command line: texture features, noise dictionary, denoising,
// window segmentation, training and the labeling server.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "epigraph/error.hpp"
#include "epigraph/label_api.hpp"
#include "epigraph/pipeline.hpp"

namespace fs = std::filesystem;
using namespace epigraph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> levels;
  std::optional<int> iterations;
  std::optional<double> learning_rate;
  std::optional<std::string> init;
  std::optional<std::string> fill_mode;
  std::optional<double> threshold;
  bool mcc_literal = false;
};

pipeline::PipelineConfig resolve_config(const std::string& path, const Overrides& o) {
  pipeline::PipelineConfig cfg = path.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(path);
  // Overrides go through the JSON form so they are validated like file values.
  auto j = nlohmann::json::parse(pipeline::to_json(cfg));
  if (o.seed) {
    j["seed"] = *o.seed;
    j["train"]["seed"] = *o.seed;
  }
  if (o.levels) j["levels"] = *o.levels;
  if (o.iterations) j["train"]["iterations"] = *o.iterations;
  if (o.learning_rate) j["train"]["learning_rate"] = *o.learning_rate;
  if (o.init) j["train"]["init"] = *o.init;
  if (o.fill_mode) j["denoise"]["fill_mode"] = *o.fill_mode;
  if (o.threshold) j["segmentation"]["threshold"] = *o.threshold;
  if (o.mcc_literal) j["haralick"]["mcc_mode"] = "literal";
  return pipeline::parse_config(j.dump());
}

fs::path out_dir_for(const std::string& out, const pipeline::PipelineConfig& cfg, std::string_view command) {
  if (!out.empty()) return out;
  return cfg.output_dir / command;
}

void report(const pipeline::CommandResult& r, const fs::path& out) {
  std::cout << r.summary << '\n';
  std::cout << fmt::format("{} artifacts in {}\n", r.artifacts.size(), out.string());
}

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int serve(const pipeline::PipelineConfig& cfg, fs::path session_dir, const std::string& image,
          const std::string& host, int port, const std::string& ui_dir) {
  if (session_dir.empty()) session_dir = cfg.session_dir;
  if (!image.empty()) {
    if (!fs::exists(image)) throw IoError(fmt::format("input '{}' does not exist", image));
    fs::create_directories(session_dir);
    label::SessionConfig sc;
    sc.image = "image.png";
    sc.levels = cfg.levels;
    sc.kernel = cfg.denoise.kernel;
    sc.window = cfg.segmentation.window;
    // Re-encode so the session image is the quantized raster the tasks refer to.
    save_png(load_quantized(image, cfg.levels), session_dir / sc.image);
    label::save_session_config(sc, session_dir);
  }
  label::LabelService service(label::open_session(session_dir));
  label::ServerOptions opts;
  opts.host = host;
  opts.port = port;
  if (!ui_dir.empty()) opts.ui_dir = fs::path(ui_dir);
  label::LabelServer server(service, opts);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int bound = server.start();
  std::cout << fmt::format("labeling session {} on http://{}:{}/ (Ctrl-C to stop)", session_dir.string(), host,
                           bound)
            << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  server.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epigraph: inscription image denoising and character segmentation"};
  app.set_version_flag("--version", std::string(pipeline::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out;
  Overrides o;
  app.add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out, "output directory (default: <output_dir>/<command>)");
  app.add_option("--seed", o.seed, "override the configured seed");
  app.add_option("--levels", o.levels, "quantization levels");
  app.add_flag("--mcc-literal", o.mcc_literal, "MCC from the second-largest entry of Q instead of its eigenvalue");

  std::string image, dict, labels, dataset, model, split_file, split = "test", synth_config;
  std::string session, host = "127.0.0.1", ui_dir;
  int port = 8080;

  auto* features = app.add_subcommand("features", "per-kernel Haralick features as CSV");
  features->add_option("image", image, "input image")->required();

  auto* build_dict = app.add_subcommand("build-dict", "noise dictionary from labeled kernels");
  build_dict->add_option("labels", labels, "kernel_id,mcc,class CSV")->required();

  auto* denoise_cmd = app.add_subcommand("denoise", "replace kernels classified as noise");
  denoise_cmd->add_option("image", image, "input image")->required();
  denoise_cmd->add_option("dictionary", dict, "dictionary JSON")->required();
  denoise_cmd->add_option("--fill-mode", o.fill_mode, "paper_box_10x10 or full_kernel");

  auto* windows = app.add_subcommand("windows", "sliding-window segments and manifest");
  windows->add_option("image", image, "input image")->required();

  auto* train = app.add_subcommand("train", "train the segment classifier");
  train->add_option("dataset", dataset, "dataset directory (manifest.csv, labels.csv, crops)")->required();
  train->add_option("--iterations", o.iterations, "gradient descent iterations");
  train->add_option("--learning-rate", o.learning_rate, "learning rate");
  train->add_option("--init", o.init, "constant_0_9 or seeded_uniform");

  auto* segment = app.add_subcommand("segment", "keep windows the model accepts as characters");
  segment->add_option("image", image, "input image")->required();
  segment->add_option("model", model, "model JSON")->required();
  segment->add_option("--threshold", o.threshold, "acceptance threshold on the model output");

  auto* synth = app.add_subcommand("synth", "synthetic image, ground truth, labeled kernels and windows");
  synth->add_option("config", synth_config, "configuration file (same as --config)")->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("evaluate", "accuracy of a model on a labeled dataset");
  evaluate->add_option("model", model, "model JSON")->required();
  evaluate->add_option("dataset", dataset, "dataset directory")->required();
  evaluate->add_option("--split-file", split_file, "split.csv written by train");
  evaluate->add_option("--split", split, "split to evaluate when --split-file is given");

  auto* label_serve = app.add_subcommand("label-serve", "serve the labeling API");
  label_serve->add_option("--session", session, "session directory (default: paths.session_dir)");
  label_serve->add_option("--image", image, "initialise the session from this image");
  label_serve->add_option("--host", host, "bind address");
  label_serve->add_option("--port", port, "port, 0 for any free port");
  label_serve->add_option("--ui-dir", ui_dir, "static UI assets to serve at /")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (!synth_config.empty()) config_path = synth_config;
    const pipeline::PipelineConfig cfg = resolve_config(config_path, o);
    if (*features) {
      const fs::path dir = out_dir_for(out, cfg, "features");
      report(pipeline::run_features(cfg, image, dir), dir);
    } else if (*build_dict) {
      const fs::path dir = out_dir_for(out, cfg, "build-dict");
      report(pipeline::run_build_dict(cfg, labels, dir), dir);
    } else if (*denoise_cmd) {
      const fs::path dir = out_dir_for(out, cfg, "denoise");
      report(pipeline::run_denoise(cfg, image, dict, dir), dir);
    } else if (*windows) {
      const fs::path dir = out_dir_for(out, cfg, "windows");
      report(pipeline::run_windows(cfg, image, dir), dir);
    } else if (*train) {
      const fs::path dir = out_dir_for(out, cfg, "train");
      report(pipeline::run_train(cfg, dataset, dir), dir);
    } else if (*segment) {
      const fs::path dir = out_dir_for(out, cfg, "segment");
      report(pipeline::run_segment(cfg, image, model, dir), dir);
    } else if (*synth) {
      const fs::path dir = out_dir_for(out, cfg, "synth");
      report(pipeline::run_synth(cfg, dir), dir);
    } else if (*evaluate) {
      const fs::path dir = out_dir_for(out, cfg, "evaluate");
      report(pipeline::run_evaluate(cfg, model, dataset, dir, split_file, split), dir);
    } else if (*label_serve) {
      return serve(cfg, session, image, host, port, ui_dir);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
