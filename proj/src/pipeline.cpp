#include "epigraph/pipeline.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "csv.hpp"
#include "epigraph/error.hpp"
#include "epigraph/synthetic.hpp"
#include "json.hpp"

namespace epigraph::pipeline {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string_view to_string(FillMode m) { return m == FillMode::PaperBox ? "paper_box_10x10" : "full_kernel"; }

FillMode parse_fill_mode(std::string_view s) {
  if (s == "paper_box_10x10" || s == "paper_box") return FillMode::PaperBox;
  if (s == "full_kernel") return FillMode::FullKernel;
  throw ConfigError(fmt::format("unknown fill_mode '{}' (paper_box_10x10 or full_kernel)", s));
}

std::string_view to_string(MccMode m) { return m == MccMode::Eigenvalue ? "eigenvalue" : "literal"; }

MccMode parse_mcc_mode(std::string_view s) {
  if (s == "eigenvalue") return MccMode::Eigenvalue;
  if (s == "literal") return MccMode::Literal;
  throw ConfigError(fmt::format("unknown mcc_mode '{}' (eigenvalue or literal)", s));
}

// Reads known keys of one JSON object and rejects anything else.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("config: '{}' must be an object", path_));
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(fmt::format("config: '{}.{}' has the wrong type", path_, key));
    }
  }

  void get_size(const char* key, Size& out) {
    std::vector<int> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 2) throw ConfigError(fmt::format("config: '{}.{}' must be [w, h]", path_, key));
    out = {v[0], v[1]};
  }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(j_.contains(key) ? j_.at(key) : empty(), path_ + "." + key);
  }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(fmt::format("config: unknown key '{}.{}'", path_, key));
    }
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ojson size_json(Size s) { return ojson::array({s.w, s.h}); }

}  // namespace

void validate(const PipelineConfig& cfg) {
  if (cfg.levels < 2 || cfg.levels > 256) throw ConfigError("config: levels must be in [2, 256]");
  if (cfg.haralick.log_base <= 0 || cfg.haralick.log_base == 1) {
    throw ConfigError("config: haralick.log_base must be > 0 and != 1");
  }
  epigraph::validate(cfg.denoise);
  if (cfg.denoise.fill_level >= cfg.levels) throw ConfigError("config: denoise.fill_level must be < levels");
  const auto& seg = cfg.segmentation;
  if (seg.window.window.w < 1 || seg.window.window.h < 1) throw ConfigError("config: segmentation.window must be positive");
  if (seg.window.stride.w < 1 || seg.window.stride.h < 1) throw ConfigError("config: segmentation.stride must be >= 1");
  if (seg.input_dims.w < 1 || seg.input_dims.h < 1) throw ConfigError("config: segmentation.input_dims must be positive");
  if (!(seg.threshold >= 0 && seg.threshold <= 1)) throw ConfigError("config: segmentation.threshold must be in [0, 1]");
  try {
    nn::validate_architecture(cfg.layers);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: network.layers: ") + e.what());
  }
  if (cfg.layers.front() != seg.input_dims.w * seg.input_dims.h) {
    throw ConfigError(fmt::format("config: network input size {} does not match segmentation.input_dims {}x{}",
                                  cfg.layers.front(), seg.input_dims.w, seg.input_dims.h));
  }
  nn::validate(cfg.train);
  if (cfg.synth.corpus_images < 1) throw ConfigError("config: synth.corpus_images must be >= 1");
  if (cfg.synth.labeled_kernels < 1) throw ConfigError("config: synth.labeled_kernels must be >= 1");
  if (cfg.synth.render.levels != cfg.levels) throw ConfigError("config: synth.levels must equal levels");
}

std::string to_json(const PipelineConfig& cfg) {
  ojson j;
  j["seed"] = cfg.seed;
  j["levels"] = cfg.levels;
  j["haralick"] = {{"log_base", cfg.haralick.log_base},
                   {"mcc_mode", std::string(to_string(cfg.haralick.mcc_mode))}};
  ojson replace = ojson::array();
  for (KernelClass c : cfg.denoise.replace_classes) replace.push_back(std::string(epigraph::to_string(c)));
  j["denoise"] = {{"kernel", size_json(cfg.denoise.kernel)},
                  {"replace_classes", replace},
                  {"fill_mode", std::string(to_string(cfg.denoise.fill_mode))},
                  {"fill_box", size_json(cfg.denoise.fill_box)},
                  {"fill_level", cfg.denoise.fill_level}};
  j["segmentation"] = {{"window", size_json(cfg.segmentation.window.window)},
                       {"stride", size_json(cfg.segmentation.window.stride)},
                       {"input_dims", size_json(cfg.segmentation.input_dims)},
                       {"threshold", cfg.segmentation.threshold}};
  j["network"] = {{"layers", cfg.layers}};
  j["train"] = {{"iterations", cfg.train.iterations},
                {"learning_rate", cfg.train.learning_rate},
                {"init", std::string(nn::to_string(cfg.train.init))},
                {"seed", cfg.train.seed},
                {"split_ratio", cfg.train.split_ratio}};
  const SynthConfig& r = cfg.synth.render;
  j["synth"] = {{"width", r.width},
                {"height", r.height},
                {"glyph_count", r.glyph_count},
                {"glyph_min", r.glyph_min},
                {"glyph_max", r.glyph_max},
                {"glyph_gap", r.glyph_gap},
                {"stroke_width", r.stroke_width},
                {"ink_intensity", r.ink_intensity},
                {"background_intensity", r.background_intensity},
                {"background_amplitude", r.background_amplitude},
                {"background_scale", r.background_scale},
                {"noise_tile", r.noise_tile},
                {"noise_density", r.noise_density},
                {"speckle_radius", r.speckle_radius},
                {"speckle_coverage", r.speckle_coverage},
                {"speckle_min_intensity", r.speckle_min_intensity},
                {"speckle_max_intensity", r.speckle_max_intensity},
                {"corpus_images", cfg.synth.corpus_images},
                {"labeled_kernels", cfg.synth.labeled_kernels}};
  j["paths"] = {{"session_dir", cfg.session_dir.string()}, {"output_dir", cfg.output_dir.string()}};
  return j.dump(2) + "\n";
}

PipelineConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  Section root(j, "config");
  if (!root.has("seed")) throw ConfigError("config: 'seed' is required");
  root.get("seed", cfg.seed);
  cfg.train.seed = cfg.seed;
  root.get("levels", cfg.levels);
  cfg.synth.render.levels = cfg.levels;
  {
    Section s = root.child("haralick");
    s.get("log_base", cfg.haralick.log_base);
    std::string mode(to_string(cfg.haralick.mcc_mode));
    s.get("mcc_mode", mode);
    cfg.haralick.mcc_mode = parse_mcc_mode(mode);
    s.finish();
  }
  {
    Section s = root.child("denoise");
    s.get_size("kernel", cfg.denoise.kernel);
    if (s.has("replace_classes")) {
      std::vector<std::string> names;
      s.get("replace_classes", names);
      cfg.denoise.replace_classes.clear();
      for (const auto& n : names) cfg.denoise.replace_classes.insert(parse_kernel_class(n));
    }
    std::string fill(to_string(cfg.denoise.fill_mode));
    s.get("fill_mode", fill);
    cfg.denoise.fill_mode = parse_fill_mode(fill);
    s.get_size("fill_box", cfg.denoise.fill_box);
    s.get("fill_level", cfg.denoise.fill_level);
    s.finish();
  }
  cfg.denoise.haralick = cfg.haralick;
  {
    Section s = root.child("segmentation");
    s.get_size("window", cfg.segmentation.window.window);
    cfg.segmentation.window = WindowConfig::with_half_stride(cfg.segmentation.window.window);
    s.get_size("stride", cfg.segmentation.window.stride);
    s.get_size("input_dims", cfg.segmentation.input_dims);
    s.get("threshold", cfg.segmentation.threshold);
    s.finish();
  }
  {
    Section s = root.child("network");
    s.get("layers", cfg.layers);
    s.finish();
  }
  {
    Section s = root.child("train");
    s.get("iterations", cfg.train.iterations);
    s.get("learning_rate", cfg.train.learning_rate);
    std::string init(nn::to_string(cfg.train.init));
    s.get("init", init);
    cfg.train.init = nn::parse_init_mode(init);
    s.get("seed", cfg.train.seed);
    s.get("split_ratio", cfg.train.split_ratio);
    s.finish();
  }
  {
    Section s = root.child("synth");
    SynthConfig& r = cfg.synth.render;
    s.get("width", r.width);
    s.get("height", r.height);
    s.get("glyph_count", r.glyph_count);
    s.get("glyph_min", r.glyph_min);
    s.get("glyph_max", r.glyph_max);
    s.get("glyph_gap", r.glyph_gap);
    s.get("stroke_width", r.stroke_width);
    s.get("ink_intensity", r.ink_intensity);
    s.get("background_intensity", r.background_intensity);
    s.get("background_amplitude", r.background_amplitude);
    s.get("background_scale", r.background_scale);
    s.get("noise_tile", r.noise_tile);
    s.get("noise_density", r.noise_density);
    s.get("speckle_radius", r.speckle_radius);
    s.get("speckle_coverage", r.speckle_coverage);
    s.get("speckle_min_intensity", r.speckle_min_intensity);
    s.get("speckle_max_intensity", r.speckle_max_intensity);
    s.get("corpus_images", cfg.synth.corpus_images);
    s.get("labeled_kernels", cfg.synth.labeled_kernels);
    s.finish();
  }
  {
    Section s = root.child("paths");
    std::string session = cfg.session_dir.string(), output = cfg.output_dir.string();
    s.get("session_dir", session);
    s.get("output_dir", output);
    cfg.session_dir = session;
    cfg.output_dir = output;
    s.finish();
  }
  root.finish();
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

template <typename Writer>
void write_stream(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_file(path, ss.str());
}

void require_input(const fs::path& p) {
  if (!fs::exists(p)) throw IoError(fmt::format("input '{}' does not exist", p.string()));
}

// Inputs are recorded by file name and content hash so the manifest does not
// depend on where the run happens.
void write_manifest(const PipelineConfig& cfg, std::string_view command, const fs::path& out_dir,
                    const std::vector<fs::path>& inputs, CommandResult& result) {
  ojson m;
  m["command"] = std::string(command);
  m["version"] = std::string(kVersion);
  m["config_sha256"] = sha256_hex(to_json(cfg));
  m["inputs"] = ojson::array();
  for (const fs::path& in : inputs) {
    std::string hash = fs::is_directory(in) ? "" : sha256_hex(read_file(in));
    m["inputs"].push_back({{"name", in.filename().string()}, {"sha256", hash}});
  }
  m["artifacts"] = ojson::array();
  for (const fs::path& a : result.artifacts) m["artifacts"].push_back(fs::relative(a, out_dir).generic_string());
  const fs::path path = out_dir / fmt::format("{}_manifest.json", command);
  write_file(path, m.dump(2) + "\n");
  result.artifacts.push_back(path);
}

QuantizedImage load_input_image(const PipelineConfig& cfg, const fs::path& image) {
  require_input(image);
  return load_quantized(image, cfg.levels);
}

std::map<std::string, std::string> read_split_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::map<std::string, std::string> out;
  for (auto& f : csv::read(in, {"segment_id", "split"})) out[f[0]] = f[1];
  return out;
}

}  // namespace

CommandResult run_synth(const PipelineConfig& cfg, const fs::path& out_dir) {
  validate(cfg);
  ensure_writable_dir(out_dir);
  CommandResult result;
  const SyntheticImage synth = render_synthetic(cfg.synth.render, cfg.seed);

  const fs::path image = out_dir / "image.png";
  save_png(synth.image, image);
  result.artifacts.push_back(image);

  ojson truth;
  truth["noise_kernel_ids"] = synth.truth.noise_kernel_ids;
  auto rects = [](const std::vector<Rect>& rs) {
    ojson a = ojson::array();
    for (const Rect& r : rs) a.push_back({r.x, r.y, r.w, r.h});
    return a;
  };
  truth["noise_tiles"] = rects(synth.truth.noise_tiles);
  truth["glyph_boxes"] = rects(synth.truth.glyph_boxes);
  const fs::path truth_path = out_dir / "ground_truth.json";
  write_file(truth_path, truth.dump(2) + "\n");
  result.artifacts.push_back(truth_path);

  const auto labels = synthetic::label_kernels(synth, cfg.denoise.kernel, cfg.synth.labeled_kernels,
                                               cfg.seed, cfg.haralick);
  const fs::path labels_path = out_dir / "kernel_labels.csv";
  write_stream(labels_path, [&](std::ostream& o) { write_kernel_labels_csv(o, labels); });
  result.artifacts.push_back(labels_path);

  const SegmentDataset ds = synthetic::corpus(cfg.synth.render, cfg.segmentation.window.window,
                                              cfg.synth.corpus_images, cfg.seed);
  save_segment_dataset(ds, out_dir / "dataset");
  result.artifacts.push_back(out_dir / "dataset" / "manifest.csv");
  result.artifacts.push_back(out_dir / "dataset" / "labels.csv");

  result.summary = fmt::format("rendered {}x{} image: {} glyphs, {} noise kernels; {} labeled kernels; "
                               "dataset {} valid / {} invalid windows",
                               synth.image.width(), synth.image.height(), synth.truth.glyph_boxes.size(),
                               synth.truth.noise_kernel_ids.size(), labels.size(),
                               ds.count(SegmentLabel::Valid), ds.count(SegmentLabel::Invalid));
  write_manifest(cfg, "synth", out_dir, {}, result);
  return result;
}

CommandResult run_features(const PipelineConfig& cfg, const fs::path& image, const fs::path& out_dir) {
  validate(cfg);
  const QuantizedImage img = load_input_image(cfg, image);
  ensure_writable_dir(out_dir);
  std::vector<KernelFeatures> rows;
  for (const Kernel& k : tile_kernels(img, cfg.denoise.kernel, cfg.denoise.kernel)) {
    rows.push_back({k.id, kernel_features(k, cfg.haralick)});
  }
  CommandResult result;
  const fs::path path = out_dir / "features.csv";
  write_stream(path, [&](std::ostream& o) { write_features_csv(o, rows); });
  result.artifacts.push_back(path);
  result.summary = fmt::format("{} kernels written to {}", rows.size(), path.string());
  write_manifest(cfg, "features", out_dir, {image}, result);
  return result;
}

CommandResult run_build_dict(const PipelineConfig& cfg, const fs::path& labels_csv, const fs::path& out_dir) {
  validate(cfg);
  require_input(labels_csv);
  std::ifstream in(labels_csv, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", labels_csv.string()));
  const NoiseDictionary dict = build_dictionary(read_kernel_labels_csv(in));
  ensure_writable_dir(out_dir);
  CommandResult result;
  const fs::path dict_path = out_dir / "dictionary.json";
  save_dictionary(dict, dict_path);
  const fs::path scatter = out_dir / "scatter.csv";
  write_stream(scatter, [&](std::ostream& o) { write_scatter_csv(o, dict); });
  result.artifacts = {dict_path, scatter};
  std::string ranges;
  for (const auto& [cls, r] : dict.ranges) {
    ranges += fmt::format("\n  {:<12} [{:.6f}, {:.6f}] mean {:.6f} n={}", epigraph::to_string(cls), r.min,
                          r.max, r.mean, r.count);
  }
  result.summary = fmt::format("{} observations{}", dict.observations.size(), ranges);
  write_manifest(cfg, "build-dict", out_dir, {labels_csv}, result);
  return result;
}

CommandResult run_denoise(const PipelineConfig& cfg, const fs::path& image, const fs::path& dictionary,
                          const fs::path& out_dir) {
  validate(cfg);
  const QuantizedImage img = load_input_image(cfg, image);
  require_input(dictionary);
  const NoiseDictionary dict = load_dictionary(dictionary);
  DenoiseConfig dcfg = cfg.denoise;
  dcfg.haralick = cfg.haralick;
  const DenoiseResult res = denoise(img, dict, dcfg);
  ensure_writable_dir(out_dir);
  CommandResult result;
  const fs::path png = out_dir / "denoised.png";
  save_png(res.image, png);
  const fs::path mask = out_dir / "mask.csv";
  write_stream(mask, [&](std::ostream& o) { write_mask_csv(o, res.mask); });
  result.artifacts = {png, mask};
  result.summary = fmt::format("replaced {} of {} kernels", res.replaced_count, res.mask.size());
  write_manifest(cfg, "denoise", out_dir, {image, dictionary}, result);
  return result;
}

CommandResult run_windows(const PipelineConfig& cfg, const fs::path& image, const fs::path& out_dir) {
  validate(cfg);
  const QuantizedImage img = load_input_image(cfg, image);
  const std::vector<Segment> segments = slide_windows(img, cfg.segmentation.window);
  ensure_writable_dir(out_dir);
  CommandResult result;
  for (const Segment& s : segments) {
    const fs::path p = out_dir / (s.id + ".png");
    save_png(QuantizedImage(s.size.w, s.size.h, s.levels, s.pixels), p);
    result.artifacts.push_back(p);
  }
  const fs::path manifest = out_dir / "manifest.csv";
  write_stream(manifest, [&](std::ostream& o) { write_manifest_csv(o, segments); });
  result.artifacts.push_back(manifest);
  result.summary = fmt::format("{} windows of {}x{}", segments.size(), cfg.segmentation.window.window.w,
                               cfg.segmentation.window.window.h);
  write_manifest(cfg, "windows", out_dir, {image}, result);
  return result;
}

CommandResult run_train(const PipelineConfig& cfg, const fs::path& dataset_dir, const fs::path& out_dir) {
  validate(cfg);
  require_input(dataset_dir);
  const SegmentDataset ds = load_segment_dataset(dataset_dir, cfg.levels);
  const nn::Dataset examples = to_examples(ds, cfg.segmentation.input_dims);
  const nn::DatasetSplit split = nn::split_dataset(examples, cfg.train.split_ratio, cfg.train.seed);
  const nn::Network net = nn::init_network(cfg.layers, cfg.train);
  const nn::TrainResult trained = nn::train(net, split.train, cfg.train, split.test);
  ensure_writable_dir(out_dir);

  CommandResult result;
  const fs::path model = out_dir / "model.json";
  nn::save_model(trained.model, model);
  const fs::path curve = out_dir / "curve.csv";
  write_stream(curve, [&](std::ostream& o) { nn::write_curve_csv(o, trained.report); });
  const fs::path split_path = out_dir / "split.csv";
  write_stream(split_path, [&](std::ostream& o) {
    o << "segment_id,split\n";
    for (const auto& e : split.train) o << e.id << ",train\n";
    for (const auto& e : split.test) o << e.id << ",test\n";
  });
  ojson report;
  report["iterations"] = trained.report.cost_per_iteration.size();
  report["initial_cost"] = trained.report.cost_per_iteration.front();
  report["final_cost"] = trained.report.cost_per_iteration.back();
  report["train_accuracy"] = trained.report.train_accuracy;
  report["test_accuracy"] = trained.report.test_accuracy ? json(*trained.report.test_accuracy) : json();
  report["train_size"] = split.train.size();
  report["test_size"] = split.test.size();
  report["warnings"] = split.warnings;
  const fs::path report_path = out_dir / "train_report.json";
  write_file(report_path, report.dump(2) + "\n");
  result.artifacts = {model, curve, split_path, report_path};
  result.summary = fmt::format("{} iterations, cost {:.4f} -> {:.4f}, train accuracy {:.3f}, test accuracy {:.3f}",
                               trained.report.cost_per_iteration.size(), trained.report.cost_per_iteration.front(),
                               trained.report.cost_per_iteration.back(), trained.report.train_accuracy,
                               trained.report.test_accuracy.value_or(0.0));
  for (const auto& w : split.warnings) result.summary += "\nwarning: " + w;
  write_manifest(cfg, "train", out_dir, {dataset_dir / "manifest.csv", dataset_dir / "labels.csv"}, result);
  return result;
}

CommandResult run_segment(const PipelineConfig& cfg, const fs::path& image, const fs::path& model,
                          const fs::path& out_dir) {
  validate(cfg);
  const QuantizedImage img = load_input_image(cfg, image);
  require_input(model);
  const nn::TrainedModel net = nn::load_model(model);
  const std::vector<Segment> segments = slide_windows(img, cfg.segmentation.window);
  const std::vector<Segment> valid =
      extract_valid(segments, net, cfg.segmentation.input_dims, cfg.segmentation.threshold, out_dir);
  CommandResult result;
  for (const Segment& s : valid) result.artifacts.push_back(out_dir / (s.id + ".png"));
  result.artifacts.push_back(out_dir / "manifest.csv");
  result.summary = fmt::format("{} of {} windows accepted as characters", valid.size(), segments.size());
  write_manifest(cfg, "segment", out_dir, {image, model}, result);
  return result;
}

CommandResult run_evaluate(const PipelineConfig& cfg, const fs::path& model, const fs::path& dataset_dir,
                           const fs::path& out_dir, const fs::path& split_file, std::string_view split) {
  validate(cfg);
  require_input(model);
  require_input(dataset_dir);
  const nn::TrainedModel net = nn::load_model(model);
  SegmentDataset ds = load_segment_dataset(dataset_dir, cfg.levels);
  std::vector<fs::path> inputs{model, dataset_dir / "manifest.csv", dataset_dir / "labels.csv"};
  if (!split_file.empty()) {
    require_input(split_file);
    const auto splits = read_split_file(split_file);
    std::erase_if(ds.segments, [&](const Segment& s) {
      auto it = splits.find(s.id);
      return it == splits.end() || it->second != split;
    });
    inputs.push_back(split_file);
  }
  const nn::Evaluation ev = nn::evaluate(net, to_examples(ds, cfg.segmentation.input_dims));
  ensure_writable_dir(out_dir);
  ojson report;
  report["samples"] = ev.total();
  report["accuracy"] = ev.accuracy;
  report["confusion"] = {{"true_positive", ev.true_positive},
                         {"true_negative", ev.true_negative},
                         {"false_positive", ev.false_positive},
                         {"false_negative", ev.false_negative}};
  if (!split_file.empty()) report["split"] = std::string(split);
  CommandResult result;
  const fs::path path = out_dir / "evaluation.json";
  write_file(path, report.dump(2) + "\n");
  result.artifacts.push_back(path);
  result.summary = fmt::format("accuracy {:.4f} on {} samples (TP {} TN {} FP {} FN {})", ev.accuracy, ev.total(),
                               ev.true_positive, ev.true_negative, ev.false_positive, ev.false_negative);
  write_manifest(cfg, "evaluate", out_dir, inputs, result);
  return result;
}

}  // namespace epigraph::pipeline
