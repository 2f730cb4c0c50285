#include "epigraph/denoise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "csv.hpp"
#include "epigraph/error.hpp"

namespace epigraph {

namespace {

constexpr int kDictionaryFormat = 1;

}  // namespace

std::string_view to_string(KernelClass c) {
  switch (c) {
    case KernelClass::Noise: return "Noise";
    case KernelClass::MostlyNoise: return "MostlyNoise";
    case KernelClass::MostlyText: return "MostlyText";
    case KernelClass::Text: return "Text";
  }
  return "?";
}

KernelClass parse_kernel_class(std::string_view s) {
  std::string key;
  for (char ch : s) {
    if (ch == ' ' || ch == '_' || ch == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (key == "noise") return KernelClass::Noise;
  if (key == "mostlynoise") return KernelClass::MostlyNoise;
  if (key == "mostlytext") return KernelClass::MostlyText;
  if (key == "text") return KernelClass::Text;
  throw ConfigError(fmt::format("unknown kernel class '{}' (expected Noise, MostlyNoise, "
                                "MostlyText or Text)", s));
}

NoiseDictionary build_dictionary(std::vector<Observation> labeled) {
  if (labeled.empty()) throw ConfigError("dictionary requires labeled observations");
  NoiseDictionary dict;
  std::map<KernelClass, double> sums;
  for (const Observation& o : labeled) {
    if (!std::isfinite(o.mcc)) {
      throw ConfigError(fmt::format("observation '{}' has a non-finite value", o.kernel_id));
    }
    auto [it, fresh] = dict.ranges.try_emplace(o.cls, ClassRange{o.mcc, o.mcc, 0, 0});
    ClassRange& r = it->second;
    r.min = std::min(r.min, o.mcc);
    r.max = std::max(r.max, o.mcc);
    ++r.count;
    sums[o.cls] += o.mcc;
  }
  for (auto& [cls, r] : dict.ranges) {
    r.mean = std::clamp(sums[cls] / r.count, r.min, r.max);
  }
  dict.observations = std::move(labeled);
  return dict;
}

KernelClass classify_mcc(double value, const NoiseDictionary& dict) {
  if (dict.ranges.empty()) throw ConfigError("dictionary has no classes");
  std::vector<KernelClass> candidates;
  for (const auto& [cls, r] : dict.ranges) {
    if (r.contains(value)) candidates.push_back(cls);
  }
  if (candidates.size() == 1) return candidates.front();
  if (candidates.empty()) {
    for (const auto& [cls, r] : dict.ranges) candidates.push_back(cls);
  }
  // std::map iterates in class order, so the first best candidate wins ties.
  KernelClass best = candidates.front();
  double best_dist = std::numeric_limits<double>::infinity();
  int best_count = -1;
  for (KernelClass c : candidates) {
    const ClassRange& r = dict.ranges.at(c);
    const double d = std::abs(value - r.mean);
    if (d < best_dist || (d == best_dist && r.count > best_count)) {
      best = c;
      best_dist = d;
      best_count = r.count;
    }
  }
  return best;
}

void validate(const DenoiseConfig& cfg) {
  if (cfg.kernel.w < 2 || cfg.kernel.h < 2) {
    throw ConfigError("denoise kernel must be at least 2x2 to admit all four directions");
  }
  if (cfg.replace_classes.empty()) throw ConfigError("replace_classes must not be empty");
  if (cfg.fill_mode == FillMode::PaperBox &&
      (cfg.fill_box.w < 1 || cfg.fill_box.h < 1 || cfg.fill_box.w > cfg.kernel.w ||
       cfg.fill_box.h > cfg.kernel.h)) {
    throw ConfigError(fmt::format("fill box {}x{} must fit inside the {}x{} kernel",
                                  cfg.fill_box.w, cfg.fill_box.h, cfg.kernel.w, cfg.kernel.h));
  }
  if (cfg.fill_level < 0) throw ConfigError("fill_level must be >= 0");
}

DenoiseResult denoise(const QuantizedImage& img, const NoiseDictionary& dict,
                      const DenoiseConfig& cfg) {
  validate(cfg);
  if (cfg.fill_level >= img.levels()) {
    throw ConfigError(fmt::format("fill_level {} outside [0, {})", cfg.fill_level, img.levels()));
  }
  if (cfg.kernel.w > img.width() || cfg.kernel.h > img.height()) {
    throw ShapeError(fmt::format("image {}x{} is smaller than the {}x{} denoise kernel",
                                 img.width(), img.height(), cfg.kernel.w, cfg.kernel.h));
  }
  DenoiseResult result{img, {}, 0};
  for (const Kernel& k : tile_kernels(img, cfg.kernel, cfg.kernel)) {
    KernelAssignment a;
    a.kernel_id = k.id;
    a.rect = k.rect();
    a.mcc = kernel_features(k, cfg.haralick).maximal_correlation;
    a.cls = classify_mcc(a.mcc, dict);
    a.replaced = cfg.replace_classes.contains(a.cls);
    if (a.replaced) {
      Rect fill = a.rect;
      if (cfg.fill_mode == FillMode::PaperBox) {
        fill = {a.rect.x + (a.rect.w - cfg.fill_box.w) / 2, a.rect.y + (a.rect.h - cfg.fill_box.h) / 2,
                cfg.fill_box.w, cfg.fill_box.h};
      }
      for (int y = fill.y; y < fill.bottom(); ++y) {
        for (int x = fill.x; x < fill.right(); ++x) {
          result.image.set(x, y, static_cast<std::uint8_t>(cfg.fill_level));
        }
      }
      ++result.replaced_count;
    }
    result.mask.push_back(std::move(a));
  }
  return result;
}

std::string dictionary_json(const NoiseDictionary& dict) {
  nlohmann::ordered_json j;
  j["format"] = kDictionaryFormat;
  j["observations"] = nlohmann::ordered_json::array();
  for (const Observation& o : dict.observations) {
    j["observations"].push_back(
        {{"kernel_id", o.kernel_id}, {"mcc", o.mcc}, {"class", std::string(to_string(o.cls))}});
  }
  j["ranges"] = nlohmann::ordered_json::object();
  for (const auto& [cls, r] : dict.ranges) {
    j["ranges"][std::string(to_string(cls))] = {
        {"min", r.min}, {"max", r.max}, {"mean", r.mean}, {"count", r.count}};
  }
  return j.dump(2) + "\n";
}

NoiseDictionary parse_dictionary_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dictionary file: ") + e.what());
  }
  try {
    const int format = j.at("format").get<int>();
    if (format != kDictionaryFormat) {
      throw VersionError(fmt::format("dictionary format {} is not supported (this build reads {})",
                                     format, kDictionaryFormat));
    }
    std::vector<Observation> obs;
    for (const auto& o : j.at("observations")) {
      obs.push_back({o.at("kernel_id").get<std::string>(), o.at("mcc").get<double>(),
                     parse_kernel_class(o.at("class").get<std::string>())});
    }
    // Ranges are always rederived from the observations.
    return build_dictionary(std::move(obs));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dictionary file: ") + e.what());
  }
}

void save_dictionary(const NoiseDictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << dictionary_json(dict);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

NoiseDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dictionary_json(ss.str());
}

std::vector<Observation> read_kernel_labels_csv(std::istream& in) {
  std::vector<Observation> rows;
  for (auto& f : csv::read(in, {"kernel_id", "mcc", "class"})) {
    rows.push_back({f[0], csv::to_double(f[1]), parse_kernel_class(f[2])});
  }
  return rows;
}

void write_kernel_labels_csv(std::ostream& out, const std::vector<Observation>& rows) {
  out << "kernel_id,mcc,class\n";
  for (const auto& o : rows) out << fmt::format("{},{:.17g},{}\n", o.kernel_id, o.mcc, to_string(o.cls));
}

void write_scatter_csv(std::ostream& out, const NoiseDictionary& dict) {
  out << "mcc,class\n";
  for (const auto& o : dict.observations) out << fmt::format("{:.17g},{}\n", o.mcc, to_string(o.cls));
}

void write_mask_csv(std::ostream& out, const std::vector<KernelAssignment>& mask) {
  out << "kernel_id,mcc,class,replaced\n";
  for (const auto& a : mask) {
    out << fmt::format("{},{:.17g},{},{}\n", a.kernel_id, a.mcc, to_string(a.cls),
                       a.replaced ? 1 : 0);
  }
}

}  // namespace epigraph
