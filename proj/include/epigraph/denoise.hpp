#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "epigraph/haralick.hpp"
#include "epigraph/imaging.hpp"

namespace epigraph {

/// Human labels for a kernel, in fixed order.
enum class KernelClass { Noise, MostlyNoise, MostlyText, Text };

inline constexpr std::array<KernelClass, 4> kKernelClasses = {
    KernelClass::Noise, KernelClass::MostlyNoise, KernelClass::MostlyText, KernelClass::Text};

std::string_view to_string(KernelClass c);
/// Accepts "MostlyNoise", "Mostly Noise", "mostly_noise", ... Throws ConfigError otherwise.
KernelClass parse_kernel_class(std::string_view s);

struct Observation {
  std::string kernel_id;
  double mcc = 0;
  KernelClass cls = KernelClass::Noise;
};

struct ClassRange {
  double min = 0;
  double max = 0;
  double mean = 0;
  int count = 0;

  bool contains(double v) const { return v >= min && v <= max; }
};

struct NoiseDictionary {
  std::vector<Observation> observations;
  std::map<KernelClass, ClassRange> ranges;  // only classes with observations
};

NoiseDictionary build_dictionary(std::vector<Observation> labeled);

/// In-range class if unique; otherwise nearest mean among the containing
/// classes (or among all classes when none contains the value). Ties go to the
/// larger count, then the earlier class.
KernelClass classify_mcc(double value, const NoiseDictionary& dict);

enum class FillMode { PaperBox, FullKernel };

struct DenoiseConfig {
  Size kernel{20, 20};
  std::set<KernelClass> replace_classes{KernelClass::Noise};
  FillMode fill_mode = FillMode::PaperBox;
  Size fill_box{10, 10};  // PaperBox only; centered in the kernel
  int fill_level = 0;
  HaralickOptions haralick;
};

struct KernelAssignment {
  std::string kernel_id;
  Rect rect;
  double mcc = 0;
  KernelClass cls = KernelClass::Noise;
  bool replaced = false;
};

struct DenoiseResult {
  QuantizedImage image;
  std::vector<KernelAssignment> mask;
  int replaced_count = 0;
};

void validate(const DenoiseConfig& cfg);

/// Tiles with stride = kernel size, classifies each tile's MCC, repaints the
/// tiles whose class is in cfg.replace_classes. Other pixels are untouched.
DenoiseResult denoise(const QuantizedImage& img, const NoiseDictionary& dict,
                      const DenoiseConfig& cfg = {});

// File formats.
void save_dictionary(const NoiseDictionary& dict, const std::filesystem::path& path);
NoiseDictionary load_dictionary(const std::filesystem::path& path);
std::string dictionary_json(const NoiseDictionary& dict);
NoiseDictionary parse_dictionary_json(std::string_view text);

/// "kernel_id,mcc,class"
std::vector<Observation> read_kernel_labels_csv(std::istream& in);
void write_kernel_labels_csv(std::ostream& out, const std::vector<Observation>& rows);
/// "mcc,class"
void write_scatter_csv(std::ostream& out, const NoiseDictionary& dict);
/// "kernel_id,mcc,class,replaced"
void write_mask_csv(std::ostream& out, const std::vector<KernelAssignment>& mask);

}  // namespace epigraph
