#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "epigraph/imaging.hpp"
#include "epigraph/nn.hpp"

namespace epigraph {

struct WindowConfig {
  Size window{32, 32};
  Size stride{16, 16};

  static WindowConfig with_half_stride(Size window) {
    return {window, {std::max(1, window.w / 2), std::max(1, window.h / 2)}};
  }
};

enum class SegmentLabel { Invalid, Valid };

std::string_view to_string(SegmentLabel l);
SegmentLabel parse_segment_label(std::string_view s);

struct Segment {
  std::string id;
  Point origin;
  Size size;
  int levels = 0;
  std::vector<std::uint8_t> pixels;  // row-major level grid
  std::optional<SegmentLabel> label;
  std::optional<double> score;

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * size.w + x];
  }
  Rect rect() const { return {origin.x, origin.y, size.w, size.h}; }
};

/// "seg_x{origin_x}y{origin_y}w{w}h{h}"
std::string segment_id(Point origin, Size size);

Segment crop_segment(const QuantizedImage& img, const Rect& r);

/// Overlapping windows in row-major origin order; same lattice as tile_kernels.
std::vector<Segment> slide_windows(const QuantizedImage& img, const WindowConfig& cfg);

/// Nearest-neighbour resample to `dims`, ink = 1 - level / (L - 1), flattened row-major.
Eigen::VectorXd to_feature_vector(const Segment& s, Size dims);

struct SegmentDataset {
  std::vector<Segment> segments;  // every segment labeled

  int count(SegmentLabel l) const;
};

/// Throws ConfigError when a segment is unlabeled.
nn::Dataset to_examples(const SegmentDataset& ds, Size input_dims);

/// Scores every segment, writes those with score >= threshold to out_dir as
/// "{id}.png" plus "manifest.csv", and returns them (marked Valid) in input order.
/// The directory is checked for writability before any scoring.
std::vector<Segment> extract_valid(const std::vector<Segment>& segments,
                                   const nn::TrainedModel& model, Size input_dims,
                                   double threshold, const std::filesystem::path& out_dir);

/// "segment_id,x,y,w,h,score"; score is empty for unscored segments.
void write_manifest_csv(std::ostream& out, const std::vector<Segment>& segments);
/// "segment_id,label"
void write_segment_labels_csv(std::ostream& out, const std::vector<Segment>& segments);

/// Writes crops, manifest.csv and labels.csv.
void save_segment_dataset(const SegmentDataset& ds, const std::filesystem::path& dir);
/// Reads labels.csv and manifest.csv and the crops they name.
SegmentDataset load_segment_dataset(const std::filesystem::path& dir, int levels);

void ensure_writable_dir(const std::filesystem::path& dir);

}  // namespace epigraph
