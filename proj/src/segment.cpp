#include "epigraph/segment.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "csv.hpp"
#include "epigraph/error.hpp"

namespace epigraph {

namespace fs = std::filesystem;

std::string_view to_string(SegmentLabel l) { return l == SegmentLabel::Valid ? "Valid" : "Invalid"; }

SegmentLabel parse_segment_label(std::string_view s) {
  if (s == "Valid" || s == "valid") return SegmentLabel::Valid;
  if (s == "Invalid" || s == "invalid") return SegmentLabel::Invalid;
  throw ConfigError(fmt::format("unknown segment label '{}' (expected Valid or Invalid)", s));
}

std::string segment_id(Point origin, Size size) {
  return fmt::format("seg_x{}y{}w{}h{}", origin.x, origin.y, size.w, size.h);
}

Segment crop_segment(const QuantizedImage& img, const Rect& r) {
  Kernel k = extract_kernel(img, r);
  Segment s;
  s.id = segment_id(k.origin, k.size);
  s.origin = k.origin;
  s.size = k.size;
  s.levels = k.levels;
  s.pixels = std::move(k.pixels);
  return s;
}

std::vector<Segment> slide_windows(const QuantizedImage& img, const WindowConfig& cfg) {
  std::vector<Segment> out;
  for (Point o : window_origins(img.width(), img.height(), cfg.window, cfg.stride)) {
    out.push_back(crop_segment(img, {o.x, o.y, cfg.window.w, cfg.window.h}));
  }
  return out;
}

Eigen::VectorXd to_feature_vector(const Segment& s, Size dims) {
  if (dims.w < 1 || dims.h < 1) throw ConfigError("input dimensions must be positive");
  Eigen::VectorXd v(static_cast<Eigen::Index>(dims.w) * dims.h);
  const double top = s.levels - 1;
  for (int y = 0; y < dims.h; ++y) {
    const int sy = (2 * y + 1) * s.size.h / (2 * dims.h);
    for (int x = 0; x < dims.w; ++x) {
      const int sx = (2 * x + 1) * s.size.w / (2 * dims.w);
      v(static_cast<Eigen::Index>(y) * dims.w + x) = 1.0 - s.at(sx, sy) / top;
    }
  }
  return v;
}

int SegmentDataset::count(SegmentLabel l) const {
  int n = 0;
  for (const Segment& s : segments) n += (s.label == l);
  return n;
}

nn::Dataset to_examples(const SegmentDataset& ds, Size input_dims) {
  nn::Dataset out;
  out.reserve(ds.segments.size());
  for (const Segment& s : ds.segments) {
    if (!s.label) throw ConfigError(fmt::format("segment '{}' has no label", s.id));
    out.push_back({s.id, to_feature_vector(s, input_dims), *s.label == SegmentLabel::Valid ? 1 : 0});
  }
  return out;
}

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
  }
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError(fmt::format("output directory '{}' is not writable", dir.string()));
  }
  fs::remove(probe, ec);
}

namespace {

void save_crop(const Segment& s, const fs::path& path) {
  save_png(QuantizedImage(s.size.w, s.size.h, s.levels, s.pixels), path);
}

void write_text(const fs::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  writer(out);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

}  // namespace

std::vector<Segment> extract_valid(const std::vector<Segment>& segments,
                                   const nn::TrainedModel& model, Size input_dims,
                                   double threshold, const fs::path& out_dir) {
  model.check_shapes();
  if (static_cast<long>(input_dims.w) * input_dims.h != model.input_size()) {
    throw ShapeError(fmt::format("input dims {}x{} give {} features, model expects {}",
                                 input_dims.w, input_dims.h, input_dims.w * input_dims.h,
                                 model.input_size()));
  }
  ensure_writable_dir(out_dir);

  std::vector<Segment> valid;
  for (const Segment& s : segments) {
    const double score = model.predict(to_feature_vector(s, input_dims));
    if (score < threshold) continue;
    Segment v = s;
    v.score = score;
    v.label = SegmentLabel::Valid;
    valid.push_back(std::move(v));
  }
  for (const Segment& s : valid) save_crop(s, out_dir / (s.id + ".png"));
  write_text(out_dir / "manifest.csv", [&](std::ostream& out) { write_manifest_csv(out, valid); });
  return valid;
}

void write_manifest_csv(std::ostream& out, const std::vector<Segment>& segments) {
  out << "segment_id,x,y,w,h,score\n";
  for (const Segment& s : segments) {
    out << fmt::format("{},{},{},{},{},", s.id, s.origin.x, s.origin.y, s.size.w, s.size.h);
    if (s.score) out << fmt::format("{:.17g}", *s.score);
    out << '\n';
  }
}

void write_segment_labels_csv(std::ostream& out, const std::vector<Segment>& segments) {
  out << "segment_id,label\n";
  for (const Segment& s : segments) {
    if (s.label) out << s.id << ',' << to_string(*s.label) << '\n';
  }
}

void save_segment_dataset(const SegmentDataset& ds, const fs::path& dir) {
  ensure_writable_dir(dir);
  for (const Segment& s : ds.segments) save_crop(s, dir / (s.id + ".png"));
  write_text(dir / "manifest.csv", [&](std::ostream& out) { write_manifest_csv(out, ds.segments); });
  write_text(dir / "labels.csv", [&](std::ostream& out) { write_segment_labels_csv(out, ds.segments); });
}

SegmentDataset load_segment_dataset(const fs::path& dir, int levels) {
  auto open = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", (dir / name).string()));
    return in;
  };
  std::map<std::string, Rect> where;
  {
    auto in = open("manifest.csv");
    for (auto& f : csv::read(in, {"segment_id", "x", "y", "w", "h", "score"})) {
      where[f[0]] = {static_cast<int>(csv::to_long(f[1])), static_cast<int>(csv::to_long(f[2])),
                     static_cast<int>(csv::to_long(f[3])), static_cast<int>(csv::to_long(f[4]))};
    }
  }
  SegmentDataset ds;
  auto in = open("labels.csv");
  for (auto& f : csv::read(in, {"segment_id", "label"})) {
    auto it = where.find(f[0]);
    if (it == where.end()) {
      throw FormatError(fmt::format("labeled segment '{}' is missing from manifest.csv", f[0]));
    }
    const Rect r = it->second;
    QuantizedImage crop = load_quantized(dir / (f[0] + ".png"), levels);
    if (crop.width() != r.w || crop.height() != r.h) {
      throw FormatError(fmt::format("crop '{}' is {}x{}, manifest says {}x{}", f[0], crop.width(),
                                    crop.height(), r.w, r.h));
    }
    Segment s;
    s.id = f[0];
    s.origin = {r.x, r.y};
    s.size = {r.w, r.h};
    s.levels = levels;
    s.pixels = crop.pixels();
    s.label = parse_segment_label(f[1]);
    ds.segments.push_back(std::move(s));
  }
  return ds;
}

}  // namespace epigraph
