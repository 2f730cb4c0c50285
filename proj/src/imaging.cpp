#include "epigraph/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "epigraph/error.hpp"

namespace epigraph {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw ShapeError(fmt::format("image dimensions must be positive, got {}x{}", width, height));
  }
}

void check_count(std::size_t n, int width, int height) {
  if (n != static_cast<std::size_t>(width) * height) {
    throw ShapeError(fmt::format("pixel buffer holds {} values, {}x{} image needs {}", n,
                                 width, height, static_cast<std::size_t>(width) * height));
  }
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

RgbImage::RgbImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  check_count(pixels_.size(), width, height);
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  check_count(pixels_.size(), width, height);
}

QuantizedImage::QuantizedImage(int width, int height, int levels, std::uint8_t fill)
    : width_(width), height_(height), levels_(levels) {
  check_dims(width, height);
  if (levels < 2 || levels > 256) {
    throw ConfigError(fmt::format("gray level count must be in [2, 256], got {}", levels));
  }
  if (fill >= levels) throw ConfigError("fill level outside [0, levels)");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

QuantizedImage::QuantizedImage(int width, int height, int levels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), levels_(levels), pixels_(std::move(pixels)) {
  check_dims(width, height);
  check_count(pixels_.size(), width, height);
  if (levels < 2 || levels > 256) {
    throw ConfigError(fmt::format("gray level count must be in [2, 256], got {}", levels));
  }
  for (auto v : pixels_) {
    if (v >= levels) throw ConfigError(fmt::format("pixel level {} outside [0, {})", v, levels));
  }
}

void QuantizedImage::set(int x, int y, std::uint8_t level) {
  if (level >= levels_) throw ConfigError(fmt::format("level {} outside [0, {})", level, levels_));
  pixels_[index(x, y)] = level;
}

std::string kernel_id(Point origin, Size size) {
  return fmt::format("x{}y{}w{}h{}", origin.x, origin.y, size.w, size.h);
}

GrayImage to_grayscale(const RgbImage& img) {
  std::vector<std::uint8_t> out;
  out.reserve(img.pixels().size());
  for (const Rgb& p : img.pixels()) {
    double luma = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L)));
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

QuantizedImage quantize(const GrayImage& img, int levels) {
  if (levels < 2 || levels > 256) {
    throw ConfigError(fmt::format("gray level count must be in [2, 256], got {}", levels));
  }
  std::vector<std::uint8_t> out;
  out.reserve(img.pixels().size());
  for (auto v : img.pixels()) out.push_back(static_cast<std::uint8_t>(v * levels / 256));
  return QuantizedImage(img.width(), img.height(), levels, std::move(out));
}

std::uint8_t level_to_intensity(int level, int levels) {
  // ceil(level * 256 / levels) is the smallest intensity in the level's bin.
  return static_cast<std::uint8_t>((level * 256 + levels - 1) / levels);
}

GrayImage dequantize(const QuantizedImage& img) {
  std::vector<std::uint8_t> out;
  out.reserve(img.pixels().size());
  for (auto v : img.pixels()) out.push_back(level_to_intensity(v, img.levels()));
  return GrayImage(img.width(), img.height(), std::move(out));
}

Kernel extract_kernel(const QuantizedImage& img, const Rect& r) {
  if (!img.bounds().contains(r) || r.w < 1 || r.h < 1) {
    throw ShapeError(fmt::format("region {}x{} at ({},{}) does not fit {}x{} image", r.w, r.h,
                                 r.x, r.y, img.width(), img.height()));
  }
  Kernel k;
  k.origin = {r.x, r.y};
  k.size = {r.w, r.h};
  k.levels = img.levels();
  k.id = kernel_id(k.origin, k.size);
  k.pixels.reserve(static_cast<std::size_t>(r.w) * r.h);
  for (int y = r.y; y < r.bottom(); ++y) {
    for (int x = r.x; x < r.right(); ++x) k.pixels.push_back(img.at(x, y));
  }
  return k;
}

std::vector<Point> window_origins(int width, int height, Size size, Size stride) {
  if (size.w < 1 || size.h < 1) throw ConfigError("window size must be positive");
  if (stride.w < 1 || stride.h < 1) throw ConfigError("stride must be >= 1");
  if (size.w > width || size.h > height) {
    throw ShapeError(fmt::format("window {}x{} is larger than image {}x{}", size.w, size.h,
                                 width, height));
  }
  std::vector<Point> origins;
  for (int y = 0; y + size.h <= height; y += stride.h) {
    for (int x = 0; x + size.w <= width; x += stride.w) origins.push_back({x, y});
  }
  return origins;
}

std::vector<Kernel> tile_kernels(const QuantizedImage& img, Size size, Size stride) {
  std::vector<Kernel> kernels;
  for (Point o : window_origins(img.width(), img.height(), size, stride)) {
    kernels.push_back(extract_kernel(img, {o.x, o.y, size.w, size.h}));
  }
  return kernels;
}

RgbImage load_rgb(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError(fmt::format("cannot read image '{}'", path.string()));
  std::vector<Rgb> px;
  px.reserve(static_cast<std::size_t>(bgr.rows) * bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) px.push_back({row[x][2], row[x][1], row[x][0]});
  }
  return RgbImage(bgr.cols, bgr.rows, std::move(px));
}

QuantizedImage load_quantized(const std::filesystem::path& path, int levels) {
  return quantize(to_grayscale(load_rgb(path)), levels);
}

namespace {

cv::Mat to_mat(const GrayImage& img) {
  cv::Mat m(img.height(), img.width(), CV_8UC1);
  std::copy(img.pixels().begin(), img.pixels().end(), m.data);
  return m;
}

const std::vector<int> kPngParams = {cv::IMWRITE_PNG_COMPRESSION, 6,
                                     cv::IMWRITE_PNG_STRATEGY, cv::IMWRITE_PNG_STRATEGY_DEFAULT};

}  // namespace

void save_png(const GrayImage& img, const std::filesystem::path& path) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), to_mat(img), kPngParams);
  } catch (const cv::Exception& e) {
    throw IoError(fmt::format("cannot write '{}': {}", path.string(), e.what()));
  }
  if (!ok) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

void save_png(const QuantizedImage& img, const std::filesystem::path& path) {
  save_png(dequantize(img), path);
}

std::vector<std::uint8_t> encode_png(const QuantizedImage& img) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", to_mat(dequantize(img)), buf, kPngParams)) {
    throw IoError("PNG encoding failed");
  }
  return buf;
}

// ---------------------------------------------------------------------------

namespace {

struct Vec2 {
  double x;
  double y;
};

using Polyline = std::vector<Vec2>;

Polyline arc(double cx, double cy, double r, double from_deg, double to_deg, int steps = 16) {
  Polyline p;
  for (int i = 0; i <= steps; ++i) {
    double t = (from_deg + (to_deg - from_deg) * i / steps) * std::numbers::pi / 180.0;
    p.push_back({cx + r * std::cos(t), cy - r * std::sin(t)});
  }
  return p;
}

// Brahmi-like letter skeletons in unit-box coordinates (y down). Each glyph
// is a single connected stroke set.
std::vector<std::vector<Polyline>> glyph_shapes() {
  std::vector<std::vector<Polyline>> shapes;
  shapes.push_back({{{0.5, 0}, {0.5, 1}}, {{0, 0.5}, {1, 0.5}}});              // ka +
  shapes.push_back({{{0, 1}, {0.5, 0}, {1, 1}}});                               // ga
  shapes.push_back({{{0, 0}, {0, 1}, {1, 1}}});                                 // gha
  shapes.push_back({arc(0.5, 0.5, 0.5, 0, 360, 24)});                           // tha
  shapes.push_back({{{0, 0}, {0, 1}, {1, 1}, {1, 0}}});                         // la-like cup
  {
    Polyline a = arc(0.5, 0.5, 0.5, 0, 180);  // arch with legs
    a.insert(a.begin(), {1, 1});
    a.push_back({0, 1});
    shapes.push_back({a});
  }
  shapes.push_back({{{0.5, 0}, {0.5, 1}}, arc(0.5, 0.5, 0.5, 90, -90)});       // pa-like D
  shapes.push_back({{{0, 0}, {1, 0}}, {{0.5, 0}, {0.5, 1}}});                   // ta T
  shapes.push_back({{{1, 0}, {0, 0}, {0, 1}, {1, 1}}, {{0, 0.5}, {0.8, 0.5}}}); // ca-like E
  shapes.push_back({{{0, 0}, {0, 1}}, arc(0.5, 0.25, 0.25, 180, -90), arc(0.5, 0.75, 0.25, 90, -90)});  // ba-like
  return shapes;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  double dx = b.x - a.x, dy = b.y - a.y;
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0) : 0.0;
  double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

// Smooth shading in [-1, 1]: bilinear interpolation of a random lattice.
std::vector<double> shading_field(int width, int height, int scale, std::mt19937_64& rng) {
  int gw = width / scale + 2, gh = height / scale + 2;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = u(rng);
  std::vector<double> field(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double fx = static_cast<double>(x) / scale, fy = static_cast<double>(y) / scale;
      int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
      double tx = fx - ix, ty = fy - iy;
      auto l = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * gw + i]; };
      double top = l(ix, iy) * (1 - tx) + l(ix + 1, iy) * tx;
      double bot = l(ix, iy + 1) * (1 - tx) + l(ix + 1, iy + 1) * tx;
      field[static_cast<std::size_t>(y) * width + x] = top * (1 - ty) + bot * ty;
    }
  }
  return field;
}

void validate(const SynthConfig& cfg) {
  if (cfg.width < 1 || cfg.height < 1) throw ConfigError("synthetic canvas must be non-empty");
  if (cfg.glyph_count < 0) throw ConfigError("glyph_count must be >= 0");
  if (cfg.glyph_min < 4 || cfg.glyph_max < cfg.glyph_min) {
    throw ConfigError("glyph size range must satisfy 4 <= glyph_min <= glyph_max");
  }
  if (cfg.glyph_gap < 0) throw ConfigError("glyph_gap must be >= 0");
  if (cfg.stroke_width <= 0) throw ConfigError("stroke_width must be positive");
  if (cfg.noise_tile < 2) throw ConfigError("noise_tile must be >= 2");
  if (cfg.noise_density < 0 || cfg.noise_density > 1) {
    throw ConfigError("noise_density must be in [0, 1]");
  }
  if (cfg.speckle_coverage < 0 || cfg.speckle_coverage > 1) {
    throw ConfigError("speckle_coverage must be in [0, 1]");
  }
  if (cfg.speckle_radius < 0) throw ConfigError("speckle_radius must be >= 0");
  if (cfg.background_scale < 1) throw ConfigError("background_scale must be >= 1");
  if (cfg.speckle_min_intensity > cfg.speckle_max_intensity) {
    throw ConfigError("speckle intensity range is empty");
  }
  for (int v : {cfg.ink_intensity, cfg.background_intensity, cfg.speckle_min_intensity,
                cfg.speckle_max_intensity}) {
    if (v < 0 || v > 255) throw ConfigError("intensities must be in [0, 255]");
  }
  int cell = cfg.glyph_max + cfg.glyph_gap;
  if (cfg.glyph_count > 0 &&
      (cfg.glyph_max > cfg.width || cfg.glyph_max > cfg.height ||
       static_cast<long>(cfg.glyph_count) * cell * cell >
           static_cast<long>(cfg.width) * cfg.height / 2)) {
    throw ConfigError(fmt::format("canvas {}x{} is too small for {} glyphs of up to {} px",
                                  cfg.width, cfg.height, cfg.glyph_count, cfg.glyph_max));
  }
}

}  // namespace

SyntheticImage render_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  const int W = cfg.width, H = cfg.height;

  std::vector<double> gray(static_cast<std::size_t>(W) * H);
  {
    auto shade = shading_field(W, H, cfg.background_scale, rng);
    for (std::size_t i = 0; i < gray.size(); ++i) {
      gray[i] = cfg.background_intensity + cfg.background_amplitude * shade[i];
    }
  }

  SyntheticGroundTruth truth;

  // Glyph boxes by rejection sampling with a white-space margin.
  std::uniform_int_distribution<int> side(cfg.glyph_min, cfg.glyph_max);
  const int max_attempts = 2000 * std::max(1, cfg.glyph_count);
  for (int attempt = 0; static_cast<int>(truth.glyph_boxes.size()) < cfg.glyph_count; ++attempt) {
    if (attempt >= max_attempts) {
      throw ConfigError(fmt::format("could not place {} glyphs on a {}x{} canvas",
                                    cfg.glyph_count, W, H));
    }
    int gw = side(rng), gh = side(rng);
    int x = std::uniform_int_distribution<int>(0, W - gw)(rng);
    int y = std::uniform_int_distribution<int>(0, H - gh)(rng);
    Rect box{x, y, gw, gh};
    Rect padded{x - cfg.glyph_gap, y - cfg.glyph_gap, gw + 2 * cfg.glyph_gap, gh + 2 * cfg.glyph_gap};
    bool clear = std::none_of(truth.glyph_boxes.begin(), truth.glyph_boxes.end(),
                              [&](const Rect& b) { return padded.intersects(b); });
    if (clear) truth.glyph_boxes.push_back(box);
  }

  static const auto shapes = glyph_shapes();
  const double half = cfg.stroke_width / 2.0;
  for (const Rect& box : truth.glyph_boxes) {
    const auto& shape = shapes[std::uniform_int_distribution<std::size_t>(0, shapes.size() - 1)(rng)];
    // Skeleton inset so the stroke stays inside the box.
    double sx = box.w - cfg.stroke_width, sy = box.h - cfg.stroke_width;
    for (int y = box.y; y < box.bottom(); ++y) {
      for (int x = box.x; x < box.right(); ++x) {
        Vec2 p{x + 0.5 - box.x - half, y + 0.5 - box.y - half};
        double d = 1e9;
        for (const Polyline& line : shape) {
          for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            Vec2 a{line[i].x * sx, line[i].y * sy}, b{line[i + 1].x * sx, line[i + 1].y * sy};
            d = std::min(d, segment_distance(p, a, b));
          }
        }
        if (d <= half) gray[static_cast<std::size_t>(y) * W + x] = cfg.ink_intensity;
      }
    }
  }

  // Speckle noise patches on tiles that stay clear of every glyph's white space.
  std::bernoulli_distribution pick(cfg.noise_density);
  std::bernoulli_distribution seed_blob(cfg.speckle_coverage);
  std::uniform_int_distribution<int> speckle(cfg.speckle_min_intensity, cfg.speckle_max_intensity);
  const Size tile{cfg.noise_tile, cfg.noise_tile};
  if (cfg.noise_tile <= W && cfg.noise_tile <= H) {
    for (Point o : window_origins(W, H, tile, tile)) {
      Rect t{o.x, o.y, tile.w, tile.h};
      Rect padded{t.x - cfg.glyph_gap / 2, t.y - cfg.glyph_gap / 2, t.w + cfg.glyph_gap,
                  t.h + cfg.glyph_gap};
      bool near_glyph = std::any_of(truth.glyph_boxes.begin(), truth.glyph_boxes.end(),
                                    [&](const Rect& b) { return padded.intersects(b); });
      if (near_glyph || !pick(rng)) continue;
      truth.noise_tiles.push_back(t);
      truth.noise_kernel_ids.insert(kernel_id(o, tile));
      const int r = cfg.speckle_radius;
      for (int y = t.y; y < t.bottom(); ++y) {
        for (int x = t.x; x < t.right(); ++x) {
          if (!seed_blob(rng)) continue;
          int v = speckle(rng);
          for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
              int px = x + dx, py = y + dy;
              if (dx * dx + dy * dy > r * r) continue;
              if (px < t.x || py < t.y || px >= t.right() || py >= t.bottom()) continue;
              gray[static_cast<std::size_t>(py) * W + px] = v;
            }
          }
        }
      }
    }
  }

  std::vector<std::uint8_t> px(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(gray[i]), 0L, 255L));
  }
  return {quantize(GrayImage(W, H, std::move(px)), cfg.levels), std::move(truth)};
}

}  // namespace epigraph
