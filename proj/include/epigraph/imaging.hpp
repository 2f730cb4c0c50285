#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace epigraph {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct Size {
  int w = 0;
  int h = 0;
  bool operator==(const Size&) const = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool intersects(const Rect& o) const {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
  }
  bool contains(const Rect& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }
  bool operator==(const Rect&) const = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

class RgbImage {
 public:
  RgbImage(int width, int height, Rgb fill = {});
  RgbImage(int width, int height, std::vector<Rgb> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
  const std::vector<Rgb>& pixels() const { return pixels_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

class GrayImage {
 public:
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// Grid of gray-level indices in [0, levels).
class QuantizedImage {
 public:
  QuantizedImage(int width, int height, int levels, std::uint8_t fill = 0);
  QuantizedImage(int width, int height, int levels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int levels() const { return levels_; }
  Rect bounds() const { return {0, 0, width_, height_}; }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, std::uint8_t level);
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  bool operator==(const QuantizedImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_;
  int height_;
  int levels_;
  std::vector<std::uint8_t> pixels_;
};

/// Value snapshot of a rectangular region of a QuantizedImage.
struct Kernel {
  std::string id;
  Point origin;
  Size size;
  int levels = 0;
  std::vector<std::uint8_t> pixels;  // row-major, size.w * size.h

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * size.w + x];
  }
  Rect rect() const { return {origin.x, origin.y, size.w, size.h}; }
};

/// "x{origin_x}y{origin_y}w{w}h{h}"
std::string kernel_id(Point origin, Size size);

/// BT.601 luma, rounded and clamped.
GrayImage to_grayscale(const RgbImage& img);

/// level = floor(intensity * levels / 256). Throws ConfigError unless 2 <= levels <= 256.
QuantizedImage quantize(const GrayImage& img, int levels);

/// Gray intensity that quantizes back to `level` exactly; used when writing
/// quantized images to 8-bit rasters.
std::uint8_t level_to_intensity(int level, int levels);
GrayImage dequantize(const QuantizedImage& img);

Kernel extract_kernel(const QuantizedImage& img, const Rect& r);

/// Origins of a regular lattice of `size` windows moved by `stride`, row-major.
std::vector<Point> window_origins(int width, int height, Size size, Size stride);

std::vector<Kernel> tile_kernels(const QuantizedImage& img, Size size, Size stride);

// Raster I/O. PNG encoder settings are fixed so identical inputs give identical bytes.
RgbImage load_rgb(const std::filesystem::path& path);
QuantizedImage load_quantized(const std::filesystem::path& path, int levels);
void save_png(const GrayImage& img, const std::filesystem::path& path);
void save_png(const QuantizedImage& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const QuantizedImage& img);

// ---------------------------------------------------------------------------
// Synthetic epigraph generator

struct SynthConfig {
  int width = 320;
  int height = 240;
  int levels = 16;
  int glyph_count = 10;
  int glyph_min = 18;        // glyph box side range, pixels
  int glyph_max = 24;
  int glyph_gap = 8;         // minimum white space between glyph boxes
  double stroke_width = 4.0;
  int ink_intensity = 40;
  int background_intensity = 205;
  int background_amplitude = 30;  // smooth shading amplitude
  int background_scale = 12;      // shading lattice spacing, pixels
  // Noise is rendered as speckle blobs inside tile-aligned patches.
  int noise_tile = 20;
  double noise_density = 0.25;  // fraction of glyph-free tiles that become noise
  int speckle_radius = 0;       // 0 = single pixel
  double speckle_coverage = 0.6;  // fraction of patch pixels seeded with a blob
  int speckle_min_intensity = 0;
  int speckle_max_intensity = 255;
};

struct SyntheticGroundTruth {
  std::set<std::string> noise_kernel_ids;
  std::vector<Rect> noise_tiles;
  std::vector<Rect> glyph_boxes;
};

struct SyntheticImage {
  QuantizedImage image;
  SyntheticGroundTruth truth;
};

/// Deterministic for fixed (cfg, seed). Throws ConfigError when the glyphs do not fit.
SyntheticImage render_synthetic(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace epigraph
