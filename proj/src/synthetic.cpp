#include "epigraph/synthetic.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "epigraph/error.hpp"

namespace epigraph::synthetic {

double glyph_coverage(const Rect& r, const SyntheticGroundTruth& truth) {
  long covered = 0;
  for (const Rect& b : truth.glyph_boxes) {
    const int w = std::min(r.right(), b.right()) - std::max(r.x, b.x);
    const int h = std::min(r.bottom(), b.bottom()) - std::max(r.y, b.y);
    if (w > 0 && h > 0) covered += static_cast<long>(w) * h;
  }
  return static_cast<double>(covered) / (static_cast<double>(r.w) * r.h);
}

std::vector<Observation> label_kernels(const SyntheticImage& synth, Size kernel, int count,
                                       std::uint64_t seed, const HaralickOptions& opts) {
  std::vector<Kernel> noise, glyph;
  for (Kernel& k : tile_kernels(synth.image, kernel, kernel)) {
    if (synth.truth.noise_kernel_ids.contains(k.id)) {
      noise.push_back(std::move(k));
    } else if (glyph_coverage(k.rect(), synth.truth) > 0) {
      glyph.push_back(std::move(k));
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(noise.begin(), noise.end(), rng);
  std::shuffle(glyph.begin(), glyph.end(), rng);

  const std::size_t half = static_cast<std::size_t>(count) / 2;
  const std::size_t n_noise = std::min(noise.size(), half);
  const std::size_t n_glyph = std::min(glyph.size(), static_cast<std::size_t>(count) - n_noise);

  std::vector<Observation> out;
  for (std::size_t i = 0; i < n_noise; ++i) {
    out.push_back({noise[i].id, kernel_features(noise[i], opts).maximal_correlation,
                   KernelClass::Noise});
  }
  for (std::size_t i = 0; i < n_glyph; ++i) {
    const KernelClass cls = glyph_coverage(glyph[i].rect(), synth.truth) >= 0.25
                                ? KernelClass::Text
                                : KernelClass::MostlyText;
    out.push_back({glyph[i].id, kernel_features(glyph[i], opts).maximal_correlation, cls});
  }
  return out;
}

SegmentDataset corpus(const SynthConfig& cfg, Size window, int images, std::uint64_t seed) {
  if (images < 1) throw ConfigError("corpus needs at least one image");
  if (window.w < cfg.glyph_max || window.h < cfg.glyph_max) {
    throw ConfigError(fmt::format("window {}x{} cannot hold glyphs of up to {} px", window.w,
                                  window.h, cfg.glyph_max));
  }
  SegmentDataset ds;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < images; ++k) {
    const SyntheticImage synth = render_synthetic(cfg, seed + static_cast<std::uint64_t>(k));
    const QuantizedImage& img = synth.image;
    auto add = [&](Rect r, SegmentLabel label) {
      Segment s = crop_segment(img, r);
      s.id = fmt::format("i{}_{}", k, s.id);
      s.label = label;
      ds.segments.push_back(std::move(s));
    };

    for (const Rect& box : synth.truth.glyph_boxes) {
      const int x_lo = std::max(0, box.right() - window.w), x_hi = std::min(box.x, img.width() - window.w);
      const int y_lo = std::max(0, box.bottom() - window.h), y_hi = std::min(box.y, img.height() - window.h);
      if (x_lo > x_hi || y_lo > y_hi) continue;
      const int x = std::uniform_int_distribution<int>(x_lo, x_hi)(rng);
      const int y = std::uniform_int_distribution<int>(y_lo, y_hi)(rng);
      add({x, y, window.w, window.h}, SegmentLabel::Valid);
    }

    // Invalid windows come from the same half-stride lattice the segmenter scans,
    // restricted to glyph-free positions; three per two glyphs.
    std::vector<Rect> candidates;
    for (const Segment& s : slide_windows(img, WindowConfig::with_half_stride(window))) {
      const Rect r = s.rect();
      const bool touches_glyph = std::any_of(synth.truth.glyph_boxes.begin(), synth.truth.glyph_boxes.end(),
                                             [&](const Rect& b) { return r.intersects(b); });
      if (!touches_glyph) candidates.push_back(r);
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const std::size_t wanted = std::min(candidates.size(), synth.truth.glyph_boxes.size() * 3 / 2);
    for (std::size_t i = 0; i < wanted; ++i) add(candidates[i], SegmentLabel::Invalid);
  }
  return ds;
}

}  // namespace epigraph::synthetic
