#pragma once

#include <cstdint>
#include <vector>

#include "epigraph/denoise.hpp"
#include "epigraph/imaging.hpp"
#include "epigraph/segment.hpp"

// Stand-ins for the human operator when working on rendered images: labels are
// read off the generator's ground truth instead of being typed in.
namespace epigraph::synthetic {

/// Fraction of `r` covered by glyph boxes (boxes never overlap).
double glyph_coverage(const Rect& r, const SyntheticGroundTruth& truth);

/// Up to `count` labeled kernels, half from noise tiles (Noise) and half from
/// glyph-bearing tiles (Text, or MostlyText when glyphs cover < 25% of the tile).
std::vector<Observation> label_kernels(const SyntheticImage& synth, Size kernel, int count,
                                       std::uint64_t seed, const HaralickOptions& opts = {});

/// Labeled windows from `images` renders: one Valid window around every glyph,
/// and as many Invalid windows that touch no glyph (half of them over noise when
/// the image has any). Segment ids carry an "i{k}_" image prefix.
SegmentDataset corpus(const SynthConfig& cfg, Size window, int images, std::uint64_t seed);

}  // namespace epigraph::synthetic
