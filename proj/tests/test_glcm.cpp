#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "epigraph/error.hpp"
#include "epigraph/glcm.hpp"
#include "oracles.hpp"

using namespace epigraph;

namespace {

Kernel make_kernel(int w, int h, int levels, std::vector<std::uint8_t> px) {
  Kernel k;
  k.id = kernel_id({0, 0}, {w, h});
  k.size = {w, h};
  k.levels = levels;
  k.pixels = std::move(px);
  return k;
}

}  // namespace

TEST_CASE("checkerboard horizontal counts") {
  const Kernel k = make_kernel(2, 2, 2, {0, 1, 1, 0});
  const CountMatrix c = cooccurrence(k, {0, 1});
  CHECK(c.at(0, 0) == 0);
  CHECK(c.at(0, 1) == 2);
  CHECK(c.at(1, 0) == 2);
  CHECK(c.at(1, 1) == 0);
}

TEST_CASE("constant kernel has a single populated cell") {
  const Kernel k = make_kernel(5, 4, 8, std::vector<std::uint8_t>(20, 3));
  for (Offset off : kCanonicalOffsets) {
    const CountMatrix c = cooccurrence(k, off);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) REQUIRE((c.at(i, j) != 0) == (i == 3 && j == 3));
  }
  const auto gs = four_direction_glcms(k);
  for (const Glcm& g : gs) {
    CHECK(g.p(3, 3) == 1.0);
    CHECK(g.p.sum() == 1.0);
  }
}

TEST_CASE("symmetric horizontal total is 2*H*(W-1)") {
  std::mt19937_64 rng(2);
  for (int w = 2; w <= 9; ++w)
    for (int h = 1; h <= 9; ++h) {
      const Kernel k = oracle::random_kernel(rng, w, h, 6);
      REQUIRE(cooccurrence(k, {0, 1}).total() == 2 * h * (w - 1));
    }
  const Kernel k20 = oracle::random_kernel(rng, 20, 20, 16);
  CHECK(four_direction_glcms(k20)[0].pair_count == 760);
}

TEST_CASE("normalization") {
  const Kernel k = make_kernel(2, 2, 2, {0, 1, 1, 0});
  const Glcm g = normalize_glcm(cooccurrence(k, {0, 1}));
  CHECK(g.p(0, 1) == 0.5);
  CHECK(g.p(1, 0) == 0.5);
  CHECK(g.p(0, 0) == 0.0);
  CHECK(g.px(0) == 0.5);
  CHECK(g.px(1) == 0.5);
  CHECK(g.py(0) == 0.5);
  CHECK(g.py(1) == 0.5);

  CountMatrix single{4, std::vector<std::int64_t>(16, 0)};
  single.counts[3 * 4 + 3] = 760;
  const Glcm s = normalize_glcm(single);
  CHECK(s.p(3, 3) == 1.0);
  CHECK(s.px(3) == 1.0);
  CHECK(s.py(3) == 1.0);
  CHECK(s.pair_count == 760);
}

TEST_CASE("checkerboard horizontal and vertical GLCMs are equal") {
  std::vector<std::uint8_t> px(36);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) px[y * 6 + x] = static_cast<std::uint8_t>((x + y) % 2);
  const auto gs = four_direction_glcms(make_kernel(6, 6, 2, px));
  CHECK(gs[0].p.isApprox(gs[2].p, 0));
  CHECK(gs[0].p(0, 1) == 0.5);
  CHECK(gs[0].p(1, 0) == 0.5);
}

TEST_CASE("kernels too small for an offset") {
  const Kernel k = make_kernel(1, 4, 4, {0, 1, 2, 3});
  CHECK(cooccurrence(k, {0, 1}).total() == 0);
  CHECK_THROWS_AS(normalize_glcm(cooccurrence(k, {0, 1})), NumericError);
  CHECK_THROWS_AS(four_direction_glcms(k), NumericError);
}

TEST_CASE("counts match the brute-force oracle on random kernels") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(2, 8), lv(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const Kernel k = oracle::random_kernel(rng, dim(rng), dim(rng), lv(rng));
    for (bool sym : {true, false})
      for (Offset off : kCanonicalOffsets) {
        const CountMatrix c = cooccurrence(k, off, sym);
        const auto ref = oracle::glcm_counts(k, off.dy, off.dx, sym);
        for (int i = 0; i < k.levels; ++i)
          for (int j = 0; j < k.levels; ++j) REQUIRE(c.at(i, j) == ref[i][j]);
      }
  }
}

TEST_CASE("normalized GLCM invariants") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const Kernel k = oracle::random_kernel(rng, 2 + trial % 19, 2 + trial % 13, 2 + trial % 15);
    for (bool sym : {true, false})
      for (Offset off : kCanonicalOffsets) {
        const Glcm g = normalize_glcm(cooccurrence(k, off, sym));
        REQUIRE(std::abs(g.p.sum() - 1.0) <= 1e-12);
        REQUIRE(g.p.minCoeff() >= 0.0);
        for (int i = 0; i < g.levels; ++i) {
          REQUIRE(std::abs(g.px(i) - g.p.row(i).sum()) <= 1e-12);
          REQUIRE(std::abs(g.py(i) - g.p.col(i).sum()) <= 1e-12);
        }
        if (sym) {
          REQUIRE(g.p == g.p.transpose());
          REQUIRE((g.px - g.py).cwiseAbs().maxCoeff() <= 1e-12);
        }
      }
  }
}

TEST_CASE("glcm csv dump") {
  const Glcm g = normalize_glcm(cooccurrence(make_kernel(2, 2, 2, {0, 1, 1, 0}), {0, 1}));
  std::ostringstream out;
  write_glcm_csv(out, g);
  CHECK(out.str().rfind("levels,pair_count\n2,4\n", 0) == 0);
}
