#include "epigraph/glcm.hpp"

#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "epigraph/error.hpp"

namespace epigraph {

std::int64_t CountMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

CountMatrix cooccurrence(const Kernel& k, Offset off, bool symmetric) {
  CountMatrix m;
  m.levels = k.levels;
  m.counts.assign(static_cast<std::size_t>(k.levels) * k.levels, 0);
  const int L = k.levels;
  for (int y = 0; y < k.size.h; ++y) {
    const int y2 = y + off.dy;
    if (y2 < 0 || y2 >= k.size.h) continue;
    for (int x = 0; x < k.size.w; ++x) {
      const int x2 = x + off.dx;
      if (x2 < 0 || x2 >= k.size.w) continue;
      const int i = k.at(x, y), j = k.at(x2, y2);
      if (i >= L || j >= L) {
        throw ShapeError(fmt::format("kernel {} holds level {} outside [0, {})", k.id,
                                     std::max(i, j), L));
      }
      ++m.counts[static_cast<std::size_t>(i) * L + j];
      if (symmetric) ++m.counts[static_cast<std::size_t>(j) * L + i];
    }
  }
  return m;
}

Glcm normalize_glcm(const CountMatrix& counts) {
  const std::int64_t total = counts.total();
  if (total <= 0) {
    throw NumericError("empty GLCM: the offset admits no pixel pair inside the kernel");
  }
  const int L = counts.levels;
  Glcm g;
  g.levels = L;
  g.pair_count = total;
  g.p.resize(L, L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) g.p(i, j) = static_cast<double>(counts.at(i, j)) / total;
  }
  g.px = g.p.rowwise().sum();
  g.py = g.p.colwise().sum().transpose();
  return g;
}

Glcm glcm_from_probabilities(const Eigen::MatrixXd& p) {
  if (p.rows() != p.cols() || p.rows() < 1) throw ShapeError("GLCM must be square and non-empty");
  Glcm g;
  g.levels = static_cast<int>(p.rows());
  g.p = p;
  g.px = p.rowwise().sum();
  g.py = p.colwise().sum().transpose();
  return g;
}

std::array<Glcm, 4> four_direction_glcms(const Kernel& k, bool symmetric) {
  std::array<Glcm, 4> out;
  for (std::size_t d = 0; d < kCanonicalOffsets.size(); ++d) {
    out[d] = normalize_glcm(cooccurrence(k, kCanonicalOffsets[d], symmetric));
  }
  return out;
}

void write_glcm_csv(std::ostream& out, const Glcm& g) {
  out << "levels,pair_count\n" << g.levels << ',' << g.pair_count << '\n';
  for (int i = 0; i < g.levels; ++i) {
    for (int j = 0; j < g.levels; ++j) {
      if (j) out << ',';
      out << fmt::format("{:.17g}", g.p(i, j));
    }
    out << '\n';
  }
}

}  // namespace epigraph
