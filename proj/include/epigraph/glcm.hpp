#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "epigraph/imaging.hpp"

namespace epigraph {

/// Pixel displacement (dy, dx) between the two members of a co-occurring pair.
struct Offset {
  int dy = 0;
  int dx = 0;
  bool operator==(const Offset&) const = default;
};

/// 0, 45, 90 and 135 degrees at distance 1.
inline constexpr std::array<Offset, 4> kCanonicalOffsets = {
    Offset{0, 1}, Offset{-1, 1}, Offset{-1, 0}, Offset{-1, -1}};

/// Raw co-occurrence counts, row-major levels x levels.
struct CountMatrix {
  int levels = 0;
  std::vector<std::int64_t> counts;

  std::int64_t at(int i, int j) const {
    return counts[static_cast<std::size_t>(i) * levels + j];
  }
  std::int64_t total() const;
};

/// Normalized GLCM with marginals px (row sums) and py (column sums).
struct Glcm {
  int levels = 0;
  Eigen::MatrixXd p;
  Eigen::VectorXd px;
  Eigen::VectorXd py;
  std::int64_t pair_count = 0;
};

CountMatrix cooccurrence(const Kernel& k, Offset off, bool symmetric = true);

/// Throws NumericError("empty GLCM ...") when no pair was counted.
Glcm normalize_glcm(const CountMatrix& counts);

/// Wraps an already-normalized probability matrix; recomputes marginals.
Glcm glcm_from_probabilities(const Eigen::MatrixXd& p);

std::array<Glcm, 4> four_direction_glcms(const Kernel& k, bool symmetric = true);

/// Debug dump: header "levels,pair_count", the two values, then one row of p per line.
void write_glcm_csv(std::ostream& out, const Glcm& g);

}  // namespace epigraph
