#pragma once

// Reference implementations used only by the tests. They are written from the
// textbook definitions with plain loops and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "epigraph/glcm.hpp"
#include "epigraph/imaging.hpp"
#include "epigraph/nn.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;

// Every ordered pixel pair (a, b) with b - a == (dy, dx) is enumerated by
// visiting all pairs of positions, without any bounds arithmetic.
inline std::vector<std::vector<std::int64_t>> glcm_counts(const epigraph::Kernel& k, int dy, int dx,
                                                          bool symmetric) {
  const int L = k.levels;
  std::vector<std::vector<std::int64_t>> c(L, std::vector<std::int64_t>(L, 0));
  const int w = k.size.w, h = k.size.h;
  for (int y1 = 0; y1 < h; ++y1)
    for (int x1 = 0; x1 < w; ++x1)
      for (int y2 = 0; y2 < h; ++y2)
        for (int x2 = 0; x2 < w; ++x2) {
          if (y2 - y1 != dy || x2 - x1 != dx) continue;
          const int a = k.pixels[y1 * w + x1], b = k.pixels[y2 * w + x2];
          c[a][b] += 1;
          if (symmetric) c[b][a] += 1;
        }
  return c;
}

struct Features {
  double f[14] = {};
};

inline double plogp(double v) { return v > 0 ? v * std::log2(v) : 0.0; }

// Haralick's definitions with base-2 logarithms and 0-based gray levels.
inline Features haralick(const Grid& p) {
  const int L = static_cast<int>(p.size());
  std::vector<double> px(L, 0), py(L, 0), psum(2 * L - 1, 0), pdiff(L, 0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      px[i] += p[i][j];
      py[j] += p[i][j];
      psum[i + j] += p[i][j];
      pdiff[i > j ? i - j : j - i] += p[i][j];
    }
  double mx = 0, my = 0;
  for (int i = 0; i < L; ++i) {
    mx += i * px[i];
    my += i * py[i];
  }
  double sx = 0, sy = 0;
  for (int i = 0; i < L; ++i) {
    sx += (i - mx) * (i - mx) * px[i];
    sy += (i - my) * (i - my) * py[i];
  }
  // Zero spread exactly when one level carries all the mass.
  int nx = 0, ny = 0;
  for (int i = 0; i < L; ++i) {
    nx += px[i] > 0;
    ny += py[i] > 0;
  }
  sx = nx > 1 ? std::sqrt(sx) : 0.0;
  sy = ny > 1 ? std::sqrt(sy) : 0.0;

  Features r;
  double cov = 0, hxy = 0, hxy1 = 0, hxy2 = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      r.f[0] += p[i][j] * p[i][j];
      r.f[1] += double(i - j) * (i - j) * p[i][j];
      cov += (i - mx) * (j - my) * p[i][j];
      r.f[3] += (i - mx) * (i - mx) * p[i][j];
      r.f[4] += p[i][j] / (1.0 + double(i - j) * (i - j));
      hxy -= plogp(p[i][j]);
      if (p[i][j] > 0) hxy1 -= p[i][j] * std::log2(px[i] * py[j]);
      hxy2 -= plogp(px[i] * py[j]);
    }
  r.f[2] = (sx * sy > 0) ? cov / (sx * sy) : 0.0;
  for (int k = 0; k < 2 * L - 1; ++k) r.f[5] += k * psum[k];
  for (int k = 0; k < 2 * L - 1; ++k) {
    r.f[6] += (k - r.f[5]) * (k - r.f[5]) * psum[k];
    r.f[7] -= plogp(psum[k]);
  }
  r.f[8] = hxy;
  double md = 0;
  for (int k = 0; k < L; ++k) md += k * pdiff[k];
  for (int k = 0; k < L; ++k) {
    r.f[9] += (k - md) * (k - md) * pdiff[k];
    r.f[10] -= plogp(pdiff[k]);
  }
  double hx = 0, hy = 0;
  for (int i = 0; i < L; ++i) {
    hx -= plogp(px[i]);
    hy -= plogp(py[i]);
  }
  const double hm = std::max(nx > 1 ? hx : 0.0, ny > 1 ? hy : 0.0);
  r.f[11] = hm > 0 ? (hxy - hxy1) / hm : 0.0;
  const double gap = hxy2 - hxy < 1e-12 ? 0.0 : hxy2 - hxy;
  r.f[12] = std::sqrt(1.0 - std::exp(-2.0 * gap));
  return r;
}

inline Grid to_grid(const Eigen::MatrixXd& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

inline Eigen::MatrixXd to_matrix(const Grid& g) {
  Eigen::MatrixXd m(g.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) m(i, j) = g[i][j];
  return m;
}

// Random probability matrix with roughly `zero_fraction` empty cells.
inline Grid random_glcm(std::mt19937_64& rng, int L, double zero_fraction, bool symmetric) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid g(L, std::vector<double>(L, 0));
  double total = 0;
  for (int i = 0; i < L; ++i)
    for (int j = symmetric ? i : 0; j < L; ++j) {
      const double v = u(rng) < zero_fraction ? 0.0 : u(rng);
      g[i][j] = v;
      if (symmetric) g[j][i] = v;
    }
  for (auto& row : g)
    for (double v : row) total += v;
  if (total == 0) {
    g[0][0] = 1;
    total = 1;
  }
  for (auto& row : g)
    for (double& v : row) v /= total;
  return g;
}

inline epigraph::Kernel random_kernel(std::mt19937_64& rng, int w, int h, int levels) {
  std::uniform_int_distribution<int> lv(0, levels - 1);
  epigraph::Kernel k;
  k.id = "k";
  k.size = {w, h};
  k.levels = levels;
  k.pixels.resize(static_cast<std::size_t>(w) * h);
  for (auto& v : k.pixels) v = static_cast<std::uint8_t>(lv(rng));
  return k;
}

// Binary cross-entropy of one sample, evaluated in extended precision.
inline long double loss(const epigraph::nn::Network& net, const Eigen::VectorXd& x, double target) {
  std::vector<long double> a(x.data(), x.data() + x.size());
  const std::size_t layers = net.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& W = net.weights[l];
    std::vector<long double> z(W.rows());
    for (int r = 0; r < W.rows(); ++r) {
      long double s = net.biases[l](r);
      for (int c = 0; c < W.cols(); ++c) s += static_cast<long double>(W(r, c)) * a[c];
      z[r] = s;
    }
    if (l + 1 < layers) {
      for (auto& v : z) v = v > 0 ? v : 0;
      a = z;
    } else {
      const long double s = 1.0L / (1.0L + std::exp(-z[0]));
      return -(target * std::log(s) + (1 - target) * std::log(1 - s));
    }
  }
  return 0;
}

// 4-connected components of pixels whose level is <= max_level.
inline std::vector<std::vector<epigraph::Point>> components(const epigraph::QuantizedImage& img, int max_level) {
  const int w = img.width(), h = img.height();
  std::vector<int> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::vector<epigraph::Point>> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (seen[y * w + x] || img.at(x, y) > max_level) continue;
      std::vector<epigraph::Point> comp, stack{{x, y}};
      seen[y * w + x] = 1;
      while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        const int nx[] = {p.x + 1, p.x - 1, p.x, p.x}, ny[] = {p.y, p.y, p.y + 1, p.y - 1};
        for (int d = 0; d < 4; ++d) {
          if (nx[d] < 0 || ny[d] < 0 || nx[d] >= w || ny[d] >= h) continue;
          if (seen[ny[d] * w + nx[d]] || img.at(nx[d], ny[d]) > max_level) continue;
          seen[ny[d] * w + nx[d]] = 1;
          stack.push_back({nx[d], ny[d]});
        }
      }
      out.push_back(std::move(comp));
    }
  return out;
}

}  // namespace oracle
