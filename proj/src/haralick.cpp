#include "epigraph/haralick.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "epigraph/error.hpp"

namespace epigraph {

namespace {

// Q is row-stochastic, so its leading eigenvalue is 1. Eigenvalues below this
// magnitude are indistinguishable from zero at double precision.
constexpr double kEigenFloor = 1e-12;
constexpr double kGapFloor = 1e-12;  // HXY2 - HXY
constexpr double kNegativeTolerance = 1e-9;

double xlogx(double x, double inv_log_base) {
  return x > 0 ? x * std::log(x) * inv_log_base : 0.0;
}

}  // namespace

std::array<double, 14> HaralickVector::values() const {
  return {angular_second_moment, contrast,     correlation,         variance,
          inverse_difference_moment, sum_average, sum_variance,     sum_entropy,
          entropy,               difference_variance, difference_entropy, info_correlation_1,
          info_correlation_2,    maximal_correlation};
}

HaralickVector HaralickVector::from_values(const std::array<double, 14>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12], v[13]};
}

QMatrix q_matrix(const Glcm& g) {
  QMatrix out;
  for (int i = 0; i < g.levels; ++i) {
    if (g.px(i) > 0) out.levels.push_back(i);
  }
  const int M = static_cast<int>(out.levels.size());
  out.q = Eigen::MatrixXd::Zero(M, M);
  for (int a = 0; a < M; ++a) {
    const int i = out.levels[a];
    for (int b = 0; b < M; ++b) {
      const int j = out.levels[b];
      double sum = 0;
      for (int k = 0; k < g.levels; ++k) {
        if (g.py(k) > 0) sum += g.p(i, k) * g.p(j, k) / (g.px(i) * g.py(k));
      }
      out.q(a, b) = sum;
    }
  }
  return out;
}

double mcc(const Glcm& g, MccMode mode) {
  const QMatrix qm = q_matrix(g);
  const Eigen::Index M = qm.q.rows();
  if (M < 2) return 0.0;

  double second = 0;
  if (mode == MccMode::Literal) {
    std::vector<double> entries(qm.q.data(), qm.q.data() + qm.q.size());
    std::nth_element(entries.begin(), entries.begin() + 1, entries.end(), std::greater<>());
    second = entries[1];
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(qm.q, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      std::ostringstream os;
      os << qm.q;
      throw NumericError("eigen-solver did not converge on Q =\n" + os.str());
    }
    std::vector<double> re(static_cast<std::size_t>(M));
    for (Eigen::Index i = 0; i < M; ++i) re[i] = solver.eigenvalues()(i).real();
    std::sort(re.begin(), re.end(), std::greater<>());
    second = re[1];
    if (second < -kNegativeTolerance) {
      std::ostringstream os;
      os << qm.q;
      throw NumericError(fmt::format("Q has a negative second eigenvalue {:.3e}:\n{}", second,
                                     os.str()));
    }
    if (std::abs(second) < kEigenFloor) second = 0;
  }
  return std::sqrt(std::clamp(second, 0.0, 1.0));
}

HaralickVector features(const Glcm& g, const HaralickOptions& opts) {
  if (opts.log_base <= 0 || opts.log_base == 1) throw ConfigError("log base must be > 0 and != 1");
  const int L = g.levels;
  const double inv_log = 1.0 / std::log(opts.log_base);
  const Eigen::MatrixXd& p = g.p;

  Eigen::VectorXd p_sum = Eigen::VectorXd::Zero(2 * L - 1);  // p_{x+y}(k), k = i + j
  Eigen::VectorXd p_diff = Eigen::VectorXd::Zero(L);         // p_{x-y}(k), k = |i - j|
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      p_sum(i + j) += p(i, j);
      p_diff(std::abs(i - j)) += p(i, j);
    }
  }

  double mu_x = 0, mu_y = 0;
  for (int i = 0; i < L; ++i) {
    mu_x += i * g.px(i);
    mu_y += i * g.py(i);
  }
  double var_x = 0, var_y = 0;
  for (int i = 0; i < L; ++i) {
    var_x += (i - mu_x) * (i - mu_x) * g.px(i);
    var_y += (i - mu_y) * (i - mu_y) * g.py(i);
  }

  HaralickVector f;
  double sum_ij = 0, hxy1 = 0, hxy2 = 0;
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      const double v = p(i, j);
      const double d = i - j;
      f.angular_second_moment += v * v;
      f.contrast += d * d * v;
      sum_ij += i * j * v;
      f.variance += (i - mu_x) * (i - mu_x) * v;
      f.inverse_difference_moment += v / (1.0 + d * d);
      f.entropy -= xlogx(v, inv_log);
      const double indep = g.px(i) * g.py(j);
      if (v > 0) hxy1 -= v * std::log(indep) * inv_log;
      hxy2 -= xlogx(indep, inv_log);
    }
  }

  // A marginal on a single level has zero spread; rounding in its mass must not say otherwise.
  auto single_level = [](const Eigen::VectorXd& m) { return (m.array() > 0).count() <= 1; };
  const bool flat_x = single_level(g.px), flat_y = single_level(g.py);
  const double sd = flat_x || flat_y ? 0.0 : std::sqrt(var_x * var_y);
  f.correlation = sd > 0 ? (sum_ij - mu_x * mu_y) / sd : 0.0;

  for (int k = 0; k < 2 * L - 1; ++k) f.sum_average += k * p_sum(k);
  for (int k = 0; k < 2 * L - 1; ++k) {
    f.sum_variance += (k - f.sum_average) * (k - f.sum_average) * p_sum(k);
    f.sum_entropy -= xlogx(p_sum(k), inv_log);
  }

  double mu_d = 0;
  for (int k = 0; k < L; ++k) mu_d += k * p_diff(k);
  for (int k = 0; k < L; ++k) {
    f.difference_variance += (k - mu_d) * (k - mu_d) * p_diff(k);
    f.difference_entropy -= xlogx(p_diff(k), inv_log);
  }

  double hx = 0, hy = 0;
  for (int i = 0; i < L; ++i) {
    hx -= xlogx(g.px(i), inv_log);
    hy -= xlogx(g.py(i), inv_log);
  }
  const double hxy = f.entropy;
  const double hmax = std::max(flat_x ? 0.0 : hx, flat_y ? 0.0 : hy);
  f.info_correlation_1 = hmax > 0 ? (hxy - hxy1) / hmax : 0.0;
  // The square root turns rounding in HXY2 - HXY into ~1e-8; gaps below the floor are zero.
  const double gap = hxy2 - hxy < kGapFloor ? 0.0 : hxy2 - hxy;
  f.info_correlation_2 = std::sqrt(1.0 - std::exp(-2.0 * gap));
  f.maximal_correlation = mcc(g, opts.mcc_mode);
  return f;
}

HaralickVector kernel_features(const Kernel& k, const HaralickOptions& opts) {
  std::array<double, 14> mean{};
  for (const Glcm& g : four_direction_glcms(k)) {
    const auto v = features(g, opts).values();
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (double& v : mean) v /= 4.0;
  return HaralickVector::from_values(mean);
}

void write_features_csv(std::ostream& out, const std::vector<KernelFeatures>& rows) {
  out << "kernel_id";
  for (int i = 1; i <= 14; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& row : rows) {
    out << row.kernel_id;
    for (double v : row.values.values()) out << fmt::format(",{:.17g}", v);
    out << '\n';
  }
}

}  // namespace epigraph
