#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epigraph/glcm.hpp"

namespace epigraph {

/// Haralick's 14 texture statistics of one GLCM, in the classic order f1..f14.
struct HaralickVector {
  double angular_second_moment = 0;      // f1
  double contrast = 0;                   // f2
  double correlation = 0;                // f3
  double variance = 0;                   // f4
  double inverse_difference_moment = 0;  // f5
  double sum_average = 0;                // f6
  double sum_variance = 0;               // f7
  double sum_entropy = 0;                // f8
  double entropy = 0;                    // f9
  double difference_variance = 0;        // f10
  double difference_entropy = 0;         // f11
  double info_correlation_1 = 0;         // f12
  double info_correlation_2 = 0;         // f13
  double maximal_correlation = 0;        // f14

  std::array<double, 14> values() const;
  static HaralickVector from_values(const std::array<double, 14>& v);
};

enum class MccMode {
  Eigenvalue,  // sqrt of the second-largest eigenvalue of Q
  Literal,     // sqrt of the second-largest entry of Q (compatibility)
};

struct HaralickOptions {
  double log_base = 2.0;
  MccMode mcc_mode = MccMode::Eigenvalue;
};

/// Q over the levels whose row marginal is non-zero.
struct QMatrix {
  Eigen::MatrixXd q;
  std::vector<int> levels;  // compact index -> original gray level
};

QMatrix q_matrix(const Glcm& g);

/// Maximal correlation coefficient in [0, 1]. A single surviving level gives 0.
double mcc(const Glcm& g, MccMode mode = MccMode::Eigenvalue);

HaralickVector features(const Glcm& g, const HaralickOptions& opts = {});

/// Component-wise mean of the four canonical directions.
HaralickVector kernel_features(const Kernel& k, const HaralickOptions& opts = {});

struct KernelFeatures {
  std::string kernel_id;
  HaralickVector values;
};

/// CSV "kernel_id,f1,...,f14" with 17 significant digits.
void write_features_csv(std::ostream& out, const std::vector<KernelFeatures>& rows);

}  // namespace epigraph
