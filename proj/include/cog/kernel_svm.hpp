#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cog {

using FeatureRow = std::vector<double>;

double rbf_kernel(const FeatureRow& a, const FeatureRow& b, double gamma);

struct KernelSVMModel {
  std::vector<FeatureRow> support;
  std::vector<double> coef;  // alpha_i * y_i, each within [-C, C]
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  int iterations = 0;
  bool converged = false;

  double decision(const FeatureRow& x) const;
  void write(std::ostream& out) const;
  static KernelSVMModel read(std::istream& in);
};

struct KernelSVMConfig {
  double C = 1.0;
  double gamma = 1.0;
  double tolerance = 1e-3;  // KKT violation m(alpha) - M(alpha)
  int max_iterations = 1000000;
};

// SMO with second-order working-pair selection; labels are +1 / -1.
KernelSVMModel train_rbf_svm(const std::vector<FeatureRow>& x, const std::vector<int>& y,
                             const KernelSVMConfig& config);

double median_squared_distance(const std::vector<FeatureRow>& x);

// Picks gamma from {2^-4 .. 2^4} / median squared distance by deterministic
// 3-fold cross-validated accuracy (first best in grid order).
double select_rbf_gamma(const std::vector<FeatureRow>& x, const std::vector<int>& y, double C);

}  // namespace cog
