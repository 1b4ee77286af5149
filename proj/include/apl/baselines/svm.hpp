// SPDX-License-Identifier: Apache-2.0

// RBF-kernel support vector machine, one-vs-one, each binary problem solved
// by sequential minimal optimization with maximal-violating-pair selection.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apl::baselines {

struct SvmConfig {
  double C = 1.0;
  /// Unset: 1 / (D * variance of all training feature values).
  std::optional<double> gamma;
  double tolerance = 1e-3;
  /// Iteration cap per binary problem is max_passes * problem size.
  int max_passes = 100;

  std::string describe() const;
};

/// Row-major samples x features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values).subspan(r * cols, cols);
  }
};

struct BinarySmoResult {
  std::vector<double> alpha;
  std::vector<int> y;  // +1 / -1
  double rho = 0.0;    // decision(x) = sum_i alpha_i y_i K(x_i, x) - rho
  std::size_t iterations = 0;
  bool converged = false;
};

/// Solves min 1/2 a'Qa - e'a s.t. 0 <= a <= C, y'a = 0 with Q_ij = y_i y_j K_ij.
/// `kernel` is the row-major n x n Gram matrix.
BinarySmoResult solve_binary_smo(std::span<const double> kernel, std::span<const int> y, double C, double tolerance,
                                 std::size_t max_iterations);

struct PairwiseModel {
  int positive_class = 0;  // the lower label, y = +1
  int negative_class = 0;
  std::vector<std::size_t> members;  // training-row indices of this problem
  BinarySmoResult solution;
};

struct SvmModel {
  double gamma = 0.0;
  double C = 0.0;
  FeatureMatrix training;
  std::vector<int> classes;
  std::vector<PairwiseModel> pairs;
};

double default_gamma(const FeatureMatrix& features);

/// Throws kTraining for fewer than two samples or two classes.
SvmModel svm_train(const FeatureMatrix& features, std::span<const int> labels, const SvmConfig& config);

/// Pairwise-vote winner; vote ties go to the lower label.
int svm_predict(const SvmModel& model, std::span<const float> x);
std::vector<int> svm_predict(const SvmModel& model, const FeatureMatrix& samples);

/// Row-major exp(-gamma * |a_i - b_j|^2) for all pairs.
std::vector<double> rbf_kernel_matrix(const FeatureMatrix& a, const FeatureMatrix& b, double gamma);

}  // namespace apl::baselines
