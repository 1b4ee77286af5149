// SPDX-License-Identifier: Apache-2.0

#include "apl/baselines/svm.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"

namespace apl::baselines {
namespace {

using RowMatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatD to_eigen(const FeatureMatrix& f) {
  RowMatD m(static_cast<Eigen::Index>(f.rows), static_cast<Eigen::Index>(f.cols));
  for (std::size_t i = 0; i < f.values.size(); ++i) m.data()[i] = f.values[i];
  return m;
}

constexpr double kTau = 1e-12;

}  // namespace

std::string SvmConfig::describe() const {
  return "C=" + io::format_double(C) + ";gamma=" + (gamma ? io::format_double(*gamma) : std::string("auto")) +
         ";tol=" + io::format_double(tolerance) + ";ovo";
}

std::vector<double> rbf_kernel_matrix(const FeatureMatrix& a, const FeatureMatrix& b, double gamma) {
  if (a.cols != b.cols) fail(ErrorCode::kShape, "rbf kernel: feature dimensions differ");
  const RowMatD ea = to_eigen(a);
  const RowMatD eb = to_eigen(b);
  const Eigen::VectorXd na = ea.rowwise().squaredNorm();
  const Eigen::VectorXd nb = eb.rowwise().squaredNorm();
  RowMatD k = ea * eb.transpose();
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      const double sq = std::max(0.0, na[i] + nb[j] - 2.0 * k(i, j));
      k(i, j) = std::exp(-gamma * sq);
    }
  }
  return {k.data(), k.data() + k.size()};
}

BinarySmoResult solve_binary_smo(std::span<const double> kernel, std::span<const int> y, double C, double tolerance,
                                 std::size_t max_iterations) {
  const std::size_t n = y.size();
  if (kernel.size() != n * n) fail(ErrorCode::kShape, "smo: kernel size does not match labels");
  if (!(C > 0.0)) fail(ErrorCode::kConfig, "smo: C must be positive");
  BinarySmoResult r;
  r.y.assign(y.begin(), y.end());
  r.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e
  auto K = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && r.alpha[t] < C) || (y[t] == -1 && r.alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && r.alpha[t] > 0.0) || (y[t] == -1 && r.alpha[t] < C); };

  while (r.iterations < max_iterations) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    if (i == n || j == n || g_max - g_min < tolerance) {
      r.converged = true;
      break;
    }
    ++r.iterations;

    const double old_ai = r.alpha[i];
    const double old_aj = r.alpha[j];
    double& ai = r.alpha[i];
    double& aj = r.alpha[j];
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * y[i] * y[j] * K(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * y[i] * y[j] * K(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }
  }

  // rho from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (r.alpha[t] > 0.0 && r.alpha[t] < C) {
      free_sum += yg;
      ++free_count;
    } else if ((r.alpha[t] >= C && y[t] == -1) || (r.alpha[t] <= 0.0 && y[t] == 1)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  if (free_count > 0) {
    r.rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    r.rho = 0.5 * (ub + lb);
  } else {
    r.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  return r;
}

double default_gamma(const FeatureMatrix& features) {
  if (features.values.empty()) fail(ErrorCode::kTraining, "svm: no training features");
  double mean = 0.0;
  for (float v : features.values) mean += v;
  mean /= static_cast<double>(features.values.size());
  double var = 0.0;
  for (float v : features.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(features.values.size());
  const double d = static_cast<double>(features.cols);
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

SvmModel svm_train(const FeatureMatrix& features, std::span<const int> labels, const SvmConfig& config) {
  if (features.rows != labels.size()) fail(ErrorCode::kShape, "svm: feature rows and labels differ");
  if (features.values.size() != features.rows * features.cols) fail(ErrorCode::kShape, "svm: malformed features");
  if (!(config.C > 0.0)) fail(ErrorCode::kConfig, "svm: C must be positive");
  if (config.gamma && !(*config.gamma > 0.0)) fail(ErrorCode::kConfig, "svm: gamma must be positive");
  if (features.rows < 2) fail(ErrorCode::kTraining, "svm: need at least two training samples");
  const std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) fail(ErrorCode::kTraining, "svm: training data contains a single class");

  SvmModel model;
  model.gamma = config.gamma ? *config.gamma : default_gamma(features);
  model.C = config.C;
  model.training = features;
  model.classes.assign(classes.begin(), classes.end());
  const auto gram = rbf_kernel_matrix(features, features, model.gamma);
  const std::size_t n_all = features.rows;

  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      PairwiseModel pm;
      pm.positive_class = model.classes[a];
      pm.negative_class = model.classes[b];
      std::vector<int> y;
      for (std::size_t i = 0; i < n_all; ++i) {
        if (labels[i] == pm.positive_class || labels[i] == pm.negative_class) {
          pm.members.push_back(i);
          y.push_back(labels[i] == pm.positive_class ? 1 : -1);
        }
      }
      const std::size_t n = pm.members.size();
      std::vector<double> k(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) k[i * n + j] = gram[pm.members[i] * n_all + pm.members[j]];
      }
      const auto cap = static_cast<std::size_t>(std::max(1, config.max_passes)) * std::max<std::size_t>(n, 1);
      pm.solution = solve_binary_smo(k, y, config.C, config.tolerance, cap);
      model.pairs.push_back(std::move(pm));
    }
  }
  return model;
}

namespace {

int vote(const SvmModel& model, std::span<const double> kernel_row) {
  std::vector<int> votes(model.classes.size(), 0);
  auto index_of = [&](int label) {
    return static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), label) -
                                    model.classes.begin());
  };
  for (const auto& pm : model.pairs) {
    double f = -pm.solution.rho;
    for (std::size_t i = 0; i < pm.members.size(); ++i) {
      const double a = pm.solution.alpha[i];
      if (a != 0.0) f += a * pm.solution.y[i] * kernel_row[pm.members[i]];
    }
    ++votes[index_of(f >= 0.0 ? pm.positive_class : pm.negative_class)];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return model.classes[best];
}

}  // namespace

int svm_predict(const SvmModel& model, std::span<const float> x) {
  FeatureMatrix one{1, x.size(), std::vector<float>(x.begin(), x.end())};
  return svm_predict(model, one).front();
}

std::vector<int> svm_predict(const SvmModel& model, const FeatureMatrix& samples) {
  const auto k = rbf_kernel_matrix(samples, model.training, model.gamma);
  std::vector<int> out(samples.rows);
  const std::size_t n = model.training.rows;
  for (std::size_t r = 0; r < samples.rows; ++r) out[r] = vote(model, std::span<const double>(k).subspan(r * n, n));
  return out;
}

}  // namespace apl::baselines
