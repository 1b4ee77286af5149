// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "apl/baselines/svm.hpp"
#include "apl/common/error.hpp"
#include "apl/common/random.hpp"

namespace apl::baselines {
namespace {

FeatureMatrix matrix(std::size_t cols, std::vector<float> values) {
  FeatureMatrix m;
  m.cols = cols;
  m.rows = values.size() / cols;
  m.values = std::move(values);
  return m;
}

// Decision value of one pairwise problem at training row `r` of that problem.
double decision(const SvmModel& model, const PairwiseModel& pair, std::size_t r) {
  double s = 0.0;
  const auto xr = model.training.row(pair.members[r]);
  for (std::size_t i = 0; i < pair.members.size(); ++i) {
    const auto xi = model.training.row(pair.members[i]);
    double d = 0.0;
    for (std::size_t k = 0; k < xr.size(); ++k) {
      const double diff = static_cast<double>(xr[k]) - xi[k];
      d += diff * diff;
    }
    s += pair.solution.alpha[i] * pair.solution.y[i] * std::exp(-model.gamma * d);
  }
  return s - pair.solution.rho;
}

FeatureMatrix three_class_toy(std::vector<int>& labels, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.cols = 4;
  const double centres[3][4] = {{0, 0, 0, 0}, {1.5, 1.5, 0, 0}, {0, 1.5, 1.5, 0}};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 12; ++i) {
      for (int k = 0; k < 4; ++k) m.values.push_back(static_cast<float>(centres[c][k] + 0.8 * rng.normal()));
      labels.push_back(c);
      ++m.rows;
    }
  }
  return m;
}

TEST(Svm, TwoPointsSeparable) {
  const auto x = matrix(2, {0, 0, 3, 3});
  const std::vector<int> y = {0, 1};
  SvmConfig cfg;
  cfg.gamma = 0.5;
  const auto model = svm_train(x, y, cfg);
  EXPECT_EQ(svm_predict(model, x), y);
  const auto& pair = model.pairs.at(0);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_GE(pair.solution.y[r] * decision(model, pair, r), 1.0 - cfg.tolerance - 1e-9);
  }
}

TEST(Svm, XorPattern) {
  const auto x = matrix(2, {0, 0, 1, 1, 0, 1, 1, 0});
  const std::vector<int> y = {0, 0, 1, 1};
  SvmConfig cfg;
  cfg.gamma = 1.0;
  cfg.C = 10.0;
  const auto model = svm_train(x, y, cfg);
  EXPECT_EQ(svm_predict(model, x), y);
  // Dual objective must beat the trivial alpha = 0 point.
  const auto& pair = model.pairs.at(0);
  const auto k = rbf_kernel_matrix(x, x, 1.0);
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    lin += pair.solution.alpha[i];
    for (std::size_t j = 0; j < 4; ++j) {
      quad += pair.solution.alpha[i] * pair.solution.alpha[j] * pair.solution.y[i] * pair.solution.y[j] * k[i * 4 + j];
    }
  }
  EXPECT_LT(0.5 * quad - lin, 0.0);
}

TEST(Svm, DuplicateOfTrainingPoint) {
  std::vector<int> labels;
  const auto x = three_class_toy(labels, 7);
  SvmConfig cfg;
  cfg.C = 100.0;
  cfg.gamma = 2.0;
  const auto model = svm_train(x, labels, cfg);
  for (std::size_t r = 0; r < x.rows; ++r) EXPECT_EQ(svm_predict(model, x.row(r)), labels[r]);
}

TEST(Svm, KktConditionsOnEveryPair) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<int> labels;
    const auto x = three_class_toy(labels, seed);
    SvmConfig cfg;
    cfg.C = 1.0;
    const auto model = svm_train(x, labels, cfg);
    ASSERT_EQ(model.pairs.size(), 3U);
    for (const auto& pair : model.pairs) {
      const auto& sol = pair.solution;
      EXPECT_TRUE(sol.converged);
      double eq = 0.0;
      for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        EXPECT_GE(sol.alpha[i], 0.0);
        EXPECT_LE(sol.alpha[i], cfg.C);
        eq += sol.alpha[i] * sol.y[i];
        const double margin = sol.y[i] * decision(model, pair, i);
        if (sol.alpha[i] <= 0.0) {
          EXPECT_GE(margin, 1.0 - cfg.tolerance);
        } else if (sol.alpha[i] >= cfg.C) {
          EXPECT_LE(margin, 1.0 + cfg.tolerance);
        } else {
          EXPECT_NEAR(margin, 1.0, cfg.tolerance);
        }
      }
      EXPECT_LT(std::abs(eq), cfg.tolerance);
    }
  }
}

TEST(Svm, VoteTieGoesToLowerLabel) {
  // Hand-built model whose three pairwise decisions are constants, giving
  // classes 0, 2 and 1 one vote each.
  SvmModel model;
  model.gamma = 1.0;
  model.C = 1.0;
  model.training = matrix(1, {0.0F});
  model.classes = {0, 1, 2};
  auto pair = [](int pos, int neg, double rho) {
    PairwiseModel p;
    p.positive_class = pos;
    p.negative_class = neg;
    p.members = {0};
    p.solution.alpha = {0.0};
    p.solution.y = {1};
    p.solution.rho = rho;
    return p;
  };
  model.pairs = {pair(0, 1, -1.0), pair(0, 2, 1.0), pair(1, 2, -1.0)};
  const std::vector<float> q = {0.5F};
  EXPECT_EQ(svm_predict(model, q), 0);
  model.pairs[0].solution.rho = 1.0;  // 0-vs-1 now votes for 1: class 1 wins outright
  EXPECT_EQ(svm_predict(model, q), 1);
}

TEST(Svm, SingleClassIsTrainingError) {
  const auto x = matrix(2, {0, 0, 1, 1, 2, 2});
  const std::vector<int> y = {3, 3, 3};
  try {
    svm_train(x, y, SvmConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTraining);
  }
}

TEST(Svm, DefaultGamma) {
  const auto x = matrix(2, {0, 0, 2, 2});
  // mean 1, variance 1 over all four values, D = 2
  EXPECT_DOUBLE_EQ(default_gamma(x), 0.5);
}

TEST(Svm, KernelMatrix) {
  const auto a = matrix(2, {0, 0, 1, 1});
  const auto k = rbf_kernel_matrix(a, a, 0.5);
  EXPECT_DOUBLE_EQ(k[0], 1.0);
  EXPECT_NEAR(k[1], std::exp(-1.0), 1e-12);
  EXPECT_EQ(k[1], k[2]);
}

}  // namespace
}  // namespace apl::baselines
