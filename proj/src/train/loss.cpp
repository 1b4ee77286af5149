// SPDX-License-Identifier: Apache-2.0

#include "apl/train/loss.hpp"

#include <algorithm>
#include <cmath>

#include "apl/common/error.hpp"

namespace apl::train {
namespace {

void require_finite(std::span<const double> scores, const char* op) {
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorCode::kNumeric, std::string(op) + ": non-finite score");
  }
}

// Batch-mean cross entropy of one head; grad receives scale * d(mean)/d(scores).
template <typename T>
double head_loss(const Tensor<T>& scores, std::span<const int> labels, double scale, Tensor<T>& grad) {
  const std::size_t batch = scores.dim(0);
  const std::size_t k = scores.dim(1);
  grad = Tensor<T>(scores.shape);
  double sum = 0.0;
  std::vector<double> row(k);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < k; ++i) row[i] = scores.data[b * k + i];
    const int t = labels[b];
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      fail(ErrorCode::kLabel, "label " + std::to_string(t) + " outside 0.." + std::to_string(k - 1));
    }
    sum += cross_entropy(row, static_cast<std::size_t>(t));
    const auto p = softmax(row);
    for (std::size_t i = 0; i < k; ++i) {
      const double g = p[i] - (i == static_cast<std::size_t>(t) ? 1.0 : 0.0);
      grad.data[b * k + i] = static_cast<T>(g * scale / static_cast<double>(batch));
    }
  }
  return sum / static_cast<double>(batch);
}

}  // namespace

std::vector<double> softmax(std::span<const double> scores) {
  require_finite(scores, "softmax");
  if (scores.empty()) fail(ErrorCode::kShape, "softmax: empty score vector");
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  return out;
}

double cross_entropy(std::span<const double> scores, std::size_t target) {
  require_finite(scores, "cross_entropy");
  if (target >= scores.size()) {
    fail(ErrorCode::kLabel, "cross_entropy: target " + std::to_string(target) + " outside 0.." +
                                std::to_string(scores.size() - 1));
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  return std::max(0.0, mx + std::log(z) - scores[target]);
}

template <typename T>
JointLossResult<T> joint_loss(const Tensor<T>& activity_scores, const Tensor<T>& location_scores,
                              std::span<const int> activity_labels, std::span<const int> location_labels,
                              double lambda) {
  require_rank(activity_scores, 2, "joint_loss");
  require_rank(location_scores, 2, "joint_loss");
  const std::size_t batch = activity_scores.dim(0);
  if (location_scores.dim(0) != batch || activity_labels.size() != batch || location_labels.size() != batch) {
    fail(ErrorCode::kShape, "joint_loss: batch sizes of scores and labels differ");
  }
  JointLossResult<T> r;
  r.value.lambda = lambda;
  r.value.activity_part = head_loss(activity_scores, activity_labels, 1.0, r.grad_activity);
  r.value.location_part = head_loss(location_scores, location_labels, lambda, r.grad_location);
  r.value.total = r.value.activity_part + lambda * r.value.location_part;
  return r;
}

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores) {
  require_rank(scores, 2, "argmax_rows");
  const std::size_t k = scores.dim(1);
  std::vector<int> out(scores.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    const auto first = scores.data.begin() + static_cast<std::ptrdiff_t>(b * k);
    out[b] = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(k)) - first);
  }
  return out;
}

template JointLossResult<float> joint_loss(const Tensor<float>&, const Tensor<float>&, std::span<const int>,
                                           std::span<const int>, double);
template JointLossResult<double> joint_loss(const Tensor<double>&, const Tensor<double>&, std::span<const int>,
                                            std::span<const int>, double);
template std::vector<int> argmax_rows(const Tensor<float>&);
template std::vector<int> argmax_rows(const Tensor<double>&);

}  // namespace apl::train
