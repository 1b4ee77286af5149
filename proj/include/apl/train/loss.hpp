// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "apl/tensor/tensor.hpp"

namespace apl::train {

/// exp(s_i) / sum_j exp(s_j), evaluated after subtracting max(s).
std::vector<double> softmax(std::span<const double> scores);

/// -log softmax(scores)[target] in log-sum-exp form.
double cross_entropy(std::span<const double> scores, std::size_t target);

struct JointLossValue {
  double total = 0.0;
  double activity_part = 0.0;
  double location_part = 0.0;
  double lambda = 1.0;
};

template <typename T>
struct JointLossResult {
  JointLossValue value;
  Tensor<T> grad_activity;  // d total / d activity scores
  Tensor<T> grad_location;
};

/// total = mean_b CE(act_b) + lambda * mean_b CE(loc_b), with the gradients
/// of total with respect to both score tensors.
template <typename T>
JointLossResult<T> joint_loss(const Tensor<T>& activity_scores, const Tensor<T>& location_scores,
                              std::span<const int> activity_labels, std::span<const int> location_labels,
                              double lambda = 1.0);

/// Row-wise argmax of a [B, K] score tensor (first maximum wins).
template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& scores);

}  // namespace apl::train
