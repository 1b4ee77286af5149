// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "apl/tensor/tensor.hpp"

namespace apl::train {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update of every tensor in `params` from its grad
/// slot. Refuses the whole step (kNumeric, nothing modified) when any
/// gradient is non-finite. Moments are allocated on first use.
template <typename T>
void adam_step(const std::vector<TensorRef<T>>& params, AdamState& state, double lr);

}  // namespace apl::train
