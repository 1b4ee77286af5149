// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apl/tensor/layers.hpp"

namespace apl {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  /// 0 checks every coordinate; otherwise at most this many randomly chosen
  /// coordinates per tensor.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

/// Scalar objective over a set of tensors. `evaluate` recomputes the scalar
/// at the tensors' current values; `compute_gradients` zeroes and fills the
/// grad slot of every tensor in `tensors`.
struct GradCheckTarget {
  std::function<double()> evaluate;
  std::function<void()> compute_gradients;
  std::vector<TensorRef<double>> tensors;
};

/// |a - n| / max(|a|, |n|, 1): relative for large gradients, absolute for
/// gradients below one.
double gradient_error(double analytic, double numeric);

/// Compares analytic gradients with central finite differences. Fails with
/// kCheckInvalid when two evaluations at the same point disagree.
GradCheckReport grad_check(GradCheckTarget& target, const GradCheckOptions& options = {});

/// Checks a single layer on a random input of `input_shape` with the
/// objective sum(r * layer(x)) for a fixed random projection r. Covers the
/// input and every trainable parameter.
GradCheckReport grad_check_layer(Layer<double>& layer, const std::vector<std::size_t>& input_shape, Mode mode,
                                 const GradCheckOptions& options = {});

}  // namespace apl
