// SPDX-License-Identifier: Apache-2.0

#include "apl/train/adam.hpp"

#include <cmath>

#include "apl/common/error.hpp"

namespace apl::train {

template <typename T>
void adam_step(const std::vector<TensorRef<T>>& params, AdamState& state, double lr) {
  if (!(lr > 0.0)) fail(ErrorCode::kConfig, "adam: learning rate must be positive");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor->size(), 0.0);
      state.v.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) fail(ErrorCode::kShape, "adam: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor<T>& t = *params[i].tensor;
    if (state.m[i].size() != t.size()) fail(ErrorCode::kShape, "adam: `" + params[i].name + "` changed size");
    if (!t.has_grad()) continue;
    for (T g : t.grad) {
      if (!std::isfinite(g)) fail(ErrorCode::kNumeric, "adam: non-finite gradient in `" + params[i].name + "`");
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& t = *params[i].tensor;
    if (!t.has_grad()) continue;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double g = t.grad[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      t.data[j] = static_cast<T>(t.data[j] - lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
  }
}

template void adam_step<float>(const std::vector<TensorRef<float>>&, AdamState&, double);
template void adam_step<double>(const std::vector<TensorRef<double>>&, AdamState&, double);

}  // namespace apl::train
