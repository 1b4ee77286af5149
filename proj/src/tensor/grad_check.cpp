// SPDX-License-Identifier: Apache-2.0

#include "apl/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "apl/common/random.hpp"

namespace apl {

double gradient_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1.0});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(GradCheckTarget& target, const GradCheckOptions& options) {
  const double base = target.evaluate();
  const double again = target.evaluate();
  if (base != again) {
    fail(ErrorCode::kCheckInvalid, "gradient check: objective is not deterministic");
  }
  target.compute_gradients();

  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  GradCheckReport report;
  for (auto& ref : target.tensors) {
    Tensor<double>& t = *ref.tensor;
    if (!t.has_grad()) fail(ErrorCode::kState, "gradient check: tensor `" + ref.name + "` has no gradient");
    std::vector<std::size_t> coords(t.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_tensor > 0 && coords.size() > options.max_coords_per_tensor) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(options.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const double saved = t.data[i];
      t.data[i] = saved + options.step;
      const double plus = target.evaluate();
      t.data[i] = saved - options.step;
      const double minus = target.evaluate();
      t.data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double analytic = t.grad[i];
      const double err = gradient_error(analytic, numeric);
      ++report.checked;
      if (err > report.max_rel_error || report.worst_tensor.empty()) {
        report.max_rel_error = err;
        report.worst_tensor = ref.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

GradCheckReport grad_check_layer(Layer<double>& layer, const std::vector<std::size_t>& input_shape, Mode mode,
                                 const GradCheckOptions& options) {
  Rng rng(options.seed);
  auto input = std::make_shared<Tensor<double>>(input_shape);
  for (auto& v : input->data) v = rng.normal();
  const Tensor<double> probe = layer.forward(*input, mode);
  auto projection = std::make_shared<Tensor<double>>(probe.shape);
  for (auto& v : projection->data) v = rng.normal();

  GradCheckTarget target;
  target.evaluate = [&layer, input, projection, mode] {
    const Tensor<double> y = layer.forward(*input, mode);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * projection->data[i];
    return s;
  };
  target.tensors.push_back({"input", input.get(), true});
  for (auto& ref : layer.tensors()) {
    if (ref.trainable) target.tensors.push_back(ref);
  }
  target.compute_gradients = [&layer, input, projection, mode, &target] {
    for (auto& ref : target.tensors) ref.tensor->zero_grad();
    layer.forward(*input, mode);
    Tensor<double> dx = layer.backward(*projection);
    input->grad = dx.data;
  };
  return grad_check(target, options);
}

}  // namespace apl
