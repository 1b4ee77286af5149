// SPDX-License-Identifier: Apache-2.0

// Forward/backward implementations of the layers used by the 1-D residual
// network. Every layer caches what its backward needs during forward and
// accumulates parameter gradients into the `grad` slot of its tensors.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apl/common/random.hpp"
#include "apl/tensor/tensor.hpp"

namespace apl {

enum class Mode { kTrain, kEval };

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;

  /// Returns dL/dx and adds dL/dparams into the parameters' grad slots.
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

  /// Appends every owned tensor (parameters and buffers) under `prefix`.
  virtual void collect(const std::string& prefix, std::vector<TensorRef<T>>& out) {
    (void)prefix;
    (void)out;
  }

  /// Re-draws parameters from `rng` with the network's init convention.
  virtual void reset_parameters(Rng& rng) { (void)rng; }

  std::vector<TensorRef<T>> tensors(const std::string& prefix = "") {
    std::vector<TensorRef<T>> out;
    collect(prefix, out);
    return out;
  }
};

struct Conv1dOptions {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool bias = true;
};

/// Cross-correlation over the last axis of a [B, Cin, L] tensor with zero
/// padding: out[b,o,j] = bias[o] + sum_{c,t} w[o,c,t] * x[b,c,j*stride+t-pad].
template <typename T>
class Conv1d : public Layer<T> {
 public:
  explicit Conv1d(const Conv1dOptions& opts);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect(const std::string& prefix, std::vector<TensorRef<T>>& out) override;
  void reset_parameters(Rng& rng) override;

  std::size_t output_length(std::size_t input_length) const;
  const Conv1dOptions& options() const { return opts_; }
  std::size_t fan_in() const { return opts_.in_channels * opts_.kernel; }

  Tensor<T> weight;  // [out, in, k]
  Tensor<T> bias;    // [out], empty when disabled

 private:
  Conv1dOptions opts_;
  std::optional<Tensor<T>> saved_input_;
};

/// Batch normalization over (B, L) per channel of a [B, C, L] tensor.
template <typename T>
class BatchNorm1d : public Layer<T> {
 public:
  static constexpr double kDefaultEps = 1e-5;
  static constexpr double kDefaultMomentum = 0.1;

  explicit BatchNorm1d(std::size_t channels, double eps = kDefaultEps, double momentum = kDefaultMomentum);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect(const std::string& prefix, std::vector<TensorRef<T>>& out) override;
  void reset_parameters(Rng& rng) override;

  std::size_t channels() const { return gamma.size(); }

  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;

 private:
  double eps_;
  double momentum_;
  Mode saved_mode_ = Mode::kEval;
  bool has_saved_ = false;
  std::vector<std::size_t> saved_shape_;
  std::vector<T> xhat_;
  std::vector<T> inv_std_;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  std::optional<Tensor<T>> saved_output_;
};

/// Window max over the last axis; padded positions never win.
template <typename T>
class MaxPool1d : public Layer<T> {
 public:
  MaxPool1d(std::size_t kernel, std::size_t stride, std::size_t padding = 0);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

  std::size_t output_length(std::size_t input_length) const;

 private:
  std::size_t kernel_, stride_, padding_;
  std::vector<std::size_t> saved_input_shape_;
  std::vector<std::size_t> argmax_;  // flat input index per output element
};

/// Window mean over the last axis, no padding.
template <typename T>
class AvgPool1d : public Layer<T> {
 public:
  AvgPool1d(std::size_t kernel, std::size_t stride);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

  std::size_t output_length(std::size_t input_length) const;

 private:
  std::size_t kernel_, stride_;
  std::vector<std::size_t> saved_input_shape_;
};

/// y = x W^T + b for x of shape [B, in].
template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(std::size_t in_features, std::size_t out_features);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect(const std::string& prefix, std::vector<TensorRef<T>>& out) override;
  void reset_parameters(Rng& rng) override;

  Tensor<T> weight;  // [out, in]
  Tensor<T> bias;    // [out]

 private:
  std::optional<Tensor<T>> saved_input_;
};

/// Elementwise a + b for equal shapes.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Output length of a sliding window, floor((L + 2p - k) / s) + 1; shape error
/// when the window does not fit.
std::size_t window_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                 std::size_t padding, const char* op);

}  // namespace apl
