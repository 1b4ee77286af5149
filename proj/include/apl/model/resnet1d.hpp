// SPDX-License-Identifier: Apache-2.0

// Dual-head 1-D residual network. A shared trunk (stem conv, max pooling and
// four residual stages) feeds an activity head and a location head, each a
// conv/BN/ReLU stack followed by average pooling and a fully-connected layer.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "apl/tensor/layers.hpp"

namespace apl::model {

struct NetworkSpec {
  std::array<int, 4> block_counts{1, 1, 1, 1};
  double width_multiplier = 1.0;
  bool plus_variant = false;
  std::size_t num_activities = 6;
  std::size_t num_locations = 16;
  std::size_t input_channels = 52;
  std::size_t input_length = 192;
  std::uint64_t seed = 0;

  bool operator==(const NetworkSpec&) const = default;
};

/// Throws kConfig on non-positive block counts or a multiplier outside (0, 1].
void validate(const NetworkSpec& spec);

/// Reads/writes the key=value form: block_counts=1,1,1,1 width_multiplier=1
/// plus_variant=false seed=0. Unset keys keep their defaults.
NetworkSpec read_network_spec(const std::filesystem::path& path);
void write_network_spec(const std::filesystem::path& path, const NetworkSpec& spec);
std::string describe(const NetworkSpec& spec);

/// Channel widths after scaling: stem, stage 1..4 and head.
struct ChannelPlan {
  std::size_t stem = 0;
  std::array<std::size_t, 4> stages{};
  std::size_t head = 0;
};

ChannelPlan channel_plan(const NetworkSpec& spec);

/// ceil(base * multiplier), with a guard against 0.1-style representation error.
std::size_t scaled_width(std::size_t base, double multiplier);

struct ConvCount {
  std::size_t total = 0;
  std::size_t shared = 0;
  std::size_t activity_head = 0;
  std::size_t location_head = 0;
};

/// Residual block: ReLU(BN(conv3(ReLU(BN(conv3(x))))) + BN(conv1(x))).
template <typename T>
class ResidualBlock {
 public:
  ResidualBlock(std::size_t in_ch, std::size_t out_ch, std::size_t stride);

  Tensor<T> forward(const Tensor<T>& x, Mode mode);
  Tensor<T> backward(const Tensor<T>& grad_out);
  void collect(const std::string& prefix, std::vector<TensorRef<T>>& out);
  void reset_parameters(Rng& rng);

  Conv1d<T> conv1;
  BatchNorm1d<T> bn1;
  Relu<T> relu1;
  Conv1d<T> conv2;
  BatchNorm1d<T> bn2;
  Conv1d<T> shortcut_conv;
  BatchNorm1d<T> shortcut_bn;
  Relu<T> relu_out;
};

/// conv3 -> BN -> ReLU unit used in the heads.
template <typename T>
struct ConvBnRelu {
  ConvBnRelu(std::size_t in_ch, std::size_t out_ch);
  Conv1d<T> conv;
  BatchNorm1d<T> bn;
  Relu<T> relu;
};

template <typename T>
class Head {
 public:
  Head(std::size_t in_ch, std::size_t head_ch, std::size_t conv_layers, std::size_t trunk_length,
       std::size_t num_classes);

  /// Returns scores; `pre_fc` receives the flattened pooled features.
  Tensor<T> forward(const Tensor<T>& x, Mode mode, Tensor<T>* pre_fc = nullptr);
  Tensor<T> backward(const Tensor<T>& grad_scores);
  void collect(const std::string& prefix, std::vector<TensorRef<T>>& out);
  void reset_parameters(Rng& rng);

  std::size_t conv_layers() const { return units_.size(); }
  std::size_t pool_window() const { return pool_window_; }
  std::size_t features() const { return features_; }

 private:
  std::vector<std::unique_ptr<ConvBnRelu<T>>> units_;
  std::size_t pool_window_;
  AvgPool1d<T> pool_;
  std::vector<std::size_t> pooled_shape_;
  std::size_t features_;
  Linear<T> fc_;
};

/// Names accepted by forward taps / feature export.
inline const std::vector<std::string>& tap_names() {
  static const std::vector<std::string> names = {"input",  "post-maxpool",      "RB1",
                                                 "RB2",    "RB3",               "RB4",
                                                 "pre-FC-activity", "pre-FC-location",
                                                 "output-activity", "output-location"};
  return names;
}

/// Throws kConfig for names not in tap_names().
void validate_taps(const std::vector<std::string>& taps);

template <typename T>
struct NetworkOutput {
  Tensor<T> activity;  // [B, num_activities]
  Tensor<T> location;  // [B, num_locations]
  /// Temporal length after stem, maxpool, each stage, head conv and avgpool.
  std::vector<std::size_t> length_trace;
  std::map<std::string, Tensor<T>> taps;
};

template <typename T>
class ResNet1D {
 public:
  explicit ResNet1D(const NetworkSpec& spec);

  /// `taps` selects intermediate tensors to keep in the output.
  NetworkOutput<T> forward(const Tensor<T>& batch, Mode mode, const std::vector<std::string>& taps = {});

  /// Backpropagates score gradients of both heads; returns dL/dinput.
  Tensor<T> backward(const Tensor<T>& grad_activity, const Tensor<T>& grad_location);

  /// Every parameter and BN buffer with a stable dotted name.
  std::vector<TensorRef<T>> tensors();
  std::vector<TensorRef<T>> trainable();
  void zero_grad();

  /// Uniform(-a, a) weights with a = sqrt(1 / fan_in); BN gamma 1, beta 0,
  /// running mean 0, running var 1.
  void init_params(std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  ConvCount conv_count() const;
  std::vector<std::size_t> expected_length_trace() const;

  Conv1d<T>& stem_conv() { return stem_conv_; }
  std::vector<std::vector<std::unique_ptr<ResidualBlock<T>>>>& stages() { return stages_; }

 private:
  NetworkSpec spec_;
  ChannelPlan plan_;
  Conv1d<T> stem_conv_;
  BatchNorm1d<T> stem_bn_;
  Relu<T> stem_relu_;
  MaxPool1d<T> maxpool_;
  std::vector<std::vector<std::unique_ptr<ResidualBlock<T>>>> stages_;
  std::unique_ptr<Head<T>> activity_head_;
  std::unique_ptr<Head<T>> location_head_;
};

/// Trunk lengths implied by the declared strides and padding.
std::vector<std::size_t> length_trace(const NetworkSpec& spec);

/// One row per sample: each tap tensor flattened to [B, features].
template <typename T>
std::map<std::string, Tensor<T>> export_features(ResNet1D<T>& net, const Tensor<T>& batch,
                                                 const std::vector<std::string>& taps);

/// Copies parameters and buffers between networks of equal spec.
template <typename From, typename To>
void copy_parameters(ResNet1D<From>& from, ResNet1D<To>& to);

}  // namespace apl::model
