// SPDX-License-Identifier: Apache-2.0

#include "apl/model/resnet1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "apl/common/error.hpp"
#include "apl/common/io.hpp"

namespace apl::model {
namespace {

constexpr std::size_t kStemBase = 128;
constexpr std::array<std::size_t, 4> kStageBase = {128, 256, 512, 512};
constexpr std::array<std::size_t, 4> kStageStride = {1, 2, 2, 2};
constexpr std::size_t kHeadBase = 512;
constexpr std::size_t kStemKernel = 7;
constexpr std::size_t kStemStride = 2;
constexpr std::size_t kStemPad = 3;
constexpr std::size_t kPoolKernel = 3;
constexpr std::size_t kPoolStride = 2;
constexpr std::size_t kPoolPad = 1;
constexpr std::size_t kHeadPool = 4;

Conv1dOptions conv3(std::size_t in, std::size_t out, std::size_t stride) {
  return {in, out, 3, stride, 1, false};
}

std::size_t conv3_length(std::size_t len, std::size_t stride) {
  return window_output_length(len, 3, stride, 1, "conv1d");
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::kConfig, "expected a boolean, got `" + v + "`");
}

template <typename T>
void keep_tap(const std::vector<std::string>& taps, const std::string& name, const Tensor<T>& t,
              std::map<std::string, Tensor<T>>& out) {
  if (std::find(taps.begin(), taps.end(), name) != taps.end()) out[name] = t;
}

}  // namespace

void validate(const NetworkSpec& spec) {
  for (int n : spec.block_counts) {
    if (n < 1) fail(ErrorCode::kConfig, "block counts must be at least 1");
  }
  if (!(spec.width_multiplier > 0.0 && spec.width_multiplier <= 1.0)) {
    fail(ErrorCode::kConfig, "width_multiplier must lie in (0, 1], got " + io::format_double(spec.width_multiplier));
  }
  if (spec.num_activities < 2 || spec.num_locations < 2) fail(ErrorCode::kConfig, "heads need at least 2 classes");
  if (spec.input_channels == 0 || spec.input_length == 0) fail(ErrorCode::kConfig, "input shape must be positive");
}

std::size_t scaled_width(std::size_t base, double multiplier) {
  const double w = static_cast<double>(base) * multiplier;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(w - 1e-9)));
}

ChannelPlan channel_plan(const NetworkSpec& spec) {
  ChannelPlan plan;
  plan.stem = scaled_width(kStemBase, spec.width_multiplier);
  for (std::size_t i = 0; i < 4; ++i) plan.stages[i] = scaled_width(kStageBase[i], spec.width_multiplier);
  plan.head = scaled_width(kHeadBase, spec.width_multiplier);
  return plan;
}

NetworkSpec read_network_spec(const std::filesystem::path& path) {
  NetworkSpec spec;
  for (const auto& [key, value] : io::read_key_values(path)) {
    if (key == "block_counts") {
      const auto parts = io::split(value, ',');
      if (parts.size() != 4) fail(ErrorCode::kConfig, "block_counts needs four comma-separated integers");
      for (std::size_t i = 0; i < 4; ++i) {
        spec.block_counts[i] = static_cast<int>(io::parse_int(io::trim(parts[i]), "block_counts"));
      }
    } else if (key == "width_multiplier") {
      spec.width_multiplier = io::parse_double(value, key);
    } else if (key == "plus_variant") {
      spec.plus_variant = parse_bool(value);
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(io::parse_int(value, key));
    } else if (key == "input_length") {
      spec.input_length = static_cast<std::size_t>(io::parse_int(value, key));
    } else {
      fail(ErrorCode::kConfig, "unknown network spec key `" + key + "`");
    }
  }
  validate(spec);
  return spec;
}

void write_network_spec(const std::filesystem::path& path, const NetworkSpec& spec) {
  std::ostringstream out;
  out << "block_counts=" << spec.block_counts[0] << ',' << spec.block_counts[1] << ',' << spec.block_counts[2]
      << ',' << spec.block_counts[3] << '\n'
      << "width_multiplier=" << io::format_double(spec.width_multiplier) << '\n'
      << "plus_variant=" << (spec.plus_variant ? "true" : "false") << '\n'
      << "seed=" << spec.seed << '\n';
  if (spec.input_length != 192) out << "input_length=" << spec.input_length << '\n';
  io::write_text(path, out.str());
}

std::string describe(const NetworkSpec& spec) {
  std::ostringstream out;
  out << "ResNet1D-[" << spec.block_counts[0] << ',' << spec.block_counts[1] << ',' << spec.block_counts[2] << ','
      << spec.block_counts[3] << ']' << (spec.plus_variant ? "+" : "")
      << " width=" << io::format_double(spec.width_multiplier);
  return out.str();
}

std::vector<std::size_t> length_trace(const NetworkSpec& spec) {
  std::vector<std::size_t> trace{spec.input_length};
  std::size_t len = window_output_length(spec.input_length, kStemKernel, kStemStride, kStemPad, "stem");
  trace.push_back(len);
  len = window_output_length(len, kPoolKernel, kPoolStride, kPoolPad, "maxpool1d");
  trace.push_back(len);
  for (std::size_t s = 0; s < 4; ++s) {
    len = conv3_length(len, kStageStride[s]);
    trace.push_back(len);
  }
  len = conv3_length(len, 1);
  trace.push_back(len);
  const std::size_t window = std::min(kHeadPool, len);
  trace.push_back(window_output_length(len, window, window, 0, "avgpool1d"));
  return trace;
}

void validate_taps(const std::vector<std::string>& taps) {
  const auto& known = tap_names();
  for (const auto& t : taps) {
    if (std::find(known.begin(), known.end(), t) == known.end()) {
      fail(ErrorCode::kConfig, "unknown feature tap `" + t + "`");
    }
  }
}

// ---- ResidualBlock --------------------------------------------------------

template <typename T>
ResidualBlock<T>::ResidualBlock(std::size_t in_ch, std::size_t out_ch, std::size_t stride)
    : conv1(conv3(in_ch, out_ch, stride)),
      bn1(out_ch),
      conv2(conv3(out_ch, out_ch, 1)),
      bn2(out_ch),
      shortcut_conv(Conv1dOptions{in_ch, out_ch, 1, stride, 0, false}),
      shortcut_bn(out_ch) {}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, Mode mode) {
  Tensor<T> main = conv1.forward(x, mode);
  main = bn1.forward(main, mode);
  main = relu1.forward(main, mode);
  main = conv2.forward(main, mode);
  main = bn2.forward(main, mode);
  Tensor<T> shortcut = shortcut_conv.forward(x, mode);
  shortcut = shortcut_bn.forward(shortcut, mode);
  return relu_out.forward(add(main, shortcut), mode);
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& grad_out) {
  const Tensor<T> g = relu_out.backward(grad_out);
  Tensor<T> main = bn2.backward(g);
  main = conv2.backward(main);
  main = relu1.backward(main);
  main = bn1.backward(main);
  main = conv1.backward(main);
  Tensor<T> shortcut = shortcut_bn.backward(g);
  shortcut = shortcut_conv.backward(shortcut);
  return add(main, shortcut);
}

template <typename T>
void ResidualBlock<T>::collect(const std::string& prefix, std::vector<TensorRef<T>>& out) {
  conv1.collect(prefix + "conv1.", out);
  bn1.collect(prefix + "bn1.", out);
  conv2.collect(prefix + "conv2.", out);
  bn2.collect(prefix + "bn2.", out);
  shortcut_conv.collect(prefix + "shortcut.conv.", out);
  shortcut_bn.collect(prefix + "shortcut.bn.", out);
}

template <typename T>
void ResidualBlock<T>::reset_parameters(Rng& rng) {
  conv1.reset_parameters(rng);
  bn1.reset_parameters(rng);
  conv2.reset_parameters(rng);
  bn2.reset_parameters(rng);
  shortcut_conv.reset_parameters(rng);
  shortcut_bn.reset_parameters(rng);
}

// ---- Head -----------------------------------------------------------------

template <typename T>
ConvBnRelu<T>::ConvBnRelu(std::size_t in_ch, std::size_t out_ch) : conv(conv3(in_ch, out_ch, 1)), bn(out_ch) {}

template <typename T>
Head<T>::Head(std::size_t in_ch, std::size_t head_ch, std::size_t conv_layers, std::size_t trunk_length,
              std::size_t num_classes)
    : pool_window_(std::min(kHeadPool, trunk_length)),
      pool_(pool_window_, pool_window_),
      features_(head_ch * pool_.output_length(trunk_length)),
      fc_(features_, num_classes) {
  for (std::size_t i = 0; i < conv_layers; ++i) {
    units_.push_back(std::make_unique<ConvBnRelu<T>>(i == 0 ? in_ch : head_ch, head_ch));
  }
}

template <typename T>
Tensor<T> Head<T>::forward(const Tensor<T>& x, Mode mode, Tensor<T>* pre_fc) {
  Tensor<T> h = x;
  for (auto& u : units_) {
    h = u->conv.forward(h, mode);
    h = u->bn.forward(h, mode);
    h = u->relu.forward(h, mode);
  }
  h = pool_.forward(h, mode);
  pooled_shape_ = h.shape;
  Tensor<T> flat = h.reshaped({h.dim(0), h.dim(1) * h.dim(2)});
  if (pre_fc) *pre_fc = flat;
  return fc_.forward(flat, mode);
}

template <typename T>
Tensor<T> Head<T>::backward(const Tensor<T>& grad_scores) {
  Tensor<T> g = fc_.backward(grad_scores).reshaped(pooled_shape_);
  g = pool_.backward(g);
  for (auto it = units_.rbegin(); it != units_.rend(); ++it) {
    g = (*it)->relu.backward(g);
    g = (*it)->bn.backward(g);
    g = (*it)->conv.backward(g);
  }
  return g;
}

template <typename T>
void Head<T>::collect(const std::string& prefix, std::vector<TensorRef<T>>& out) {
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const std::string p = prefix + "unit" + std::to_string(i) + ".";
    units_[i]->conv.collect(p + "conv.", out);
    units_[i]->bn.collect(p + "bn.", out);
  }
  fc_.collect(prefix + "fc.", out);
}

template <typename T>
void Head<T>::reset_parameters(Rng& rng) {
  for (auto& u : units_) {
    u->conv.reset_parameters(rng);
    u->bn.reset_parameters(rng);
  }
  fc_.reset_parameters(rng);
}

// ---- ResNet1D -------------------------------------------------------------

template <typename T>
ResNet1D<T>::ResNet1D(const NetworkSpec& spec)
    : spec_((validate(spec), spec)),
      plan_(channel_plan(spec)),
      stem_conv_(Conv1dOptions{spec.input_channels, plan_.stem, kStemKernel, kStemStride, kStemPad, false}),
      stem_bn_(plan_.stem),
      maxpool_(kPoolKernel, kPoolStride, kPoolPad) {
  const auto trace = length_trace(spec_);
  std::size_t in_ch = plan_.stem;
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<std::unique_ptr<ResidualBlock<T>>> blocks;
    for (int b = 0; b < spec_.block_counts[s]; ++b) {
      const std::size_t stride = b == 0 ? kStageStride[s] : 1;
      blocks.push_back(std::make_unique<ResidualBlock<T>>(in_ch, plan_.stages[s], stride));
      in_ch = plan_.stages[s];
    }
    stages_.push_back(std::move(blocks));
  }
  const std::size_t trunk_len = trace[6];
  activity_head_ = std::make_unique<Head<T>>(in_ch, plan_.head, spec_.plus_variant ? 2 : 1, trunk_len,
                                             spec_.num_activities);
  location_head_ = std::make_unique<Head<T>>(in_ch, plan_.head, 1, trunk_len, spec_.num_locations);
  init_params(spec_.seed + seed_offset::kInit);
}

template <typename T>
NetworkOutput<T> ResNet1D<T>::forward(const Tensor<T>& batch, Mode mode, const std::vector<std::string>& taps) {
  validate_taps(taps);
  require_rank(batch, 3, "resnet1d");
  if (batch.dim(1) != spec_.input_channels || batch.dim(2) != spec_.input_length) {
    fail(ErrorCode::kShape, "resnet1d: expected input [B," + std::to_string(spec_.input_channels) + "," +
                                std::to_string(spec_.input_length) + "], got " + batch.shape_string());
  }
  NetworkOutput<T> out;
  out.length_trace.push_back(batch.dim(2));
  keep_tap(taps, "input", batch, out.taps);

  Tensor<T> h = stem_conv_.forward(batch, mode);
  out.length_trace.push_back(h.dim(2));
  h = stem_bn_.forward(h, mode);
  h = stem_relu_.forward(h, mode);
  h = maxpool_.forward(h, mode);
  out.length_trace.push_back(h.dim(2));
  keep_tap(taps, "post-maxpool", h, out.taps);

  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (auto& block : stages_[s]) h = block->forward(h, mode);
    out.length_trace.push_back(h.dim(2));
    keep_tap(taps, "RB" + std::to_string(s + 1), h, out.taps);
  }
  out.length_trace.push_back(h.dim(2));  // head convs keep the trunk length

  Tensor<T> pre_act;
  Tensor<T> pre_loc;
  out.activity = activity_head_->forward(h, mode, &pre_act);
  out.location = location_head_->forward(h, mode, &pre_loc);
  out.length_trace.push_back(pre_act.dim(1) / plan_.head);
  keep_tap(taps, "pre-FC-activity", pre_act, out.taps);
  keep_tap(taps, "pre-FC-location", pre_loc, out.taps);
  keep_tap(taps, "output-activity", out.activity, out.taps);
  keep_tap(taps, "output-location", out.location, out.taps);
  return out;
}

template <typename T>
Tensor<T> ResNet1D<T>::backward(const Tensor<T>& grad_activity, const Tensor<T>& grad_location) {
  Tensor<T> g = add(activity_head_->backward(grad_activity), location_head_->backward(grad_location));
  for (auto s = stages_.rbegin(); s != stages_.rend(); ++s) {
    for (auto b = s->rbegin(); b != s->rend(); ++b) g = (*b)->backward(g);
  }
  g = maxpool_.backward(g);
  g = stem_relu_.backward(g);
  g = stem_bn_.backward(g);
  return stem_conv_.backward(g);
}

template <typename T>
std::vector<TensorRef<T>> ResNet1D<T>::tensors() {
  std::vector<TensorRef<T>> out;
  stem_conv_.collect("stem.conv.", out);
  stem_bn_.collect("stem.bn.", out);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b]->collect("stage" + std::to_string(s + 1) + ".block" + std::to_string(b) + ".", out);
    }
  }
  activity_head_->collect("head_activity.", out);
  location_head_->collect("head_location.", out);
  return out;
}

template <typename T>
std::vector<TensorRef<T>> ResNet1D<T>::trainable() {
  auto all = tensors();
  std::erase_if(all, [](const TensorRef<T>& r) { return !r.trainable; });
  return all;
}

template <typename T>
void ResNet1D<T>::zero_grad() {
  for (auto& ref : trainable()) ref.tensor->zero_grad();
}

template <typename T>
void ResNet1D<T>::init_params(std::uint64_t seed) {
  Rng rng(seed);
  stem_conv_.reset_parameters(rng);
  stem_bn_.reset_parameters(rng);
  for (auto& stage : stages_) {
    for (auto& block : stage) block->reset_parameters(rng);
  }
  activity_head_->reset_parameters(rng);
  location_head_->reset_parameters(rng);
}

template <typename T>
ConvCount ResNet1D<T>::conv_count() const {
  ConvCount c;
  c.shared = 1;
  for (const auto& stage : stages_) c.shared += 2 * stage.size();
  c.activity_head = activity_head_->conv_layers();
  c.location_head = location_head_->conv_layers();
  c.total = c.shared + c.activity_head + c.location_head;
  return c;
}

template <typename T>
std::vector<std::size_t> ResNet1D<T>::expected_length_trace() const {
  return length_trace(spec_);
}

template <typename T>
std::map<std::string, Tensor<T>> export_features(ResNet1D<T>& net, const Tensor<T>& batch,
                                                 const std::vector<std::string>& taps) {
  validate_taps(taps);
  auto out = net.forward(batch, Mode::kEval, taps);
  std::map<std::string, Tensor<T>> flat;
  for (auto& [name, t] : out.taps) {
    const std::size_t rows = t.dim(0);
    flat[name] = t.reshaped({rows, t.size() / rows});
  }
  return flat;
}

template <typename From, typename To>
void copy_parameters(ResNet1D<From>& from, ResNet1D<To>& to) {
  auto src = from.tensors();
  auto dst = to.tensors();
  if (src.size() != dst.size()) fail(ErrorCode::kCompatibility, "networks have different layouts");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].tensor->shape != dst[i].tensor->shape) {
      fail(ErrorCode::kCompatibility, "tensor `" + src[i].name + "` differs between networks");
    }
    dst[i].tensor->data.assign(src[i].tensor->data.begin(), src[i].tensor->data.end());
  }
}

template class ResidualBlock<float>;
template class ResidualBlock<double>;
template struct ConvBnRelu<float>;
template struct ConvBnRelu<double>;
template class Head<float>;
template class Head<double>;
template class ResNet1D<float>;
template class ResNet1D<double>;
template std::map<std::string, Tensor<float>> export_features(ResNet1D<float>&, const Tensor<float>&,
                                                              const std::vector<std::string>&);
template std::map<std::string, Tensor<double>> export_features(ResNet1D<double>&, const Tensor<double>&,
                                                               const std::vector<std::string>&);
template void copy_parameters(ResNet1D<float>&, ResNet1D<double>&);
template void copy_parameters(ResNet1D<double>&, ResNet1D<float>&);
template void copy_parameters(ResNet1D<float>&, ResNet1D<float>&);

}  // namespace apl::model
