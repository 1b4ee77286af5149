// SPDX-License-Identifier: Apache-2.0

#include "apl/tensor/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "apl/common/parallel.hpp"

namespace apl {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
void fill_uniform(Tensor<T>& t, Rng& rng, double bound) {
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
}

// Range of output positions j with 0 <= j*stride + tap - pad < length.
struct ValidRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

ValidRange valid_outputs(std::size_t tap, std::size_t stride, std::size_t pad, std::size_t length,
                         std::size_t out_len) {
  // j*stride >= pad - tap
  std::size_t begin = 0;
  if (pad > tap) begin = (pad - tap + stride - 1) / stride;
  // j*stride + tap - pad <= length - 1  ->  j <= (length - 1 + pad - tap) / stride
  if (length + pad <= tap) return {0, 0};
  const std::size_t last = (length - 1 + pad - tap) / stride;
  const std::size_t end = std::min(out_len, last + 1);
  return {std::min(begin, end), end};
}

template <typename T>
void im2col(const T* x, std::size_t channels, std::size_t length, const Conv1dOptions& o, std::size_t out_len,
            RowMat<T>& col) {
  col.setZero();
  for (std::size_t c = 0; c < channels; ++c) {
    const T* xc = x + c * length;
    for (std::size_t tap = 0; tap < o.kernel; ++tap) {
      T* row = col.data() + (c * o.kernel + tap) * out_len;
      const auto r = valid_outputs(tap, o.stride, o.padding, length, out_len);
      for (std::size_t j = r.begin; j < r.end; ++j) row[j] = xc[j * o.stride + tap - o.padding];
    }
  }
}

template <typename T>
void col2im(const RowMat<T>& col, std::size_t channels, std::size_t length, const Conv1dOptions& o,
            std::size_t out_len, T* dx) {
  for (std::size_t c = 0; c < channels; ++c) {
    T* dxc = dx + c * length;
    for (std::size_t tap = 0; tap < o.kernel; ++tap) {
      const T* row = col.data() + (c * o.kernel + tap) * out_len;
      const auto r = valid_outputs(tap, o.stride, o.padding, length, out_len);
      for (std::size_t j = r.begin; j < r.end; ++j) dxc[j * o.stride + tap - o.padding] += row[j];
    }
  }
}

}  // namespace

std::size_t window_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding,
                                 const char* op) {
  if (stride == 0) fail(ErrorCode::kShape, std::string(op) + ": stride must be at least 1");
  if (kernel == 0) fail(ErrorCode::kShape, std::string(op) + ": kernel must be at least 1");
  if (kernel > length + 2 * padding) {
    fail(ErrorCode::kShape, std::string(op) + ": window " + std::to_string(kernel) + " larger than padded input " +
                                std::to_string(length + 2 * padding));
  }
  return (length + 2 * padding - kernel) / stride + 1;
}

// ---- Conv1d ---------------------------------------------------------------

template <typename T>
Conv1d<T>::Conv1d(const Conv1dOptions& opts) : opts_(opts) {
  if (opts.in_channels == 0 || opts.out_channels == 0 || opts.kernel == 0 || opts.stride == 0) {
    fail(ErrorCode::kConfig, "conv1d: channels, kernel and stride must be positive");
  }
  weight = Tensor<T>({opts.out_channels, opts.in_channels, opts.kernel});
  if (opts.bias) bias = Tensor<T>({opts.out_channels});
}

template <typename T>
std::size_t Conv1d<T>::output_length(std::size_t input_length) const {
  return window_output_length(input_length, opts_.kernel, opts_.stride, opts_.padding, "conv1d");
}

template <typename T>
Tensor<T> Conv1d<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  require_rank(x, 3, "conv1d");
  if (x.dim(1) != opts_.in_channels) {
    fail(ErrorCode::kShape, "conv1d: expected " + std::to_string(opts_.in_channels) + " input channels, got " +
                                x.shape_string());
  }
  const std::size_t batch = x.dim(0);
  const std::size_t len = x.dim(2);
  const std::size_t out_len = output_length(len);
  const std::size_t cin = opts_.in_channels;
  const std::size_t cout = opts_.out_channels;
  const std::size_t rows = cin * opts_.kernel;
  const bool pointwise = opts_.kernel == 1 && opts_.stride == 1 && opts_.padding == 0;

  Tensor<T> y({batch, cout, out_len});
  ConstMatMap<T> w(weight.data.data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(rows));
  parallel_chunks(batch, [&](std::size_t b0, std::size_t b1, std::size_t) {
    RowMat<T> col(rows, out_len);
    for (std::size_t b = b0; b < b1; ++b) {
      MatMap<T> yb(y.data.data() + b * cout * out_len, static_cast<Eigen::Index>(cout),
                   static_cast<Eigen::Index>(out_len));
      const T* xb = x.data.data() + b * cin * len;
      if (pointwise) {
        yb.noalias() = w * ConstMatMap<T>(xb, static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(len));
      } else {
        im2col(xb, cin, len, opts_, out_len, col);
        yb.noalias() = w * col;
      }
      if (opts_.bias) {
        for (std::size_t o = 0; o < cout; ++o) yb.row(static_cast<Eigen::Index>(o)).array() += bias[o];
      }
    }
  });
  saved_input_ = x;
  debug_check_finite(y, "conv1d");
  return y;
}

template <typename T>
Tensor<T> Conv1d<T>::backward(const Tensor<T>& grad_out) {
  if (!saved_input_) fail(ErrorCode::kState, "conv1d: backward called without a saved forward context");
  const Tensor<T>& x = *saved_input_;
  const std::size_t batch = x.dim(0);
  const std::size_t len = x.dim(2);
  const std::size_t out_len = output_length(len);
  const std::size_t cin = opts_.in_channels;
  const std::size_t cout = opts_.out_channels;
  const std::size_t rows = cin * opts_.kernel;
  if (grad_out.shape != std::vector<std::size_t>{batch, cout, out_len}) {
    fail(ErrorCode::kShape, "conv1d: grad_out shape " + grad_out.shape_string() + " does not match forward output");
  }
  const bool pointwise = opts_.kernel == 1 && opts_.stride == 1 && opts_.padding == 0;

  weight.ensure_grad();
  if (opts_.bias) bias.ensure_grad();
  Tensor<T> dx({batch, cin, len});
  ConstMatMap<T> w(weight.data.data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(rows));

  const std::size_t chunks = chunk_count(batch);
  std::vector<RowMat<T>> dw_parts(chunks, RowMat<T>::Zero(cout, rows));
  std::vector<Eigen::Matrix<T, Eigen::Dynamic, 1>> db_parts(chunks,
                                                            Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(cout));
  parallel_chunks(batch, [&](std::size_t b0, std::size_t b1, std::size_t chunk) {
    RowMat<T> col(rows, out_len);
    RowMat<T> dcol(rows, out_len);
    for (std::size_t b = b0; b < b1; ++b) {
      ConstMatMap<T> gy(grad_out.data.data() + b * cout * out_len, static_cast<Eigen::Index>(cout),
                        static_cast<Eigen::Index>(out_len));
      const T* xb = x.data.data() + b * cin * len;
      T* dxb = dx.data.data() + b * cin * len;
      if (pointwise) {
        ConstMatMap<T> xm(xb, static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(len));
        dw_parts[chunk].noalias() += gy * xm.transpose();
        MatMap<T>(dxb, static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(len)).noalias() =
            w.transpose() * gy;
      } else {
        im2col(xb, cin, len, opts_, out_len, col);
        dw_parts[chunk].noalias() += gy * col.transpose();
        dcol.noalias() = w.transpose() * gy;
        col2im(dcol, cin, len, opts_, out_len, dxb);
      }
      if (opts_.bias) db_parts[chunk] += gy.rowwise().sum();
    }
  });
  MatMap<T> dw(weight.grad.data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(rows));
  for (const auto& part : dw_parts) dw += part;
  if (opts_.bias) {
    VecMap<T> db(bias.grad.data(), static_cast<Eigen::Index>(cout));
    for (const auto& part : db_parts) db += part;
  }
  debug_check_finite(dx, "conv1d backward");
  return dx;
}

template <typename T>
void Conv1d<T>::collect(const std::string& prefix, std::vector<TensorRef<T>>& out) {
  out.push_back({prefix + "weight", &weight, true});
  if (opts_.bias) out.push_back({prefix + "bias", &bias, true});
}

template <typename T>
void Conv1d<T>::reset_parameters(Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in()));
  fill_uniform(weight, rng, bound);
  if (opts_.bias) fill_uniform(bias, rng, bound);
}

// ---- BatchNorm1d ----------------------------------------------------------

template <typename T>
BatchNorm1d<T>::BatchNorm1d(std::size_t channels, double eps, double momentum)
    : gamma({channels}, T(1)),
      beta({channels}, T(0)),
      running_mean({channels}, T(0)),
      running_var({channels}, T(1)),
      eps_(eps),
      momentum_(momentum) {}

template <typename T>
Tensor<T> BatchNorm1d<T>::forward(const Tensor<T>& x, Mode mode) {
  require_rank(x, 3, "batchnorm1d");
  const std::size_t batch = x.dim(0);
  const std::size_t ch = x.dim(1);
  const std::size_t len = x.dim(2);
  if (ch != channels()) {
    fail(ErrorCode::kShape, "batchnorm1d: expected " + std::to_string(channels()) + " channels, got " +
                                x.shape_string());
  }
  const std::size_t n = batch * len;
  if (mode == Mode::kTrain && n < 2) {
    fail(ErrorCode::kDegenerateBatch, "batchnorm1d: training needs at least 2 values per channel, got " +
                                          std::to_string(n));
  }
  Tensor<T> y(x.shape);
  xhat_.assign(x.size(), T(0));
  inv_std_.assign(ch, T(0));
  for (std::size_t c = 0; c < ch; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::kTrain) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t l = 0; l < len; ++l) mean += x.at(b, c, l);
      }
      mean /= static_cast<double>(n);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t l = 0; l < len; ++l) {
          const double d = x.at(b, c, l) - mean;
          var += d * d;
        }
      }
      const double unbiased = var / static_cast<double>(n - 1);
      var /= static_cast<double>(n);
      running_mean[c] = static_cast<T>((1.0 - momentum_) * running_mean[c] + momentum_ * mean);
      running_var[c] = static_cast<T>((1.0 - momentum_) * running_var[c] + momentum_ * unbiased);
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = static_cast<T>(inv_std);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t i = (b * ch + c) * len + l;
        const T xh = static_cast<T>((x.data[i] - mean) * inv_std);
        xhat_[i] = xh;
        y.data[i] = gamma[c] * xh + beta[c];
      }
    }
  }
  saved_mode_ = mode;
  saved_shape_ = x.shape;
  has_saved_ = true;
  debug_check_finite(y, "batchnorm1d");
  return y;
}

template <typename T>
Tensor<T> BatchNorm1d<T>::backward(const Tensor<T>& grad_out) {
  if (!has_saved_) fail(ErrorCode::kState, "batchnorm1d: backward called without a saved forward context");
  if (grad_out.shape != saved_shape_) fail(ErrorCode::kShape, "batchnorm1d: grad_out shape mismatch");
  const std::size_t batch = saved_shape_[0];
  const std::size_t ch = saved_shape_[1];
  const std::size_t len = saved_shape_[2];
  const double n = static_cast<double>(batch * len);
  gamma.ensure_grad();
  beta.ensure_grad();
  Tensor<T> dx(saved_shape_);
  for (std::size_t c = 0; c < ch; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t i = (b * ch + c) * len + l;
        sum_dy += grad_out.data[i];
        sum_dy_xhat += static_cast<double>(grad_out.data[i]) * xhat_[i];
      }
    }
    gamma.grad[c] += static_cast<T>(sum_dy_xhat);
    beta.grad[c] += static_cast<T>(sum_dy);
    const double g = static_cast<double>(gamma[c]) * inv_std_[c];
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t i = (b * ch + c) * len + l;
        if (saved_mode_ == Mode::kTrain) {
          dx.data[i] = static_cast<T>(g / n * (n * grad_out.data[i] - sum_dy - xhat_[i] * sum_dy_xhat));
        } else {
          dx.data[i] = static_cast<T>(g * grad_out.data[i]);
        }
      }
    }
  }
  debug_check_finite(dx, "batchnorm1d backward");
  return dx;
}

template <typename T>
void BatchNorm1d<T>::collect(const std::string& prefix, std::vector<TensorRef<T>>& out) {
  out.push_back({prefix + "gamma", &gamma, true});
  out.push_back({prefix + "beta", &beta, true});
  out.push_back({prefix + "running_mean", &running_mean, false});
  out.push_back({prefix + "running_var", &running_var, false});
}

template <typename T>
void BatchNorm1d<T>::reset_parameters(Rng& /*rng*/) {
  std::fill(gamma.data.begin(), gamma.data.end(), T(1));
  std::fill(beta.data.begin(), beta.data.end(), T(0));
  std::fill(running_mean.data.begin(), running_mean.data.end(), T(0));
  std::fill(running_var.data.begin(), running_var.data.end(), T(1));
}

// ---- Relu -----------------------------------------------------------------

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  Tensor<T> y = x;
  y.grad.clear();
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  saved_output_ = y;
  return y;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_out) {
  if (!saved_output_) fail(ErrorCode::kState, "relu: backward called without a saved forward context");
  if (grad_out.shape != saved_output_->shape) fail(ErrorCode::kShape, "relu: grad_out shape mismatch");
  Tensor<T> dx(grad_out.shape);
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] = saved_output_->data[i] > T(0) ? grad_out.data[i] : T(0);
  return dx;
}

// ---- MaxPool1d --------------------------------------------------------------

template <typename T>
MaxPool1d<T>::MaxPool1d(std::size_t kernel, std::size_t stride, std::size_t padding)
    : kernel_(kernel), stride_(stride), padding_(padding) {
  if (kernel == 0 || stride == 0) fail(ErrorCode::kConfig, "maxpool1d: kernel and stride must be positive");
  if (padding >= kernel) fail(ErrorCode::kConfig, "maxpool1d: padding must be smaller than the kernel");
}

template <typename T>
std::size_t MaxPool1d<T>::output_length(std::size_t input_length) const {
  return window_output_length(input_length, kernel_, stride_, padding_, "maxpool1d");
}

template <typename T>
Tensor<T> MaxPool1d<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  require_rank(x, 3, "maxpool1d");
  const std::size_t batch = x.dim(0);
  const std::size_t ch = x.dim(1);
  const std::size_t len = x.dim(2);
  const std::size_t out_len = output_length(len);
  Tensor<T> y({batch, ch, out_len});
  argmax_.assign(y.size(), 0);
  for (std::size_t bc = 0; bc < batch * ch; ++bc) {
    const T* xr = x.data.data() + bc * len;
    for (std::size_t j = 0; j < out_len; ++j) {
      const std::size_t start = j * stride_;  // in padded coordinates
      T best = T(0);
      std::size_t best_idx = 0;
      bool found = false;
      for (std::size_t t = 0; t < kernel_; ++t) {
        const std::size_t p = start + t;
        if (p < padding_ || p - padding_ >= len) continue;
        const std::size_t idx = p - padding_;
        if (!found || xr[idx] > best) {
          best = xr[idx];
          best_idx = idx;
          found = true;
        }
      }
      y.data[bc * out_len + j] = best;
      argmax_[bc * out_len + j] = bc * len + best_idx;
    }
  }
  saved_input_shape_ = x.shape;
  debug_check_finite(y, "maxpool1d");
  return y;
}

template <typename T>
Tensor<T> MaxPool1d<T>::backward(const Tensor<T>& grad_out) {
  if (saved_input_shape_.empty()) fail(ErrorCode::kState, "maxpool1d: backward called without a saved forward context");
  if (grad_out.size() != argmax_.size()) fail(ErrorCode::kShape, "maxpool1d: grad_out shape mismatch");
  Tensor<T> dx(saved_input_shape_);
  for (std::size_t i = 0; i < argmax_.size(); ++i) dx.data[argmax_[i]] += grad_out.data[i];
  return dx;
}

// ---- AvgPool1d ------------------------------------------------------------

template <typename T>
AvgPool1d<T>::AvgPool1d(std::size_t kernel, std::size_t stride) : kernel_(kernel), stride_(stride) {
  if (kernel == 0 || stride == 0) fail(ErrorCode::kConfig, "avgpool1d: kernel and stride must be positive");
}

template <typename T>
std::size_t AvgPool1d<T>::output_length(std::size_t input_length) const {
  return window_output_length(input_length, kernel_, stride_, 0, "avgpool1d");
}

template <typename T>
Tensor<T> AvgPool1d<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  require_rank(x, 3, "avgpool1d");
  const std::size_t bc_count = x.dim(0) * x.dim(1);
  const std::size_t len = x.dim(2);
  const std::size_t out_len = output_length(len);
  Tensor<T> y({x.dim(0), x.dim(1), out_len});
  const T scale = T(1) / static_cast<T>(kernel_);
  for (std::size_t bc = 0; bc < bc_count; ++bc) {
    for (std::size_t j = 0; j < out_len; ++j) {
      T sum = 0;
      for (std::size_t t = 0; t < kernel_; ++t) sum += x.data[bc * len + j * stride_ + t];
      y.data[bc * out_len + j] = sum * scale;
    }
  }
  saved_input_shape_ = x.shape;
  return y;
}

template <typename T>
Tensor<T> AvgPool1d<T>::backward(const Tensor<T>& grad_out) {
  if (saved_input_shape_.empty()) fail(ErrorCode::kState, "avgpool1d: backward called without a saved forward context");
  const std::size_t len = saved_input_shape_[2];
  const std::size_t out_len = output_length(len);
  const std::size_t bc_count = saved_input_shape_[0] * saved_input_shape_[1];
  if (grad_out.size() != bc_count * out_len) fail(ErrorCode::kShape, "avgpool1d: grad_out shape mismatch");
  Tensor<T> dx(saved_input_shape_);
  const T scale = T(1) / static_cast<T>(kernel_);
  for (std::size_t bc = 0; bc < bc_count; ++bc) {
    for (std::size_t j = 0; j < out_len; ++j) {
      const T g = grad_out.data[bc * out_len + j] * scale;
      for (std::size_t t = 0; t < kernel_; ++t) dx.data[bc * len + j * stride_ + t] += g;
    }
  }
  return dx;
}

// ---- Linear ---------------------------------------------------------------

template <typename T>
Linear<T>::Linear(std::size_t in_features, std::size_t out_features)
    : weight({out_features, in_features}), bias({out_features}) {}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x, Mode /*mode*/) {
  require_rank(x, 2, "linear");
  const std::size_t in = weight.dim(1);
  const std::size_t out = weight.dim(0);
  if (x.dim(1) != in) {
    fail(ErrorCode::kShape, "linear: expected " + std::to_string(in) + " features, got " + x.shape_string());
  }
  const std::size_t batch = x.dim(0);
  Tensor<T> y({batch, out});
  ConstMatMap<T> xm(x.data.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(in));
  ConstMatMap<T> w(weight.data.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  MatMap<T> ym(y.data.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(out));
  ym.noalias() = xm * w.transpose();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) y.data[b * out + o] += bias[o];
  }
  saved_input_ = x;
  debug_check_finite(y, "linear");
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& grad_out) {
  if (!saved_input_) fail(ErrorCode::kState, "linear: backward called without a saved forward context");
  const Tensor<T>& x = *saved_input_;
  const std::size_t in = weight.dim(1);
  const std::size_t out = weight.dim(0);
  const std::size_t batch = x.dim(0);
  if (grad_out.shape != std::vector<std::size_t>{batch, out}) fail(ErrorCode::kShape, "linear: grad_out shape mismatch");
  weight.ensure_grad();
  bias.ensure_grad();
  ConstMatMap<T> xm(x.data.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(in));
  ConstMatMap<T> gy(grad_out.data.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(out));
  ConstMatMap<T> w(weight.data.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  MatMap<T>(weight.grad.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)).noalias() +=
      gy.transpose() * xm;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) bias.grad[o] += grad_out.data[b * out + o];
  }
  Tensor<T> dx({batch, in});
  MatMap<T>(dx.data.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(in)).noalias() = gy * w;
  return dx;
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, std::vector<TensorRef<T>>& out) {
  out.push_back({prefix + "weight", &weight, true});
  out.push_back({prefix + "bias", &bias, true});
}

template <typename T>
void Linear<T>::reset_parameters(Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(weight.dim(1)));
  fill_uniform(weight, rng, bound);
  fill_uniform(bias, rng, bound);
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape != b.shape) {
    fail(ErrorCode::kShape, "add: shapes " + a.shape_string() + " and " + b.shape_string() + " differ");
  }
  Tensor<T> y = a;
  y.grad.clear();
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += b.data[i];
  return y;
}

#define APL_INSTANTIATE_LAYERS(T)                      \
  template class Conv1d<T>;                            \
  template class BatchNorm1d<T>;                       \
  template class Relu<T>;                              \
  template class MaxPool1d<T>;                         \
  template class AvgPool1d<T>;                         \
  template class Linear<T>;                            \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);

APL_INSTANTIATE_LAYERS(float)
APL_INSTANTIATE_LAYERS(double)

#undef APL_INSTANTIATE_LAYERS

}  // namespace apl
