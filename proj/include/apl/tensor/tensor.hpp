// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "apl/common/error.hpp"

namespace apl {

/// Dense row-major array with an optional gradient slot of the same length.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;
  std::vector<T> grad;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> dims, T fill = T(0)) : shape(std::move(dims)) {
    for (std::size_t d : shape) {
      if (d == 0) fail(ErrorCode::kShape, "tensor dimensions must be positive");
    }
    data.assign(element_count(shape), fill);
  }

  Tensor(std::vector<std::size_t> dims, std::vector<T> values) : shape(std::move(dims)), data(std::move(values)) {
    if (data.size() != element_count(shape)) {
      fail(ErrorCode::kShape, "tensor data length " + std::to_string(data.size()) + " does not match shape " +
                                  shape_string());
    }
  }

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  bool empty() const { return data.empty(); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  // [B, C, L] accessors.
  T& at(std::size_t b, std::size_t c, std::size_t l) { return data[(b * shape[1] + c) * shape[2] + l]; }
  const T& at(std::size_t b, std::size_t c, std::size_t l) const {
    return data[(b * shape[1] + c) * shape[2] + l];
  }

  std::span<T> values() { return data; }
  std::span<const T> values() const { return data; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
  void zero_grad() { grad.assign(data.size(), T(0)); }
  bool has_grad() const { return grad.size() == data.size() && !data.empty(); }

  Tensor reshaped(std::vector<std::size_t> dims) const {
    Tensor out(std::move(dims), data);
    return out;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }

  bool all_finite() const {
    for (const T& v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

/// Fails with a shape error unless `t` has exactly `rank` dimensions.
template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    fail(ErrorCode::kShape, std::string(op) + ": expected rank " + std::to_string(rank) + " input, got " +
                                t.shape_string());
  }
}

/// Finiteness check after every op in debug builds.
template <typename T>
inline void debug_check_finite([[maybe_unused]] const Tensor<T>& t, [[maybe_unused]] const char* op) {
#ifndef NDEBUG
  if (!t.all_finite()) fail(ErrorCode::kNumeric, std::string(op) + " produced a non-finite value");
#endif
}

/// A tensor owned by some layer, addressed by a dotted path.
template <typename T>
struct TensorRef {
  std::string name;
  Tensor<T>* tensor = nullptr;
  bool trainable = true;
};

}  // namespace apl
