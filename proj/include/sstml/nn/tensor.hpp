#ifndef SSTML_NN_TENSOR_HPP
#define SSTML_NN_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sstml::nn {

/// Dense row-major tensor. Shape is tracked dynamically; layers interpret
/// it as NCHW for images and (rows, cols) for matrices.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(count(shape), T(0));
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
      if (d <= 0) throw std::invalid_argument("shape-error: nonpositive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return data.size(); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

inline std::string shape_string(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<int>& expect, const char* what) {
  if (t.shape != expect)
    throw std::invalid_argument(std::string("shape-error: ") + what + " expected " +
                                shape_string(expect) + ", got " + shape_string(t.shape));
}

}  // namespace sstml::nn

#endif
