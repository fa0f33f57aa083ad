#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ugdf {

// Dense channel-first tensor. Shape conventions used throughout:
//   2D feature maps  [C, H, W]
//   3D feature maps  [C, D, H, W]
//   spike voxels     [T, H, W]
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel(shape)), fill);
  }

  static int64_t numel(const std::vector<int>& s) {
    int64_t n = 1;
    for (int e : s) n *= e;
    return n;
  }
  int64_t size() const { return static_cast<int64_t>(v.size()); }
  bool empty() const { return v.empty(); }

  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  T& operator[](int64_t i) { return v[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return v[static_cast<size_t>(i)]; }

  // row-major offset helpers for the common ranks
  T& at2(int a, int b) { return v[static_cast<size_t>(a) * shape[1] + b]; }
  const T& at2(int a, int b) const { return v[static_cast<size_t>(a) * shape[1] + b]; }
  T& at3(int a, int b, int c) {
    return v[(static_cast<size_t>(a) * shape[1] + b) * shape[2] + c];
  }
  const T& at3(int a, int b, int c) const {
    return v[(static_cast<size_t>(a) * shape[1] + b) * shape[2] + c];
  }
  T& at4(int a, int b, int c, int d) {
    return v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
  const T& at4(int a, int b, int c, int d) const {
    return v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.v.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

template <class T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape == b.shape;
}

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <class T>
Tensor<T> random_uniform(const std::vector<int>& shape, std::mt19937& rng,
                         T lo = T(-1), T hi = T(1)) {
  Tensor<T> t(shape);
  std::uniform_real_distribution<double> d(static_cast<double>(lo), static_cast<double>(hi));
  for (auto& x : t.v) x = static_cast<T>(d(rng));
  return t;
}

template <class T>
Tensor<T> random_normal(const std::vector<int>& shape, std::mt19937& rng, T stddev) {
  Tensor<T> t(shape);
  std::normal_distribution<double> d(0.0, static_cast<double>(stddev));
  for (auto& x : t.v) x = static_cast<T>(d(rng));
  return t;
}

}  // namespace ugdf
