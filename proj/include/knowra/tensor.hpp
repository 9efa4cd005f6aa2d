#ifndef KNOWRA_TENSOR_HPP
#define KNOWRA_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "knowra/common.hpp"

namespace knowra {

// Dense row-major tensor of doubles. Rank 0 (scalar), 1 and 2 cover every
// shape the pipeline needs; attention stacks are stored as one matrix per
// head.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor scalar(double x) {
    Tensor t;
    t.shape = {};
    t.data = {x};
    return t;
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    Tensor t;
    t.shape = std::move(shape);
    std::size_t n = 1;
    for (std::size_t d : t.shape) n *= d;
    t.data.assign(n, 0.0);
    return t;
  }

  static Tensor vec(std::vector<double> values) {
    Tensor t;
    t.shape = {values.size()};
    t.data = std::move(values);
    return t;
  }

  static Tensor mat(std::size_t rows, std::size_t cols, std::vector<double> values) {
    Tensor t;
    t.shape = {rows, cols};
    t.data = std::move(values);
    if (t.data.size() != rows * cols) throw InternalError("Tensor::mat: size mismatch");
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  bool is_scalar() const { return data.size() == 1 && shape.empty(); }

  double& operator()(std::size_t i) { return data[i]; }
  double operator()(std::size_t i) const { return data[i]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace knowra

#endif  // KNOWRA_TENSOR_HPP
