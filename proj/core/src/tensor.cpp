#include "rnf/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rnf {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_product(shape_) != values_.size()) {
    throw std::invalid_argument("Tensor: shape " + shape_str(shape_) + " does not match " +
                                std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vec(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::mat(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  for (double& x : t.values_) x = v;
  return t;
}

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape_); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw std::invalid_argument("Tensor::rows: rank-" + std::to_string(rank()) + " tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw std::invalid_argument("Tensor::cols: rank-" + std::to_string(rank()) + " tensor");
  return shape_[1];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace rnf
