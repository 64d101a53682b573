#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rnf {

/// Dense row-major tensor of doubles. Rank 1 and 2 cover everything in
/// this library; scalars are rank-1 tensors of size one.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor vec(std::vector<double> values);
  static Tensor mat(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor zeros_like(const Tensor& other);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

std::string shape_str(const std::vector<std::size_t>& shape);

}  // namespace rnf
