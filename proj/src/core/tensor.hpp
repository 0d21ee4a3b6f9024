#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace clhoi {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);

// Dense row-major double tensor. Values are validated finite on construction.
// Ops in this library work on rank-2 tensors; a scalar is 1x1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(std::size_t rows, std::size_t cols);
  static Tensor filled(std::size_t rows, std::size_t cols, double value);
  static Tensor scalar(double value);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);
  static Tensor row(std::vector<double> values);
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return shape_.empty(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  std::vector<double> row_values(std::size_t r) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

bool all_finite(std::span<const double> values);

// Named parameter tensors, ordered by name.
using ParameterMap = std::map<std::string, Tensor>;

}  // namespace clhoi
