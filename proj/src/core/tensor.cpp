#include "core/tensor.hpp"

#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace clhoi {

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  require(!shape_.empty(), ErrorKind::kDimension, "tensor shape must have at least one axis");
  require(product(shape_) == data_.size(), ErrorKind::kDimension,
          "shape " + shape_str(shape_) + " does not match " + std::to_string(data_.size()) + " values");
  require(all_finite(data_), ErrorKind::kNumeric, "non-finite value in tensor " + shape_str(shape_));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) { return filled(rows, cols, 0.0); }

Tensor Tensor::filled(std::size_t rows, std::size_t cols, double value) {
  return Tensor({rows, cols}, std::vector<double>(rows * cols, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, {value}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty(), ErrorKind::kDimension, "from_rows needs at least one row");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    require(r.size() == cols, ErrorKind::kDimension, "ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
  return Tensor({n, n}, std::move(data));
}

std::size_t Tensor::rows() const {
  require(rank() == 2, ErrorKind::kDimension, "expected rank-2 tensor, got " + shape_str(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require(rank() == 2, ErrorKind::kDimension, "expected rank-2 tensor, got " + shape_str(shape_));
  return shape_[1];
}

double Tensor::item() const {
  require(data_.size() == 1, ErrorKind::kUsage, "item() on tensor " + shape_str(shape_));
  return data_[0];
}

std::vector<double> Tensor::row_values(std::size_t r) const {
  const std::size_t c = cols();
  return {data_.begin() + static_cast<std::ptrdiff_t>(r * c), data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * c)};
}

}  // namespace clhoi
