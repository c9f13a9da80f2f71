#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gradekit/error.hpp"

namespace gradekit::statkit {

/// Read-only row-major view of an n x k table: rows are items (blocks),
/// columns are raters (treatments).
class MatrixView {
 public:
  MatrixView(std::span<const double> values, std::size_t rows, std::size_t cols)
      : values_(values), rows_(rows), cols_(cols) {
    if (values.size() != rows * cols) {
      throw DomainError("matrix view: value count does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return values_.subspan(r * cols_, cols_); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::span<const double> values_;
  std::size_t rows_;
  std::size_t cols_;
};

/// Owning companion of MatrixView, mostly for tests and synthetic data.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  MatrixView view() const { return MatrixView(values, rows, cols); }
};

}  // namespace gradekit::statkit
