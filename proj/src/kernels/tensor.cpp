#include <algorithm>

#include "tsum/errors.hpp"
#include "tsum/tensor.hpp"

namespace tsum {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Matrix::resize(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0);
}

Matrix Matrix::columns(std::size_t begin, std::size_t count) const {
  require(begin + count <= cols_, "Matrix::columns out of range");
  Matrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    std::copy_n(data_.data() + r * cols_ + begin, count, out.data() + r * count);
  return out;
}

void Matrix::add_columns(std::size_t begin, const Matrix& block) {
  require(block.rows() == rows_ && begin + block.cols() <= cols_, "Matrix::add_columns shape mismatch");
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < block.cols(); ++c) (*this)(r, begin + c) += block(r, c);
}

void Matrix::set_columns(std::size_t begin, const Matrix& block) {
  require(block.rows() == rows_ && begin + block.cols() <= cols_, "Matrix::set_columns shape mismatch");
  for (std::size_t r = 0; r < rows_; ++r)
    std::copy_n(block.data() + r * block.cols(), block.cols(), data_.data() + r * cols_ + begin);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(other.rows_ == rows_ && other.cols_ == cols_, "Matrix::operator+= shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

}  // namespace tsum
