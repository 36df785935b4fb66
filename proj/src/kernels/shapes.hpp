#pragma once

#include <string>

#include "tsum/errors.hpp"
#include "tsum/tensor.hpp"

namespace tsum::kernels::detail {

inline std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void check_nn(const Matrix& a, const Matrix& b, const Matrix& c) {
  require(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(),
          "gemm_nn shape mismatch: " + shape(a) + " * " + shape(b) + " -> " + shape(c));
}
inline void check_nt(const Matrix& a, const Matrix& b, const Matrix& c) {
  require(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows(),
          "gemm_nt shape mismatch: " + shape(a) + " * " + shape(b) + "^T -> " + shape(c));
}
inline void check_tn(const Matrix& a, const Matrix& b, const Matrix& c) {
  require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
          "gemm_tn shape mismatch: " + shape(a) + "^T * " + shape(b) + " -> " + shape(c));
}

}  // namespace tsum::kernels::detail
