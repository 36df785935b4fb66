#include "shapes.hpp"
#include "tsum/kernels.hpp"

namespace tsum::kernels::serial {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  detail::check_nn(a, b, c);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? c(i, j) : 0.0;
      for (std::size_t p = 0; p < k; ++p) sum += a(i, p) * b(p, j);
      c(i, j) = sum;
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  detail::check_nt(a, b, c);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? c(i, j) : 0.0;
      for (std::size_t p = 0; p < k; ++p) sum += a(i, p) * b(j, p);
      c(i, j) = sum;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  detail::check_tn(a, b, c);
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = accumulate ? c(i, j) : 0.0;
      for (std::size_t p = 0; p < k; ++p) sum += a(p, i) * b(p, j);
      c(i, j) = sum;
    }
  }
}

}  // namespace tsum::kernels::serial
