#include <cstdint>

#ifdef TSUM_HAVE_OPENMP
#include <omp.h>
#endif

#include "shapes.hpp"
#include "tsum/kernels.hpp"

namespace tsum::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::int64_t kParallelThreshold = 32 * 1024;

bool worth_parallel(std::size_t m, std::size_t n, std::size_t k) {
  return static_cast<std::int64_t>(m * n * k) >= kParallelThreshold;
}

}  // namespace

namespace parallel {

int max_threads() {
#ifdef TSUM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  detail::check_nn(a, b, c);
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), n = b.cols();
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
#pragma omp parallel for schedule(static) if (worth_parallel(a.rows(), n, k))
  for (std::int64_t i = 0; i < m; ++i) {
    double* crow = cp + i * n;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = ap + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = bp + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  detail::check_nt(a, b, c);
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), n = b.rows();
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
#pragma omp parallel for schedule(static) if (worth_parallel(a.rows(), n, k))
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = ap + i * k;
    double* crow = cp + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = bp + j * k;
      double sum = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) sum += arow[p] * brow[p];
      crow[j] = sum;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  detail::check_tn(a, b, c);
  const std::int64_t m = static_cast<std::int64_t>(a.cols());
  const std::size_t k = a.rows(), n = b.cols();
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
#pragma omp parallel for schedule(static) if (worth_parallel(a.cols(), n, k))
  for (std::int64_t i = 0; i < m; ++i) {
    double* crow = cp + i * n;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ap[p * m + i];
      const double* brow = bp + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace parallel

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
#ifdef TSUM_HAVE_OPENMP
  parallel::gemm_nn(a, b, c, accumulate);
#else
  serial::gemm_nn(a, b, c, accumulate);
#endif
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
#ifdef TSUM_HAVE_OPENMP
  parallel::gemm_nt(a, b, c, accumulate);
#else
  serial::gemm_nt(a, b, c, accumulate);
#endif
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
#ifdef TSUM_HAVE_OPENMP
  parallel::gemm_tn(a, b, c, accumulate);
#else
  serial::gemm_tn(a, b, c, accumulate);
#endif
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  gemm_nn(a, b, c);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.rows());
  gemm_nt(a, b, c);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix c(a.cols(), b.cols());
  gemm_tn(a, b, c);
  return c;
}

}  // namespace tsum::kernels
