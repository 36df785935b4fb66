#include <gtest/gtest.h>

#include <random>

#include "tsum/kernels.hpp"

using namespace tsum;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (auto& x : m.flat()) x = g(rng);
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix naive(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

using Gemm = void (*)(const Matrix&, const Matrix&, Matrix&, bool);

struct Shape {
  std::size_t m, k, n;
};

constexpr Shape kShapes[] = {{1, 1, 1}, {3, 5, 2}, {17, 9, 33}, {64, 64, 64}, {130, 7, 301}, {0, 4, 3}};

}  // namespace

TEST(Kernels, SerialMatchesNaive) {
  std::mt19937_64 rng(1);
  for (auto s : kShapes) {
    auto a = random_matrix(rng, s.m, s.k), b = random_matrix(rng, s.k, s.n);
    const auto want = naive(a, b);
    Matrix c(s.m, s.n);
    kernels::serial::gemm_nn(a, b, c);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], want.data()[i], 1e-12);
    kernels::serial::gemm_nt(a, transpose(b), c);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], want.data()[i], 1e-12);
    kernels::serial::gemm_tn(transpose(a), b, c);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], want.data()[i], 1e-12);
  }
}

TEST(Kernels, ParallelBitIdenticalToSerial) {
  std::mt19937_64 rng(2);
  const std::pair<Gemm, Gemm> pairs[] = {{kernels::serial::gemm_nn, kernels::parallel::gemm_nn},
                                         {kernels::serial::gemm_nt, kernels::parallel::gemm_nt},
                                         {kernels::serial::gemm_tn, kernels::parallel::gemm_tn}};
  for (auto s : kShapes) {
    for (std::size_t which = 0; which < 3; ++which) {
      Matrix a = which == 2 ? random_matrix(rng, s.k, s.m) : random_matrix(rng, s.m, s.k);
      Matrix b = which == 1 ? random_matrix(rng, s.n, s.k) : random_matrix(rng, s.k, s.n);
      for (bool acc : {false, true}) {
        Matrix c1 = random_matrix(rng, s.m, s.n), c2 = c1;
        pairs[which].first(a, b, c1, acc);
        pairs[which].second(a, b, c2, acc);
        ASSERT_EQ(c1, c2) << which << " " << s.m << "x" << s.k << "x" << s.n;
      }
    }
  }
}

TEST(Kernels, AccumulateAdds) {
  std::mt19937_64 rng(3);
  auto a = random_matrix(rng, 6, 4), b = random_matrix(rng, 4, 5);
  Matrix c = random_matrix(rng, 6, 5);
  const Matrix start = c;
  kernels::gemm_nn(a, b, c, true);
  const auto prod = naive(a, b);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], start.data()[i] + prod.data()[i], 1e-12);
  kernels::gemm_nn(a, b, c, false);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], prod.data()[i], 1e-12);
}

TEST(Kernels, AllocatingHelpers) {
  std::mt19937_64 rng(4);
  auto a = random_matrix(rng, 5, 3), b = random_matrix(rng, 3, 7);
  EXPECT_EQ(kernels::matmul(a, b), kernels::matmul_nt(a, transpose(b)));
  EXPECT_EQ(kernels::matmul(a, b), kernels::matmul_tn(transpose(a), b));
  EXPECT_GE(kernels::parallel::max_threads(), 1);
}
