#pragma once

#include "tsum/tensor.hpp"

// Dense matrix products used by every layer of the model.
//
// Two implementations share one contract: `serial` is the plain reference
// kept for testing, `parallel` splits output rows across OpenMP threads.
// Both accumulate each output element over the inner dimension in the same
// ascending order, so their results are bit-identical (the library is built
// with -ffp-contract=off to keep it that way).
//
// All routines write C = op(A) * op(B), or C += ... when `accumulate` is set.
// C must already have the output shape.
namespace tsum::kernels {

namespace serial {
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
}  // namespace serial

namespace parallel {
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
int max_threads();
}  // namespace parallel

// Dispatch to the parallel kernels when built with OpenMP.
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);

// Allocating conveniences.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

}  // namespace tsum::kernels
