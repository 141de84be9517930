#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "tenconv/real.hpp"

namespace tenconv::detail {

using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Row-major products on raw buffers. `accumulate` adds into C instead of
// overwriting it.

// C[m x n] (+)= A[m x k] * B[k x n]
inline void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n,
                    bool accumulate) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k), N = static_cast<Eigen::Index>(n);
  MatrixMap C(c, M, N);
  if (accumulate) {
    C.noalias() += ConstMatrixMap(a, M, K) * ConstMatrixMap(b, K, N);
  } else {
    C.noalias() = ConstMatrixMap(a, M, K) * ConstMatrixMap(b, K, N);
  }
}

// C[m x n] (+)= A[m x k] * B[n x k]^T
inline void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n,
                    bool accumulate) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k), N = static_cast<Eigen::Index>(n);
  MatrixMap C(c, M, N);
  if (accumulate) {
    C.noalias() += ConstMatrixMap(a, M, K) * ConstMatrixMap(b, N, K).transpose();
  } else {
    C.noalias() = ConstMatrixMap(a, M, K) * ConstMatrixMap(b, N, K).transpose();
  }
}

// C[m x n] (+)= A[k x m]^T * B[k x n]
inline void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n,
                    bool accumulate) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k), N = static_cast<Eigen::Index>(n);
  MatrixMap C(c, M, N);
  if (accumulate) {
    C.noalias() += ConstMatrixMap(a, K, M).transpose() * ConstMatrixMap(b, K, N);
  } else {
    C.noalias() = ConstMatrixMap(a, K, M).transpose() * ConstMatrixMap(b, K, N);
  }
}

}  // namespace tenconv::detail
