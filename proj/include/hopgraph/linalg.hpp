#pragma once

#include "hopgraph/core.hpp"

#include <cmath>

namespace hopgraph {

/// Sparse-dense product A·B. Each output row is accumulated over the stored
/// entries of the matching CSR row in ascending column order, so results are
/// bit-reproducible regardless of how rows are scheduled.
template <typename Scalar, typename Derived>
Matrix<Scalar> spmm(const Sparse<Scalar>& a, const Eigen::MatrixBase<Derived>& b) {
  require(a.cols() == b.rows(), "spmm: dimension mismatch " + shape_str(a.rows(), a.cols()) +
                                    " * " + shape_str(b.rows(), b.cols()));
  require(a.isCompressed(), "spmm: sparse operand must be compressed");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(a.rows(), b.cols());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const Scalar* values = a.valuePtr();
  for (Eigen::Index row = 0; row < a.rows(); ++row) {
    auto dst = out.row(row);
    for (int p = outer[row]; p < outer[row + 1]; ++p) {
      dst.noalias() += values[p] * b.row(inner[p]);
    }
  }
  return out;
}

/// Dense product with shape checking. Uses Eigen's single-threaded GEMM
/// kernel, whose blocking (and therefore accumulation order) depends only on
/// the operand shapes.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  require(a.cols() == b.rows(), "matmul: dimension mismatch " + shape_str(a.rows(), a.cols()) +
                                    " * " + shape_str(b.rows(), b.cols()));
  Matrix<typename DerivedA::Scalar> out(a.rows(), b.cols());
  out.noalias() = a * b;
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <typename Scalar>
Matrix<Scalar> to_dense(const Sparse<Scalar>& a) {
  return Matrix<Scalar>(a);
}

template <typename Scalar>
Sparse<Scalar> sparse_identity(Eigen::Index n) {
  Sparse<Scalar> id(n, n);
  id.setIdentity();
  id.makeCompressed();
  return id;
}

}  // namespace hopgraph
