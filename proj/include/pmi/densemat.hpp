#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "pmi/rational.hpp"

namespace pmi {

// Minimal dense matrix over K. Used for exact rational Gram data; the float
// path uses Eigen directly.
template <typename K>
class DenseMat {
 public:
  DenseMat() = default;
  DenseMat(int rows, int cols)
      : rows_(rows), cols_(cols), data_(size_t(rows) * cols, K(0)) {}

  static DenseMat identity(int nn) {
    DenseMat I(nn, nn);
    for (int i = 0; i < nn; ++i) I(i, i) = K(1);
    return I;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  K& operator()(int i, int j) { return data_[size_t(i) * cols_ + j]; }
  const K& operator()(int i, int j) const { return data_[size_t(i) * cols_ + j]; }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<K> data_;
};

using MatQ = DenseMat<Rat>;

inline Eigen::MatrixXd to_eigen(const MatQ& M) {
  Eigen::MatrixXd E(M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) E(i, j) = to_double(M(i, j));
  return E;
}

inline MatQ from_eigen_exact(const Eigen::MatrixXd& E) {
  MatQ M(E.rows(), E.cols());
  for (int i = 0; i < E.rows(); ++i)
    for (int j = 0; j < E.cols(); ++j) M(i, j) = Rat(E(i, j));
  return M;
}

// Exact PD test: all LDL^T pivots strictly positive (no pivoting needed for
// a PD matrix; a zero or negative pivot certifies the failure).
inline bool is_pd_exact(MatQ A) {
  if (!A.is_symmetric()) return false;
  int nn = A.rows();
  for (int k = 0; k < nn; ++k) {
    if (!(A(k, k) > 0)) return false;
    for (int i = k + 1; i < nn; ++i)
      for (int j = k + 1; j < nn; ++j) A(i, j) -= A(i, k) * A(k, j) / A(k, k);
  }
  return true;
}

// Exact PSD test by symmetric Gaussian elimination with diagonal pivoting
// (an LDL^T witness). A symmetric matrix is PSD iff at every step either a
// strictly positive diagonal pivot exists, or the remaining diagonal is all
// zero and then the whole remaining block must vanish.
inline bool is_psd_exact(MatQ A) {
  if (!A.is_symmetric()) return false;
  int nn = A.rows();
  std::vector<int> active(nn);
  for (int i = 0; i < nn; ++i) active[i] = i;

  while (!active.empty()) {
    int pivot = -1;
    for (int idx : active) {
      if (sgn(A(idx, idx)) > 0) {
        pivot = idx;
        break;
      }
      if (sgn(A(idx, idx)) < 0) return false;
    }
    if (pivot < 0) {
      // All remaining diagonal entries are zero; PSD forces the block to 0.
      for (int i : active)
        for (int j : active)
          if (A(i, j) != 0) return false;
      return true;
    }
    std::vector<int> rest;
    for (int idx : active)
      if (idx != pivot) rest.push_back(idx);
    const Rat d = A(pivot, pivot);
    for (int i : rest)
      for (int j : rest) A(i, j) -= A(i, pivot) * A(pivot, j) / d;
    active = std::move(rest);
  }
  return true;
}

}  // namespace pmi
