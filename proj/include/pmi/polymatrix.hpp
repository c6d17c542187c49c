#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "pmi/poly.hpp"

namespace pmi {

// Square matrix with polynomial entries. The symmetric flag is validated
// term-for-term on construction (set_symmetric) and recomputed for products.
template <typename K>
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int size, int n, int m)
      : size_(size), n_(n), m_(m), entries_(size * size, Poly<K>(n, m)) {
    if (size <= 0) throw std::invalid_argument("matrix size must be positive");
  }

  static PolyMatrix identity(int size, int n, int m) {
    PolyMatrix I(size, n, m);
    for (int i = 0; i < size; ++i)
      I.at(i, i) = Poly<K>::constant(n, m, CoeffTraits<K>::one());
    I.symmetric_ = true;
    return I;
  }

  static PolyMatrix scalar(const Poly<K>& p) {
    PolyMatrix M(1, p.n(), p.m());
    M.at(0, 0) = p;
    M.symmetric_ = true;
    return M;
  }

  int size() const { return size_; }
  int n() const { return n_; }
  int m() const { return m_; }
  bool symmetric() const { return symmetric_; }

  Poly<K>& at(int i, int j) { return entries_[i * size_ + j]; }
  const Poly<K>& at(int i, int j) const { return entries_[i * size_ + j]; }

  bool check_symmetry() const {
    for (int i = 0; i < size_; ++i)
      for (int j = i + 1; j < size_; ++j)
        if (!(at(i, j) == at(j, i))) return false;
    return true;
  }

  void set_symmetric() {
    if (!check_symmetry()) {
      throw std::invalid_argument("matrix is not symmetric term-for-term");
    }
    symmetric_ = true;
  }

  void recompute_symmetry() { symmetric_ = check_symmetry(); }

  bool is_zero() const {
    for (const auto& e : entries_)
      if (!e.is_zero()) return false;
    return true;
  }

  PolyMatrix& operator+=(const PolyMatrix& o) {
    check_compat(o);
    for (size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    symmetric_ = symmetric_ && o.symmetric_;
    return *this;
  }
  PolyMatrix& operator-=(const PolyMatrix& o) {
    check_compat(o);
    for (size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    symmetric_ = symmetric_ && o.symmetric_;
    return *this;
  }
  friend PolyMatrix operator+(PolyMatrix a, const PolyMatrix& b) { return a += b; }
  friend PolyMatrix operator-(PolyMatrix a, const PolyMatrix& b) { return a -= b; }

  friend PolyMatrix operator*(const K& s, const PolyMatrix& M) {
    PolyMatrix r(M.size_, M.n_, M.m_);
    for (size_t k = 0; k < M.entries_.size(); ++k) r.entries_[k] = s * M.entries_[k];
    r.symmetric_ = M.symmetric_;
    return r;
  }

  friend PolyMatrix operator*(const Poly<K>& p, const PolyMatrix& M) {
    PolyMatrix r(M.size_, M.n_, M.m_);
    for (size_t k = 0; k < M.entries_.size(); ++k) r.entries_[k] = p * M.entries_[k];
    r.symmetric_ = M.symmetric_;
    return r;
  }

  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.size_ != b.size_) throw std::invalid_argument("matrix size mismatch");
    a.check_vars(b);
    PolyMatrix r(a.size_, a.n_, a.m_);
    for (int i = 0; i < a.size_; ++i)
      for (int j = 0; j < a.size_; ++j) {
        Poly<K> acc(a.n_, a.m_);
        for (int k = 0; k < a.size_; ++k) acc += a.at(i, k) * b.at(k, j);
        r.at(i, j) = std::move(acc);
      }
    r.recompute_symmetry();
    return r;
  }

  bool operator==(const PolyMatrix& o) const {
    return size_ == o.size_ && n_ == o.n_ && m_ == o.m_ && entries_ == o.entries_;
  }

  PolyMatrix transpose() const {
    PolyMatrix r(size_, n_, m_);
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) r.at(i, j) = at(j, i);
    r.symmetric_ = symmetric_;
    return r;
  }

  Eigen::MatrixXd eval(const std::vector<double>& xs,
                       const std::vector<double>& ys = {}) const {
    Eigen::MatrixXd M(size_, size_);
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) M(i, j) = at(i, j).template eval<double>(xs, ys);
    return M;
  }

  // Union of the x-supports of all entries.
  std::vector<Exps> support_x() const {
    std::vector<Exps> out;
    auto seen = [&out](const Exps& a) {
      for (const auto& b : out)
        if (a == b) return true;
      return false;
    };
    for (const auto& e : entries_)
      for (const auto& [mo, c] : e.terms())
        if (!seen(mo.ax)) out.push_back(mo.ax);
    return out;
  }

  std::vector<Exps> support_y() const {
    std::vector<Exps> out;
    auto seen = [&out](const Exps& a) {
      for (const auto& b : out)
        if (a == b) return true;
      return false;
    };
    for (const auto& e : entries_)
      for (const auto& [mo, c] : e.terms())
        if (!seen(mo.ay)) out.push_back(mo.ay);
    return out;
  }

  // Coefficient matrix of x^alpha (entries still polynomial in y).
  PolyMatrix coeff_matrix_x(const Exps& alpha) const {
    PolyMatrix r(size_, n_, m_);
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j)
        for (const auto& [mo, c] : at(i, j).terms())
          if (mo.ax == alpha) r.at(i, j).add_term(mo, c);
    r.symmetric_ = symmetric_;
    return r;
  }

  // Constant coefficient matrix of x^alpha y^beta.
  Eigen::MatrixXd coeff_matrix_d(const Exps& alpha, const Exps& beta) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(size_, size_);
    Monomial mo(alpha, beta);
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) M(i, j) = to_double(at(i, j).coeff(mo));
    return M;
  }

 private:
  void check_vars(const PolyMatrix& o) const {
    if (n_ != o.n_ || m_ != o.m_) throw std::invalid_argument("variable count mismatch");
  }
  void check_compat(const PolyMatrix& o) const {
    if (size_ != o.size_) throw std::invalid_argument("matrix size mismatch");
    check_vars(o);
  }

  int size_ = 0;
  int n_ = 0;
  int m_ = 0;
  std::vector<Poly<K>> entries_;
  bool symmetric_ = false;
};

using PolyMatQ = PolyMatrix<Rat>;
using PolyMatD = PolyMatrix<double>;

template <typename K>
PolyMatrix<double> to_double_matrix(const PolyMatrix<K>& M) {
  PolyMatrix<double> r(M.size(), M.n(), M.m());
  for (int i = 0; i < M.size(); ++i)
    for (int j = 0; j < M.size(); ++j) r.at(i, j) = to_double_poly(M.at(i, j));
  r.recompute_symmetry();
  return r;
}

// Tr_p: for C with p x p blocks of size q x q, returns the p x p matrix of
// block traces tr(C_ij).
template <typename K>
PolyMatrix<K> trace_p(const PolyMatrix<K>& C, int p) {
  if (p <= 0 || C.size() % p != 0) {
    throw std::invalid_argument("side not divisible into p blocks");
  }
  int q = C.size() / p;
  PolyMatrix<K> R(p, C.n(), C.m());
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      Poly<K> acc(C.n(), C.m());
      for (int g = 0; g < q; ++g) acc += C.at(i * q + g, j * q + g);
      R.at(i, j) = std::move(acc);
    }
  R.recompute_symmetry();
  return R;
}

// <A,B>_p = Tr_p(A^T (I_p (x) B)) for A of side p*q and B of side q.
// Entry (i,j) equals tr(A_ji^T B) where A_ji is the (j,i) block of A.
template <typename K>
PolyMatrix<K> bilinear_p(const PolyMatrix<K>& A, const PolyMatrix<K>& B, int p) {
  int q = B.size();
  if (A.size() != p * q) throw std::invalid_argument("dimension mismatch in <.,.>_p");
  if (A.n() != B.n() || A.m() != B.m())
    throw std::invalid_argument("variable count mismatch in <.,.>_p");
  PolyMatrix<K> R(p, A.n(), A.m());
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      Poly<K> acc(A.n(), A.m());
      for (int g = 0; g < q; ++g)
        for (int h = 0; h < q; ++h) acc += A.at(j * q + g, i * q + h) * B.at(g, h);
      R.at(i, j) = std::move(acc);
    }
  R.recompute_symmetry();
  return R;
}

template <typename K>
PolyMatrix<K> kron(const PolyMatrix<K>& A, const PolyMatrix<K>& B) {
  if (A.n() != B.n() || A.m() != B.m())
    throw std::invalid_argument("variable count mismatch in kron");
  int ra = A.size(), rb = B.size();
  PolyMatrix<K> R(ra * rb, A.n(), A.m());
  for (int i = 0; i < ra; ++i)
    for (int j = 0; j < ra; ++j)
      for (int k = 0; k < rb; ++k)
        for (int l = 0; l < rb; ++l)
          R.at(i * rb + k, j * rb + l) = A.at(i, j) * B.at(k, l);
  R.recompute_symmetry();
  return R;
}

template <typename K>
Poly<K> trace(const PolyMatrix<K>& M) {
  Poly<K> t(M.n(), M.m());
  for (int i = 0; i < M.size(); ++i) t += M.at(i, i);
  return t;
}

// Degree data of a polynomial matrix. deg_x/deg_y/deg are -1 sentinels for
// the zero matrix; d_half is max_ij floor(deg_x(H_ij)/2)+1 (defaults to 1 on
// the zero matrix) and d_ceil is ceil(deg_x(H)/2) (0 on the zero matrix).
struct DegreeInfo {
  int deg_x = -1;
  int deg_y = -1;
  int deg = -1;
  int d_half = 1;
  int d_ceil = 0;
};

template <typename K>
DegreeInfo degrees(const PolyMatrix<K>& H) {
  DegreeInfo info;
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j) {
      const auto& e = H.at(i, j);
      if (e.is_zero()) continue;
      info.deg_x = std::max(info.deg_x, e.deg_x());
      info.deg_y = std::max(info.deg_y, e.deg_y());
      info.deg = std::max(info.deg, e.deg());
      info.d_half = std::max(info.d_half, e.deg_x() / 2 + 1);
    }
  if (info.deg_x > 0) info.d_ceil = (info.deg_x + 1) / 2;
  return info;
}

template <typename K>
bool homogeneous_x(const PolyMatrix<K>& H, int deg) {
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j)
      if (!H.at(i, j).homogeneous_x(deg)) return false;
  return true;
}

// Entry-wise x_{n+1}^{2d} H_ij(x / x_{n+1}); the result is homogeneous in
// (x, x_{n+1}) of degree 2d and has n+1 x-variables.
template <typename K>
PolyMatrix<K> homogenize(const PolyMatrix<K>& H, int two_d) {
  DegreeInfo info = degrees(H);
  if (two_d < std::max(0, info.deg_x)) {
    throw std::invalid_argument("homogenization degree below deg_x");
  }
  PolyMatrix<K> R(H.size(), H.n() + 1, H.m());
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j)
      for (const auto& [mo, c] : H.at(i, j).terms()) {
        Exps ax = mo.ax;
        ax.push_back(two_d - mo.deg_x());
        R.at(i, j).add_term(Monomial(std::move(ax), mo.ay), c);
      }
  R.recompute_symmetry();
  return R;
}

// Substitutes x_{n+1} = 1 and drops the last x-variable.
template <typename K>
PolyMatrix<K> dehomogenize(const PolyMatrix<K>& H) {
  if (H.n() < 1) throw std::invalid_argument("no variable to drop");
  PolyMatrix<K> R(H.size(), H.n() - 1, H.m());
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j)
      for (const auto& [mo, c] : H.at(i, j).terms()) {
        Exps ax(mo.ax.begin(), mo.ax.end() - 1);
        R.at(i, j).add_term(Monomial(std::move(ax), mo.ay), c);
      }
  R.recompute_symmetry();
  return R;
}

// Rebuilds with m = 0; the input must not involve y.
template <typename K>
PolyMatrix<K> strip_y(const PolyMatrix<K>& H) {
  PolyMatrix<K> R(H.size(), H.n(), 0);
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j)
      for (const auto& [mo, c] : H.at(i, j).terms()) {
        if (mo.deg_y() != 0)
          throw std::invalid_argument("matrix unexpectedly involves y");
        R.at(i, j).add_term(Monomial(mo.ax, {}), c);
      }
  R.recompute_symmetry();
  return R;
}

// diag(M_1, ..., M_t).
template <typename K>
PolyMatrix<K> block_diag(const std::vector<PolyMatrix<K>>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("empty block list");
  int total = 0;
  for (const auto& b : blocks) total += b.size();
  PolyMatrix<K> R(total, blocks[0].n(), blocks[0].m());
  int off = 0;
  for (const auto& b : blocks) {
    if (b.n() != blocks[0].n() || b.m() != blocks[0].m())
      throw std::invalid_argument("variable count mismatch in block_diag");
    for (int i = 0; i < b.size(); ++i)
      for (int j = 0; j < b.size(); ++j) R.at(off + i, off + j) = b.at(i, j);
    off += b.size();
  }
  R.recompute_symmetry();
  return R;
}

}  // namespace pmi
