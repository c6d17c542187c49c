#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmi/basis.hpp"
#include "pmi/densemat.hpp"
#include "pmi/measure.hpp"
#include "pmi/polymatrix.hpp"

namespace pmi {

// Gram form of an SOS matrix: Sigma = (u (x) I_block)^T Z (u (x) I_block),
// where u is the monomial basis (possibly a product basis over x and y) and
// block is the matrix dimension being certified (p, or p*q in the two
// variable-group case). Row index layout is basis-major: (a, r) -> a*block+r.
template <typename K>
struct SOSGram {
  std::vector<Monomial> basis;
  int block = 1;
  int n = 0;
  int m = 0;
  DenseMat<K> Z;

  int side() const { return int(basis.size()) * block; }

  void check() const {
    if (Z.rows() != Z.cols() || Z.rows() != side()) {
      throw std::invalid_argument("Gram side does not match basis x block");
    }
  }
};

using GramQ = SOSGram<Rat>;
using GramD = SOSGram<double>;

inline SOSGram<double> to_double_gram(const SOSGram<Rat>& g) {
  SOSGram<double> r;
  r.basis = g.basis;
  r.block = g.block;
  r.n = g.n;
  r.m = g.m;
  r.Z = DenseMat<double>(g.Z.rows(), g.Z.cols());
  for (int i = 0; i < g.Z.rows(); ++i)
    for (int j = 0; j < g.Z.cols(); ++j) r.Z(i, j) = to_double(g.Z(i, j));
  return r;
}

inline Eigen::MatrixXd to_eigen(const DenseMat<double>& M) {
  Eigen::MatrixXd E(M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) E(i, j) = M(i, j);
  return E;
}

inline DenseMat<double> from_eigen(const Eigen::MatrixXd& E) {
  DenseMat<double> M(E.rows(), E.cols());
  for (int i = 0; i < E.rows(); ++i)
    for (int j = 0; j < E.cols(); ++j) M(i, j) = E(i, j);
  return M;
}

struct PsdCheck {
  bool ok = false;
  double min_eig = 0.0;  // float mode only
  std::string detail;
};

// Float Grams: symmetrize then eigenvalue floor. Rational Grams: exact LDL^T.
inline PsdCheck validate_psd(const SOSGram<double>& g, double floor = 1e-8) {
  g.check();
  Eigen::MatrixXd Z = to_eigen(g.Z);
  Z = 0.5 * (Z + Z.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z);
  PsdCheck r;
  r.min_eig = Z.rows() == 0 ? 0.0 : es.eigenvalues().minCoeff();
  r.ok = r.min_eig >= -floor;
  r.detail = r.ok ? "eigenvalue floor satisfied" : "negative eigenvalue";
  return r;
}

inline PsdCheck validate_psd(const SOSGram<Rat>& g, double = 0.0) {
  g.check();
  PsdCheck r;
  r.ok = is_psd_exact(g.Z);
  r.detail = r.ok ? "exact LDL^T witness" : "not PSD in exact arithmetic";
  return r;
}

// Expands the Gram quadratic form into the polynomial matrix it represents.
template <typename K>
PolyMatrix<K> expand_gram(const SOSGram<K>& g) {
  g.check();
  PolyMatrix<K> R(g.block, g.n, g.m);
  const int B = g.block;
  for (size_t a = 0; a < g.basis.size(); ++a)
    for (size_t b = 0; b < g.basis.size(); ++b) {
      Monomial mono = g.basis[a] * g.basis[b];
      for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j) {
          const K& z = g.Z(int(a) * B + i, int(b) * B + j);
          if (z != K(0)) R.at(i, j).add_term(mono, z);
        }
    }
  R.recompute_symmetry();
  return R;
}

// Sigma_0(x) + integral_Y <Sigma(x,y), G(x,y)>_p dnu(y), the generic element
// of the matrix quadratic module generated by G and nu.
template <typename K>
PolyMatrix<K> qmodule_element(const SOSGram<K>& sigma0, const SOSGram<K>& sigma,
                              const PolyMatrix<K>& G, const MeasureSpec& nu) {
  const int p = sigma0.block;
  const int q = G.size();
  if (sigma.block != p * q) {
    throw std::invalid_argument("Sigma block incompatible with I_p (x) G");
  }
  PolyMatrix<K> acc = expand_gram(sigma0);
  PolyMatrix<K> paired = bilinear_p(expand_gram(sigma), G, p);
  acc += integrate_y(paired, nu);
  return acc;
}

// Lemma-style splitting: for H = diag(H_1,...,H_t) with sizes r_j, a Gram of
// block p*(r_1+...+r_t) splits into Grams of block p*r_j given by principal
// submatrices, and <Sigma, diag(H)>_p = sum_j <Sigma_j, H_j>_p exactly.
template <typename K>
std::vector<SOSGram<K>> block_split(const SOSGram<K>& sigma,
                                    const std::vector<int>& sizes, int p) {
  sigma.check();
  int r = 0;
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("block sizes must be positive");
    r += s;
  }
  if (sigma.block != p * r) {
    throw std::invalid_argument("block sizes do not sum to Sigma block / p");
  }
  std::vector<SOSGram<K>> out;
  int off = 0;
  for (int s : sizes) {
    // Matrix-dimension indices kept for this piece: (c-1)r + off .. +s, c in [p].
    std::vector<int> keep;
    for (int c = 0; c < p; ++c)
      for (int t = 0; t < s; ++t) keep.push_back(c * r + off + t);
    SOSGram<K> piece;
    piece.basis = sigma.basis;
    piece.block = p * s;
    piece.n = sigma.n;
    piece.m = sigma.m;
    piece.Z = DenseMat<K>(int(sigma.basis.size()) * p * s,
                          int(sigma.basis.size()) * p * s);
    for (size_t a = 0; a < sigma.basis.size(); ++a)
      for (size_t b = 0; b < sigma.basis.size(); ++b)
        for (size_t u = 0; u < keep.size(); ++u)
          for (size_t v = 0; v < keep.size(); ++v)
            piece.Z(int(a) * p * s + int(u), int(b) * p * s + int(v)) =
                sigma.Z(int(a) * sigma.block + keep[u],
                        int(b) * sigma.block + keep[v]);
    out.push_back(std::move(piece));
    off += s;
  }
  return out;
}

// tr((I_q - G/M)^{2k} G) * I_p, the constructive multiplier. The matrix power
// is expanded by repeated squaring on the polynomial matrix.
template <typename K>
PolyMatrix<K> multiplier_power(const PolyMatrix<K>& G, const K& M, int k, int p) {
  if (!(M > K(0))) throw std::invalid_argument("M must be positive");
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  const int q = G.size();
  PolyMatrix<K> A = PolyMatrix<K>::identity(q, G.n(), G.m());
  A -= (CoeffTraits<K>::one() / M) * G;
  PolyMatrix<K> A2 = A * A;
  PolyMatrix<K> P = PolyMatrix<K>::identity(q, G.n(), G.m());
  int e = k;
  while (e > 0) {  // P = (A^2)^k
    if (e & 1) P = P * A2;
    A2 = A2 * A2;
    e >>= 1;
  }
  Poly<K> scalar = trace(P * G);
  PolyMatrix<K> R = PolyMatrix<K>::identity(p, G.n(), G.m());
  return scalar * R;
}

}  // namespace pmi
