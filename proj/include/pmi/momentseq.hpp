#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmi/basis.hpp"
#include "pmi/gram.hpp"
#include "pmi/measure.hpp"
#include "pmi/polymatrix.hpp"

namespace pmi {

struct GrlexLess {
  bool operator()(const Exps& a, const Exps& b) const { return grlex_less(a, b); }
};

// Truncated matrix-valued moment sequence: S_alpha in S^p for |alpha| <= 2*d_cap.
template <typename K>
struct MomentSeq {
  int p = 1;
  int n = 0;
  int d_cap = 0;
  std::map<Exps, DenseMat<K>, GrlexLess> S;

  static MomentSeq zero(int p, int n, int d_cap) {
    MomentSeq s;
    s.p = p;
    s.n = n;
    s.d_cap = d_cap;
    for (const auto& a : exponents_up_to(n, 2 * d_cap)) s.S[a] = DenseMat<K>(p, p);
    return s;
  }

  const DenseMat<K>& get(const Exps& alpha) const {
    auto it = S.find(alpha);
    if (it == S.end()) throw std::out_of_range("moment sequence truncation exceeded");
    return it->second;
  }

  void set(const Exps& alpha, DenseMat<K> value) {
    if ((int)alpha.size() != n) throw std::invalid_argument("index arity mismatch");
    if (value.rows() != p || value.cols() != p)
      throw std::invalid_argument("moment block size mismatch");
    S[alpha] = std::move(value);
  }
};

using MomentSeqD = MomentSeq<double>;
using MomentSeqQ = MomentSeq<Rat>;

// Riesz functional L_S(H) = sum_alpha tr(H_alpha S_alpha); H lives in R[x]^p.
template <typename K>
K riesz(const MomentSeq<K>& seq, const PolyMatrix<K>& H) {
  if (H.size() != seq.p) throw std::invalid_argument("block size mismatch");
  K acc = K(0);
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j)
      for (const auto& [mo, c] : H.at(i, j).terms()) {
        if (mo.deg_y() != 0) throw std::invalid_argument("H must not involve y");
        const auto& Sa = seq.get(mo.ax);
        acc += c * Sa(j, i);
      }
  return acc;
}

// M_d(S): block (a,b) = S_{alpha_a + alpha_b}, side p * |N^n_d|.
template <typename K>
DenseMat<K> moment_matrix(const MomentSeq<K>& seq, int d) {
  if (d > seq.d_cap) throw std::out_of_range("moment matrix order exceeds truncation");
  auto basis = exponents_up_to(seq.n, d);
  const int p = seq.p;
  DenseMat<K> M(int(basis.size()) * p, int(basis.size()) * p);
  for (size_t a = 0; a < basis.size(); ++a)
    for (size_t b = 0; b < basis.size(); ++b) {
      Exps sum(seq.n);
      for (int t = 0; t < seq.n; ++t) sum[t] = basis[a][t] + basis[b][t];
      const auto& Sab = seq.get(sum);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) M(int(a) * p + i, int(b) * p + j) = Sab(i, j);
    }
  return M;
}

// M_d(HS): block (a,b) = sum_gamma S_{alpha_a+alpha_b+gamma} (x) H_gamma.
template <typename K>
DenseMat<K> localizing_matrix(const MomentSeq<K>& seq, const PolyMatrix<K>& H, int d) {
  if (H.m() != 0) throw std::invalid_argument("localizing_matrix expects H in x only");
  DegreeInfo info = degrees(H);
  if (2 * d + std::max(0, info.deg_x) > 2 * seq.d_cap)
    throw std::out_of_range("localizing matrix order exceeds truncation");
  auto basis = exponents_up_to(seq.n, d);
  const int p = seq.p, q = H.size();
  const int B = p * q;
  DenseMat<K> M(int(basis.size()) * B, int(basis.size()) * B);
  auto supp = H.support_x();
  for (size_t a = 0; a < basis.size(); ++a)
    for (size_t b = 0; b < basis.size(); ++b)
      for (const auto& gamma : supp) {
        Exps sum(seq.n);
        for (int t = 0; t < seq.n; ++t) sum[t] = basis[a][t] + basis[b][t] + gamma[t];
        const auto& Sg = seq.get(sum);
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < p; ++j)
            for (int g = 0; g < q; ++g)
              for (int h = 0; h < q; ++h) {
                K hc = H.at(g, h).coeff(Monomial(gamma, {}));
                if (hc != K(0))
                  M(int(a) * B + i * q + g, int(b) * B + j * q + h) += Sg(i, j) * hc;
              }
      }
  return M;
}

// M^nu_{d,k}(GS): rows/columns indexed by N^n_d x N^m_k in [x]_d (x) [y]_k
// order; block ((a,e),(b,f)) = sum_gamma mom(gamma+beta_e+beta_f) *
// sum_zeta S_{alpha_a+alpha_b+zeta} (x) G_{gamma,zeta}.
template <typename K>
DenseMat<K> localizing_nu(const MomentSeq<K>& seq, const PolyMatrix<K>& G,
                          const MeasureSpec& nu, int d, int k) {
  DegreeInfo info = degrees(G);
  if (2 * d + std::max(0, info.deg_x) > 2 * seq.d_cap)
    throw std::out_of_range("localizing matrix order exceeds truncation");
  if (G.m() != nu.m()) throw std::invalid_argument("y arity mismatch with measure");
  auto bx = exponents_up_to(seq.n, d);
  auto by = exponents_up_to(nu.m(), k);
  const int p = seq.p, q = G.size();
  const int B = p * q;
  const int Nk = int(by.size());
  DenseMat<K> M(int(bx.size()) * Nk * B, int(bx.size()) * Nk * B);

  // Collect G's terms once: (gamma, zeta) -> coefficient matrix entries.
  struct GTerm {
    Exps gamma, zeta;
    int g, h;
    K c;
  };
  std::vector<GTerm> terms;
  for (int g = 0; g < q; ++g)
    for (int h = 0; h < q; ++h)
      for (const auto& [mo, c] : G.at(g, h).terms())
        terms.push_back({mo.ay, mo.ax, g, h, c});

  for (size_t a = 0; a < bx.size(); ++a)
    for (size_t e = 0; e < by.size(); ++e)
      for (size_t b = 0; b < bx.size(); ++b)
        for (size_t f = 0; f < by.size(); ++f) {
          const int row0 = (int(a) * Nk + int(e)) * B;
          const int col0 = (int(b) * Nk + int(f)) * B;
          for (const auto& t : terms) {
            Exps ybeta(nu.m());
            for (int u = 0; u < nu.m(); ++u)
              ybeta[u] = t.gamma[u] + by[e][u] + by[f][u];
            K mom;
            if constexpr (std::is_same_v<K, Rat>) {
              mom = nu.moment(ybeta);
            } else {
              mom = nu.moment_d(ybeta);
            }
            if (mom == K(0)) continue;
            Exps sum(seq.n);
            for (int u = 0; u < seq.n; ++u)
              sum[u] = bx[a][u] + bx[b][u] + t.zeta[u];
            const auto& Sg = seq.get(sum);
            for (int i = 0; i < p; ++i)
              for (int j = 0; j < p; ++j)
                M(row0 + i * q + t.g, col0 + j * q + t.h) += mom * Sg(i, j) * t.c;
          }
        }
  return M;
}

// Both sides of the duality identity
//   L_S( integral <Sigma, G>_p dnu ) = < M^nu_{d,k}(GS), Q >
// for Sigma the Gram form of Q over [x]_d (x) [y]_k (x) I_{pq}.
template <typename K>
std::pair<K, K> riesz_gram_pairing(const MomentSeq<K>& seq, const DenseMat<K>& Q,
                                   const PolyMatrix<K>& G, const MeasureSpec& nu,
                                   int d, int k) {
  const int p = seq.p, q = G.size();
  SOSGram<K> gram;
  gram.basis = product_basis(exponents_up_to(seq.n, d), exponents_up_to(nu.m(), k));
  gram.block = p * q;
  gram.n = seq.n;
  gram.m = nu.m();
  gram.Z = Q;
  gram.check();
  PolyMatrix<K> paired = bilinear_p(expand_gram(gram), G, p);
  K lhs = riesz(seq, integrate_y(paired, nu));

  DenseMat<K> M = localizing_nu(seq, G, nu, d, k);
  if (M.rows() != Q.rows()) throw std::invalid_argument("Gram side mismatch");
  K rhs = K(0);
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) rhs += M(i, j) * Q(i, j);
  return {lhs, rhs};
}

// Truncated necessary test for the exponentially bounded matrix moment
// problem: eigenvalue floors on M_d(S) and M^nu_{d-d(G),k}(GS) plus the
// ||S_alpha|| <= tr(S_0) C^{|alpha|} growth bound. Necessary only: the full
// characterization quantifies over all orders.
struct BmpReport {
  double min_eig_moment = 0.0;
  double min_eig_localizing = 0.0;
  bool has_localizing = false;
  double max_growth_violation = 0.0;  // max over alpha of ||S_a|| - tr(S_0) C^|a|
  Exps worst_alpha;
  bool pass = false;
  std::string note = "truncated necessary test only";
};

BmpReport bmp_check(const MomentSeq<double>& seq,
                    const std::optional<PolyMatrix<double>>& G,
                    const std::optional<MeasureSpec>& nu, double C, int d, int k,
                    double eig_floor = 1e-9);

// Moment sequence of the discrete matrix measure Phi = sum_i w_i V_i dirac(u_i):
// S_alpha = sum_i w_i u_i^alpha V_i. Test harness for the necessary test.
template <typename K>
MomentSeq<K> moments_from_atoms(int p, int n, int d_cap,
                                const std::vector<std::vector<K>>& points,
                                const std::vector<DenseMat<K>>& weights) {
  if (points.size() != weights.size())
    throw std::invalid_argument("atom count mismatch");
  MomentSeq<K> seq = MomentSeq<K>::zero(p, n, d_cap);
  for (auto& [alpha, Sa] : seq.S) {
    for (size_t t = 0; t < points.size(); ++t) {
      K power = K(1);
      for (int u = 0; u < n; ++u)
        for (int e = 0; e < alpha[u]; ++e) power *= points[t][u];
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) Sa(i, j) += power * weights[t](i, j);
    }
  }
  return seq;
}

}  // namespace pmi
