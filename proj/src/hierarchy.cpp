#include "pmi/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pmi/gram.hpp"
#include "pmi/verify.hpp"

namespace pmi {

namespace {

int ut_index(int i, int j, int p) {  // i <= j
  return i * p - i * (i - 1) / 2 + (j - i);
}

int ut_count(int p) { return p * (p + 1) / 2; }

// Accumulates coefficient-matching rows over (monomial, upper-tri entry)
// indices and converts them into ConicProblem equality rows.
class Assembler {
 public:
  Assembler(int p, std::vector<Exps> kappas) : p_(p), kappas_(std::move(kappas)) {
    int base = 0;
    for (const auto& k : kappas_) {
      base_row_.emplace(k, base);
      base += ut_count(p_);
    }
    rows_.resize(base);
  }

  int num_rows() const { return int(rows_.size()); }
  const std::vector<Exps>& kappas() const { return kappas_; }

  int row_of(const Exps& kappa, int i, int j) const {
    auto it = base_row_.find(kappa);
    if (it == base_row_.end()) return -1;
    if (i > j) std::swap(i, j);
    return it->second + ut_index(i, j, p_);
  }

  void add_psd(const Exps& kappa, int i, int j, int block, int R, int C, double w) {
    int row = row_of(kappa, i, j);
    if (row < 0)
      throw std::logic_error("Gram contribution outside the constrained support");
    if (R > C) std::swap(R, C);
    rows_[row].psd[{block, R, C}] += w;
  }

  void add_free(const Exps& kappa, int i, int j, int index, double w) {
    int row = row_of(kappa, i, j);
    if (row < 0) throw std::logic_error("free contribution outside support");
    rows_[row].free_[index] += w;
  }

  void set_rhs_from(const PolyMatrix<double>& target) {
    for (const auto& kappa : kappas_)
      for (int i = 0; i < p_; ++i)
        for (int j = i; j < p_; ++j) {
          double v = target.at(i, j).coeff(Monomial(kappa, Exps(target.m(), 0)));
          rows_[row_of(kappa, i, j)].rhs = v;
        }
  }

  void emit(ConicProblem& prob) const {
    for (const auto& acc : rows_) {
      ConicProblem::Row row;
      row.rhs = acc.rhs;
      for (const auto& [key, w] : acc.psd) {
        if (w == 0.0) continue;
        auto [block, R, C] = key;
        double coeff = (R == C) ? w : w / 2.0;
        row.entries.push_back({block, R, C, coeff});
      }
      for (const auto& [idx, w] : acc.free_) {
        if (w == 0.0) continue;
        row.free_entries.push_back({idx, w});
      }
      prob.rows.push_back(std::move(row));
    }
  }

 private:
  struct Accum {
    std::map<std::tuple<int, int, int>, double> psd;
    std::map<int, double> free_;
    double rhs = 0.0;
  };

  int p_;
  std::vector<Exps> kappas_;
  std::map<Exps, int, GrlexLess> base_row_;
  std::vector<Accum> rows_;
};

// The Gram of a direct SOS summand: element(i,j) += sum_{a,b} u_a u_b
// Z[(a,i),(b,j)], entries restricted to x-monomials.
void scatter_direct(Assembler& asm_, const std::vector<Monomial>& basis, int p,
                    int block_index) {
  for (size_t a = 0; a < basis.size(); ++a)
    for (size_t b = 0; b < basis.size(); ++b) {
      Exps kappa(basis[a].ax.size());
      for (size_t t = 0; t < kappa.size(); ++t)
        kappa[t] = basis[a].ax[t] + basis[b].ax[t];
      for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j)
          asm_.add_psd(kappa, i, j, block_index, int(a) * p + i, int(b) * p + j, 1.0);
    }
}

// The Gram of a paired SOS summand Sigma with <Sigma, G>_p integrated over nu:
// element(i,j) at x^{alpha_a+alpha_b+zeta} accumulates
//   mom(beta_a+beta_b+gamma) * G_{gamma,zeta}[g,h] * Z[(a,(i,g)),(b,(j,h))].
void scatter_paired(Assembler& asm_, const std::vector<Monomial>& basis, int p,
                    const PolyMatrix<double>& G, const MeasureSpec& nu,
                    int block_index) {
  const int q = G.size();
  const int B = p * q;
  struct GTerm {
    Exps gamma, zeta;
    int g, h;
    double c;
  };
  std::vector<GTerm> terms;
  for (int g = 0; g < q; ++g)
    for (int h = 0; h < q; ++h)
      for (const auto& [mo, c] : G.at(g, h).terms())
        terms.push_back({mo.ay, mo.ax, g, h, c});

  const int n = G.n();
  for (size_t a = 0; a < basis.size(); ++a)
    for (size_t b = 0; b < basis.size(); ++b)
      for (const auto& t : terms) {
        Exps kappa(n);
        for (int u = 0; u < n; ++u)
          kappa[u] = basis[a].ax[u] + basis[b].ax[u] + t.zeta[u];
        Exps ybeta(nu.m());
        for (int u = 0; u < nu.m(); ++u)
          ybeta[u] = basis[a].ay[u] + basis[b].ay[u] + t.gamma[u];
        double mom = nu.moment_d(ybeta);
        if (mom == 0.0) continue;
        double w = mom * t.c;
        for (int i = 0; i < p; ++i)
          for (int j = i; j < p; ++j)
            asm_.add_psd(kappa, i, j, block_index, int(a) * B + i * q + t.g,
                         int(b) * B + j * q + t.h, w);
      }
}

int default_k(const PolyMatrix<Rat>& G, int k) {
  if (k >= 0) return k;
  int dy = std::max(0, degrees(G).deg_y);
  return (dy + 1) / 2;
}

std::vector<Exps> dedupe(std::vector<Exps> v) {
  std::set<Exps> s(v.begin(), v.end());
  return std::vector<Exps>(s.begin(), s.end());
}

PolyMatrix<Rat> require_F(const PMIProblem& prob) {
  if (prob.F) return strip_y(*prob.F);
  if (prob.scalar_f) return strip_y(PolyMatrix<Rat>::scalar(*prob.scalar_f));
  throw std::invalid_argument("problem has no certification target F");
}

void check_measure_arity(const PMIProblem& prob) {
  for (const auto& G : prob.G)
    if (G.m() != prob.nu.m())
      throw std::invalid_argument("G and measure disagree on the y dimension");
  for (const auto& H : prob.extras)
    if (H.m() != 0)
      throw std::invalid_argument("extra constraints must not involve y");
}

int add_block(ConicProblem& prob, int side) {
  prob.block_sizes.push_back(side);
  return int(prob.block_sizes.size()) - 1;
}

GramSlot make_slot(int block_index, std::vector<Monomial> basis, int gram_block,
                   std::string role, Exps tag = {}) {
  GramSlot s;
  s.block_index = block_index;
  s.basis = std::move(basis);
  s.gram_block = gram_block;
  s.role = std::move(role);
  s.tag = std::move(tag);
  return s;
}

}  // namespace

RipResult rip_validate(const CliqueDecomposition& cd) {
  const auto& I = cd.cliques;
  for (size_t l = 1; l < I.size(); ++l) {
    std::set<int> seen;
    for (size_t j = 0; j < l; ++j) seen.insert(I[j].begin(), I[j].end());
    std::set<int> inter;
    for (int v : I[l])
      if (seen.count(v)) inter.insert(v);
    bool found = false;
    for (size_t kk = 0; kk < l && !found; ++kk) {
      std::set<int> Ik(I[kk].begin(), I[kk].end());
      found = std::all_of(inter.begin(), inter.end(),
                          [&](int v) { return Ik.count(v) > 0; });
    }
    if (!found) return {false, int(l)};
  }
  return {true, -1};
}

BuildOutput build_membership(const PMIProblem& prob, const RelaxationOrder& order) {
  check_measure_arity(prob);
  PolyMatrix<Rat> Frat = require_F(prob);
  PolyMatrix<double> F = to_double_matrix(Frat);
  const int p = F.size();
  const int n = F.n();
  const int d = order.d;
  if (degrees(F).deg_x > 2 * d)
    throw std::invalid_argument("degree cap 2d below deg F: unsatisfiable");

  BuildOutput out;
  out.p = p;
  out.meta.hierarchy = "membership";
  out.meta.d = d;
  out.meta.k = order.k;
  out.meta.measure_id = prob.nu.identifier();

  Assembler asm_(p, exponents_up_to(n, 2 * d));

  int b0 = add_block(out.prob, int(binomial(n + d, d)) * p);
  auto basis0 = x_basis_monomials(exponents_up_to(n, d));
  out.slots.push_back(make_slot(b0, basis0, p, "sigma0"));
  scatter_direct(asm_, basis0, p, b0);

  for (size_t j = 0; j < prob.G.size(); ++j) {
    const auto& Gj = prob.G[j];
    int dg = degrees(Gj).d_ceil;
    int dx = d - dg;
    if (dx < 0) continue;  // no room for this multiplier at order d
    int kj = default_k(Gj, order.k);
    auto basis = product_basis(exponents_up_to(n, dx), exponents_up_to(prob.nu.m(), kj));
    int q = Gj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * q);
    out.slots.push_back(make_slot(blk, basis, p * q, "sigma:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Gj), prob.nu, blk);
  }

  for (size_t j = 0; j < prob.extras.size(); ++j) {
    const auto& Hj = prob.extras[j];
    int dh = degrees(Hj).d_ceil;
    int dx = d - dh;
    if (dx < 0) continue;
    auto basis = x_basis_monomials(exponents_up_to(n, dx));
    int rj = Hj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * rj);
    out.slots.push_back(make_slot(blk, basis, p * rj, "extra:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Hj), MeasureSpec::trivial(), blk);
  }

  asm_.set_rhs_from(F);
  asm_.emit(out.prob);
  return out;
}

BuildOutput build_sparse(const PMIProblem& prob, const RelaxationOrder& order) {
  check_measure_arity(prob);
  if (prob.F && prob.F->size() > 1)
    throw std::invalid_argument(
        "sparse Positivstellensatz requires a scalar objective (p = 1); the matrix "
        "version fails, see [MWG2024] for a counterexample");
  if (!prob.scalar_f && !(prob.F && prob.F->size() == 1))
    throw std::invalid_argument("sparse hierarchy needs a scalar objective f");
  if (!prob.cliques) throw std::invalid_argument("sparse hierarchy needs cliques");
  const CliqueDecomposition& cd = *prob.cliques;
  if (cd.assignments.size() != cd.cliques.size())
    throw std::invalid_argument("clique/assignment length mismatch");

  Poly<Rat> f = prob.scalar_f ? *prob.scalar_f : prob.F->at(0, 0);
  const int n = f.n();
  const int d = order.d;

  auto rip = rip_validate(cd);
  if (!rip.ok) {
    std::ostringstream os;
    os << "running intersection property fails at clique " << rip.witness + 1;
    throw std::invalid_argument(os.str());
  }

  // Every constraint must be assigned to a clique covering its x-support.
  std::vector<bool> covered(prob.G.size(), false);
  for (size_t l = 0; l < cd.cliques.size(); ++l) {
    std::set<int> Il(cd.cliques[l].begin(), cd.cliques[l].end());
    for (int j : cd.assignments[l]) {
      if (j < 0 || j >= (int)prob.G.size())
        throw std::invalid_argument("assignment references invalid constraint");
      for (const auto& zeta : prob.G[j].support_x())
        for (size_t v = 0; v < zeta.size(); ++v)
          if (zeta[v] > 0 && !Il.count(int(v)))
            throw std::invalid_argument("constraint " + std::to_string(j) +
                                        " not covered by clique " + std::to_string(l + 1));
      covered[j] = true;
    }
  }
  for (size_t j = 0; j < covered.size(); ++j)
    if (!covered[j])
      throw std::invalid_argument("constraint " + std::to_string(j) +
                                  " not assigned to any clique");

  // The objective must decompose along cliques monomial by monomial.
  for (const auto& [mo, c] : f.terms()) {
    bool ok = false;
    for (const auto& I : cd.cliques) {
      std::set<int> Il(I.begin(), I.end());
      bool inside = true;
      for (size_t v = 0; v < mo.ax.size(); ++v)
        if (mo.ax[v] > 0 && !Il.count(int(v))) inside = false;
      if (inside) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw std::invalid_argument("objective monomial not supported on any clique");
  }

  BuildOutput out;
  out.p = 1;
  out.meta.hierarchy = "sparse";
  out.meta.d = d;
  out.meta.k = order.k;
  out.meta.measure_id = prob.nu.identifier();

  // Row support: union over cliques of N^{I_l}_{2d}, plus supp(f).
  std::vector<Exps> kappas;
  for (const auto& I : cd.cliques) {
    auto local = exponents_up_to(int(I.size()), 2 * d);
    for (const auto& a : local) {
      Exps full(n, 0);
      for (size_t t = 0; t < I.size(); ++t) full[I[t]] = a[t];
      kappas.push_back(full);
    }
  }
  for (const auto& [mo, c] : f.terms()) kappas.push_back(mo.ax);
  Assembler asm_(1, dedupe(std::move(kappas)));

  auto embed = [&](const std::vector<int>& I, const std::vector<Exps>& local) {
    std::vector<Exps> full;
    for (const auto& a : local) {
      Exps e(n, 0);
      for (size_t t = 0; t < I.size(); ++t) e[I[t]] = a[t];
      full.push_back(e);
    }
    return full;
  };

  for (size_t l = 0; l < cd.cliques.size(); ++l) {
    const auto& I = cd.cliques[l];
    auto basis0 =
        x_basis_monomials(embed(I, exponents_up_to(int(I.size()), d)));
    int b = add_block(out.prob, int(basis0.size()));
    out.slots.push_back(make_slot(b, basis0, 1, "clique0:" + std::to_string(l)));
    scatter_direct(asm_, basis0, 1, b);

    for (int j : cd.assignments[l]) {
      const auto& Gj = prob.G[j];
      int dg = degrees(Gj).d_ceil;
      int dx = d - dg;
      if (dx < 0) continue;
      int kj = default_k(Gj, order.k);
      auto basis = product_basis(embed(I, exponents_up_to(int(I.size()), dx)),
                                 exponents_up_to(prob.nu.m(), kj));
      int q = Gj.size();
      int blk = add_block(out.prob, int(basis.size()) * q);
      out.slots.push_back(make_slot(
          blk, basis, q, "clique:" + std::to_string(l) + ":" + std::to_string(j)));
      scatter_paired(asm_, basis, 1, to_double_matrix(Gj), prob.nu, blk);
    }
  }

  asm_.set_rhs_from(PolyMatrix<double>::scalar(to_double_poly(f)));
  asm_.emit(out.prob);
  return out;
}

namespace {

void check_homogeneous_inputs(const PolyMatrix<Rat>& F,
                              const std::vector<PolyMatrix<Rat>>& Gs,
                              bool require_even) {
  int degF = degrees(F).deg_x;
  if (degF < 0) throw std::invalid_argument("zero target");
  if (!homogeneous_x(F, degF))
    throw std::invalid_argument("F must be homogeneous in x");
  if (require_even && degF % 2 != 0)
    throw std::invalid_argument("F must have even degree in x");
  for (const auto& G : Gs) {
    int degG = degrees(G).deg_x;
    if (degG >= 0 && !homogeneous_x(G, degG))
      throw std::invalid_argument("G must be homogeneous in x");
    if (require_even && degG >= 0 && degG % 2 != 0)
      throw std::invalid_argument("G must have even degree in x");
  }
}

}  // namespace

BuildOutput build_homogeneous(const PMIProblem& prob, int N,
                              const RelaxationOrder& order) {
  check_measure_arity(prob);
  PolyMatrix<Rat> Frat = require_F(prob);
  check_homogeneous_inputs(Frat, prob.G, /*require_even=*/true);
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  PolyMatrix<double> F = to_double_matrix(Frat);
  const int p = F.size();
  const int n = F.n();
  const int degF = degrees(F).deg_x;

  Poly<double> norm2 =
      theta_poly<double>(n, F.m()) - Poly<double>::constant(n, F.m(), 1.0);
  PolyMatrix<double> target = norm2.pow(N) * F;

  BuildOutput out;
  out.p = p;
  out.meta.hierarchy = "homogeneous";
  out.meta.N = N;
  out.meta.k = order.k;
  out.meta.measure_id = prob.nu.identifier();

  const int Dt = 2 * N + degF;
  Assembler asm_(p, exponents_exact_degree(n, Dt));

  auto basis0 = x_basis_monomials(exponents_exact_degree(n, Dt / 2));
  int b0 = add_block(out.prob, int(basis0.size()) * p);
  out.slots.push_back(make_slot(b0, basis0, p, "sigma0"));
  scatter_direct(asm_, basis0, p, b0);

  for (size_t j = 0; j < prob.G.size(); ++j) {
    const auto& Gj = prob.G[j];
    int degG = degrees(Gj).deg_x;
    if (degG < 0) continue;
    int dx2 = Dt - degG;
    if (dx2 < 0 || dx2 % 2 != 0) continue;
    int kj = default_k(Gj, order.k);
    auto basis = product_basis(exponents_exact_degree(n, dx2 / 2),
                               exponents_up_to(prob.nu.m(), kj));
    int q = Gj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * q);
    out.slots.push_back(make_slot(blk, basis, p * q, "sigma:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Gj), prob.nu, blk);
  }

  asm_.set_rhs_from(target);
  asm_.emit(out.prob);
  return out;
}

BuildOutput build_inhomogeneous(const PMIProblem& prob, double eps, int N,
                                const RelaxationOrder& order) {
  check_measure_arity(prob);
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  PolyMatrix<Rat> Frat = require_F(prob);
  PolyMatrix<double> F = to_double_matrix(Frat);
  const int p = F.size();
  const int n = F.n();
  const int d_F = degrees(F).d_half;

  Poly<double> theta = theta_poly<double>(n, F.m());
  PolyMatrix<double> target =
      theta.pow(N) *
      (F + eps * (theta.pow(d_F) * PolyMatrix<double>::identity(p, n, F.m())));

  BuildOutput out;
  out.p = p;
  out.meta.hierarchy = "inhomogeneous";
  out.meta.N = N;
  out.meta.k = order.k;
  out.meta.eps = eps;
  out.meta.measure_id = prob.nu.identifier();

  const int cap = 2 * (N + d_F);
  Assembler asm_(p, exponents_up_to(n, cap));

  auto basis0 = x_basis_monomials(exponents_up_to(n, N + d_F));
  int b0 = add_block(out.prob, int(basis0.size()) * p);
  out.slots.push_back(make_slot(b0, basis0, p, "sigma0"));
  scatter_direct(asm_, basis0, p, b0);

  for (size_t j = 0; j < prob.G.size(); ++j) {
    const auto& Gj = prob.G[j];
    int d_G = degrees(Gj).d_half;
    int dx = N + d_F - d_G;
    if (dx < 0) continue;
    int kj = default_k(Gj, order.k);
    auto basis = product_basis(exponents_up_to(n, dx),
                               exponents_up_to(prob.nu.m(), kj));
    int q = Gj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * q);
    out.slots.push_back(make_slot(blk, basis, p * q, "sigma:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Gj), prob.nu, blk);
  }

  asm_.set_rhs_from(target);
  asm_.emit(out.prob);
  return out;
}

int polya_bound(const PolyMatrix<Rat>& P, const Rat& lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  int degP = degrees(P).deg_x;
  if (degP < 0) throw std::invalid_argument("zero matrix");
  if (!homogeneous_x(P, degP))
    throw std::invalid_argument("P must be homogeneous");
  if (degP == 0) return 0;

  // L(P) = max_alpha (alpha!/degP!) ||P_alpha|| with the spectral norm.
  double degP_fact = 1.0;
  for (int t = 2; t <= degP; ++t) degP_fact *= t;
  double L = 0.0;
  for (const auto& alpha : P.support_x()) {
    double alpha_fact = 1.0;
    for (int e : alpha)
      for (int t = 2; t <= e; ++t) alpha_fact *= t;
    Eigen::MatrixXd Pa = to_double_matrix(P).coeff_matrix_d(alpha, {});
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Pa);
    double nrm = Pa.rows() == 0 ? 0.0 : svd.singularValues()(0);
    L = std::max(L, alpha_fact / degP_fact * nrm);
  }
  double bound = double(degP) * double(degP - 1) * L / (2.0 * to_double(lambda)) -
                 double(degP);
  int N = int(std::ceil(bound - 1e-12));
  return std::max(N, 0);
}

PolyaExpandReport polya_expand_check(const PolyMatrix<Rat>& P, int N) {
  int degP = degrees(P).deg_x;
  if (degP < 0) throw std::invalid_argument("zero matrix");
  if (!homogeneous_x(P, degP))
    throw std::invalid_argument("P must be homogeneous");
  PolyMatrix<Rat> T = ones_linear_form<Rat>(P.n(), P.m()).pow(N) * P;

  PolyaExpandReport rep;
  rep.all_pd = true;
  bool first = true;
  for (const auto& alpha : exponents_exact_degree(P.n(), degP + N)) {
    ++rep.num_coefficients;
    MatQ Ta(P.size(), P.size());
    for (int i = 0; i < P.size(); ++i)
      for (int j = 0; j < P.size(); ++j)
        Ta(i, j) = T.at(i, j).coeff(Monomial(alpha, Exps(P.m(), 0)));
    Eigen::MatrixXd Tad = to_eigen(Ta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tad);
    double mineig = es.eigenvalues().minCoeff();
    if (first || mineig < rep.min_coeff_eig) {
      rep.min_coeff_eig = mineig;
      rep.worst_alpha = alpha;
      first = false;
    }
    if (!is_pd_exact(Ta)) rep.all_pd = false;
  }
  return rep;
}

BuildOutput build_polya(const PMIProblem& prob, int N, const RelaxationOrder& order,
                        double delta) {
  check_measure_arity(prob);
  if (!prob.nu.compact_support())
    throw std::invalid_argument("Polya hierarchy requires a compactly supported measure");
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  PolyMatrix<Rat> Frat = require_F(prob);
  check_homogeneous_inputs(Frat, prob.G, /*require_even=*/false);
  PolyMatrix<double> F = to_double_matrix(Frat);
  const int p = F.size();
  const int n = F.n();
  const int degF = degrees(F).deg_x;

  PolyMatrix<double> target = ones_linear_form<double>(n, F.m()).pow(N) * F;

  BuildOutput out;
  out.p = p;
  out.meta.hierarchy = "polya";
  out.meta.N = N;
  out.meta.k = order.k;
  out.meta.delta = delta;
  out.meta.measure_id = prob.nu.identifier();

  const int Dt = N + degF;
  Assembler asm_(p, exponents_exact_degree(n, Dt));

  // S_0 = sum_{|a|=Dt} x^a (delta I_p + X_a), X_a PSD.
  std::vector<Monomial> const_basis = {Monomial(Exps(n, 0), Exps(F.m(), 0))};
  PolyMatrix<double> delta_shift(p, n, F.m());
  for (const auto& alpha : exponents_exact_degree(n, Dt)) {
    int blk = add_block(out.prob, p);
    out.slots.push_back(make_slot(blk, const_basis, p, "polya0", alpha));
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) asm_.add_psd(alpha, i, j, blk, i, j, 1.0);
    for (int i = 0; i < p; ++i)
      delta_shift.at(i, i).add_term(Monomial(alpha, Exps(F.m(), 0)), delta);
  }

  // S = sum_{|a|=Dx} x^a S_a(y), S_a(y) = Gram-in-y + C_a + delta I_{pq}.
  if (!prob.G.empty()) {
    const auto& G = prob.G[0];
    if (prob.G.size() > 1)
      throw std::invalid_argument("Polya hierarchy supports a single G");
    int degG = degrees(G).deg_x;
    int q = G.size();
    int Dx = Dt - std::max(degG, 0);
    if (degG >= 0 && Dx >= 0) {
      int kj = default_k(G, order.k);
      auto ybasis_exps = exponents_up_to(prob.nu.m(), kj);
      std::vector<Monomial> ybasis;
      for (const auto& b : ybasis_exps) ybasis.emplace_back(Exps(n, 0), b);
      PolyMatrix<double> Gd = to_double_matrix(G);
      Poly<double> trG_int = integrate_y(trace(Gd), prob.nu);

      for (const auto& alpha : exponents_exact_degree(n, Dx)) {
        int blkQ = add_block(out.prob, int(ybasis.size()) * p * q);
        out.slots.push_back(make_slot(blkQ, ybasis, p * q, "polyaQ", alpha));
        int blkC = add_block(out.prob, p * q);
        out.slots.push_back(make_slot(blkC, const_basis, p * q, "polyaC", alpha));

        // Scatter x^alpha * integral <S_a(y), G>_p dnu into the rows.
        const int B = p * q;
        // Gram part: Sigma(y) entries over (e,f) pairs of the y basis.
        for (size_t e = 0; e < ybasis.size(); ++e)
          for (size_t f = 0; f < ybasis.size(); ++f)
            for (int g = 0; g < q; ++g)
              for (int h = 0; h < q; ++h)
                for (const auto& [mo, c] : Gd.at(g, h).terms()) {
                  Exps kappa(n);
                  for (int u = 0; u < n; ++u) kappa[u] = alpha[u] + mo.ax[u];
                  Exps ybeta(prob.nu.m());
                  for (int u = 0; u < prob.nu.m(); ++u)
                    ybeta[u] = ybasis[e].ay[u] + ybasis[f].ay[u] + mo.ay[u];
                  double mom = prob.nu.moment_d(ybeta);
                  if (mom == 0.0) continue;
                  double w = mom * c;
                  for (int i = 0; i < p; ++i)
                    for (int j = i; j < p; ++j)
                      asm_.add_psd(kappa, i, j, blkQ, int(e) * B + i * q + g,
                                   int(f) * B + j * q + h, w);
                }
        // Constant part C_a: contributes x^alpha * integral <C_a, G>_p.
        for (int g = 0; g < q; ++g)
          for (int h = 0; h < q; ++h)
            for (const auto& [mo, c] : Gd.at(g, h).terms()) {
              Exps kappa(n);
              for (int u = 0; u < n; ++u) kappa[u] = alpha[u] + mo.ax[u];
              double mom = prob.nu.moment_d(mo.ay);
              if (mom == 0.0) continue;
              double w = mom * c;
              for (int i = 0; i < p; ++i)
                for (int j = i; j < p; ++j)
                  asm_.add_psd(kappa, i, j, blkC, i * q + g, j * q + h, w);
            }
        // delta I_{pq} shift: x^alpha * delta * integral tr(G) dnu * I_p.
        for (const auto& [mo, c] : trG_int.terms()) {
          Exps kappa(n);
          for (int u = 0; u < n; ++u) kappa[u] = alpha[u] + mo.ax[u];
          Monomial target_mono(kappa, Exps(F.m(), 0));
          for (int i = 0; i < p; ++i)
            delta_shift.at(i, i).add_term(target_mono, delta * c);
        }
      }
    }
  }

  // Move the delta shifts to the right-hand side.
  PolyMatrix<double> adjusted = target - delta_shift;
  asm_.set_rhs_from(adjusted);
  asm_.emit(out.prob);
  return out;
}

PerturbationPair build_perturbation(const PMIProblem& prob,
                                    const RelaxationOrder& order) {
  check_measure_arity(prob);
  PolyMatrix<Rat> Frat = require_F(prob);
  PolyMatrix<double> F = to_double_matrix(Frat);
  const int p = F.size();
  const int n = F.n();
  const int d = order.d;
  int dG = 0;
  for (const auto& G : prob.G) dG = std::max(dG, degrees(G).d_ceil);
  if (d < dG) throw std::invalid_argument("order d below d(G)");
  if (degrees(F).deg_x > 2 * d)
    throw std::invalid_argument("degree cap 2d below deg F");
  int k = order.k >= 0 ? order.k : 0;
  for (const auto& G : prob.G) k = std::max(k, default_k(G, order.k));

  PerturbationPair pair;
  pair.p = p;
  pair.n = n;
  pair.d = d;
  pair.k = k;

  // Primal: min r s.t. F + r Theta_d I_p in the truncated module.
  BuildOutput& out = pair.primal;
  out.p = p;
  out.meta.hierarchy = "perturbation";
  out.meta.d = d;
  out.meta.k = k;
  out.meta.measure_id = prob.nu.identifier();
  out.prob.num_free = 1;
  out.free_names = {"r"};
  out.prob.obj_free.push_back({0, 1.0});

  Poly<double> theta_d = theta_big_poly<double>(n, F.m(), d);

  Assembler asm_(p, exponents_up_to(n, 2 * d));
  auto basis0 = x_basis_monomials(exponents_up_to(n, d));
  int b0 = add_block(out.prob, int(basis0.size()) * p);
  out.slots.push_back(make_slot(b0, basis0, p, "sigma0"));
  scatter_direct(asm_, basis0, p, b0);

  for (size_t j = 0; j < prob.G.size(); ++j) {
    const auto& Gj = prob.G[j];
    int dxj = d - degrees(Gj).d_ceil;
    if (dxj < 0) continue;
    int kj = default_k(Gj, order.k >= 0 ? order.k : k);
    auto basis = product_basis(exponents_up_to(n, dxj),
                               exponents_up_to(prob.nu.m(), kj));
    int q = Gj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * q);
    out.slots.push_back(make_slot(blk, basis, p * q, "sigma:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Gj), prob.nu, blk);
  }

  // Element - r Theta_d I_p = F  =>  free coefficient -Theta_d on diagonals.
  for (const auto& [mo, c] : theta_d.terms())
    for (int i = 0; i < p; ++i) asm_.add_free(mo.ax, i, i, 0, -c);

  asm_.set_rhs_from(F);
  asm_.emit(out.prob);

  // Dual: max -L_S(F) s.t. L_S(Theta_d I_p) <= 1, M_d(S) >= 0,
  // M^nu_{d-d(G),k}(GS) >= 0, with S_alpha free symmetric matrices.
  ConicProblem& dual = pair.dual;
  pair.dual_alphas = exponents_up_to(n, 2 * d);
  const int nut = ut_count(p);
  dual.num_free = int(pair.dual_alphas.size()) * nut;
  std::map<Exps, int, GrlexLess> alpha_index;
  for (size_t t = 0; t < pair.dual_alphas.size(); ++t)
    alpha_index[pair.dual_alphas[t]] = int(t);
  auto svar = [&](const Exps& alpha, int i, int j) {
    if (i > j) std::swap(i, j);
    return alpha_index.at(alpha) * nut + ut_index(i, j, p);
  };

  // Moment matrix U = M_d(S) as a PSD block linked entrywise to S.
  auto bx = exponents_up_to(n, d);
  int blkU = 0;
  dual.block_sizes.push_back(int(bx.size()) * p);
  for (size_t a = 0; a < bx.size(); ++a)
    for (size_t b = a; b < bx.size(); ++b)
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
          int R = int(a) * p + i, C = int(b) * p + j;
          if (R > C) continue;
          Exps sum(n);
          for (int u = 0; u < n; ++u) sum[u] = bx[a][u] + bx[b][u];
          ConicProblem::Row row;
          row.entries.push_back({blkU, R, C, 1.0});
          row.free_entries.push_back({svar(sum, i, j), -1.0});
          row.rhs = 0.0;
          dual.rows.push_back(std::move(row));
        }

  // Localizing blocks per constraint.
  for (size_t jg = 0; jg < prob.G.size(); ++jg) {
    const auto& G = prob.G[jg];
    PolyMatrix<double> Gd = to_double_matrix(G);
    int dloc = d - degrees(G).d_ceil;
    if (dloc < 0) continue;
    auto bloc = exponents_up_to(n, dloc);
    auto by = exponents_up_to(prob.nu.m(), k);
    int q = G.size();
    const int B = p * q;
    int blkV = int(dual.block_sizes.size());
    dual.block_sizes.push_back(int(bloc.size()) * int(by.size()) * B);

    for (size_t a = 0; a < bloc.size(); ++a)
      for (size_t e = 0; e < by.size(); ++e)
        for (size_t b = 0; b < bloc.size(); ++b)
          for (size_t f = 0; f < by.size(); ++f) {
            int rowblock = (int(a) * int(by.size()) + int(e)) * B;
            int colblock = (int(b) * int(by.size()) + int(f)) * B;
            for (int i = 0; i < p; ++i)
              for (int g = 0; g < q; ++g)
                for (int j = 0; j < p; ++j)
                  for (int h = 0; h < q; ++h) {
                    int R = rowblock + i * q + g, C = colblock + j * q + h;
                    if (R > C) continue;
                    ConicProblem::Row row;
                    row.entries.push_back({blkV, R, C, 1.0});
                    // V[R,C] = sum_{gamma,zeta} mom * S[..](i,j) * G[g,h]...
                    std::map<int, double> freeacc;
                    for (const auto& [mo, c] : Gd.at(g, h).terms()) {
                      Exps ybeta(prob.nu.m());
                      for (int u = 0; u < prob.nu.m(); ++u)
                        ybeta[u] = by[e][u] + by[f][u] + mo.ay[u];
                      double mom = prob.nu.moment_d(ybeta);
                      if (mom == 0.0) continue;
                      Exps sum(n);
                      for (int u = 0; u < n; ++u)
                        sum[u] = bloc[a][u] + bloc[b][u] + mo.ax[u];
                      freeacc[svar(sum, i, j)] += mom * c;
                    }
                    for (const auto& [idx, w] : freeacc)
                      if (w != 0.0) row.free_entries.push_back({idx, -w});
                    row.rhs = 0.0;
                    dual.rows.push_back(std::move(row));
                  }
          }
  }

  // L_S(Theta_d I_p) + slack = 1 with a 1x1 PSD slack.
  {
    int blkS = int(dual.block_sizes.size());
    dual.block_sizes.push_back(1);
    ConicProblem::Row row;
    row.entries.push_back({blkS, 0, 0, 1.0});
    for (const auto& [mo, c] : theta_big_poly<double>(n, 0, d).terms())
      for (int i = 0; i < p; ++i) row.free_entries.push_back({svar(mo.ax, i, i), c});
    row.rhs = 1.0;
    dual.rows.push_back(std::move(row));
  }

  // Objective: maximize -L_S(F).
  dual.maximize = true;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j)
      for (const auto& alpha : pair.dual_alphas) {
        double c = F.at(i, j).coeff(Monomial(alpha, Exps(F.m(), 0)));
        if (c == 0.0) continue;
        double w = (i == j) ? -c : -2.0 * c;
        dual.obj_free.push_back({svar(alpha, i, j), w});
      }

  return pair;
}

MomentSeq<double> decode_dual_moments(const PerturbationPair& pair,
                                      const SolveReport& rep) {
  MomentSeq<double> seq = MomentSeq<double>::zero(pair.p, pair.n, pair.d);
  const int nut = ut_count(pair.p);
  for (size_t t = 0; t < pair.dual_alphas.size(); ++t) {
    DenseMat<double> Sa(pair.p, pair.p);
    for (int i = 0; i < pair.p; ++i)
      for (int j = i; j < pair.p; ++j) {
        double v = rep.u[int(t) * nut + ut_index(i, j, pair.p)];
        Sa(i, j) = v;
        Sa(j, i) = v;
      }
    seq.set(pair.dual_alphas[t], std::move(Sa));
  }
  return seq;
}

BuildOutput build_robust_opt(const PMIProblem& prob, const RelaxationOrder& order) {
  check_measure_arity(prob);
  if (prob.obj_P.empty()) throw std::invalid_argument("objective data missing");
  const int r = int(prob.obj_P.size()) - 1;
  if ((int)prob.obj_c.size() != r)
    throw std::invalid_argument("objective c length mismatch");
  PolyMatrix<double> P0 = strip_y(to_double_matrix(prob.obj_P[0]));
  const int p = P0.size();
  const int n = P0.n();
  for (const auto& Pi : prob.obj_P)
    if (Pi.size() != p || Pi.n() != n)
      throw std::invalid_argument("objective matrices dimension mismatch");
  const int k = order.k >= 0 ? order.k : order.d;
  int degP = 0;
  for (const auto& Pi : prob.obj_P) degP = std::max(degP, degrees(Pi).deg_x);
  if (degP > 2 * k) throw std::invalid_argument("degree cap 2k below deg P");

  BuildOutput out;
  out.p = p;
  out.meta.hierarchy = "robust";
  out.meta.k = k;
  out.meta.measure_id = prob.nu.identifier();
  out.prob.num_free = r;
  for (int i = 0; i < r; ++i) {
    out.free_names.push_back("gamma" + std::to_string(i + 1));
    out.prob.obj_free.push_back({i, to_double(prob.obj_c[i])});
  }

  Assembler asm_(p, exponents_up_to(n, 2 * k));

  auto basis0 = x_basis_monomials(exponents_up_to(n, k));
  int b0 = add_block(out.prob, int(basis0.size()) * p);
  out.slots.push_back(make_slot(b0, basis0, p, "sigma0"));
  scatter_direct(asm_, basis0, p, b0);

  for (size_t j = 0; j < prob.G.size(); ++j) {
    const auto& Gj = prob.G[j];
    int dx = k - degrees(Gj).d_ceil;
    if (dx < 0) continue;
    int kj = order.k >= 0 ? k : default_k(Gj, -1);
    auto basis = product_basis(exponents_up_to(n, dx),
                               exponents_up_to(prob.nu.m(), kj));
    int q = Gj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * q);
    out.slots.push_back(make_slot(blk, basis, p * q, "sigma:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Gj), prob.nu, blk);
  }

  // P_0 - sum gamma_i P_i = element  =>  element + sum gamma_i P_i = P_0.
  for (int t = 1; t <= r; ++t) {
    PolyMatrix<double> Pi = strip_y(to_double_matrix(prob.obj_P[t]));
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j)
        for (const auto& [mo, c] : Pi.at(i, j).terms())
          asm_.add_free(mo.ax, i, j, t - 1, c);
  }

  asm_.set_rhs_from(P0);
  asm_.emit(out.prob);
  return out;
}

BuildOutput build_robust_opt_noncompact(const PMIProblem& prob, double eps,
                                        const RelaxationOrder& order) {
  check_measure_arity(prob);
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  if (prob.obj_P.empty()) throw std::invalid_argument("objective data missing");
  const int r = int(prob.obj_P.size()) - 1;
  if ((int)prob.obj_c.size() != r)
    throw std::invalid_argument("objective c length mismatch");
  PolyMatrix<double> P0 = strip_y(to_double_matrix(prob.obj_P[0]));
  const int p = P0.size();
  const int n = P0.n();
  const int k = order.k >= 0 ? order.k : order.d;

  int d_P = 1;
  for (const auto& Pi : prob.obj_P) d_P = std::max(d_P, degrees(Pi).d_half);
  int d_G = 1;
  for (const auto& G : prob.G) d_G = std::max(d_G, degrees(G).d_half);

  Poly<double> theta = theta_poly<double>(n, P0.m());
  Poly<double> theta_k = theta.pow(k);

  BuildOutput out;
  out.p = p;
  out.meta.hierarchy = "robust-noncompact";
  out.meta.k = k;
  out.meta.eps = eps;
  out.meta.measure_id = prob.nu.identifier();
  out.prob.num_free = r;
  for (int i = 0; i < r; ++i) {
    out.free_names.push_back("gamma" + std::to_string(i + 1));
    out.prob.obj_free.push_back({i, to_double(prob.obj_c[i])});
  }

  const int cap = 2 * (k + d_P);
  Assembler asm_(p, exponents_up_to(n, cap));

  auto basis0 = x_basis_monomials(exponents_up_to(n, k + d_P));
  int b0 = add_block(out.prob, int(basis0.size()) * p);
  out.slots.push_back(make_slot(b0, basis0, p, "sigma0"));
  scatter_direct(asm_, basis0, p, b0);

  for (size_t j = 0; j < prob.G.size(); ++j) {
    const auto& Gj = prob.G[j];
    int dx = k + d_P - d_G;
    if (dx < 0) continue;
    auto basis = product_basis(exponents_up_to(n, dx),
                               exponents_up_to(prob.nu.m(), k + d_P));
    int q = Gj.size();
    int blk = add_block(out.prob, int(basis.size()) * p * q);
    out.slots.push_back(make_slot(blk, basis, p * q, "sigma:" + std::to_string(j)));
    scatter_paired(asm_, basis, p, to_double_matrix(Gj), prob.nu, blk);
  }

  // theta^k (P_0 - sum gamma_i P_i + eps theta^{d_P} I) = element.
  for (int t = 1; t <= r; ++t) {
    PolyMatrix<double> Pi = theta_k * strip_y(to_double_matrix(prob.obj_P[t]));
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j)
        for (const auto& [mo, c] : Pi.at(i, j).terms())
          asm_.add_free(mo.ax, i, j, t - 1, c);
  }
  PolyMatrix<double> rhs =
      theta_k * (P0 + eps * (theta.pow(d_P) * PolyMatrix<double>::identity(p, n, P0.m())));
  asm_.set_rhs_from(rhs);
  asm_.emit(out.prob);
  return out;
}

SOSCertificate<double> decode_certificate(const BuildOutput& build,
                                          const SolveReport& rep) {
  SOSCertificate<double> cert;
  cert.meta = build.meta;
  for (const auto& slot : build.slots) {
    const Eigen::MatrixXd& X = rep.X.at(slot.block_index);
    SOSGram<double> g;
    g.basis = slot.basis;
    g.block = slot.gram_block;
    if (!slot.basis.empty()) {
      g.n = int(slot.basis[0].ax.size());
      g.m = int(slot.basis[0].ay.size());
    }
    Eigen::MatrixXd Zs = 0.5 * (X + X.transpose());
    g.Z = from_eigen(Zs);
    if (slot.role == "sigma0") {
      cert.sigma0 = std::move(g);
    } else if (slot.role == "sigma:0" && build.meta.hierarchy != "sparse") {
      cert.sigma = std::move(g);
    } else {
      cert.extras.push_back({slot.role, slot.tag, std::move(g)});
    }
  }
  return cert;
}

namespace {

HierarchyResult solve_and_verify(const PMIProblem& prob, BuildOutput build,
                                 const HierarchyOptions& opts,
                                 const std::string& value_kind) {
  HierarchyResult res;
  SolveOptions sopts;
  sopts.tol = opts.solver_tol;
  sopts.max_iter = opts.max_iter;
  sopts.seed = opts.seed;
  sopts.psd_side_cap = opts.psd_side_cap;
  res.report = solve(build.prob, sopts);
  res.used_N = build.meta.N;

  switch (res.report.status) {
    case SolveStatus::Optimal: {
      if (value_kind == "r") {
        build.meta.r = res.report.primal_obj;
        res.value = res.report.primal_obj;
      } else if (value_kind == "tau") {
        res.value = res.report.primal_obj;
        build.meta.gamma.assign(res.report.u.data(),
                                res.report.u.data() + res.report.u.size());
      }
      auto cert = decode_certificate(build, res.report);
      auto verify = verify_certificate(prob, cert, opts.verify_tol);
      res.certificate = std::move(cert);
      res.residual = verify.max_residual;
      if (verify.pass) {
        res.status = value_kind == "tau" ? "bound-found" : "certified";
        res.message = "certificate verified, residual " +
                      std::to_string(verify.max_residual);
      } else {
        res.status = "solver-failure";
        res.message = "solver reported feasible but verification failed: " +
                      verify.detail;
      }
      break;
    }
    case SolveStatus::PrimalInfeasible:
      res.status = "infeasible-at-order";
      res.message = res.report.message;
      break;
    case SolveStatus::DualInfeasible:
      res.status = value_kind == "tau" ? "infeasible-at-order" : "solver-failure";
      res.message = "dual infeasible / objective unbounded: " + res.report.message;
      break;
    default:
      res.status = "solver-failure";
      res.message = res.report.message;
      break;
  }
  return res;
}

}  // namespace

HierarchyResult run_certify(const PMIProblem& prob, const std::string& hierarchy,
                            const RelaxationOrder& order, const HierarchyOptions& opts) {
  if (hierarchy == "membership") {
    return solve_and_verify(prob, build_membership(prob, order), opts, "");
  }
  if (hierarchy == "sparse") {
    return solve_and_verify(prob, build_sparse(prob, order), opts, "");
  }
  if (hierarchy == "perturbation") {
    auto pair = build_perturbation(prob, order);
    return solve_and_verify(prob, std::move(pair.primal), opts, "r");
  }

  auto build_at = [&](int N) -> BuildOutput {
    if (hierarchy == "homogeneous") return build_homogeneous(prob, N, order);
    if (hierarchy == "inhomogeneous")
      return build_inhomogeneous(prob, order.eps, N, order);
    if (hierarchy == "polya") return build_polya(prob, N, order);
    throw std::invalid_argument("unknown hierarchy '" + hierarchy + "'");
  };

  if (order.N >= 0) return solve_and_verify(prob, build_at(order.N), opts, "");

  HierarchyResult last;
  for (int N = 0; N <= opts.n_max; ++N) {
    last = solve_and_verify(prob, build_at(N), opts, "");
    if (last.status == "certified") return last;
    if (last.status == "solver-failure") return last;
  }
  last.status = "infeasible-at-order";
  last.message = "no certificate found for N <= " + std::to_string(opts.n_max) +
                 " (auto-N cap)";
  return last;
}

HierarchyResult run_optimize(const PMIProblem& prob, const RelaxationOrder& order,
                             bool noncompact, const HierarchyOptions& opts) {
  BuildOutput build = noncompact
                          ? build_robust_opt_noncompact(prob, order.eps, order)
                          : build_robust_opt(prob, order);
  return solve_and_verify(prob, std::move(build), opts, "tau");
}

}  // namespace pmi
