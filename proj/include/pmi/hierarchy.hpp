#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmi/certificate.hpp"
#include "pmi/conic.hpp"
#include "pmi/measure.hpp"
#include "pmi/momentseq.hpp"
#include "pmi/polymatrix.hpp"

namespace pmi {

struct RelaxationOrder {
  int d = 1;
  int k = -1;       // y-degree cap; -1 means ceil(deg_y G / 2)
  int N = -1;       // homogenization / multiplier power; -1 means search
  double eps = 0.0;
};

// Correlative-sparsity data: variable index subsets I_l (0-based) and the
// constraint assignments J_l (0-based indices into the G list).
struct CliqueDecomposition {
  std::vector<std::vector<int>> cliques;
  std::vector<std::vector<int>> assignments;
};

struct RipResult {
  bool ok = true;
  int witness = -1;  // failing clique index when !ok
};
RipResult rip_validate(const CliqueDecomposition& cd);

// Problem container for all hierarchies. F is the certification target;
// the optimization variants use (obj_c, obj_P) with P(x,gamma) =
// obj_P[0] - sum_i gamma_i obj_P[i]; the sparse variant uses scalar_f.
struct PMIProblem {
  std::optional<PolyMatrix<Rat>> F;
  std::vector<PolyMatrix<Rat>> G;
  MeasureSpec nu = MeasureSpec::trivial();
  std::vector<PolyMatrix<Rat>> extras;  // H_j(x) >= 0, no quantifier
  std::optional<Poly<Rat>> scalar_f;
  std::vector<Rat> obj_c;
  std::vector<PolyMatrix<Rat>> obj_P;
  std::optional<CliqueDecomposition> cliques;
};

// Decode map from solver blocks back to certificate pieces.
struct GramSlot {
  int block_index = -1;
  std::vector<Monomial> basis;
  int gram_block = 1;
  std::string role;  // sigma0 | sigma:<j> | extra:<j> | clique0:<l> |
                     // clique:<l>:<j> | polya0 | polyaQ | polyaC
  Exps tag;          // x-exponent for coefficient-indexed pieces
};

struct BuildOutput {
  ConicProblem prob;
  std::vector<GramSlot> slots;
  std::vector<std::string> free_names;
  CertMeta meta;
  int p = 1;
};

BuildOutput build_membership(const PMIProblem& prob, const RelaxationOrder& order);
BuildOutput build_sparse(const PMIProblem& prob, const RelaxationOrder& order);
BuildOutput build_homogeneous(const PMIProblem& prob, int N, const RelaxationOrder& order);
BuildOutput build_inhomogeneous(const PMIProblem& prob, double eps, int N,
                                const RelaxationOrder& order);
BuildOutput build_polya(const PMIProblem& prob, int N, const RelaxationOrder& order,
                        double delta = 1e-6);
BuildOutput build_robust_opt(const PMIProblem& prob, const RelaxationOrder& order);
BuildOutput build_robust_opt_noncompact(const PMIProblem& prob, double eps,
                                        const RelaxationOrder& order);

struct PerturbationPair {
  BuildOutput primal;
  ConicProblem dual;
  int p = 1, n = 0, d = 0, k = 0;
  std::vector<Exps> dual_alphas;  // free-variable layout of the dual
};
PerturbationPair build_perturbation(const PMIProblem& prob, const RelaxationOrder& order);
MomentSeq<double> decode_dual_moments(const PerturbationPair& pair,
                                      const SolveReport& rep);

// Theorem-style degree bound for the Polya multiplier: smallest integer
// N >= deg(P)(deg(P)-1) L(P) / (2 lambda) - deg(P), clamped at 0, with
// L(P) = max_alpha (alpha!/deg(P)!) ||P_alpha||.
int polya_bound(const PolyMatrix<Rat>& P, const Rat& lambda);

struct PolyaExpandReport {
  bool all_pd = false;
  double min_coeff_eig = 0.0;  // min over coefficient matrices of lambda_min
  Exps worst_alpha;
  int num_coefficients = 0;
};
PolyaExpandReport polya_expand_check(const PolyMatrix<Rat>& P, int N);

SOSCertificate<double> decode_certificate(const BuildOutput& build,
                                          const SolveReport& rep);

struct HierarchyOptions {
  double solver_tol = 1e-8;
  int max_iter = 200;
  double verify_tol = 1e-6;
  int n_max = 10;  // auto-N search cap
  unsigned seed = 0;
  int psd_side_cap = 600;
};

struct HierarchyResult {
  std::string status;  // certified | bound-found | infeasible-at-order |
                       // solver-failure | not-found-at-cap
  double value = 0.0;
  std::optional<SOSCertificate<double>> certificate;
  double residual = -1.0;
  SolveReport report;
  std::string message;
  int used_N = -1;
};

// Builds, solves, decodes, and verifies one hierarchy instance. For the
// N-indexed hierarchies with order.N < 0, searches N = 0,1,...,n_max.
HierarchyResult run_certify(const PMIProblem& prob, const std::string& hierarchy,
                            const RelaxationOrder& order,
                            const HierarchyOptions& opts = {});

// Solves the robust-optimization relaxation at one order k and returns the
// bound tau_k together with the decoded certificate for P(x, gamma*).
HierarchyResult run_optimize(const PMIProblem& prob, const RelaxationOrder& order,
                             bool noncompact, const HierarchyOptions& opts = {});

}  // namespace pmi
