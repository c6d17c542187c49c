#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmi/certificate.hpp"
#include "pmi/measure.hpp"
#include "pmi/polymatrix.hpp"

namespace pmi {

struct PMIProblem;  // hierarchy.hpp

// Rebuilds the quadratic-module element encoded by a certificate:
//   sigma0 + sum_j integral <sigma_j, G_j>_p dnu + sum_j <extra_j, H_j>_p
// plus the clique-indexed and coefficient-indexed (Polya) pieces, according
// to the role strings documented in certificate.hpp.
template <typename K>
PolyMatrix<K> reconstruct_element(const SOSCertificate<K>& cert,
                                  const std::vector<PolyMatrix<K>>& G,
                                  const std::vector<PolyMatrix<K>>& extras,
                                  const MeasureSpec& nu, int p);

// The polynomial matrix a certificate must reproduce, derived from the
// problem data and the hierarchy metadata (N, eps, r, gamma).
PolyMatrix<double> certificate_target(const PMIProblem& prob, const CertMeta& meta);

struct VerifyReport {
  double max_residual = 0.0;  // max over monomials of ||F_a - R_a|| (spectral)
  Exps worst_alpha;
  bool grams_psd = false;
  double min_gram_eig = 0.0;
  bool pass = false;
  std::string detail;
};

template <typename K>
VerifyReport verify_certificate(const PolyMatrix<K>& target,
                                const SOSCertificate<K>& cert,
                                const std::vector<PolyMatrix<K>>& G,
                                const std::vector<PolyMatrix<K>>& extras,
                                const MeasureSpec& nu, int p, double tol);

// Convenience overload resolving target and constraint data from the problem.
VerifyReport verify_certificate(const PMIProblem& prob,
                                const SOSCertificate<double>& cert, double tol);

struct GridPoint {
  std::vector<double> x;
  double min_eig = 0.0;
};

struct GridReport {
  double min_eig = 0.0;
  std::vector<double> argmin;
  int feasible_points = 0;
  int total_points = 0;
  bool no_feasible_sample = false;
  std::string note = "grid sampling is a necessary check only";
};

// Minimum eigenvalue of H over the grid on [-C, C]^n, optionally restricted
// to sampled membership in X (min eig G_j(x, y) >= -1e-9 for all sampled y).
GridReport grid_pd_check(const PolyMatrix<double>& H, double C, int grid_density,
                         const std::vector<PolyMatrix<double>>& G,
                         const std::optional<MeasureSpec>& nu, int y_density = 5);

// Grid estimate of max |lambda_max(G_j(x,y))| over [-C,C]^n x Y, inflated by
// the 1.1 safety factor. Requires a compact y side (atoms or box).
double estimate_M(const std::vector<PolyMatrix<double>>& G, double C,
                  const std::optional<MeasureSpec>& nu, int grid_density = 9,
                  int y_density = 5);

struct PropMainRow {
  int k = 0;
  double grid_min_eig = 0.0;
};

struct PropMainReport {
  std::vector<PropMainRow> table;
  int k_bar = -1;  // smallest k with positive grid minimum, -1 if none
  double M = 0.0;
};

// Constructive multiplier sweep: for each k, assembles
//   R_k = F - sum_j integral <I_p (x) (I - G_j/M)^{2k}, G_j>_p dnu
// and reports its grid minimum eigenvalue on [-C, C]^n.
PropMainReport prop_main_check(const PolyMatrix<double>& F,
                               const std::vector<PolyMatrix<double>>& G,
                               const MeasureSpec& nu, double C, double M, int k_max,
                               int grid_density = 9);

std::vector<std::vector<double>> grid_points(int n, double C, int density);

}  // namespace pmi
