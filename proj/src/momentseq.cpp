#include "pmi/momentseq.hpp"

#include <cmath>

namespace pmi {

namespace {

double min_eigenvalue(const DenseMat<double>& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::MatrixXd E = to_eigen(M);
  E = 0.5 * (E + E.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
  return es.eigenvalues().minCoeff();
}

double spectral_norm_sym(const DenseMat<double>& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::MatrixXd E = to_eigen(M);
  E = 0.5 * (E + E.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

BmpReport bmp_check(const MomentSeq<double>& seq,
                    const std::optional<PolyMatrix<double>>& G,
                    const std::optional<MeasureSpec>& nu, double C, int d, int k,
                    double eig_floor) {
  if (C <= 0) throw std::invalid_argument("C must be positive");
  BmpReport rep;
  rep.min_eig_moment = min_eigenvalue(moment_matrix(seq, d));

  if (G && nu) {
    int dg = degrees(*G).d_ceil;
    int dloc = std::max(0, d - dg);
    rep.min_eig_localizing = min_eigenvalue(localizing_nu(seq, *G, *nu, dloc, k));
    rep.has_localizing = true;
  }

  double tr0 = 0.0;
  const auto& S0 = seq.get(Exps(seq.n, 0));
  for (int i = 0; i < seq.p; ++i) tr0 += S0(i, i);

  rep.max_growth_violation = -1e300;
  for (const auto& [alpha, Sa] : seq.S) {
    double cap = tr0 * std::pow(C, double(total_degree(alpha)));
    double viol = spectral_norm_sym(Sa) - cap;
    if (viol > rep.max_growth_violation) {
      rep.max_growth_violation = viol;
      rep.worst_alpha = alpha;
    }
  }

  double scale = std::max(1.0, tr0);
  rep.pass = rep.min_eig_moment >= -eig_floor &&
             (!rep.has_localizing || rep.min_eig_localizing >= -eig_floor) &&
             rep.max_growth_violation <= eig_floor * scale;
  return rep;
}

}  // namespace pmi
