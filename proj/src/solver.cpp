#include "pmi/conic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pmi {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal-infeasible";
    case SolveStatus::DualInfeasible: return "dual-infeasible";
    case SolveStatus::MaxIterations: return "max-iter";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

void ConicProblem::add_entry(Row& row, int block, int r, int c, double coeff) const {
  if (r > c) std::swap(r, c);
  row.entries.push_back({block, r, c, coeff});
}

void ConicProblem::validate() const {
  for (const auto& row : rows) {
    for (const auto& e : row.entries) {
      if (e.block < 0 || e.block >= (int)block_sizes.size())
        throw std::invalid_argument("constraint references invalid block");
      if (e.r < 0 || e.c < e.r || e.c >= block_sizes[e.block])
        throw std::invalid_argument("constraint entry outside block");
    }
    for (const auto& f : row.free_entries)
      if (f.index < 0 || f.index >= num_free)
        throw std::invalid_argument("constraint references invalid free variable");
  }
  for (const auto& e : obj_entries)
    if (e.block < 0 || e.block >= (int)block_sizes.size() || e.r > e.c)
      throw std::invalid_argument("objective entry invalid");
  for (const auto& f : obj_free)
    if (f.index < 0 || f.index >= num_free)
      throw std::invalid_argument("objective references invalid free variable");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Dense {
  // Dense per-block constraint matrices A[i][b], objective C[b], free D (m x f).
  std::vector<std::vector<MatrixXd>> A;
  std::vector<MatrixXd> C;
  MatrixXd D;
  VectorXd b;
  VectorXd c;
  int m = 0, f = 0;
  double sign = 1.0;  // +1 minimize, -1 when the input was a max problem
};

MatrixXd entries_to_matrix(const std::vector<ConicProblem::Entry>& entries, int block,
                           int side) {
  MatrixXd M = MatrixXd::Zero(side, side);
  for (const auto& e : entries) {
    if (e.block != block) continue;
    M(e.r, e.c) += e.coeff;
    if (e.r != e.c) M(e.c, e.r) += e.coeff;
  }
  return M;
}

Dense densify(const ConicProblem& p) {
  Dense d;
  d.m = p.num_constraints();
  d.f = p.num_free;
  d.sign = p.maximize ? -1.0 : 1.0;
  d.b = VectorXd::Zero(d.m);
  d.c = VectorXd::Zero(d.f);
  d.D = MatrixXd::Zero(d.m, d.f);
  d.C.resize(p.block_sizes.size());
  for (size_t bl = 0; bl < p.block_sizes.size(); ++bl)
    d.C[bl] = d.sign * entries_to_matrix(p.obj_entries, int(bl), p.block_sizes[bl]);
  for (const auto& fe : p.obj_free) d.c[fe.index] += d.sign * fe.coeff;
  d.A.resize(d.m);
  for (int i = 0; i < d.m; ++i) {
    d.A[i].resize(p.block_sizes.size());
    for (size_t bl = 0; bl < p.block_sizes.size(); ++bl)
      d.A[i][bl] = entries_to_matrix(p.rows[i].entries, int(bl), p.block_sizes[bl]);
    for (const auto& fe : p.rows[i].free_entries) d.D(i, fe.index) += fe.coeff;
    d.b[i] = p.rows[i].rhs;
  }
  return d;
}

double inner(const MatrixXd& A, const MatrixXd& B) { return (A.array() * B.array()).sum(); }

// A(X) + D u.
VectorXd apply_A(const Dense& d, const std::vector<MatrixXd>& X, const VectorXd& u) {
  VectorXd r = VectorXd::Zero(d.m);
  for (int i = 0; i < d.m; ++i)
    for (size_t bl = 0; bl < X.size(); ++bl) r[i] += inner(d.A[i][bl], X[bl]);
  if (d.f > 0) r += d.D * u;
  return r;
}

// A^T(y) per block.
std::vector<MatrixXd> apply_At(const Dense& d, const VectorXd& y) {
  std::vector<MatrixXd> r(d.C.size());
  for (size_t bl = 0; bl < d.C.size(); ++bl) {
    r[bl] = MatrixXd::Zero(d.C[bl].rows(), d.C[bl].cols());
    for (int i = 0; i < d.m; ++i) r[bl] += y[i] * d.A[i][bl];
  }
  return r;
}

double frob_norm(const std::vector<MatrixXd>& Ms) {
  double s = 0;
  for (const auto& M : Ms) s += M.squaredNorm();
  return std::sqrt(s);
}

// Symmetric PSD square root and inverse square root via eigendecomposition.
void sqrt_pair(const MatrixXd& M, MatrixXd& half, MatrixXd& inv_half) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
  VectorXd sq = ev.cwiseSqrt();
  half = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
  inv_half = es.eigenvectors() * sq.cwiseInverse().asDiagonal() *
             es.eigenvectors().transpose();
}

// Largest alpha in (0, 1] with X + alpha dX > 0, damped by tau.
double psd_step_length(const std::vector<MatrixXd>& X, const std::vector<MatrixXd>& dX,
                       double tau) {
  double alpha = 1.0;
  for (size_t bl = 0; bl < X.size(); ++bl) {
    if (X[bl].rows() == 0) continue;
    Eigen::LLT<MatrixXd> llt(X[bl]);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXd L = llt.matrixL();
    MatrixXd S = L.triangularView<Eigen::Lower>().solve(dX[bl]);
    S = L.triangularView<Eigen::Lower>().solve(S.transpose().eval());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()));
    double lmin = es.eigenvalues().minCoeff();
    if (lmin < 0) alpha = std::min(alpha, -tau / lmin);
  }
  return std::min(alpha, 1.0);
}

// Solves the Lyapunov system (V U + U V)/2 = S for U, with V = Q L Q^T.
MatrixXd lyapunov_solve(const Eigen::SelfAdjointEigenSolver<MatrixXd>& esV,
                        const MatrixXd& S) {
  const MatrixXd& Q = esV.eigenvectors();
  const VectorXd& lam = esV.eigenvalues();
  MatrixXd T = Q.transpose() * S * Q;
  for (int i = 0; i < T.rows(); ++i)
    for (int j = 0; j < T.cols(); ++j) T(i, j) *= 2.0 / (lam[i] + lam[j]);
  return Q * T * Q.transpose();
}

struct KktSolver {
  // Factorization of M = [<A_i, W A_j W>] with free-variable elimination.
  Eigen::LLT<MatrixXd> lltM;
  MatrixXd M;
  MatrixXd MinvD;
  Eigen::FullPivLU<MatrixXd> luS;  // of D^T M^{-1} D
  const Dense* d = nullptr;
  bool ok = false;

  void factor(const Dense& dd, const std::vector<MatrixXd>& W) {
    d = &dd;
    const int m = dd.m;
    M.setZero(m, m);
    std::vector<std::vector<MatrixXd>> WAW(m);
    for (int i = 0; i < m; ++i) {
      WAW[i].resize(W.size());
      for (size_t bl = 0; bl < W.size(); ++bl)
        WAW[i][bl] = W[bl] * dd.A[i][bl] * W[bl];
    }
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double s = 0;
        for (size_t bl = 0; bl < W.size(); ++bl) s += inner(dd.A[i][bl], WAW[j][bl]);
        M(i, j) = M(j, i) = s;
      }
    // Tiny Tikhonov term guards rank-deficient constraint sets.
    double reg = 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
    M.diagonal().array() += reg;
    lltM.compute(M);
    ok = lltM.info() == Eigen::Success;
    if (!ok) return;
    if (dd.f > 0) {
      MinvD = lltM.solve(dd.D);
      MatrixXd S = dd.D.transpose() * MinvD;
      luS.compute(S);
      ok = luS.isInvertible();
    }
  }

  // Solves [M D; D^T 0] [dy; du] = [r1; r2].
  void solve(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& du) const {
    VectorXd Minv_r1 = lltM.solve(r1);
    if (d->f > 0) {
      du = luS.solve(d->D.transpose() * Minv_r1 - r2);
      dy = Minv_r1 - MinvD * du;
    } else {
      du.resize(0);
      dy = Minv_r1;
    }
  }
};

struct Iterate {
  std::vector<MatrixXd> X, Z;
  VectorXd y, u;
};

// Attempts to certify primal infeasibility from the current dual iterate:
// normalize y by b^T y, project -A^T(y) onto the PSD cone, and accept only
// when the recomputed ray residuals are tight.
std::optional<ImprovingRay> extract_ray(const Dense& d, const Iterate& it,
                                        double threshold) {
  const size_t B = d.C.size();
  double scale = d.b.dot(it.y);
  if (!(scale > threshold)) return std::nullopt;
  VectorXd yr = it.y / scale;
  auto Atyr = apply_At(d, yr);
  double devsq = 0;
  double min_eig = 0;
  std::vector<MatrixXd> Zproj(B);
  for (size_t bl = 0; bl < B; ++bl) {
    MatrixXd Zr = -Atyr[bl];
    if (Zr.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(Zr);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      Zproj[bl] = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    } else {
      Zproj[bl] = Zr;
    }
    devsq += (Atyr[bl] + Zproj[bl]).squaredNorm();
  }
  double dev = std::sqrt(devsq);
  double freeres = d.f > 0 ? (d.D.transpose() * yr).norm() : 0.0;
  if (dev > 1e-7 || freeres > 1e-7) return std::nullopt;
  ImprovingRay ray;
  ray.y = d.sign * yr;
  ray.Z = Zproj;
  ray.ray_dual_residual = dev;
  ray.ray_free_residual = freeres;
  ray.min_eig_Z = min_eig;
  ray.objective = 1.0;
  return ray;
}

SolveReport finish(const ConicProblem& p, const Dense& d, const Iterate& it,
                   SolveStatus status, int iters, const std::string& msg) {
  SolveReport rep;
  rep.status = status;
  rep.X = it.X;
  rep.Z = it.Z;
  rep.y = d.sign * it.y;  // undo the max->min flip on the dual side
  rep.u = it.u;
  rep.iterations = iters;
  rep.message = msg;
  rep.primal_obj = primal_objective(p, it.X, it.u);
  rep.dual_obj = dual_objective(p, rep.y);
  rep.residuals = compute_residuals(p, it.X, it.u, rep.y, it.Z);
  return rep;
}

}  // namespace

double primal_objective(const ConicProblem& p, const std::vector<MatrixXd>& X,
                        const VectorXd& u) {
  double v = p.obj_const;
  for (const auto& e : p.obj_entries) {
    double w = (e.r == e.c) ? 1.0 : 2.0;
    v += w * e.coeff * X[e.block](e.r, e.c);
  }
  for (const auto& f : p.obj_free) v += f.coeff * u[f.index];
  return v;
}

double dual_objective(const ConicProblem& p, const VectorXd& y) {
  double v = p.obj_const;
  for (int i = 0; i < p.num_constraints(); ++i) v += p.rows[i].rhs * y[i];
  return v;
}

Residuals compute_residuals(const ConicProblem& p, const std::vector<MatrixXd>& X,
                            const VectorXd& u, const VectorXd& y,
                            const std::vector<MatrixXd>& Z) {
  Dense d = densify(p);
  Residuals r;
  VectorXd yint = d.sign * y;  // internal minimization multipliers

  VectorXd rp = d.b - apply_A(d, X, u);
  r.primal = rp.norm() / (1.0 + d.b.norm());

  auto Aty = apply_At(d, yint);
  double dual_sq = 0.0, cnorm_sq = 0.0;
  for (size_t bl = 0; bl < X.size(); ++bl) {
    dual_sq += (d.C[bl] - Aty[bl] - Z[bl]).squaredNorm();
    cnorm_sq += d.C[bl].squaredNorm();
  }
  if (d.f > 0) {
    dual_sq += (d.c - d.D.transpose() * yint).squaredNorm();
    cnorm_sq += d.c.squaredNorm();
  }
  r.dual = std::sqrt(dual_sq) / (1.0 + std::sqrt(cnorm_sq));

  double pobj = primal_objective(p, X, u);
  double dobj = dual_objective(p, y);
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return r;
}

SolveReport solve(const ConicProblem& p, const SolveOptions& opts) {
  p.validate();
  SolveReport rep;

  if (p.total_psd_side() > opts.psd_side_cap) {
    rep.status = SolveStatus::NumericalFailure;
    rep.message = "desk-scale cap exceeded (" + std::to_string(p.total_psd_side()) +
                  " > " + std::to_string(opts.psd_side_cap) +
                  "): export to an external solver";
    return rep;
  }

  // Presolve: a row with no unknowns and a nonzero right-hand side can never
  // be satisfied.
  for (int i = 0; i < p.num_constraints(); ++i) {
    const auto& row = p.rows[i];
    bool empty = row.entries.empty() && row.free_entries.empty();
    if (empty && row.rhs != 0.0) {
      rep.status = SolveStatus::PrimalInfeasible;
      rep.message = "structurally infeasible equality row " + std::to_string(i);
      return rep;
    }
  }

  Dense d = densify(p);
  const int m = d.m;
  const size_t B = p.block_sizes.size();

  if (m == 0) {
    // No constraints: X = 0 is optimal iff every C_b is PSD.
    Iterate it;
    it.X.resize(B);
    it.Z.resize(B);
    bool c_psd = true;
    for (size_t bl = 0; bl < B; ++bl) {
      it.X[bl] = MatrixXd::Zero(p.block_sizes[bl], p.block_sizes[bl]);
      it.Z[bl] = d.C[bl];
      if (p.block_sizes[bl] > 0) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(d.C[bl]);
        if (es.eigenvalues().minCoeff() < -opts.tol) c_psd = false;
      }
    }
    it.y = VectorXd::Zero(0);
    it.u = VectorXd::Zero(d.f);
    return finish(p, d, it, c_psd ? SolveStatus::Optimal : SolveStatus::DualInfeasible,
                  0, c_psd ? "no constraints" : "objective unbounded below");
  }

  // Deterministic starting point; the seed selects the scale family.
  double data_scale = std::max({1.0, d.b.lpNorm<Eigen::Infinity>(),
                                frob_norm(d.C)});
  double eta = 10.0 * std::sqrt(data_scale) * (1.0 + 0.1 * double(opts.seed % 7));

  Iterate it;
  it.X.resize(B);
  it.Z.resize(B);
  for (size_t bl = 0; bl < B; ++bl) {
    int s = p.block_sizes[bl];
    it.X[bl] = eta * MatrixXd::Identity(s, s);
    it.Z[bl] = eta * MatrixXd::Identity(s, s);
  }
  it.y = VectorXd::Zero(m);
  it.u = VectorXd::Zero(d.f);

  int total_dim = 0;
  for (int s : p.block_sizes) total_dim += s;
  if (total_dim == 0) {
    rep.status = SolveStatus::NumericalFailure;
    rep.message = "no PSD blocks";
    return rep;
  }

  const double tau = 0.98;
  double mu = eta * eta;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    // Residuals.
    VectorXd rp = d.b - apply_A(d, it.X, it.u);
    auto Aty = apply_At(d, it.y);
    std::vector<MatrixXd> Rd(B);
    for (size_t bl = 0; bl < B; ++bl) Rd[bl] = d.C[bl] - Aty[bl] - it.Z[bl];
    VectorXd rf = d.f > 0 ? VectorXd(d.c - d.D.transpose() * it.y) : VectorXd();

    double gap = 0;
    for (size_t bl = 0; bl < B; ++bl) gap += inner(it.X[bl], it.Z[bl]);
    mu = gap / total_dim;

    double pobj = 0, dobj = d.b.dot(it.y);
    for (size_t bl = 0; bl < B; ++bl) pobj += inner(d.C[bl], it.X[bl]);
    if (d.f > 0) pobj += d.c.dot(it.u);

    double rel_p = rp.norm() / (1.0 + d.b.norm());
    double rel_d = (std::sqrt([&] {
                     double s = 0;
                     for (const auto& M : Rd) s += M.squaredNorm();
                     if (d.f > 0) s += rf.squaredNorm();
                     return s;
                   }())) /
                   (1.0 + frob_norm(d.C));
    double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (rel_p <= opts.tol && rel_d <= opts.tol && rel_gap <= opts.tol) {
      return finish(p, d, it, SolveStatus::Optimal, iter - 1, "converged");
    }

    if (dobj > 1e4 * data_scale) {
      if (auto ray = extract_ray(d, it, 1.0)) {
        rep = finish(p, d, it, SolveStatus::PrimalInfeasible, iter,
                     "dual improving ray found");
        rep.ray = *ray;
        return rep;
      }
    }
    // Dual-infeasibility (primal unbounded) heuristic: feasible primal with
    // the objective diving past any data-driven bound.
    if (rel_p <= opts.tol && pobj < -1e10 * data_scale) {
      return finish(p, d, it, SolveStatus::DualInfeasible, iter,
                    "primal objective unbounded below");
    }

    // NT scaling per block.
    std::vector<MatrixXd> W(B), Whalf(B), Winvhalf(B);
    std::vector<Eigen::SelfAdjointEigenSolver<MatrixXd>> esV(B);
    bool scale_ok = true;
    for (size_t bl = 0; bl < B; ++bl) {
      int s = p.block_sizes[bl];
      if (s == 0) {
        W[bl] = Whalf[bl] = Winvhalf[bl] = MatrixXd::Zero(0, 0);
        continue;
      }
      MatrixXd Xh, Xih;
      sqrt_pair(it.X[bl], Xh, Xih);
      MatrixXd Bm = Xh * it.Z[bl] * Xh;
      Bm = 0.5 * (Bm + Bm.transpose()).eval();
      MatrixXd Bh, Bih;
      sqrt_pair(Bm, Bh, Bih);
      W[bl] = Xh * Bih * Xh;
      W[bl] = 0.5 * (W[bl] + W[bl].transpose()).eval();
      sqrt_pair(W[bl], Whalf[bl], Winvhalf[bl]);
      MatrixXd V = Winvhalf[bl] * it.X[bl] * Winvhalf[bl];
      V = 0.5 * (V + V.transpose()).eval();
      esV[bl].compute(V);
      if (esV[bl].eigenvalues().minCoeff() <= 0) scale_ok = false;
    }
    if (!scale_ok) {
      return finish(p, d, it, SolveStatus::NumericalFailure, iter,
                    "NT scaling broke down");
    }

    KktSolver kkt;
    kkt.factor(d, W);
    if (!kkt.ok) {
      return finish(p, d, it, SolveStatus::NumericalFailure, iter,
                    "Schur complement factorization failed");
    }

    auto direction = [&](const std::vector<MatrixXd>& Rc, VectorXd& dy, VectorXd& du,
                         std::vector<MatrixXd>& dX, std::vector<MatrixXd>& dZ) {
      VectorXd r1 = rp;
      for (size_t bl = 0; bl < B; ++bl) {
        MatrixXd T = Rc[bl] - W[bl] * Rd[bl] * W[bl];
        for (int i = 0; i < m; ++i) r1[i] -= inner(d.A[i][bl], T);
      }
      VectorXd r2 = d.f > 0 ? rf : VectorXd();
      kkt.solve(r1, r2, dy, du);
      auto Atdy = apply_At(d, dy);
      dX.resize(B);
      dZ.resize(B);
      for (size_t bl = 0; bl < B; ++bl) {
        dZ[bl] = Rd[bl] - Atdy[bl];
        dX[bl] = Rc[bl] - W[bl] * dZ[bl] * W[bl];
        dX[bl] = 0.5 * (dX[bl] + dX[bl].transpose()).eval();
        dZ[bl] = 0.5 * (dZ[bl] + dZ[bl].transpose()).eval();
      }
    };

    // Predictor (affine scaling) direction: Rc = -X per block.
    std::vector<MatrixXd> Rc(B);
    for (size_t bl = 0; bl < B; ++bl) Rc[bl] = -it.X[bl];
    VectorXd dy_a, du_a;
    std::vector<MatrixXd> dX_a, dZ_a;
    direction(Rc, dy_a, du_a, dX_a, dZ_a);

    double ap = psd_step_length(it.X, dX_a, 1.0);
    double ad = psd_step_length(it.Z, dZ_a, 1.0);
    double mu_aff = 0;
    for (size_t bl = 0; bl < B; ++bl)
      mu_aff += inner(it.X[bl] + ap * dX_a[bl], it.Z[bl] + ad * dZ_a[bl]);
    mu_aff = std::max(mu_aff / total_dim, 0.0);
    double sigma = std::pow(std::min(1.0, mu_aff / mu), 3);

    // Corrector with the Mehrotra second-order term in the scaled space.
    for (size_t bl = 0; bl < B; ++bl) {
      int s = p.block_sizes[bl];
      if (s == 0) continue;
      MatrixXd Dx = Winvhalf[bl] * dX_a[bl] * Winvhalf[bl];
      MatrixXd Dz = Whalf[bl] * dZ_a[bl] * Whalf[bl];
      MatrixXd V = Winvhalf[bl] * it.X[bl] * Winvhalf[bl];
      V = 0.5 * (V + V.transpose()).eval();
      MatrixXd rhs = sigma * mu * MatrixXd::Identity(s, s) - V * V -
                     0.5 * (Dx * Dz + Dz * Dx);
      rhs = 0.5 * (rhs + rhs.transpose()).eval();
      MatrixXd U = lyapunov_solve(esV[bl], rhs);
      Rc[bl] = Whalf[bl] * U * Whalf[bl];
      Rc[bl] = 0.5 * (Rc[bl] + Rc[bl].transpose()).eval();
    }

    VectorXd dy, du;
    std::vector<MatrixXd> dX, dZ;
    direction(Rc, dy, du, dX, dZ);

    double alpha_p = psd_step_length(it.X, dX, tau);
    double alpha_d = psd_step_length(it.Z, dZ, tau);
    if (alpha_p < 1e-10 && alpha_d < 1e-10) {
      if (auto ray = extract_ray(d, it, 1.0)) {
        rep = finish(p, d, it, SolveStatus::PrimalInfeasible, iter,
                     "dual improving ray found after stall");
        rep.ray = *ray;
        return rep;
      }
      return finish(p, d, it, SolveStatus::NumericalFailure, iter,
                    "step length collapsed");
    }

    for (size_t bl = 0; bl < B; ++bl) {
      it.X[bl] += alpha_p * dX[bl];
      it.Z[bl] += alpha_d * dZ[bl];
      it.X[bl] = 0.5 * (it.X[bl] + it.X[bl].transpose()).eval();
      it.Z[bl] = 0.5 * (it.Z[bl] + it.Z[bl].transpose()).eval();
    }
    it.y += alpha_d * dy;
    if (d.f > 0) it.u += alpha_p * du;
  }

  // One last infeasibility probe before giving up on the iteration budget.
  if (auto ray = extract_ray(d, it, 1.0)) {
    rep = finish(p, d, it, SolveStatus::PrimalInfeasible, opts.max_iter,
                 "dual improving ray found at iteration cap");
    rep.ray = *ray;
    return rep;
  }
  return finish(p, d, it, SolveStatus::MaxIterations, opts.max_iter,
                "iteration cap reached");
}

}  // namespace pmi
