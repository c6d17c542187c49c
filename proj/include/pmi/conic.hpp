#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmi {

// Block-diagonal SDP in standard primal form with free scalar variables:
//
//   minimize    sum_b <C_b, X_b> + c^T u
//   subject to  sum_b <A_{i,b}, X_b> + d_i^T u = b_i,   i = 1..m
//               X_b PSD, u free.
//
// Constraint matrices are stored as upper-triangle sparse entries; an
// off-diagonal entry (r < c) stands for the symmetric pair, so it enters
// <A, X> with weight 2.
struct ConicProblem {
  struct Entry {
    int block;
    int r, c;  // r <= c
    double coeff;
  };
  struct FreeEntry {
    int index;
    double coeff;
  };
  struct Row {
    std::vector<Entry> entries;
    std::vector<FreeEntry> free_entries;
    double rhs = 0.0;
  };

  std::vector<int> block_sizes;
  int num_free = 0;
  std::vector<Row> rows;
  std::vector<Entry> obj_entries;
  std::vector<FreeEntry> obj_free;
  double obj_const = 0.0;
  bool maximize = false;

  std::map<std::string, std::string> metadata;  // block roles etc.

  int num_constraints() const { return int(rows.size()); }
  int total_psd_side() const {
    int s = 0;
    for (int b : block_sizes) s += b;
    return s;
  }

  void add_entry(Row& row, int block, int r, int c, double coeff) const;
  void validate() const;
};

enum class SolveStatus {
  Optimal,
  PrimalInfeasible,
  DualInfeasible,
  MaxIterations,
  NumericalFailure,
};

std::string to_string(SolveStatus s);

struct Residuals {
  double primal = 0.0;   // ||A(X) + D u - b|| / (1 + ||b||)
  double dual = 0.0;     // ||C - A^T(y) - Z|| / (1 + ||C||), incl. free rows
  double gap = 0.0;      // |pobj - dobj| / (1 + |pobj| + |dobj|)
};

// Certificate of primal infeasibility: an improving ray for the dual,
// normalized so that b^T y = 1, with -A^T(y) PSD and D^T y = 0.
struct ImprovingRay {
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> Z;  // Z = -A^T(y), per block
  double ray_dual_residual = 0.0;  // ||A^T(y) + Z|| recomputed
  double ray_free_residual = 0.0;  // ||D^T y||
  double min_eig_Z = 0.0;
  double objective = 0.0;          // b^T y (post-normalization: 1)
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> Z;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
  Residuals residuals;
  int iterations = 0;
  std::string message;
  std::optional<ImprovingRay> ray;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
  int psd_side_cap = 600;
  unsigned seed = 0;  // selects the deterministic starting-point scale
};

SolveReport solve(const ConicProblem& p, const SolveOptions& opts = {});

// Residuals of a given primal/dual pair, recomputed from scratch.
Residuals compute_residuals(const ConicProblem& p,
                            const std::vector<Eigen::MatrixXd>& X,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                            const std::vector<Eigen::MatrixXd>& Z);

double primal_objective(const ConicProblem& p, const std::vector<Eigen::MatrixXd>& X,
                        const Eigen::VectorXd& u);
double dual_objective(const ConicProblem& p, const Eigen::VectorXd& y);

}  // namespace pmi
