#include "pmi/sdpa_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace pmi {

namespace {

// Shortest round-trip decimal form; identical doubles give identical bytes.
std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

using Key = std::tuple<int, int, int>;  // block, r, c (1-indexed in output)

void accumulate(std::map<Key, double>& acc, int block, int r, int c, double v) {
  if (r > c) std::swap(r, c);
  acc[{block, r, c}] += v;
}

void emit(std::ostream& os, int cons, const std::map<Key, double>& acc) {
  for (const auto& [key, v] : acc) {
    if (v == 0.0) continue;
    auto [blk, r, c] = key;
    os << cons << " " << blk + 1 << " " << r + 1 << " " << c + 1 << " " << fmt(v)
       << "\n";
  }
}

}  // namespace

std::string sdpa_text(const ConicProblem& p) {
  p.validate();
  const int m = p.num_constraints();
  const int f = p.num_free;
  const double sign = p.maximize ? -1.0 : 1.0;
  const int nblocks = int(p.block_sizes.size()) + (f > 0 ? 1 : 0);
  const int free_block = int(p.block_sizes.size());

  std::ostringstream os;
  os << m << "\n" << nblocks << "\n";
  for (size_t i = 0; i < p.block_sizes.size(); ++i) {
    if (i) os << " ";
    os << p.block_sizes[i];
  }
  if (f > 0) {
    if (!p.block_sizes.empty()) os << " ";
    os << -(2 * f);
  }
  os << "\n";
  for (int i = 0; i < m; ++i) {
    if (i) os << " ";
    os << fmt(p.rows[i].rhs);
  }
  os << "\n";

  // F_0 = -C (internal minimization orientation), free part split as +/-.
  std::map<Key, double> acc;
  for (const auto& e : p.obj_entries) accumulate(acc, e.block, e.r, e.c, -sign * e.coeff);
  for (const auto& fe : p.obj_free) {
    accumulate(acc, free_block, fe.index, fe.index, -sign * fe.coeff);
    accumulate(acc, free_block, f + fe.index, f + fe.index, sign * fe.coeff);
  }
  emit(os, 0, acc);

  for (int i = 0; i < m; ++i) {
    acc.clear();
    for (const auto& e : p.rows[i].entries) accumulate(acc, e.block, e.r, e.c, e.coeff);
    for (const auto& fe : p.rows[i].free_entries) {
      accumulate(acc, free_block, fe.index, fe.index, fe.coeff);
      accumulate(acc, free_block, f + fe.index, f + fe.index, -fe.coeff);
    }
    emit(os, i + 1, acc);
  }
  return os.str();
}

void export_sdpa(const ConicProblem& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << sdpa_text(p);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

std::vector<double> extract_numbers(const std::string& text) {
  std::vector<double> out;
  size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (std::isdigit((unsigned char)ch) || ch == '-' || ch == '+' || ch == '.') {
      size_t j = i;
      while (j < text.size() &&
             (std::isdigit((unsigned char)text[j]) || text[j] == '-' ||
              text[j] == '+' || text[j] == '.' || text[j] == 'e' || text[j] == 'E'))
        ++j;
      try {
        out.push_back(std::stod(text.substr(i, j - i)));
      } catch (...) {
        // stray punctuation; skip
      }
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

SolveReport import_solution(const ConicProblem& p, const std::string& path,
                            double accept_tol) {
  p.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();

  auto pos_xvec = text.find("xVec");
  auto pos_xmat = text.find("xMat");
  auto pos_ymat = text.find("yMat");
  if (pos_xvec == std::string::npos || pos_xmat == std::string::npos ||
      pos_ymat == std::string::npos || !(pos_xvec < pos_xmat && pos_xmat < pos_ymat)) {
    throw std::runtime_error("malformed solution file: missing xVec/xMat/yMat");
  }

  auto xvec = extract_numbers(text.substr(pos_xvec + 4, pos_xmat - pos_xvec - 4));
  auto xmat = extract_numbers(text.substr(pos_xmat + 4, pos_ymat - pos_xmat - 4));
  auto ymat = extract_numbers(text.substr(pos_ymat + 4));

  const int m = p.num_constraints();
  const int f = p.num_free;
  size_t mat_len = 0;
  for (int s : p.block_sizes) mat_len += size_t(s) * s;
  if (f > 0) mat_len += 2 * size_t(f);  // diagonal free block

  if ((int)xvec.size() != m) {
    throw std::runtime_error("dimension mismatch: xVec has " +
                             std::to_string(xvec.size()) + " entries, expected " +
                             std::to_string(m));
  }
  if (xmat.size() != mat_len || ymat.size() != mat_len) {
    throw std::runtime_error("dimension mismatch: matrix payload expected " +
                             std::to_string(mat_len) + " entries");
  }

  SolveReport rep;
  const double sign = p.maximize ? -1.0 : 1.0;
  rep.y = Eigen::VectorXd(m);
  for (int i = 0; i < m; ++i) rep.y[i] = -sign * xvec[i];

  auto unpack = [&](const std::vector<double>& flat, std::vector<Eigen::MatrixXd>& out,
                    Eigen::VectorXd& free_vals) {
    out.clear();
    size_t pos = 0;
    for (int s : p.block_sizes) {
      Eigen::MatrixXd M(s, s);
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) M(r, c) = flat[pos++];
      M = 0.5 * (M + M.transpose()).eval();
      out.push_back(std::move(M));
    }
    free_vals = Eigen::VectorXd::Zero(f);
    if (f > 0) {
      for (int i = 0; i < f; ++i) free_vals[i] = flat[pos + i] - flat[pos + f + i];
    }
  };

  Eigen::VectorXd ufree, dummy;
  unpack(ymat, rep.X, ufree);
  rep.u = ufree;
  unpack(xmat, rep.Z, dummy);

  rep.primal_obj = primal_objective(p, rep.X, rep.u);
  rep.dual_obj = dual_objective(p, rep.y);
  rep.residuals = compute_residuals(p, rep.X, rep.u, rep.y, rep.Z);
  bool ok = rep.residuals.primal <= accept_tol && rep.residuals.dual <= accept_tol &&
            rep.residuals.gap <= accept_tol;
  rep.status = ok ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  rep.message = ok ? "imported solution verified" : "imported solution residuals too large";
  return rep;
}

}  // namespace pmi
