#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pmi {

using Exps = std::vector<int>;

inline int total_degree(const Exps& e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

// x^ax * y^ay. ay is empty when the instance lives in R[x] only.
struct Monomial {
  Exps ax;
  Exps ay;

  Monomial() = default;
  Monomial(Exps x, Exps y = {}) : ax(std::move(x)), ay(std::move(y)) {
    for (int e : ax)
      if (e < 0) throw std::invalid_argument("negative exponent");
    for (int e : ay)
      if (e < 0) throw std::invalid_argument("negative exponent");
  }

  int deg_x() const { return total_degree(ax); }
  int deg_y() const { return total_degree(ay); }
  int deg() const { return deg_x() + deg_y(); }

  bool operator==(const Monomial& o) const { return ax == o.ax && ay == o.ay; }

  Monomial operator*(const Monomial& o) const {
    Monomial r = *this;
    for (size_t i = 0; i < r.ax.size(); ++i) r.ax[i] += o.ax[i];
    for (size_t i = 0; i < r.ay.size(); ++i) r.ay[i] += o.ay[i];
    return r;
  }
};

// Graded lexicographic order on exponent vectors: lower total degree first,
// ties broken so that (2,0) precedes (1,1) precedes (0,2). This matches the
// canonical basis display 1, x1, ..., xn, x1^2, x1x2, ..., xn^d.
inline bool grlex_less(const Exps& a, const Exps& b) {
  int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  // Within a grade, lexicographically larger exponent vector comes first.
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

// Term order for polynomial storage: grade on the full (x,y) degree, then
// grlex tie-breaks on x, then on y. Any strict total order works here; this
// one keeps iteration (and every serialized artifact) deterministic.
struct MonomialOrder {
  bool operator()(const Monomial& a, const Monomial& b) const {
    int da = a.deg(), db = b.deg();
    if (da != db) return da < db;
    if (a.ax != b.ax) return grlex_less(a.ax, b.ax);
    return grlex_less(a.ay, b.ay);
  }
};

}  // namespace pmi
