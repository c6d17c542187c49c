#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pmi/monomial.hpp"

namespace pmi {

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace detail {
inline void enumerate_exact(int n, int deg, Exps& cur, std::vector<Exps>& out) {
  if (n == 1) {
    cur.push_back(deg);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  // First coordinate largest first, so the grade is emitted in grlex order.
  for (int e = deg; e >= 0; --e) {
    cur.push_back(e);
    enumerate_exact(n - 1, deg - e, cur, out);
    cur.pop_back();
  }
}
}  // namespace detail

// All alpha in N^n with |alpha| == deg, grlex order.
inline std::vector<Exps> exponents_exact_degree(int n, int deg) {
  if (n == 0) return deg == 0 ? std::vector<Exps>{Exps{}} : std::vector<Exps>{};
  std::vector<Exps> out;
  Exps cur;
  detail::enumerate_exact(n, deg, cur, out);
  return out;
}

// All alpha in N^n with |alpha| <= d, grlex order.
inline std::vector<Exps> exponents_up_to(int n, int d) {
  std::vector<Exps> out;
  for (int deg = 0; deg <= d; ++deg) {
    auto grade = exponents_exact_degree(n, deg);
    out.insert(out.end(), grade.begin(), grade.end());
  }
  return out;
}

// Canonical monomial basis [x]_d = (1, x1, ..., xn, x1^2, x1x2, ..., xn^d).
struct MonomialBasis {
  int n = 0;
  int d = 0;
  std::vector<Exps> order;

  MonomialBasis() = default;
  MonomialBasis(int n_, int d_) : n(n_), d(d_), order(exponents_up_to(n_, d_)) {
    if (order.size() != binomial(n + d, d)) {
      throw std::logic_error("basis cardinality mismatch");
    }
  }

  size_t size() const { return order.size(); }
};

// Flattened [x]-basis (x) [y]-basis with x-index major. This is the index
// order used for every basis-indexed matrix with two variable groups.
inline std::vector<Monomial> product_basis(const std::vector<Exps>& bx,
                                           const std::vector<Exps>& by) {
  std::vector<Monomial> out;
  out.reserve(bx.size() * std::max<size_t>(1, by.size()));
  if (by.empty()) {
    for (const auto& a : bx) out.emplace_back(a, Exps{});
    return out;
  }
  for (const auto& a : bx)
    for (const auto& b : by) out.emplace_back(a, b);
  return out;
}

inline std::vector<Monomial> x_basis_monomials(const std::vector<Exps>& bx) {
  return product_basis(bx, {});
}

}  // namespace pmi
