#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they are used to check.

#include <functional>
#include <map>
#include <random>
#include <vector>

#include "pmi/densemat.hpp"
#include "pmi/polymatrix.hpp"

namespace oracle {

using pmi::Exps;
using pmi::Rat;

// Brute-force symbolic product over plain exponent->coefficient maps.
using TermMap = std::map<std::vector<int>, Rat>;

inline TermMap to_terms(const pmi::Poly<Rat>& p) {
  TermMap t;
  for (const auto& [mo, c] : p.terms()) {
    std::vector<int> key = mo.ax;
    key.insert(key.end(), mo.ay.begin(), mo.ay.end());
    t[key] += c;
  }
  return t;
}

inline TermMap mul_terms(const TermMap& a, const TermMap& b) {
  TermMap r;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) {
      std::vector<int> k(ka.size());
      for (size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
      r[k] += ca * cb;
    }
  for (auto it = r.begin(); it != r.end();) {
    if (it->second == 0) {
      it = r.erase(it);
    } else {
      ++it;
    }
  }
  return r;
}

struct Rng {
  std::mt19937 gen;
  explicit Rng(unsigned seed) : gen(seed) {}

  Rat rat(int num_lo = -9, int num_hi = 9, int den_hi = 9) {
    std::uniform_int_distribution<int> num(num_lo, num_hi);
    std::uniform_int_distribution<int> den(1, den_hi);
    return pmi::frac(num(gen), den(gen));
  }

  int uniform(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(gen);
  }

  double real(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen);
  }

  pmi::Poly<Rat> poly(int n, int m, int deg, int terms) {
    pmi::Poly<Rat> p(n, m);
    for (int t = 0; t < terms; ++t) {
      Exps ax(n), ay(m);
      int budget = uniform(0, deg);
      for (int i = 0; i < n && budget > 0; ++i) {
        ax[i] = uniform(0, budget);
        budget -= ax[i];
      }
      budget = uniform(0, deg);
      for (int j = 0; j < m && budget > 0; ++j) {
        ay[j] = uniform(0, budget);
        budget -= ay[j];
      }
      p.add_term(pmi::Monomial(ax, ay), rat());
    }
    return p;
  }

  pmi::PolyMatrix<Rat> sym_matrix(int size, int n, int m, int deg, int terms) {
    pmi::PolyMatrix<Rat> M(size, n, m);
    for (int i = 0; i < size; ++i)
      for (int j = i; j < size; ++j) {
        auto e = poly(n, m, deg, terms);
        M.at(i, j) = e;
        if (i != j) M.at(j, i) = e;
      }
    M.set_symmetric();
    return M;
  }

  pmi::PolyMatrix<Rat> matrix(int size, int n, int m, int deg, int terms) {
    pmi::PolyMatrix<Rat> M(size, n, m);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) M.at(i, j) = poly(n, m, deg, terms);
    M.recompute_symmetry();
    return M;
  }

  // Random symmetric PSD rational matrix B^T B with small integer B.
  pmi::MatQ psd_rational(int side) {
    pmi::MatQ B(side, side);
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) B(i, j) = Rat(uniform(-3, 3));
    pmi::MatQ Z(side, side);
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) {
        Rat acc(0);
        for (int k = 0; k < side; ++k) acc += B(k, i) * B(k, j);
        Z(i, j) = acc;
      }
    return Z;
  }
};

}  // namespace oracle
