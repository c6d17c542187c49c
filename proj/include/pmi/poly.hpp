#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmi/monomial.hpp"
#include "pmi/rational.hpp"

namespace pmi {

// Multivariate polynomial in x (n vars) and optionally y (m vars) with
// coefficients of type K (Rat or double). Zero coefficients are never stored.
template <typename K>
class Poly {
 public:
  using TermMap = std::map<Monomial, K, MonomialOrder>;

  Poly() = default;
  Poly(int n, int m) : n_(n), m_(m) {
    if (n < 0 || m < 0) throw std::invalid_argument("negative variable count");
  }

  static Poly constant(int n, int m, const K& c) {
    Poly p(n, m);
    p.add_term(Monomial(Exps(n, 0), Exps(m, 0)), c);
    return p;
  }

  static Poly variable_x(int n, int m, int i) {
    if (i < 0 || i >= n) throw std::out_of_range("x index");
    Exps ax(n, 0);
    ax[i] = 1;
    Poly p(n, m);
    p.add_term(Monomial(std::move(ax), Exps(m, 0)), CoeffTraits<K>::one());
    return p;
  }

  static Poly variable_y(int n, int m, int j) {
    if (j < 0 || j >= m) throw std::out_of_range("y index");
    Exps ay(m, 0);
    ay[j] = 1;
    Poly p(n, m);
    p.add_term(Monomial(Exps(n, 0), std::move(ay)), CoeffTraits<K>::one());
    return p;
  }

  int n() const { return n_; }
  int m() const { return m_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& mono, const K& c) {
    if ((int)mono.ax.size() != n_ || (int)mono.ay.size() != m_) {
      throw std::invalid_argument("monomial arity mismatch");
    }
    auto it = terms_.find(mono);
    if (it == terms_.end()) {
      if (c != K(0)) terms_.emplace(mono, c);
    } else {
      it->second += c;
      if (it->second == K(0)) terms_.erase(it);
    }
  }

  K coeff(const Monomial& mono) const {
    auto it = terms_.find(mono);
    return it == terms_.end() ? CoeffTraits<K>::zero() : it->second;
  }

  // -1 for the zero polynomial (sentinel).
  int deg_x() const {
    int d = -1;
    for (const auto& [mo, c] : terms_) d = std::max(d, mo.deg_x());
    return d;
  }
  int deg_y() const {
    int d = -1;
    for (const auto& [mo, c] : terms_) d = std::max(d, mo.deg_y());
    return d;
  }
  int deg() const {
    int d = -1;
    for (const auto& [mo, c] : terms_) d = std::max(d, mo.deg());
    return d;
  }

  bool homogeneous_x(int deg) const {
    for (const auto& [mo, c] : terms_)
      if (mo.deg_x() != deg) return false;
    return true;
  }

  Poly& operator+=(const Poly& o) {
    check_compat(o);
    for (const auto& [mo, c] : o.terms_) add_term(mo, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_compat(o);
    for (const auto& [mo, c] : o.terms_) add_term(mo, K(0) - c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.check_compat(b);
    Poly r(a.n_, a.m_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }

  friend Poly operator*(const K& s, const Poly& p) {
    Poly r(p.n_, p.m_);
    if (s == K(0)) return r;
    for (const auto& [mo, c] : p.terms_) r.add_term(mo, s * c);
    return r;
  }

  Poly operator-() const { return K(-1) * (*this); }

  Poly pow(int e) const {
    if (e < 0) throw std::invalid_argument("negative power");
    Poly r = constant(n_, m_, CoeffTraits<K>::one());
    Poly base = *this;
    while (e > 0) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  bool operator==(const Poly& o) const {
    return n_ == o.n_ && m_ == o.m_ && terms_ == o.terms_;
  }

  template <typename V>
  V eval(const std::vector<V>& xs, const std::vector<V>& ys = {}) const {
    if ((int)xs.size() != n_ || (int)ys.size() != m_) {
      throw std::invalid_argument("evaluation point arity mismatch");
    }
    V acc = V(0);
    for (const auto& [mo, c] : terms_) {
      V t(1);
      for (int i = 0; i < n_; ++i)
        for (int e = 0; e < mo.ax[i]; ++e) t *= xs[i];
      for (int j = 0; j < m_; ++j)
        for (int e = 0; e < mo.ay[j]; ++e) t *= ys[j];
      if constexpr (std::is_same_v<K, Rat> && std::is_same_v<V, double>) {
        acc += to_double(c) * t;
      } else {
        acc += V(c) * t;
      }
    }
    return acc;
  }

  // Collects the coefficient of y^beta as a polynomial in x.
  Poly coeff_of_y(const Exps& beta) const {
    Poly r(n_, 0);
    for (const auto& [mo, c] : terms_)
      if (mo.ay == beta) r.add_term(Monomial(mo.ax, {}), c);
    return r;
  }

  std::vector<Exps> support_y() const {
    std::vector<Exps> out;
    for (const auto& [mo, c] : terms_) {
      if (out.empty() || out.back() != mo.ay) {
        bool seen = false;
        for (const auto& b : out)
          if (b == mo.ay) {
            seen = true;
            break;
          }
        if (!seen) out.push_back(mo.ay);
      }
    }
    return out;
  }

 private:
  void check_compat(const Poly& o) const {
    if (n_ != o.n_ || m_ != o.m_) {
      throw std::invalid_argument("variable count mismatch");
    }
  }

  int n_ = 0;
  int m_ = 0;
  TermMap terms_;
};

using PolyQ = Poly<Rat>;
using PolyD = Poly<double>;

template <typename K>
Poly<double> to_double_poly(const Poly<K>& p) {
  Poly<double> r(p.n(), p.m());
  for (const auto& [mo, c] : p.terms()) r.add_term(mo, to_double(c));
  return r;
}

// theta = 1 + |x|^2.
template <typename K>
Poly<K> theta_poly(int n, int m) {
  Poly<K> t = Poly<K>::constant(n, m, CoeffTraits<K>::one());
  for (int i = 0; i < n; ++i) {
    auto xi = Poly<K>::variable_x(n, m, i);
    t += xi * xi;
  }
  return t;
}

// Theta_d = 1 + sum_i x_i^{2d}.
template <typename K>
Poly<K> theta_big_poly(int n, int m, int d) {
  Poly<K> t = Poly<K>::constant(n, m, CoeffTraits<K>::one());
  for (int i = 0; i < n; ++i) t += Poly<K>::variable_x(n, m, i).pow(2 * d);
  return t;
}

// e^T x = x_1 + ... + x_n.
template <typename K>
Poly<K> ones_linear_form(int n, int m) {
  Poly<K> t(n, m);
  for (int i = 0; i < n; ++i) t += Poly<K>::variable_x(n, m, i);
  return t;
}

}  // namespace pmi
