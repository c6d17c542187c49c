#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmi/monomial.hpp"
#include "pmi/polymatrix.hpp"
#include "pmi/rational.hpp"

namespace pmi {

enum class MeasureKind { Discrete, Box, Gaussian };

enum class BoxNormalization { Probability, Lebesgue };

struct Atom {
  std::vector<Rat> y;
  Rat w;
};

// The quantifier set Y is defined by the measure itself: the atom set, the
// box, or all of R^m for the Gaussian. Monomial moments are exact rationals
// in every shipped family and are cached behind a mutex for concurrent reads.
class MeasureSpec {
 public:
  static MeasureSpec discrete(int m, std::vector<Atom> atoms);
  static MeasureSpec box(int m, std::vector<Rat> a, std::vector<Rat> b,
                         BoxNormalization norm = BoxNormalization::Probability);
  static MeasureSpec gaussian(int m);
  // Point mass one on an empty y-space; the degenerate quantifier.
  static MeasureSpec trivial() { return discrete(0, {Atom{{}, Rat(1)}}); }

  MeasureKind kind() const { return kind_; }
  int m() const { return m_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Rat>& box_a() const { return a_; }
  const std::vector<Rat>& box_b() const { return b_; }
  BoxNormalization normalization() const { return norm_; }

  // Exact integral of y^beta over Y.
  Rat moment(const Exps& beta) const;
  double moment_d(const Exps& beta) const { return to_double(moment(beta)); }

  Rat total_mass() const { return moment(Exps(m_, 0)); }

  // All shipped families satisfy the multivariable Carleman condition:
  // compact support trivially, the Gaussian via its moment growth.
  bool carleman_ok() const { return true; }

  bool compact_support() const { return kind_ != MeasureKind::Gaussian; }

  std::string identifier() const;

 private:
  MeasureSpec() : cache_(std::make_shared<MomentCache>()) {}

  Rat compute_moment(const Exps& beta) const;

  struct MomentCache {
    std::mutex mutex;
    std::map<Exps, Rat> values;
  };

  MeasureKind kind_ = MeasureKind::Discrete;
  int m_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Rat> a_, b_;
  BoxNormalization norm_ = BoxNormalization::Probability;

  // Shared across copies; the parameters it is keyed on are immutable.
  std::shared_ptr<MomentCache> cache_;
};

// Integrates the y variables out: sum_beta H_beta(x) * moment(beta). The
// result lives in R[x] (m = 0).
template <typename K>
PolyMatrix<K> integrate_y(const PolyMatrix<K>& H, const MeasureSpec& nu) {
  if (H.m() != nu.m()) throw std::invalid_argument("y arity mismatch with measure");
  PolyMatrix<K> R(H.size(), H.n(), 0);
  for (int i = 0; i < H.size(); ++i)
    for (int j = 0; j < H.size(); ++j)
      for (const auto& [mo, c] : H.at(i, j).terms()) {
        K w;
        if constexpr (std::is_same_v<K, Rat>) {
          w = nu.moment(mo.ay);
        } else {
          w = nu.moment_d(mo.ay);
        }
        if (w != K(0)) R.at(i, j).add_term(Monomial(mo.ax, {}), c * w);
      }
  R.recompute_symmetry();
  return R;
}

template <typename K>
Poly<K> integrate_y(const Poly<K>& h, const MeasureSpec& nu) {
  auto M = integrate_y(PolyMatrix<K>::scalar(h), nu);
  return M.at(0, 0);
}

}  // namespace pmi
