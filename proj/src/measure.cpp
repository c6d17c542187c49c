#include "pmi/measure.hpp"

#include <sstream>

namespace pmi {

MeasureSpec MeasureSpec::discrete(int m, std::vector<Atom> atoms) {
  MeasureSpec nu;
  nu.kind_ = MeasureKind::Discrete;
  nu.m_ = m;
  for (const auto& a : atoms) {
    if ((int)a.y.size() != m) throw std::invalid_argument("atom arity mismatch");
    if (sgn(a.w) <= 0) throw std::invalid_argument("atom weights must be positive");
  }
  if (atoms.empty()) throw std::invalid_argument("discrete measure needs atoms");
  nu.atoms_ = std::move(atoms);
  return nu;
}

MeasureSpec MeasureSpec::box(int m, std::vector<Rat> a, std::vector<Rat> b,
                             BoxNormalization norm) {
  MeasureSpec nu;
  nu.kind_ = MeasureKind::Box;
  nu.m_ = m;
  if ((int)a.size() != m || (int)b.size() != m)
    throw std::invalid_argument("box bound arity mismatch");
  for (int i = 0; i < m; ++i)
    if (!(a[i] < b[i])) throw std::invalid_argument("box requires a_i < b_i");
  nu.a_ = std::move(a);
  nu.b_ = std::move(b);
  nu.norm_ = norm;
  return nu;
}

MeasureSpec MeasureSpec::gaussian(int m) {
  MeasureSpec nu;
  nu.kind_ = MeasureKind::Gaussian;
  nu.m_ = m;
  return nu;
}

Rat MeasureSpec::moment(const Exps& beta) const {
  if ((int)beta.size() != m_) throw std::invalid_argument("moment arity mismatch");
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->values.find(beta);
    if (it != cache_->values.end()) return it->second;
  }
  Rat v = compute_moment(beta);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->values.emplace(beta, std::move(v)).first->second;
}

namespace {

Rat rat_pow(const Rat& base, int e) {
  Rat r(1);
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// integral_a^b t^k dt = (b^{k+1} - a^{k+1}) / (k+1).
Rat box_coordinate_moment(const Rat& a, const Rat& b, int k) {
  return (rat_pow(b, k + 1) - rat_pow(a, k + 1)) / Rat(k + 1);
}

// E[t^k] for the standard Gaussian: (k-1)!! for even k, 0 for odd k.
Rat gaussian_coordinate_moment(int k) {
  if (k % 2 == 1) return Rat(0);
  mpz_class acc(1);
  for (int j = k - 1; j >= 1; j -= 2) acc *= j;
  return Rat(acc);
}

}  // namespace

Rat MeasureSpec::compute_moment(const Exps& beta) const {
  switch (kind_) {
    case MeasureKind::Discrete: {
      Rat acc(0);
      for (const auto& atom : atoms_) {
        Rat term = atom.w;
        for (int j = 0; j < m_; ++j) term *= rat_pow(atom.y[j], beta[j]);
        acc += term;
      }
      return acc;
    }
    case MeasureKind::Box: {
      Rat acc(1);
      for (int j = 0; j < m_; ++j) {
        Rat mj = box_coordinate_moment(a_[j], b_[j], beta[j]);
        if (norm_ == BoxNormalization::Probability) mj /= (b_[j] - a_[j]);
        acc *= mj;
      }
      return acc;
    }
    case MeasureKind::Gaussian: {
      Rat acc(1);
      for (int j = 0; j < m_; ++j) acc *= gaussian_coordinate_moment(beta[j]);
      return acc;
    }
  }
  throw std::logic_error("unreachable");
}

std::string MeasureSpec::identifier() const {
  std::ostringstream os;
  switch (kind_) {
    case MeasureKind::Discrete:
      os << "discrete(m=" << m_ << ",atoms=" << atoms_.size() << ")";
      break;
    case MeasureKind::Box:
      os << "box(m=" << m_ << ",";
      for (int j = 0; j < m_; ++j)
        os << "[" << rat_to_string(a_[j]) << "," << rat_to_string(b_[j]) << "]";
      os << (norm_ == BoxNormalization::Probability ? ",probability" : ",lebesgue")
         << ")";
      break;
    case MeasureKind::Gaussian:
      os << "gaussian(m=" << m_ << ")";
      break;
  }
  return os.str();
}

}  // namespace pmi
