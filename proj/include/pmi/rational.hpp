#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace pmi {

// Exact coefficient type for the default (rational) mode. Float mode uses
// plain double and exists only for interop with the SDP layer.
using Rat = mpq_class;

inline double to_double(const Rat& r) { return r.get_d(); }
inline double to_double(double r) { return r; }

// mpq_class arithmetic keeps canonical operands canonical, but the two-int
// constructor does not reduce; route fractions through here.
inline Rat frac(long num, long den) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// Parses "num/den" or "num" (decimal-free) strings.
inline Rat parse_rat(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0) {
    throw std::invalid_argument("invalid rational literal: '" + s + "'");
  }
  q.canonicalize();
  return q;
}

// Always "num/den", denominator included even when 1, so the encoding is
// unambiguous and round-trips bit-for-bit.
inline std::string rat_to_string(const Rat& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline int sign(const Rat& r) { return sgn(r); }
inline int sign(double r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }

template <typename K>
struct CoeffTraits;

template <>
struct CoeffTraits<Rat> {
  static constexpr bool exact = true;
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
};

template <>
struct CoeffTraits<double> {
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
};

}  // namespace pmi
