#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmi/gram.hpp"

namespace pmi {

struct CertMeta {
  std::string hierarchy;
  int d = -1;
  int k = -1;
  int N = -1;
  double eps = 0.0;
  double delta = 0.0;           // PD margin of the Polya builder
  std::optional<double> r;      // achieved r* in the perturbation hierarchy
  std::vector<double> gamma;    // decision values in the robust hierarchies
  std::string measure_id;
  bool carleman = true;
};

// Auxiliary (multiplier, constraint) Gram. role identifies what the piece
// multiplies: "clique:<l>:0", "clique:<l>:<j>", "polya:<kind>", "extra:<j>".
template <typename K>
struct ExtraGram {
  std::string role;
  Exps tag;  // x-exponent tag for coefficient-indexed pieces (Polya)
  SOSGram<K> gram;
};

template <typename K>
struct SOSCertificate {
  std::optional<SOSGram<K>> sigma0;
  std::optional<SOSGram<K>> sigma;
  std::vector<ExtraGram<K>> extras;
  CertMeta meta;
};

using CertQ = SOSCertificate<Rat>;
using CertD = SOSCertificate<double>;

}  // namespace pmi
