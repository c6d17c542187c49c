#include <doctest.h>

#include "oracle_helpers.hpp"
#include "pmi/gram.hpp"

using namespace pmi;

namespace {

GramQ scalar_gram(int n, int m, int deg_x, int deg_y, const MatQ& Z, int block = 1) {
  GramQ g;
  g.basis = product_basis(exponents_up_to(n, deg_x), exponents_up_to(m, deg_y));
  g.block = block;
  g.n = n;
  g.m = m;
  g.Z = Z;
  return g;
}

}  // namespace

TEST_CASE("expand_gram basics") {
  // Z = 0 -> zero matrix.
  GramQ z0 = scalar_gram(1, 0, 1, 0, MatQ(2, 2));
  CHECK(expand_gram(z0).is_zero());

  // n=1, p=1, basis [1,x], Z=I -> 1 + x^2.
  GramQ gI = scalar_gram(1, 0, 1, 0, MatQ::identity(2));
  auto x = PolyQ::variable_x(1, 0, 0);
  auto one = PolyQ::constant(1, 0, Rat(1));
  CHECK(expand_gram(gI).at(0, 0) == one + x * x);

  // Z side mismatch.
  GramQ bad = scalar_gram(1, 0, 1, 0, MatQ(3, 3));
  CHECK_THROWS_AS(expand_gram(bad), std::invalid_argument);
}

TEST_CASE("expand_gram rank one equals T^T T") {
  oracle::Rng rng(43);
  int p = 2, d = 1, n = 1;
  auto bx = exponents_up_to(n, d);
  int side = int(bx.size()) * p;
  MatQ v(side, 1);
  for (int i = 0; i < side; ++i) v(i, 0) = rng.rat();
  MatQ Z(side, side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) Z(i, j) = v(i, 0) * v(j, 0);
  GramQ g = scalar_gram(n, 0, d, 0, Z, p);
  auto S = expand_gram(g);

  // Oracle: T(x) = v^T ([x]_d (x) I_p) as a 1-row polynomial "matrix";
  // build T^T T directly by symbolic multiplication.
  std::vector<PolyQ> T(p, PolyQ(n, 0));
  for (size_t a = 0; a < bx.size(); ++a)
    for (int r = 0; r < p; ++r) {
      PolyQ mono(n, 0);
      mono.add_term(Monomial(bx[a], {}), v(int(a) * p + r, 0));
      T[r] += mono;
    }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) CHECK(S.at(i, j) == T[i] * T[j]);
}

TEST_CASE("expand_gram of PSD rational Gram is exactly PSD at rational points") {
  oracle::Rng rng(47);
  GramQ g = scalar_gram(1, 0, 1, 0, rng.psd_rational(2));
  CHECK(validate_psd(g).ok);
  auto S = expand_gram(g);
  for (int t = 0; t < 10; ++t) {
    Rat pt = rng.rat(-5, 5, 3);
    MatQ val(1, 1);
    val(0, 0) = S.at(0, 0).eval<Rat>({pt});
    CHECK(is_psd_exact(val));
  }
}

TEST_CASE("float Gram PSD validation uses the eigenvalue floor") {
  GramD g;
  g.basis = x_basis_monomials(exponents_up_to(1, 0));
  g.block = 2;
  g.n = 1;
  g.Z = DenseMat<double>(2, 2);
  g.Z(0, 0) = 1.0;
  g.Z(1, 1) = -1e-9;  // inside the 1e-8 floor
  CHECK(validate_psd(g).ok);
  g.Z(1, 1) = -1e-6;
  CHECK_FALSE(validate_psd(g).ok);
}

TEST_CASE("qmodule_element") {
  auto nu = MeasureSpec::box(1, {Rat(-1)}, {Rat(1)});
  // Sigma_0 = 1, Sigma = 0 -> constant 1 (p = 1, G scalar).
  PolyQ gpoly(1, 1);
  gpoly.add_term(Monomial({0}, {0}), Rat(1));
  gpoly.add_term(Monomial({2}, {0}), Rat(-1));
  auto G = PolyMatQ::scalar(gpoly);  // 1 - x^2 with a y slot

  MatQ one11(1, 1);
  one11(0, 0) = Rat(1);
  GramQ sigma0 = scalar_gram(1, 0, 0, 0, one11);
  GramQ sigma = scalar_gram(1, 1, 0, 0, MatQ(1, 1));
  auto E = qmodule_element(sigma0, sigma, G, nu);
  CHECK(E.at(0, 0) == PolyQ::constant(1, 0, Rat(1)));

  // Sigma = 1/2 constant SOS, Sigma_0 = 0 -> (1/2)(1 - x^2).
  MatQ half(1, 1);
  half(0, 0) = Rat(1, 2);
  GramQ sigma_half = scalar_gram(1, 1, 0, 0, half);
  GramQ sigma0_zero = scalar_gram(1, 0, 0, 0, MatQ(1, 1));
  auto E2 = qmodule_element(sigma0_zero, sigma_half, G, nu);
  PolyQ expect(1, 0);
  expect.add_term(Monomial({0}), Rat(1, 2));
  expect.add_term(Monomial({2}), Rat(-1, 2));
  CHECK(E2.at(0, 0) == expect);

  CHECK_THROWS_AS(qmodule_element(sigma0, sigma0, G, nu), std::invalid_argument);
}

TEST_CASE("qmodule_element is linear in the Gram data") {
  oracle::Rng rng(53);
  auto nu = MeasureSpec::box(1, {Rat(-1)}, {Rat(1)});
  auto G = rng.sym_matrix(2, 1, 1, 2, 2);  // q = 2
  int p = 1;
  auto bx0 = exponents_up_to(1, 1);
  auto basis = product_basis(exponents_up_to(1, 0), exponents_up_to(1, 1));
  for (int t = 0; t < 5; ++t) {
    GramQ a0 = scalar_gram(1, 0, 1, 0, rng.psd_rational(int(bx0.size()) * p), p);
    GramQ b0 = scalar_gram(1, 0, 1, 0, rng.psd_rational(int(bx0.size()) * p), p);
    int side = int(basis.size()) * p * 2;
    GramQ a;
    a.basis = basis;
    a.block = p * 2;
    a.n = 1;
    a.m = 1;
    a.Z = rng.psd_rational(side);
    GramQ b = a;
    b.Z = rng.psd_rational(side);

    GramQ sum0 = a0;
    for (int i = 0; i < sum0.Z.rows(); ++i)
      for (int j = 0; j < sum0.Z.cols(); ++j) sum0.Z(i, j) += b0.Z(i, j);
    GramQ sum = a;
    for (int i = 0; i < sum.Z.rows(); ++i)
      for (int j = 0; j < sum.Z.cols(); ++j) sum.Z(i, j) += b.Z(i, j);

    auto lhs = qmodule_element(sum0, sum, G, nu);
    auto rhs = qmodule_element(a0, a, G, nu) + qmodule_element(b0, b, G, nu);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("block_split") {
  oracle::Rng rng(59);
  // t = 1 is the identity transformation.
  GramQ g = scalar_gram(1, 0, 1, 0, rng.psd_rational(4), 2);
  auto parts = block_split(g, {2}, 1);
  REQUIRE(parts.size() == 1);
  CHECK(expand_gram(parts[0]) == expand_gram(g));

  // Identity Gram against diag(H1, H2): <I, diag>_p = (tr H1 + tr H2) I_p.
  int p = 2, r1 = 1, r2 = 2;
  int r = r1 + r2;
  auto H1 = rng.sym_matrix(r1, 1, 0, 2, 2);
  auto H2 = rng.sym_matrix(r2, 1, 0, 2, 2);
  auto H = block_diag<Rat>({H1, H2});
  GramQ gi = scalar_gram(1, 0, 0, 0, MatQ::identity(p * r), p * r);
  auto lhs = bilinear_p(expand_gram(gi), H, p);
  auto expect = (trace(H1) + trace(H2)) * PolyMatQ::identity(p, 1, 0);
  CHECK(lhs == expect);

  auto parts2 = block_split(gi, {r1, r2}, p);
  REQUIRE(parts2.size() == 2);
  auto rhs = bilinear_p(expand_gram(parts2[0]), H1, p) +
             bilinear_p(expand_gram(parts2[1]), H2, p);
  CHECK(lhs == rhs);

  // Random PSD Gram, p = 1, t = 2: the pairing identity holds exactly.
  for (int t = 0; t < 5; ++t) {
    auto bx = exponents_up_to(1, 1);
    GramQ gz = scalar_gram(1, 0, 1, 0, rng.psd_rational(int(bx.size()) * r), r);
    auto parts3 = block_split(gz, {r1, r2}, 1);
    auto left = bilinear_p(expand_gram(gz), H, 1);
    auto right = bilinear_p(expand_gram(parts3[0]), H1, 1) +
                 bilinear_p(expand_gram(parts3[1]), H2, 1);
    CHECK(left == right);
    CHECK(validate_psd(parts3[0]).ok);
    CHECK(validate_psd(parts3[1]).ok);
  }

  CHECK_THROWS_AS(block_split(gi, {r1, r2 + 1}, p), std::invalid_argument);
}

TEST_CASE("multiplier_power") {
  oracle::Rng rng(61);
  // k = 0 -> tr(G) I_p.
  auto G = rng.sym_matrix(2, 1, 0, 2, 2);
  auto R0 = multiplier_power(G, Rat(3), 0, 2);
  CHECK(R0 == trace(G) * PolyMatQ::identity(2, 1, 0));

  // q = 1 scalar reduction: g (1 - g/M)^{2k} I_p.
  auto g = rng.poly(1, 0, 2, 2);
  auto Gs = PolyMatQ::scalar(g);
  Rat M(5);
  int k = 2;
  auto Rs = multiplier_power(Gs, M, k, 3);
  auto one = PolyQ::constant(1, 0, Rat(1));
  auto factor = (one - Rat(1) / M * g).pow(2 * k);
  CHECK(Rs == (g * factor) * PolyMatQ::identity(3, 1, 0));

  // q = 2 diagonal: eigenvalue form g1(1-g1/M)^2 + g2(1-g2/M)^2.
  auto g1 = rng.poly(1, 0, 2, 2), g2 = rng.poly(1, 0, 2, 2);
  PolyMatQ D(2, 1, 0);
  D.at(0, 0) = g1;
  D.at(1, 1) = g2;
  D.set_symmetric();
  auto Rd = multiplier_power(D, M, 1, 1);
  auto expect = g1 * (one - Rat(1) / M * g1).pow(2) + g2 * (one - Rat(1) / M * g2).pow(2);
  CHECK(Rd.at(0, 0) == expect);

  CHECK_THROWS_AS(multiplier_power(G, Rat(0), 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(multiplier_power(G, Rat(-1), 1, 1), std::invalid_argument);
}

TEST_CASE("multiplier scalar factor is nonnegative where 0 <= G <= M I") {
  // Evaluate tr((I - G/M)^{2k} G) at points where the spectrum lies in [0, M].
  oracle::Rng rng(67);
  auto Bm = rng.matrix(2, 1, 0, 1, 2);
  auto G = Bm.transpose() * Bm;  // PSD everywhere
  auto Gd = to_double_matrix(G);
  for (int k : {0, 1, 2, 3}) {
    for (int s = 0; s < 25; ++s) {
      std::vector<double> x = {rng.real(-1, 1)};
      Eigen::MatrixXd E = Gd.eval(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (E + E.transpose()));
      double lmax = es.eigenvalues().maxCoeff();
      double M = lmax + 1.0;
      auto R = multiplier_power(Gd, M, k, 1);
      double val = R.at(0, 0).eval<double>(x);
      CHECK(val >= -1e-9);
    }
  }
}
