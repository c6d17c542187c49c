#include <doctest.h>

#include "oracle_helpers.hpp"
#include "pmi/basis.hpp"
#include "pmi/polymatrix.hpp"

using namespace pmi;

TEST_CASE("basis ordering matches the canonical display") {
  MonomialBasis b(2, 2);
  std::vector<Exps> expect = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(b.order == expect);
  CHECK(b.size() == 6);
  CHECK(binomial(2 + 2, 2) == 6);
  MonomialBasis b1(1, 3);
  std::vector<Exps> expect1 = {{0}, {1}, {2}, {3}};
  CHECK(b1.order == expect1);
}

TEST_CASE("ring operations") {
  auto x = PolyQ::variable_x(1, 0, 0);
  auto one = PolyQ::constant(1, 0, Rat(1));
  CHECK((one + x) * (one - x) == one - x * x);

  oracle::Rng rng(7);
  auto A = rng.sym_matrix(2, 2, 0, 2, 3);
  auto Z = A + Rat(-1) * A;
  CHECK(Z.is_zero());

  // (x1+x2)^3 (x1^2 - x1 x2 + x2^2) against the independent expansion oracle
  // and the frozen expected value.
  auto x1 = PolyQ::variable_x(2, 0, 0), x2 = PolyQ::variable_x(2, 0, 1);
  auto lhs = (x1 + x2).pow(3) * (x1 * x1 - x1 * x2 + x2 * x2);
  auto lhs_oracle = oracle::mul_terms(
      oracle::to_terms((x1 + x2).pow(3)),
      oracle::to_terms(x1 * x1 - x1 * x2 + x2 * x2));
  CHECK(oracle::to_terms(lhs) == lhs_oracle);
  PolyQ expect(2, 0);
  expect.add_term(Monomial({5, 0}), Rat(1));
  expect.add_term(Monomial({4, 1}), Rat(2));
  expect.add_term(Monomial({3, 2}), Rat(1));
  expect.add_term(Monomial({2, 3}), Rat(1));
  expect.add_term(Monomial({1, 4}), Rat(2));
  expect.add_term(Monomial({0, 5}), Rat(1));
  CHECK(lhs == expect);
}

TEST_CASE("mixed arities are rejected") {
  auto a = PolyQ::variable_x(1, 0, 0);
  auto b = PolyQ::variable_x(2, 0, 0);
  CHECK_THROWS_AS(a + b, std::invalid_argument);
  PolyMatQ A(2, 1, 0), B(3, 1, 0);
  CHECK_THROWS_AS(A + B, std::invalid_argument);
}

TEST_CASE("trace_p") {
  auto I4 = PolyMatQ::identity(4, 1, 0);
  auto T = trace_p(I4, 2);
  CHECK(T == Rat(2) * PolyMatQ::identity(2, 1, 0));

  oracle::Rng rng(3);
  auto C = rng.matrix(3, 1, 0, 2, 2);
  CHECK(trace_p(C, 3) == C);  // q = 1 degenerate

  // Off-diagonal traceless block: C12 = [[0,1],[1,0]].
  PolyMatQ C4(4, 1, 0);
  C4.at(0, 3) = PolyQ::constant(1, 0, Rat(1));
  C4.at(1, 2) = PolyQ::constant(1, 0, Rat(1));
  auto T2 = trace_p(C4, 2);
  CHECK(T2.at(0, 1).is_zero());

  CHECK_THROWS_AS(trace_p(C4, 3), std::invalid_argument);
}

TEST_CASE("bilinear_p identities") {
  oracle::Rng rng(11);
  // <I_pq, B>_p = tr(B) I_p
  for (int p : {1, 2, 3}) {
    auto B = rng.sym_matrix(2, 2, 0, 2, 3);
    auto I = PolyMatQ::identity(p * 2, 2, 0);
    auto R = bilinear_p(I, B, p);
    auto expect = trace(B) * PolyMatQ::identity(p, 2, 0);
    CHECK(R == expect);
  }

  // p = 1 reduces to tr(A^T B): frozen 70 on the worked instance.
  PolyMatQ A(2, 1, 0), B(2, 1, 0);
  int av[2][2] = {{1, 2}, {3, 4}}, bv[2][2] = {{5, 6}, {7, 8}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      A.at(i, j) = PolyQ::constant(1, 0, Rat(av[i][j]));
      B.at(i, j) = PolyQ::constant(1, 0, Rat(bv[i][j]));
    }
  auto R = bilinear_p(A, B, 1);
  CHECK(R.at(0, 0) == PolyQ::constant(1, 0, Rat(70)));

  CHECK_THROWS_AS(bilinear_p(A, B, 2), std::invalid_argument);
}

TEST_CASE("bilinear_p rank-one structure") {
  // <sigma(y) I_p (x) v v^T, G>_p = sigma(y) (v^T G v) I_p for unit v.
  int p = 2, q = 2;
  auto sigma = PolyQ::variable_y(1, 1, 0);  // sigma(y) = y (stand-in scalar)
  PolyMatQ vvT(q, 1, 1);
  // v = e_1
  vvT.at(0, 0) = PolyQ::constant(1, 1, Rat(1));
  vvT.set_symmetric();
  oracle::Rng rng(5);
  auto G = rng.sym_matrix(q, 1, 1, 2, 2);
  auto A = sigma * kron(PolyMatQ::identity(p, 1, 1), vvT);
  auto R = bilinear_p(A, G, p);
  auto expect = (sigma * G.at(0, 0)) * PolyMatQ::identity(p, 1, 1);
  CHECK(R == expect);
}

TEST_CASE("bilinearity on random exact instances") {
  oracle::Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    int p = rng.uniform(1, 2), q = rng.uniform(1, 2);
    auto A1 = rng.sym_matrix(p * q, 2, 0, 2, 2);
    auto A2 = rng.sym_matrix(p * q, 2, 0, 2, 2);
    auto B = rng.sym_matrix(q, 2, 0, 2, 2);
    auto lhs = bilinear_p(A1 + A2, B, p);
    auto rhs = bilinear_p(A1, B, p) + bilinear_p(A2, B, p);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("degrees record") {
  auto x = PolyQ::variable_x(1, 0, 0);
  PolyMatQ H(2, 1, 0);
  H.at(0, 0) = x * x;
  H.at(1, 1) = x * x;
  H.set_symmetric();
  auto info = degrees(H);
  CHECK(info.deg_x == 2);
  CHECK(info.d_half == 2);
  CHECK(info.d_ceil == 1);

  PolyMatQ H2(1, 1, 1);
  PolyQ e(1, 1);
  e.add_term(Monomial({3}, {2}), Rat(1));
  H2.at(0, 0) = e;
  auto info2 = degrees(H2);
  CHECK(info2.deg_x == 3);
  CHECK(info2.deg_y == 2);
  CHECK(info2.d_half == 2);
  CHECK(info2.d_ceil == 2);

  PolyMatQ Z(3, 2, 0);
  auto info3 = degrees(Z);
  CHECK(info3.deg_x == -1);  // sentinel
  CHECK(info3.d_half == 1);
  CHECK(info3.d_ceil == 0);
}

TEST_CASE("homogenize") {
  // Constant lifts to a pure power.
  PolyMatQ one(1, 1, 0);
  one.at(0, 0) = PolyQ::constant(1, 0, Rat(1));
  auto H = homogenize(one, 2);
  CHECK(H.n() == 2);
  PolyQ expect(2, 0);
  expect.add_term(Monomial({0, 2}), Rat(1));
  CHECK(H.at(0, 0) == expect);

  // Term-wise: x1^2 + 1 -> x1^2 + x2^2.
  PolyMatQ M(1, 1, 0);
  auto x = PolyQ::variable_x(1, 0, 0);
  M.at(0, 0) = x * x + PolyQ::constant(1, 0, Rat(1));
  auto HM = homogenize(M, 2);
  PolyQ expect2(2, 0);
  expect2.add_term(Monomial({2, 0}), Rat(1));
  expect2.add_term(Monomial({0, 2}), Rat(1));
  CHECK(HM.at(0, 0) == expect2);

  CHECK_THROWS_AS(homogenize(M, 1), std::invalid_argument);

  // Round trip on random instances.
  oracle::Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    auto A = rng.sym_matrix(2, 2, 0, 3, 3);
    int two_d = 2 * ((degrees(A).deg_x + 1) / 2 + 1);
    CHECK(dehomogenize(homogenize(A, two_d)) == A);
  }
}

TEST_CASE("kron") {
  oracle::Rng rng(19);
  auto B = rng.sym_matrix(2, 1, 0, 2, 2);
  auto I2 = PolyMatQ::identity(2, 1, 0);
  auto K = kron(I2, B);
  CHECK(K.size() == 4);
  CHECK(K.at(0, 0) == B.at(0, 0));
  CHECK(K.at(2, 3) == B.at(0, 1));
  CHECK(K.at(0, 2).is_zero());

  PolyMatQ onemat(1, 1, 0);
  onemat.at(0, 0) = PolyQ::constant(1, 0, Rat(1));
  auto A = rng.matrix(2, 1, 0, 2, 2);
  CHECK(kron(A, onemat) == A);

  // Mixed-product identity on random exact instances.
  for (int t = 0; t < 10; ++t) {
    auto A1 = rng.matrix(2, 1, 0, 1, 2);
    auto B1 = rng.matrix(2, 1, 0, 1, 2);
    auto C1 = rng.matrix(2, 1, 0, 1, 2);
    auto D1 = rng.matrix(2, 1, 0, 1, 2);
    CHECK(kron(A1, B1) * kron(C1, D1) == kron(A1 * C1, B1 * D1));
  }
}

TEST_CASE("PSD preservation at sampled points") {
  // For SOS A (Gram-built) and B PSD-valued at the sample, <A,B>_p stays PSD.
  oracle::Rng rng(23);
  int p = 2, q = 2;
  for (int t = 0; t < 5; ++t) {
    PolyMatrix<Rat> T(p * q, 1, 0);
    for (int i = 0; i < p * q; ++i)
      for (int j = 0; j < p * q; ++j) T.at(i, j) = rng.poly(1, 0, 1, 2);
    auto A = T.transpose() * T;
    auto Bm = rng.matrix(q, 1, 0, 1, 2);
    auto B = Bm.transpose() * Bm;  // PSD at every point
    auto R = bilinear_p(A, B, p);
    auto Rd = to_double_matrix(R);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> x = {rng.real(-2, 2)};
      Eigen::MatrixXd E = Rd.eval(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (E + E.transpose()));
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
  }
}
