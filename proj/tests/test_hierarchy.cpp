#include <doctest.h>

#include "oracle_helpers.hpp"
#include "pmi/hierarchy.hpp"
#include "pmi/verify.hpp"

using namespace pmi;

namespace {

PolyQ poly1(std::initializer_list<std::pair<Exps, Rat>> terms, int n, int m = 0) {
  PolyQ p(n, m);
  for (const auto& [e, c] : terms) p.add_term(Monomial(e, Exps(m, 0)), c);
  return p;
}

// 1 - x^2 in one variable, optionally with a y slot in the arity.
PolyMatQ unit_disk_1d(int m = 0) {
  PolyQ g(1, m);
  g.add_term(Monomial({0}, Exps(m, 0)), Rat(1));
  g.add_term(Monomial({2}, Exps(m, 0)), Rat(-1));
  return PolyMatQ::scalar(g);
}

PMIProblem two_minus_x2() {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{0}, Rat(2)}, {{2}, Rat(-1)}}, 1));
  prob.G.push_back(unit_disk_1d());
  prob.nu = MeasureSpec::trivial();
  return prob;
}

PMIProblem criterion3_instance() {
  // F = [[3-x^2, x], [x, 3-x^2]] over Y = [-1,1], G = 1-x^2.
  PMIProblem prob;
  PolyMatQ F(2, 1, 0);
  auto diag = poly1({{{0}, Rat(3)}, {{2}, Rat(-1)}}, 1);
  auto off = poly1({{{1}, Rat(1)}}, 1);
  F.at(0, 0) = diag;
  F.at(1, 1) = diag;
  F.at(0, 1) = off;
  F.at(1, 0) = off;
  F.set_symmetric();
  prob.F = F;
  prob.G.push_back(unit_disk_1d(1));
  prob.nu = MeasureSpec::box(1, {Rat(-1)}, {Rat(1)});
  return prob;
}

}  // namespace

TEST_CASE("rip_validate") {
  CliqueDecomposition chain;
  chain.cliques = {{0, 1}, {1, 2}, {2, 3}};
  CHECK(rip_validate(chain).ok);

  CliqueDecomposition bad;
  bad.cliques = {{0, 1}, {2, 3}, {1, 2}};
  auto r = rip_validate(bad);
  CHECK_FALSE(r.ok);
  CHECK(r.witness == 2);  // third clique

  CliqueDecomposition single;
  single.cliques = {{0, 1, 2}};
  CHECK(rip_validate(single).ok);
}

TEST_CASE("membership: identity target is trivially certified") {
  PMIProblem prob;
  prob.F = PolyMatQ::identity(2, 1, 0);
  prob.G.push_back(unit_disk_1d());
  RelaxationOrder ord;
  ord.d = 0;
  ord.k = 0;
  auto res = run_certify(prob, "membership", ord);
  CHECK(res.status == "certified");
  CHECK(res.residual <= 1e-6);
}

TEST_CASE("membership: 2 - x^2 certifies at d=1 with the hand identity") {
  auto prob = two_minus_x2();
  RelaxationOrder ord;
  ord.d = 1;
  auto res = run_certify(prob, "membership", ord);
  CHECK(res.status == "certified");
  CHECK(res.residual <= 1e-6);
  REQUIRE(res.certificate.has_value());
  // The hand identity 2 - x^2 = 1 + 1*(1-x^2) is one feasible point; the
  // solver's point must reconstruct the same target.
  auto R = reconstruct_element(*res.certificate,
                               {to_double_matrix(prob.G[0])}, {}, prob.nu, 1);
  auto Fd = to_double_matrix(*prob.F);
  for (const auto& alpha : Fd.support_x()) {
    CHECK(R.at(0, 0).coeff(Monomial(alpha, {})) ==
          doctest::Approx(Fd.at(0, 0).coeff(Monomial(alpha, {}))).epsilon(1e-6));
  }
}

TEST_CASE("membership: -I is infeasible with a dual improving ray") {
  PMIProblem prob;
  prob.F = Rat(-1) * PolyMatQ::identity(2, 1, 0);
  prob.G.push_back(unit_disk_1d());
  RelaxationOrder ord;
  ord.d = 1;
  auto res = run_certify(prob, "membership", ord);
  CHECK(res.status == "infeasible-at-order");
  REQUIRE(res.report.ray.has_value());
  CHECK(res.report.ray->ray_dual_residual <= 1e-7);
  CHECK(res.report.ray->ray_free_residual <= 1e-7);
}

TEST_CASE("membership degree cap below deg F is rejected early") {
  auto prob = two_minus_x2();
  RelaxationOrder ord;
  ord.d = 0;
  CHECK_THROWS_AS(build_membership(prob, ord), std::invalid_argument);
}

TEST_CASE("membership with extra x-constraints") {
  // Certify 2 - x^2 using only the extra constraint H = 1 - x^2 (no G).
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{0}, Rat(2)}, {{2}, Rat(-1)}}, 1));
  prob.extras.push_back(unit_disk_1d());
  RelaxationOrder ord;
  ord.d = 1;
  auto res = run_certify(prob, "membership", ord);
  CHECK(res.status == "certified");
  CHECK(res.residual <= 1e-6);
}

TEST_CASE("sparse: two-clique chain certifies and matches the dense run") {
  // f = (1 - x1 x2) + (1 - x2 x3) on the product of unit disks.
  PMIProblem prob;
  prob.scalar_f = poly1(
      {{{0, 0, 0}, Rat(2)}, {{1, 1, 0}, Rat(-1)}, {{0, 1, 1}, Rat(-1)}}, 3);
  PolyQ g1(3, 0), g2(3, 0);
  g1.add_term(Monomial({0, 0, 0}), Rat(1));
  g1.add_term(Monomial({2, 0, 0}), Rat(-1));
  g1.add_term(Monomial({0, 2, 0}), Rat(-1));
  g2.add_term(Monomial({0, 0, 0}), Rat(1));
  g2.add_term(Monomial({0, 2, 0}), Rat(-1));
  g2.add_term(Monomial({0, 0, 2}), Rat(-1));
  prob.G.push_back(PolyMatQ::scalar(g1));
  prob.G.push_back(PolyMatQ::scalar(g2));
  CliqueDecomposition cd;
  cd.cliques = {{0, 1}, {1, 2}};
  cd.assignments = {{0}, {1}};
  prob.cliques = cd;

  RelaxationOrder ord;
  ord.d = 2;
  auto sparse_res = run_certify(prob, "sparse", ord);
  CHECK(sparse_res.status == "certified");
  CHECK(sparse_res.residual <= 1e-6);

  // Dense oracle: single all-covering clique must agree on feasibility.
  PMIProblem dense = prob;
  CliqueDecomposition all;
  all.cliques = {{0, 1, 2}};
  all.assignments = {{0, 1}};
  dense.cliques = all;
  auto dense_res = run_certify(dense, "sparse", ord);
  CHECK(dense_res.status == "certified");

  // And the plain membership run agrees as well.
  PMIProblem memb = prob;
  memb.cliques.reset();
  memb.F = PolyMatQ::scalar(*prob.scalar_f);
  auto memb_res = run_certify(memb, "membership", ord);
  CHECK(memb_res.status == "certified");
}

TEST_CASE("sparse: RIP violation is rejected with the witness clique") {
  PMIProblem prob;
  prob.scalar_f = poly1({{{0, 0, 0, 0}, Rat(1)}}, 4);
  PolyQ g(4, 0);
  g.add_term(Monomial({0, 0, 0, 0}), Rat(1));
  g.add_term(Monomial({0, 1, 1, 0}), Rat(-1));  // couples x2, x3
  prob.G.push_back(PolyMatQ::scalar(g));
  CliqueDecomposition cd;
  cd.cliques = {{0, 1}, {2, 3}, {1, 2}};
  cd.assignments = {{}, {}, {0}};
  prob.cliques = cd;
  RelaxationOrder ord;
  ord.d = 1;
  CHECK_THROWS_WITH_AS(build_sparse(prob, ord), doctest::Contains("clique 3"),
                       std::invalid_argument);
}

TEST_CASE("sparse: matrix targets are rejected citing the counterexample") {
  PMIProblem prob;
  prob.F = PolyMatQ::identity(2, 2, 0);
  prob.G.push_back(PolyMatQ::identity(1, 2, 0));
  CliqueDecomposition cd;
  cd.cliques = {{0, 1}};
  cd.assignments = {{0}};
  prob.cliques = cd;
  RelaxationOrder ord;
  CHECK_THROWS_WITH_AS(build_sparse(prob, ord), doctest::Contains("counterexample"),
                       std::invalid_argument);
}

TEST_CASE("homogeneous: ||x||^2 I is certified at N = 0") {
  PMIProblem prob;
  PolyQ norm2(2, 0);
  norm2.add_term(Monomial({2, 0}), Rat(1));
  norm2.add_term(Monomial({0, 2}), Rat(1));
  PolyMatQ F(2, 2, 0);
  F.at(0, 0) = norm2;
  F.at(1, 1) = norm2;
  F.set_symmetric();
  prob.F = F;
  RelaxationOrder ord;
  auto res = run_certify(prob, "homogeneous", ord);  // auto-N
  CHECK(res.status == "certified");
  CHECK(res.used_N == 0);
  CHECK(res.residual <= 1e-6);
}

TEST_CASE("homogeneous rejects non-homogeneous or odd-degree input") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{0}, Rat(1)}, {{2}, Rat(1)}}, 1));
  CHECK_THROWS_AS(build_homogeneous(prob, 0, RelaxationOrder{}),
                  std::invalid_argument);
  PMIProblem odd;
  odd.F = PolyMatQ::scalar(poly1({{{1}, Rat(1)}}, 1));
  CHECK_THROWS_AS(build_homogeneous(odd, 0, RelaxationOrder{}),
                  std::invalid_argument);
}

TEST_CASE("inhomogeneous: SOS target certifies at N = 0") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{2}, Rat(1)}}, 1));  // x^2, PSD on R
  RelaxationOrder ord;
  ord.eps = 0.1;
  ord.N = 0;
  auto res = run_certify(prob, "inhomogeneous", ord);
  CHECK(res.status == "certified");
  CHECK(res.residual <= 1e-6);
}

TEST_CASE("inhomogeneous: x^3 stays infeasible for every tested N") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{3}, Rat(1)}}, 1));
  RelaxationOrder ord;
  ord.eps = 0.01;
  HierarchyOptions opts;
  opts.n_max = 3;
  auto res = run_certify(prob, "inhomogeneous", ord, opts);
  CHECK(res.status == "infeasible-at-order");

  // Negativity witness: the perturbed target goes negative on a grid, so no
  // SOS identity can exist at any order.
  auto target = to_double_matrix(*prob.F);
  Poly<double> theta = theta_poly<double>(1, 0);
  int d_F = degrees(target).d_half;
  auto pert = target + 0.01 * (theta.pow(d_F) * PolyMatrix<double>::identity(1, 1, 0));
  double worst = 1e300;
  for (double x = -3; x <= 3; x += 0.01)
    worst = std::min(worst, pert.at(0, 0).eval<double>({x}));
  CHECK(worst < 0);
}

TEST_CASE("polya_bound") {
  // P = x1^2 + x2^2 - x1 x2, lambda = 1/4 (simplex minimum), L = 1.
  PolyMatQ P = PolyMatQ::scalar(
      poly1({{{2, 0}, Rat(1)}, {{0, 2}, Rat(1)}, {{1, 1}, Rat(-1)}}, 2));

  // Oracle for lambda: minimize on the simplex x2 = 1 - x1 by enumeration.
  double lam = 1e300;
  for (int t = 0; t <= 10000; ++t) {
    double x1 = t / 10000.0, x2 = 1.0 - x1;
    lam = std::min(lam, x1 * x1 + x2 * x2 - x1 * x2);
  }
  CHECK(lam == doctest::Approx(0.25).epsilon(1e-6));

  // Oracle for L: enumerate coefficients, alpha!/deg! * |coeff|.
  // (2,0): 2/2*1 = 1; (1,1): 1/2*1 = 1/2; max = 1.
  CHECK(polya_bound(P, Rat(1, 4)) == 2);

  // Scale invariance of the bound.
  CHECK(polya_bound(Rat(7) * P, Rat(7, 4)) == 2);

  // Degenerate degree-0 target.
  CHECK(polya_bound(PolyMatQ::identity(2, 2, 0), Rat(1)) == 0);

  CHECK_THROWS_AS(polya_bound(P, Rat(0)), std::invalid_argument);
}

TEST_CASE("polya_expand_check") {
  PolyMatQ P = PolyMatQ::scalar(
      poly1({{{2, 0}, Rat(1)}, {{0, 2}, Rat(1)}, {{1, 1}, Rat(-1)}}, 2));
  auto r2 = polya_expand_check(P, 2);
  CHECK_FALSE(r2.all_pd);
  CHECK(r2.min_coeff_eig == doctest::Approx(0.0));
  CHECK(r2.worst_alpha == Exps{2, 2});

  auto r3 = polya_expand_check(P, 3);
  CHECK(r3.all_pd);
  CHECK(r3.min_coeff_eig == doctest::Approx(1.0));

  auto rI = polya_expand_check(PolyMatQ::identity(2, 2, 0), 1);
  CHECK(rI.all_pd);

  // Monotonicity: all-PD at N stays all-PD at N + 1.
  for (int N = 3; N <= 6; ++N) CHECK(polya_expand_check(P, N).all_pd);
}

TEST_CASE("build_polya without G reduces to the coefficient-PD feasibility") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(
      poly1({{{2, 0}, Rat(1)}, {{0, 2}, Rat(1)}, {{1, 1}, Rat(-1)}}, 2));
  prob.nu = MeasureSpec::trivial();
  RelaxationOrder ord;
  ord.N = 2;
  auto res2 = run_certify(prob, "polya", ord);
  CHECK(res2.status == "infeasible-at-order");  // zero coefficient at N = 2
  ord.N = 3;
  auto res3 = run_certify(prob, "polya", ord);
  CHECK(res3.status == "certified");
  CHECK(res3.residual <= 1e-6);
}

TEST_CASE("build_polya with a quantified linear constraint") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(
      poly1({{{2, 0}, Rat(1)}, {{0, 2}, Rat(1)}, {{1, 1}, Rat(-1)}}, 2));
  PolyQ g(2, 1);
  g.add_term(Monomial({1, 0}, {0}), Rat(1));
  g.add_term(Monomial({0, 1}, {0}), Rat(1));  // x1 + x2, y-independent
  prob.G.push_back(PolyMatQ::scalar(g));
  prob.nu = MeasureSpec::discrete(1, {Atom{{Rat(0)}, Rat(1)}});  // Y = {0}
  HierarchyOptions opts;
  opts.n_max = 6;
  RelaxationOrder ord;
  auto res = run_certify(prob, "polya", ord, opts);
  CHECK(res.status == "certified");
  CHECK(res.residual <= 1e-6);
  CHECK(res.used_N <= 6);

  // Negative control: F = -x1^2 is negative on the orthant, never certified.
  PMIProblem neg = prob;
  neg.F = PolyMatQ::scalar(poly1({{{2, 0}, Rat(-1)}}, 2));
  HierarchyOptions small;
  small.n_max = 3;
  auto nres = run_certify(neg, "polya", RelaxationOrder{}, small);
  CHECK(nres.status == "infeasible-at-order");
}

TEST_CASE("polya requires a compactly supported measure") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{2}, Rat(1)}}, 1));
  PolyQ g(1, 1);
  g.add_term(Monomial({2}, {0}), Rat(1));
  prob.G.push_back(PolyMatQ::scalar(g));
  prob.nu = MeasureSpec::gaussian(1);
  CHECK_THROWS_AS(build_polya(prob, 1, RelaxationOrder{}), std::invalid_argument);
}

TEST_CASE("perturbation: identity target has r* = 0") {
  PMIProblem prob;
  prob.F = PolyMatQ::identity(2, 1, 0);
  prob.G.push_back(unit_disk_1d());
  RelaxationOrder ord;
  ord.d = 1;
  auto res = run_certify(prob, "perturbation", ord);
  CHECK(res.status == "certified");
  CHECK(std::abs(res.value) <= 1e-6);
  CHECK(res.value >= -1e-8);  // weak duality
}

TEST_CASE("perturbation: x^2 with no constraints has r* <= 1e-6 at d = 1") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{2}, Rat(1)}}, 1));
  RelaxationOrder ord;
  ord.d = 1;
  auto res = run_certify(prob, "perturbation", ord);
  CHECK(res.status == "certified");
  CHECK(res.value <= 1e-6);
  CHECK(res.value >= -1e-8);
}

TEST_CASE("perturbation: Motzkin needs a strictly positive r at d = 3") {
  PMIProblem prob;
  prob.F = PolyMatQ::scalar(poly1({{{4, 2}, Rat(1)},
                                   {{2, 4}, Rat(1)},
                                   {{2, 2}, Rat(-3)},
                                   {{0, 0}, Rat(1)}},
                                  2));
  RelaxationOrder ord;
  ord.d = 3;
  auto pair = build_perturbation(prob, ord);
  auto res = run_certify(prob, "perturbation", ord);
  CHECK(res.status == "certified");
  CHECK(res.value > 1e-9);     // Motzkin is not SOS
  CHECK(res.value < 1.0);      // and the gap is small
  CHECK(res.value >= -1e-8);   // weak duality

  // The explicit dual problem agrees (strong duality under the Slater-type
  // interior condition).
  auto dual_rep = solve(pair.dual);
  CHECK(dual_rep.status == SolveStatus::Optimal);
  CHECK(dual_rep.primal_obj == doctest::Approx(res.value).epsilon(1e-4));

  // The dual decodes to a moment sequence with L_S(F) = -r*.
  auto seq = decode_dual_moments(pair, dual_rep);
  auto val = riesz(seq, to_double_matrix(*prob.F));
  CHECK(val == doctest::Approx(-res.value).epsilon(1e-4));
  CHECK(dual_rep.primal_obj >= -1e-8);
}

TEST_CASE("perturbation rejects d below d(G)") {
  PMIProblem prob;
  prob.F = PolyMatQ::identity(1, 1, 0);
  PolyQ g(1, 0);
  g.add_term(Monomial({4}), Rat(-1));
  g.add_term(Monomial({0}), Rat(1));
  prob.G.push_back(PolyMatQ::scalar(g));  // d(G) = 2
  RelaxationOrder ord;
  ord.d = 1;
  CHECK_THROWS_AS(build_perturbation(prob, ord), std::invalid_argument);
}

TEST_CASE("robust toy: min gamma s.t. gamma - x >= 0 on [-1,1]") {
  PMIProblem prob;
  prob.obj_c = {Rat(1)};
  prob.obj_P.push_back(PolyMatQ::scalar(poly1({{{1}, Rat(-1)}}, 1)));  // P0 = -x
  prob.obj_P.push_back(PolyMatQ::scalar(poly1({{{0}, Rat(-1)}}, 1)));  // P1 = -1
  prob.G.push_back(unit_disk_1d());
  double prev = 1e300;
  for (int k = 1; k <= 3; ++k) {
    RelaxationOrder ord;
    ord.k = k;
    auto res = run_optimize(prob, ord, false);
    CHECK(res.status == "bound-found");
    if (k == 2) CHECK(res.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.value <= prev + 1e-8);  // non-increasing upper bounds
    CHECK(res.residual <= 1e-6);
    prev = res.value;
  }
}

TEST_CASE("robust: gamma I_p forces tau_k = 0") {
  PMIProblem prob;
  prob.obj_c = {Rat(1)};
  prob.obj_P.push_back(Rat(0) * PolyMatQ::identity(2, 1, 0));   // P0 = 0
  prob.obj_P.push_back(Rat(-1) * PolyMatQ::identity(2, 1, 0));  // P1 = -I
  prob.G.push_back(unit_disk_1d());
  RelaxationOrder ord;
  ord.k = 1;
  auto res = run_optimize(prob, ord, false);
  CHECK(res.status == "bound-found");
  CHECK(std::abs(res.value) <= 1e-6);
}

TEST_CASE("robust noncompact: quadratic toy matches the grid oracle") {
  // min gamma s.t. gamma - x^2 >= 0 relaxed with eps theta^{d_P}:
  // analytic value min{gamma : gamma - x^2 + eps (1+x^2)^2 >= 0 on R}.
  PMIProblem prob;
  prob.obj_c = {Rat(1)};
  prob.obj_P.push_back(PolyMatQ::scalar(poly1({{{2}, Rat(-1)}}, 1)));  // P0 = -x^2
  prob.obj_P.push_back(PolyMatQ::scalar(poly1({{{0}, Rat(-1)}}, 1)));  // P1 = -1
  double eps = 0.1;

  double analytic = -1e300;  // max over x of x^2 - eps (1+x^2)^2
  for (double x = -10; x <= 10; x += 1e-3)
    analytic = std::max(analytic, x * x - eps * std::pow(1 + x * x, 2.0));

  std::vector<double> taus;
  for (int k = 1; k <= 2; ++k) {
    RelaxationOrder ord;
    ord.k = k;
    ord.eps = eps;
    auto res = run_optimize(prob, ord, true);
    CHECK(res.status == "bound-found");
    CHECK(res.value == doctest::Approx(analytic).epsilon(1e-3));
    taus.push_back(res.value);
  }

  // eps = 1 smoke: feasible with a finite value.
  RelaxationOrder ord1;
  ord1.k = 1;
  ord1.eps = 1.0;
  auto smoke = run_optimize(prob, ord1, true);
  CHECK(smoke.status == "bound-found");
  CHECK(std::isfinite(smoke.value));

  // Decreasing eps trajectory is recorded without asserting monotonicity.
  std::vector<double> traj;
  for (double e : {0.5, 0.25, 0.1}) {
    RelaxationOrder ord;
    ord.k = 2;
    ord.eps = e;
    auto res = run_optimize(prob, ord, true);
    CHECK(res.status == "bound-found");
    traj.push_back(res.value);
  }
  CHECK(traj.size() == 3);
}
