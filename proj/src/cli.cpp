#include "pmi/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <future>
#include <iostream>

#include "pmi/hierarchy.hpp"
#include "pmi/json_io.hpp"
#include "pmi/sdpa_io.hpp"
#include "pmi/verify.hpp"

namespace pmi {

namespace {

struct Tolerances {
  double solver_tol = 1e-8;
  double verify_tol = 1e-6;
  double psd_floor = 1e-9;
  int max_iter = 200;
  int n_max = 10;
  int psd_side_cap = 600;
};

Tolerances load_tolerances(const std::string& config_path) {
  Tolerances t;
  if (config_path.empty()) return t;
  Json j = load_json_file(config_path);
  t.solver_tol = j.value("solver_tol", t.solver_tol);
  t.verify_tol = j.value("verify_tol", t.verify_tol);
  t.psd_floor = j.value("psd_floor", t.psd_floor);
  t.max_iter = j.value("max_iter", t.max_iter);
  t.n_max = j.value("n_max", t.n_max);
  t.psd_side_cap = j.value("psd_side_cap", t.psd_side_cap);
  return t;
}

HierarchyOptions to_options(const Tolerances& t, unsigned seed) {
  HierarchyOptions o;
  o.solver_tol = t.solver_tol;
  o.verify_tol = t.verify_tol;
  o.max_iter = t.max_iter;
  o.n_max = t.n_max;
  o.seed = seed;
  o.psd_side_cap = t.psd_side_cap;
  return o;
}

int status_to_exit(const std::string& status) {
  if (status == "certified" || status == "bound-found") return kExitOk;
  if (status == "infeasible-at-order") return kExitInfeasible;
  return kExitSolverFailure;
}

BuildOutput build_for(const PMIProblem& prob, const std::string& hierarchy,
                      const RelaxationOrder& order) {
  if (hierarchy == "membership") return build_membership(prob, order);
  if (hierarchy == "sparse") return build_sparse(prob, order);
  if (hierarchy == "homogeneous")
    return build_homogeneous(prob, std::max(order.N, 0), order);
  if (hierarchy == "inhomogeneous")
    return build_inhomogeneous(prob, order.eps, std::max(order.N, 0), order);
  if (hierarchy == "polya") return build_polya(prob, std::max(order.N, 0), order);
  if (hierarchy == "perturbation") return build_perturbation(prob, order).primal;
  if (hierarchy == "robust") return build_robust_opt(prob, order);
  if (hierarchy == "robust-noncompact")
    return build_robust_opt_noncompact(prob, order.eps, order);
  throw SchemaError("unknown hierarchy '" + hierarchy + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"pmicert: SOS/moment certification of polynomial matrix "
               "inequalities under universal quantifiers"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned seed = 0;
  app.add_option("--config", config_path, "tolerance configuration JSON");
  app.add_option("--seed", seed, "solver determinism seed");

  // ---- certify ----
  auto* certify = app.add_subcommand("certify", "certify F PSD/PD on X");
  std::string c_problem, c_hierarchy = "membership", c_out, c_report;
  RelaxationOrder c_order;
  bool c_auto_N = false;
  certify->add_option("problem", c_problem, "problem JSON")->required();
  certify->add_option("--hierarchy", c_hierarchy,
                      "membership|sparse|homogeneous|inhomogeneous|polya|perturbation");
  certify->add_option("--d", c_order.d, "x-order d");
  certify->add_option("--k", c_order.k, "y-order k");
  certify->add_option("--N", c_order.N, "multiplier power N");
  certify->add_option("--eps", c_order.eps, "perturbation magnitude");
  certify->add_flag("--auto-N", c_auto_N, "search N = 0,1,... up to the cap");
  certify->add_option("--out", c_out, "certificate output path");
  certify->add_option("--report", c_report, "report output path");

  // ---- optimize ----
  auto* optimize = app.add_subcommand("optimize", "robust optimization bounds");
  std::string o_problem, o_out;
  int o_k = 1, o_k2 = -1;
  double o_eps = 0.0;
  int o_jobs = 1;
  bool o_noncompact = false;
  optimize->add_option("problem", o_problem, "problem JSON with objective")->required();
  optimize->add_option("--k", o_k, "relaxation order");
  optimize->add_option("--schedule-to", o_k2, "run orders k..schedule-to");
  optimize->add_option("--eps", o_eps, "noncompact perturbation (enables theta form)");
  optimize->add_flag("--noncompact", o_noncompact, "use the theta-perturbed form");
  optimize->add_option("--jobs", o_jobs, "concurrent solves for the schedule");
  optimize->add_option("--out", o_out, "bound table output path");

  // ---- moments check ----
  auto* moments = app.add_subcommand("moments", "moment sequence operations");
  auto* mcheck = moments->add_subcommand("check", "necessary feasibility test");
  std::string m_moments, m_problem, m_out;
  double m_C = 1.0;
  int m_d = 1, m_k = 0;
  mcheck->add_option("moments", m_moments, "moment sequence JSON")->required();
  mcheck->add_option("--problem", m_problem, "problem JSON supplying G and nu");
  mcheck->add_option("--C", m_C, "exponential bound base");
  mcheck->add_option("--d", m_d, "moment matrix order");
  mcheck->add_option("--k", m_k, "y order for the localizing matrix");
  mcheck->add_option("--out", m_out, "report output path");

  // ---- export ----
  auto* exportc = app.add_subcommand("export", "export the assembled SDP (.dat-s)");
  std::string e_problem, e_hierarchy = "membership", e_out = "problem.dat-s";
  RelaxationOrder e_order;
  exportc->add_option("problem", e_problem, "problem JSON")->required();
  exportc->add_option("--hierarchy", e_hierarchy, "hierarchy to assemble");
  exportc->add_option("--d", e_order.d, "x-order d");
  exportc->add_option("--k", e_order.k, "y-order k");
  exportc->add_option("--N", e_order.N, "multiplier power N");
  exportc->add_option("--eps", e_order.eps, "perturbation magnitude");
  exportc->add_option("--out", e_out, "output path");

  // ---- verify ----
  auto* verifyc = app.add_subcommand("verify", "verify a certificate");
  std::string v_problem, v_cert, v_out;
  double v_tol = -1.0;
  verifyc->add_option("problem", v_problem, "problem JSON")->required();
  verifyc->add_option("certificate", v_cert, "certificate JSON")->required();
  verifyc->add_option("--tol", v_tol, "residual tolerance");
  verifyc->add_option("--out", v_out, "report output path");

  // ---- propmain ----
  auto* propmain = app.add_subcommand("propmain", "constructive multiplier sweep");
  std::string p_problem, p_out;
  double p_C = 1.0, p_M = -1.0;
  int p_kmax = 12, p_grid = 9;
  propmain->add_option("problem", p_problem, "problem JSON")->required();
  propmain->add_option("--C", p_C, "box half-width");
  propmain->add_option("--M", p_M, "eigenvalue bound M (estimated when omitted)");
  propmain->add_option("--kmax", p_kmax, "largest multiplier power");
  propmain->add_option("--grid", p_grid, "grid density per axis");
  propmain->add_option("--out", p_out, "report output path");

  std::vector<std::string> argv_like(args.rbegin(), args.rend());
  try {
    app.parse(std::vector<std::string>(argv_like));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::endl;
      return kExitOk;
    }
    std::cerr << "usage error: " << e.what() << std::endl;
    return kExitSchema;
  }

  try {
    Tolerances tols = load_tolerances(config_path);
    HierarchyOptions opts = to_options(tols, seed);

    if (*certify) {
      PMIProblem prob = parse_problem(load_json_file(c_problem));
      if (c_auto_N) c_order.N = -1;
      HierarchyResult res = run_certify(prob, c_hierarchy, c_order, opts);
      Json report;
      report["status"] = res.status;
      report["hierarchy"] = c_hierarchy;
      report["message"] = res.message;
      report["value"] = res.value;
      report["residual"] = res.residual;
      if (res.used_N >= 0) report["N"] = res.used_N;
      report["solver"] = solve_report_to_json(res.report);
      if (res.certificate && !c_out.empty())
        write_json_file(c_out, certificate_to_json(*res.certificate));
      if (!c_report.empty()) write_json_file(c_report, report);
      std::cout << report.dump(2) << std::endl;
      return status_to_exit(res.status);
    }

    if (*optimize) {
      PMIProblem prob = parse_problem(load_json_file(o_problem));
      bool noncompact = o_noncompact || o_eps > 0;
      int k_hi = o_k2 >= o_k ? o_k2 : o_k;
      std::vector<int> orders;
      for (int k = o_k; k <= k_hi; ++k) orders.push_back(k);

      std::vector<HierarchyResult> results(orders.size());
      int jobs = std::max(1, o_jobs);
      for (size_t base = 0; base < orders.size(); base += jobs) {
        std::vector<std::future<HierarchyResult>> batch;
        for (size_t t = base; t < std::min(base + jobs, orders.size()); ++t) {
          RelaxationOrder ord;
          ord.k = orders[t];
          ord.eps = o_eps;
          batch.push_back(std::async(std::launch::async, [&, ord] {
            return run_optimize(prob, ord, noncompact, opts);
          }));
        }
        for (size_t t = base; t < std::min(base + jobs, orders.size()); ++t)
          results[t] = batch[t - base].get();
      }

      Json table = Json::array();
      int exit_code = kExitOk;
      double prev = 0.0;
      bool have_prev = false;
      for (size_t t = 0; t < orders.size(); ++t) {
        const auto& res = results[t];
        Json row;
        row["k"] = orders[t];
        row["status"] = res.status;
        row["tau"] = res.value;
        row["residual"] = res.residual;
        if (have_prev && res.status == "bound-found" && res.value > prev + 1e-8)
          row["monotonicity_violation"] = true;
        if (res.status == "bound-found") {
          prev = res.value;
          have_prev = true;
        } else {
          exit_code = std::max(exit_code, status_to_exit(res.status));
        }
        std::cout << "k=" << orders[t] << "  status=" << res.status
                  << "  tau=" << res.value << "\n";
        table.push_back(std::move(row));
      }
      if (!o_out.empty()) write_json_file(o_out, Json{{"bounds", table}});
      return exit_code;
    }

    if (*mcheck) {
      MomentSeq<double> seq = parse_moment_seq(load_json_file(m_moments));
      std::optional<PolyMatrix<double>> G;
      std::optional<MeasureSpec> nu;
      if (!m_problem.empty()) {
        PMIProblem prob = parse_problem(load_json_file(m_problem));
        if (!prob.G.empty()) {
          G = to_double_matrix(prob.G[0]);
          nu = prob.nu;
        }
      }
      BmpReport rep = bmp_check(seq, G, nu, m_C, m_d, m_k, tols.psd_floor);
      Json j = bmp_report_to_json(rep);
      if (!m_out.empty()) write_json_file(m_out, j);
      std::cout << j.dump(2) << std::endl;
      return rep.pass ? kExitOk : kExitInfeasible;
    }

    if (*exportc) {
      PMIProblem prob = parse_problem(load_json_file(e_problem));
      BuildOutput build = build_for(prob, e_hierarchy, e_order);
      export_sdpa(build.prob, e_out);
      std::cout << "wrote " << e_out << " (" << build.prob.num_constraints()
                << " constraints, " << build.prob.block_sizes.size() << " blocks)"
                << std::endl;
      return kExitOk;
    }

    if (*verifyc) {
      PMIProblem prob = parse_problem(load_json_file(v_problem));
      SOSCertificate<double> cert = parse_certificate(load_json_file(v_cert));
      double tol = v_tol > 0 ? v_tol : tols.verify_tol;
      VerifyReport rep = verify_certificate(prob, cert, tol);
      Json j = verify_report_to_json(rep);
      if (!v_out.empty()) write_json_file(v_out, j);
      std::cout << j.dump(2) << std::endl;
      return rep.pass ? kExitOk : kExitInfeasible;
    }

    if (*propmain) {
      PMIProblem prob = parse_problem(load_json_file(p_problem));
      if (!prob.F) throw SchemaError("propmain needs a target F");
      std::vector<PolyMatrix<double>> G;
      for (const auto& g : prob.G) G.push_back(to_double_matrix(g));
      if (G.empty()) throw SchemaError("propmain needs at least one constraint G");
      double M = p_M;
      if (M <= 0) M = estimate_M(G, p_C, prob.nu, p_grid);
      PropMainReport rep = prop_main_check(strip_y(to_double_matrix(*prob.F)), G,
                                           prob.nu, p_C, M, p_kmax, p_grid);
      Json j = propmain_report_to_json(rep);
      if (!p_out.empty()) write_json_file(p_out, j);
      std::cout << j.dump(2) << std::endl;
      return rep.k_bar >= 0 ? kExitOk : kExitInfeasible;
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitSolverFailure;
  }
  return kExitSchema;
}

}  // namespace pmi
