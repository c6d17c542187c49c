#include "pmi/json_io.hpp"

#include <fstream>

namespace pmi {

namespace {

Rat parse_coeff(const Json& j, const std::string& where) {
  if (j.is_string()) {
    try {
      return parse_rat(j.get<std::string>());
    } catch (const std::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  if (j.is_number_integer()) return parse_rat(std::to_string(j.get<long long>()));
  throw SchemaError(where +
                    ": coefficients must be decimal-free \"num/den\" strings or "
                    "integers");
}

Exps parse_exps(const Json& j, int expect, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an exponent array");
  Exps e;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw SchemaError(where + ": exponents must be nonnegative integers");
    e.push_back(int(v.get<long long>()));
  }
  if (expect >= 0 && (int)e.size() != expect)
    throw SchemaError(where + ": exponent arity mismatch");
  return e;
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

PolyMatrix<Rat> parse_polymatrix(const Json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  int n = field(j, "n", where).get<int>();
  int m = j.value("m", 0);
  int size = field(j, "size", where).get<int>();
  if (n < 0 || m < 0 || size <= 0) throw SchemaError(where + ": invalid dimensions");
  const Json& entries = field(j, "entries", where);
  if (!entries.is_array() || (int)entries.size() != size)
    throw SchemaError(where + ": entries must be a size x size array");
  PolyMatrix<Rat> M(size, n, m);
  for (int i = 0; i < size; ++i) {
    const Json& rowj = entries[i];
    if (!rowj.is_array() || (int)rowj.size() != size)
      throw SchemaError(where + ": entries row " + std::to_string(i) + " malformed");
    for (int c = 0; c < size; ++c) {
      const Json& terms = rowj[c];
      if (!terms.is_array())
        throw SchemaError(where + ": entry must be a term list");
      std::string ew = where + ".entries[" + std::to_string(i) + "][" +
                       std::to_string(c) + "]";
      for (const auto& t : terms) {
        Exps ax = parse_exps(field(t, "ax", ew), n, ew);
        Exps ay = t.contains("ay") ? parse_exps(t["ay"], m, ew) : Exps(m, 0);
        M.at(i, c).add_term(Monomial(ax, ay), parse_coeff(field(t, "c", ew), ew));
      }
    }
  }
  if (!M.check_symmetry())
    throw SchemaError(where + ": matrix is not symmetric term-for-term");
  M.set_symmetric();
  return M;
}

namespace {

template <typename K>
Json polymatrix_json_impl(const PolyMatrix<K>& M) {
  Json entries = Json::array();
  for (int i = 0; i < M.size(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.size(); ++j) {
      Json terms = Json::array();
      for (const auto& [mo, c] : M.at(i, j).terms()) {
        Json t;
        t["ax"] = mo.ax;
        t["ay"] = mo.ay;
        if constexpr (std::is_same_v<K, Rat>) {
          t["c"] = rat_to_string(c);
        } else {
          t["c"] = c;
        }
        terms.push_back(std::move(t));
      }
      row.push_back(std::move(terms));
    }
    entries.push_back(std::move(row));
  }
  return Json{{"n", M.n()}, {"m", M.m()}, {"size", M.size()}, {"entries", entries}};
}

}  // namespace

Json polymatrix_to_json(const PolyMatrix<Rat>& M) { return polymatrix_json_impl(M); }
Json polymatrix_to_json(const PolyMatrix<double>& M) { return polymatrix_json_impl(M); }

MeasureSpec parse_measure(const Json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  std::string kind = field(j, "kind", where).get<std::string>();
  int m = field(j, "m", where).get<int>();
  auto parse_rat_field = [&](const Json& v) -> Rat {
    if (v.is_string()) return parse_rat(v.get<std::string>());
    if (v.is_number_integer()) return parse_rat(std::to_string(v.get<long long>()));
    if (v.is_number_float()) return Rat(v.get<double>());
    throw SchemaError(where + ": numeric field expected");
  };
  if (kind == "discrete") {
    std::vector<Atom> atoms;
    for (const auto& aj : field(j, "atoms", where)) {
      Atom a;
      for (const auto& v : field(aj, "y", where)) a.y.push_back(parse_rat_field(v));
      a.w = parse_rat_field(field(aj, "w", where));
      atoms.push_back(std::move(a));
    }
    try {
      return MeasureSpec::discrete(m, std::move(atoms));
    } catch (const std::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  if (kind == "box") {
    std::vector<Rat> a, b;
    for (const auto& v : field(j, "a", where)) a.push_back(parse_rat_field(v));
    for (const auto& v : field(j, "b", where)) b.push_back(parse_rat_field(v));
    BoxNormalization norm = BoxNormalization::Probability;
    if (j.contains("normalize")) {
      std::string s = j["normalize"].get<std::string>();
      if (s == "probability") {
        norm = BoxNormalization::Probability;
      } else if (s == "lebesgue") {
        norm = BoxNormalization::Lebesgue;
      } else {
        throw SchemaError(where + ": normalize must be probability|lebesgue");
      }
    }
    try {
      return MeasureSpec::box(m, std::move(a), std::move(b), norm);
    } catch (const std::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  if (kind == "gaussian") return MeasureSpec::gaussian(m);
  throw SchemaError(where + ": kind must be box|discrete|gaussian");
}

Json measure_to_json(const MeasureSpec& nu) {
  Json j;
  j["m"] = nu.m();
  switch (nu.kind()) {
    case MeasureKind::Discrete: {
      j["kind"] = "discrete";
      Json atoms = Json::array();
      for (const auto& a : nu.atoms()) {
        Json aj;
        aj["y"] = Json::array();
        for (const auto& v : a.y) aj["y"].push_back(rat_to_string(v));
        aj["w"] = rat_to_string(a.w);
        atoms.push_back(std::move(aj));
      }
      j["atoms"] = std::move(atoms);
      break;
    }
    case MeasureKind::Box: {
      j["kind"] = "box";
      j["a"] = Json::array();
      j["b"] = Json::array();
      for (const auto& v : nu.box_a()) j["a"].push_back(rat_to_string(v));
      for (const auto& v : nu.box_b()) j["b"].push_back(rat_to_string(v));
      j["normalize"] = nu.normalization() == BoxNormalization::Probability
                           ? "probability"
                           : "lebesgue";
      break;
    }
    case MeasureKind::Gaussian:
      j["kind"] = "gaussian";
      break;
  }
  return j;
}

RelaxationOrder parse_order(const Json& j, const std::string& where) {
  RelaxationOrder o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  o.d = j.value("d", 1);
  o.k = j.value("k", -1);
  o.N = j.value("N", -1);
  o.eps = j.value("eps", 0.0);
  if (o.d < 0) throw SchemaError(where + ": d must be nonnegative");
  if (o.eps < 0) throw SchemaError(where + ": eps must be nonnegative");
  return o;
}

PMIProblem parse_problem(const Json& j) {
  if (!j.is_object()) throw SchemaError("problem: expected an object");
  PMIProblem prob;
  if (j.contains("F")) prob.F = parse_polymatrix(j["F"], "problem.F");
  if (j.contains("G")) {
    if (j["G"].is_array()) {
      int idx = 0;
      for (const auto& g : j["G"])
        prob.G.push_back(
            parse_polymatrix(g, "problem.G[" + std::to_string(idx++) + "]"));
    } else {
      prob.G.push_back(parse_polymatrix(j["G"], "problem.G"));
    }
  }
  if (j.contains("measure")) {
    prob.nu = parse_measure(j["measure"], "problem.measure");
  } else {
    int gm = prob.G.empty() ? 0 : prob.G[0].m();
    if (gm != 0)
      throw SchemaError("problem: measure required when G involves y");
    prob.nu = MeasureSpec::trivial();
  }
  if (j.contains("extras")) {
    int idx = 0;
    for (const auto& h : j["extras"])
      prob.extras.push_back(
          parse_polymatrix(h, "problem.extras[" + std::to_string(idx++) + "]"));
  }
  if (j.contains("objective")) {
    const Json& obj = j["objective"];
    for (const auto& c : field(obj, "c", "problem.objective"))
      prob.obj_c.push_back(c.is_string() ? parse_rat(c.get<std::string>())
                                         : Rat(c.get<double>()));
    int idx = 0;
    for (const auto& Pj : field(obj, "P", "problem.objective"))
      prob.obj_P.push_back(
          parse_polymatrix(Pj, "problem.objective.P[" + std::to_string(idx++) + "]"));
    if (prob.obj_P.size() != prob.obj_c.size() + 1)
      throw SchemaError("problem.objective: need P_0..P_r with c of length r");
  }
  if (j.contains("cliques")) {
    const Json& cj = j["cliques"];
    CliqueDecomposition cd;
    for (const auto& I : field(cj, "I", "problem.cliques")) {
      std::vector<int> clique;
      for (const auto& v : I) {
        int idx = v.get<int>();
        if (idx < 1) throw SchemaError("problem.cliques: variables are 1-indexed");
        clique.push_back(idx - 1);
      }
      cd.cliques.push_back(std::move(clique));
    }
    for (const auto& J : field(cj, "J", "problem.cliques")) {
      std::vector<int> assign;
      for (const auto& v : J) {
        int idx = v.get<int>();
        if (idx < 1) throw SchemaError("problem.cliques: constraints are 1-indexed");
        assign.push_back(idx - 1);
      }
      cd.assignments.push_back(std::move(assign));
    }
    prob.cliques = std::move(cd);
  }
  // A 1x1 F doubles as the scalar objective of the sparse hierarchy.
  if (prob.F && prob.F->size() == 1) prob.scalar_f = prob.F->at(0, 0);
  return prob;
}

namespace {

Json gram_to_json(const SOSGram<double>& g) {
  Json basis = Json::array();
  for (const auto& mo : g.basis) basis.push_back(Json{{"ax", mo.ax}, {"ay", mo.ay}});
  Json Z = Json::array();
  for (int i = 0; i < g.Z.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < g.Z.cols(); ++j) row.push_back(g.Z(i, j));
    Z.push_back(std::move(row));
  }
  return Json{{"basis", basis}, {"block", g.block}, {"n", g.n},
              {"m", g.m},       {"mode", "float"},  {"Z", Z}};
}

SOSGram<double> gram_from_json(const Json& j, const std::string& where) {
  SOSGram<double> g;
  g.block = field(j, "block", where).get<int>();
  g.n = j.value("n", 0);
  g.m = j.value("m", 0);
  for (const auto& bj : field(j, "basis", where)) {
    Exps ax = parse_exps(field(bj, "ax", where), g.n, where);
    Exps ay = bj.contains("ay") ? parse_exps(bj["ay"], g.m, where) : Exps(g.m, 0);
    g.basis.emplace_back(ax, ay);
  }
  const Json& Z = field(j, "Z", where);
  int side = int(g.basis.size()) * g.block;
  if ((int)Z.size() != side) throw SchemaError(where + ": Z side mismatch");
  g.Z = DenseMat<double>(side, side);
  for (int i = 0; i < side; ++i) {
    if ((int)Z[i].size() != side) throw SchemaError(where + ": Z row mismatch");
    for (int jj = 0; jj < side; ++jj) {
      const Json& v = Z[i][jj];
      g.Z(i, jj) = v.is_string() ? to_double(parse_rat(v.get<std::string>()))
                                 : v.get<double>();
    }
  }
  return g;
}

}  // namespace

Json certificate_to_json(const SOSCertificate<double>& cert) {
  Json j;
  j["hierarchy"] = cert.meta.hierarchy;
  Json meta;
  meta["d"] = cert.meta.d;
  meta["k"] = cert.meta.k;
  meta["N"] = cert.meta.N;
  meta["eps"] = cert.meta.eps;
  meta["delta"] = cert.meta.delta;
  if (cert.meta.r) meta["r"] = *cert.meta.r;
  if (!cert.meta.gamma.empty()) meta["gamma"] = cert.meta.gamma;
  meta["measure"] = cert.meta.measure_id;
  meta["carleman"] = cert.meta.carleman;
  j["meta"] = std::move(meta);
  if (cert.sigma0) j["sigma0"] = gram_to_json(*cert.sigma0);
  if (cert.sigma) j["sigma"] = gram_to_json(*cert.sigma);
  Json extras = Json::array();
  for (const auto& ex : cert.extras) {
    extras.push_back(
        Json{{"role", ex.role}, {"tag", ex.tag}, {"gram", gram_to_json(ex.gram)}});
  }
  j["extras"] = std::move(extras);
  return j;
}

SOSCertificate<double> parse_certificate(const Json& j) {
  SOSCertificate<double> cert;
  cert.meta.hierarchy = field(j, "hierarchy", "certificate").get<std::string>();
  if (j.contains("meta")) {
    const Json& m = j["meta"];
    cert.meta.d = m.value("d", -1);
    cert.meta.k = m.value("k", -1);
    cert.meta.N = m.value("N", -1);
    cert.meta.eps = m.value("eps", 0.0);
    cert.meta.delta = m.value("delta", 0.0);
    if (m.contains("r")) cert.meta.r = m["r"].get<double>();
    if (m.contains("gamma")) cert.meta.gamma = m["gamma"].get<std::vector<double>>();
    cert.meta.measure_id = m.value("measure", "");
    cert.meta.carleman = m.value("carleman", true);
  }
  if (j.contains("sigma0"))
    cert.sigma0 = gram_from_json(j["sigma0"], "certificate.sigma0");
  if (j.contains("sigma")) cert.sigma = gram_from_json(j["sigma"], "certificate.sigma");
  if (j.contains("extras")) {
    int idx = 0;
    for (const auto& ej : j["extras"]) {
      std::string where = "certificate.extras[" + std::to_string(idx++) + "]";
      ExtraGram<double> ex;
      ex.role = field(ej, "role", where).get<std::string>();
      if (ej.contains("tag")) ex.tag = parse_exps(ej["tag"], -1, where);
      ex.gram = gram_from_json(field(ej, "gram", where), where);
      cert.extras.push_back(std::move(ex));
    }
  }
  return cert;
}

Json moment_seq_to_json(const MomentSeq<double>& seq) {
  Json j;
  j["p"] = seq.p;
  j["n"] = seq.n;
  j["d_cap"] = seq.d_cap;
  Json entries = Json::array();
  for (const auto& [alpha, Sa] : seq.S) {
    Json e;
    e["alpha"] = alpha;
    Json rows = Json::array();
    for (int i = 0; i < seq.p; ++i) {
      Json row = Json::array();
      for (int jj = 0; jj < seq.p; ++jj) row.push_back(Sa(i, jj));
      rows.push_back(std::move(row));
    }
    e["S"] = std::move(rows);
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

MomentSeq<double> parse_moment_seq(const Json& j) {
  MomentSeq<double> seq;
  seq.p = field(j, "p", "moments").get<int>();
  seq.n = field(j, "n", "moments").get<int>();
  seq.d_cap = field(j, "d_cap", "moments").get<int>();
  for (const auto& e : field(j, "entries", "moments")) {
    Exps alpha = parse_exps(field(e, "alpha", "moments"), seq.n, "moments");
    DenseMat<double> Sa(seq.p, seq.p);
    const Json& rows = field(e, "S", "moments");
    if ((int)rows.size() != seq.p) throw SchemaError("moments: S block size mismatch");
    for (int i = 0; i < seq.p; ++i)
      for (int jj = 0; jj < seq.p; ++jj) Sa(i, jj) = rows[i][jj].get<double>();
    seq.S[alpha] = std::move(Sa);
  }
  if (!seq.S.count(Exps(seq.n, 0))) throw SchemaError("moments: S_0 missing");
  return seq;
}

Json bmp_report_to_json(const BmpReport& rep) {
  Json j;
  j["min_eig_moment"] = rep.min_eig_moment;
  if (rep.has_localizing) j["min_eig_localizing"] = rep.min_eig_localizing;
  j["max_growth_violation"] = rep.max_growth_violation;
  j["worst_alpha"] = rep.worst_alpha;
  j["verdict"] = rep.pass ? "necessary-conditions-pass" : "violation";
  j["note"] = rep.note;
  return j;
}

Json verify_report_to_json(const VerifyReport& rep) {
  Json j;
  j["max_residual"] = rep.max_residual;
  j["worst_alpha"] = rep.worst_alpha;
  j["grams_psd"] = rep.grams_psd;
  j["min_gram_eig"] = rep.min_gram_eig;
  j["verdict"] = rep.pass ? "PASS" : "FAIL";
  j["detail"] = rep.detail;
  return j;
}

Json grid_report_to_json(const GridReport& rep) {
  Json j;
  j["min_eig"] = rep.min_eig;
  j["argmin"] = rep.argmin;
  j["feasible_points"] = rep.feasible_points;
  j["total_points"] = rep.total_points;
  j["no_feasible_sample"] = rep.no_feasible_sample;
  j["note"] = rep.note;
  return j;
}

Json propmain_report_to_json(const PropMainReport& rep) {
  Json j;
  j["M"] = rep.M;
  j["k_bar"] = rep.k_bar;
  Json table = Json::array();
  for (const auto& row : rep.table)
    table.push_back(Json{{"k", row.k}, {"grid_min_eig", row.grid_min_eig}});
  j["table"] = std::move(table);
  return j;
}

Json solve_report_to_json(const SolveReport& rep) {
  Json j;
  j["status"] = to_string(rep.status);
  j["primal_obj"] = rep.primal_obj;
  j["dual_obj"] = rep.dual_obj;
  j["iterations"] = rep.iterations;
  j["residuals"] = Json{{"primal", rep.residuals.primal},
                        {"dual", rep.residuals.dual},
                        {"gap", rep.residuals.gap}};
  j["message"] = rep.message;
  if (rep.ray) {
    j["ray"] = Json{{"dual_residual", rep.ray->ray_dual_residual},
                    {"free_residual", rep.ray->ray_free_residual},
                    {"min_eig_Z", rep.ray->min_eig_Z},
                    {"objective", rep.ray->objective}};
  }
  return j;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("JSON parse error in '") + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  // Self-validation: the serialization must itself be parseable JSON.
  std::string text = j.dump(2);
  auto parsed = Json::parse(text);
  (void)parsed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text << "\n";
}

}  // namespace pmi
