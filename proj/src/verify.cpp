#include "pmi/verify.hpp"

#include <cmath>
#include <stdexcept>

#include "pmi/gram.hpp"
#include "pmi/hierarchy.hpp"

namespace pmi {

namespace {

int parse_index(const std::string& role, size_t pos) {
  return std::stoi(role.substr(pos));
}

template <typename K>
void add_pairing(PolyMatrix<K>& acc, const SOSGram<K>& gram, const PolyMatrix<K>& G,
                 const MeasureSpec& nu, int p) {
  PolyMatrix<K> expanded = expand_gram(gram);
  acc += integrate_y(bilinear_p(expanded, G, p), nu);
}

}  // namespace

template <typename K>
PolyMatrix<K> reconstruct_element(const SOSCertificate<K>& cert,
                                  const std::vector<PolyMatrix<K>>& G,
                                  const std::vector<PolyMatrix<K>>& extras,
                                  const MeasureSpec& nu, int p) {
  int n = 0;
  if (cert.sigma0) {
    n = cert.sigma0->n;
  } else if (!G.empty()) {
    n = G[0].n();
  } else if (!cert.extras.empty()) {
    n = cert.extras[0].gram.n;
  }
  PolyMatrix<K> acc(p, n, 0);

  if (cert.sigma0) acc += expand_gram(*cert.sigma0);
  if (cert.sigma) {
    if (G.empty()) throw std::invalid_argument("certificate pairs sigma with no G");
    add_pairing(acc, *cert.sigma, G[0], nu, p);
  }

  const bool polya = cert.meta.hierarchy == "polya";
  // Polya pieces: S_0 = sum_a x^a (delta I + X_a), S = sum_a x^a S_a(y) with
  // S_a(y) = gram-in-y + constant + delta I. Collect S as a matrix in (x,y).
  std::optional<PolyMatrix<K>> polya_S;
  auto ensure_polya_S = [&](int q) {
    if (!polya_S) polya_S.emplace(p * q, n, nu.m());
  };
  K delta = K(0);
  if constexpr (std::is_same_v<K, double>) {
    delta = cert.meta.delta;
  } else {
    delta = Rat(cert.meta.delta);
  }

  for (const auto& ex : cert.extras) {
    const std::string& role = ex.role;
    if (role.rfind("sigma:", 0) == 0) {
      int j = parse_index(role, 6);
      add_pairing(acc, ex.gram, G.at(j), nu, p);
    } else if (role.rfind("extra:", 0) == 0) {
      int j = parse_index(role, 6);
      PolyMatrix<K> expanded = expand_gram(ex.gram);
      acc += bilinear_p(expanded, extras.at(j), p);
    } else if (role.rfind("clique0:", 0) == 0) {
      acc += expand_gram(ex.gram);
    } else if (role.rfind("clique:", 0) == 0) {
      auto second = role.find(':', 7);
      int j = parse_index(role, second + 1);
      add_pairing(acc, ex.gram, G.at(j), nu, p);
    } else if (role == "polya0") {
      // x^tag (delta I_p + X_tag)
      PolyMatrix<K> X = expand_gram(ex.gram);
      PolyMatrix<K> shift = delta * PolyMatrix<K>::identity(p, n, 0);
      Poly<K> mono(n, 0);
      mono.add_term(Monomial(ex.tag, {}), CoeffTraits<K>::one());
      acc += mono * (X + shift);
    } else if (role == "polyaQ" || role == "polyaC") {
      if (G.empty()) throw std::invalid_argument("polya S piece with no G");
      int q = G[0].size();
      ensure_polya_S(q);
      PolyMatrix<K> Sa = expand_gram(ex.gram);
      // expand_gram of the y-Gram yields m()=nu.m(); the constant piece has
      // m()=0 and must be lifted into (x, y) arity first.
      PolyMatrix<K> lifted(p * q, n, nu.m());
      for (int i = 0; i < Sa.size(); ++i)
        for (int j = 0; j < Sa.size(); ++j)
          for (const auto& [mo, c] : Sa.at(i, j).terms()) {
            Exps ay = mo.ay;
            ay.resize(nu.m(), 0);
            Exps ax = mo.ax;
            ax.resize(n, 0);
            lifted.at(i, j).add_term(Monomial(ax, ay), c);
          }
      Poly<K> mono(n, nu.m());
      mono.add_term(Monomial(ex.tag, Exps(nu.m(), 0)), CoeffTraits<K>::one());
      if (role == "polyaQ") {
        *polya_S += mono * lifted;
      } else {
        PolyMatrix<K> shift = delta * PolyMatrix<K>::identity(p * q, n, nu.m());
        *polya_S += mono * (lifted + shift);
      }
    } else {
      throw std::invalid_argument("unknown certificate role '" + role + "'");
    }
  }

  if (polya_S) {
    acc += integrate_y(bilinear_p(*polya_S, G.at(0), p), nu);
  }
  return acc;
}

template PolyMatrix<double> reconstruct_element<double>(
    const SOSCertificate<double>&, const std::vector<PolyMatrix<double>>&,
    const std::vector<PolyMatrix<double>>&, const MeasureSpec&, int);
template PolyMatrix<Rat> reconstruct_element<Rat>(const SOSCertificate<Rat>&,
                                                  const std::vector<PolyMatrix<Rat>>&,
                                                  const std::vector<PolyMatrix<Rat>>&,
                                                  const MeasureSpec&, int);

PolyMatrix<double> certificate_target(const PMIProblem& prob, const CertMeta& meta) {
  const std::string& h = meta.hierarchy;
  auto F = [&]() -> PolyMatrix<double> {
    if (prob.F) return strip_y(to_double_matrix(*prob.F));
    if (prob.scalar_f)
      return strip_y(PolyMatrix<double>::scalar(to_double_poly(*prob.scalar_f)));
    throw std::invalid_argument("problem has no certification target");
  };

  if (h == "membership" || h == "sparse") return F();
  if (h == "homogeneous") {
    auto T = F();
    Poly<double> norm2 = theta_poly<double>(T.n(), T.m()) -
                         Poly<double>::constant(T.n(), T.m(), 1.0);
    return norm2.pow(meta.N) * T;
  }
  if (h == "inhomogeneous") {
    auto T = F();
    int d_F = degrees(T).d_half;
    Poly<double> theta = theta_poly<double>(T.n(), T.m());
    PolyMatrix<double> pert =
        T + meta.eps * (theta.pow(d_F) * PolyMatrix<double>::identity(T.size(), T.n(), T.m()));
    return theta.pow(meta.N) * pert;
  }
  if (h == "polya") {
    auto T = F();
    return ones_linear_form<double>(T.n(), T.m()).pow(meta.N) * T;
  }
  if (h == "perturbation") {
    auto T = F();
    double r = meta.r.value_or(0.0);
    Poly<double> th = theta_big_poly<double>(T.n(), T.m(), meta.d);
    return T + r * (th * PolyMatrix<double>::identity(T.size(), T.n(), T.m()));
  }
  if (h == "robust" || h == "robust-noncompact") {
    if (prob.obj_P.empty()) throw std::invalid_argument("no objective data");
    PolyMatrix<double> T = strip_y(to_double_matrix(prob.obj_P[0]));
    for (size_t i = 1; i < prob.obj_P.size(); ++i)
      T -= meta.gamma.at(i - 1) * strip_y(to_double_matrix(prob.obj_P[i]));
    if (h == "robust-noncompact") {
      int d_P = degrees(T).d_half;
      Poly<double> theta = theta_poly<double>(T.n(), T.m());
      PolyMatrix<double> pert =
          T + meta.eps * (theta.pow(d_P) *
                          PolyMatrix<double>::identity(T.size(), T.n(), T.m()));
      return theta.pow(meta.k) * pert;
    }
    return T;
  }
  throw std::invalid_argument("unknown hierarchy '" + h + "'");
}

namespace {

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

template <typename K>
VerifyReport verify_certificate(const PolyMatrix<K>& target,
                                const SOSCertificate<K>& cert,
                                const std::vector<PolyMatrix<K>>& G,
                                const std::vector<PolyMatrix<K>>& extras,
                                const MeasureSpec& nu, int p, double tol) {
  VerifyReport rep;
  PolyMatrix<K> R = reconstruct_element(cert, G, extras, nu, p);
  if (R.size() != target.size())
    throw std::invalid_argument("certificate block size does not match target");
  PolyMatrix<K> diff = target - R;

  rep.max_residual = 0.0;
  for (const auto& alpha : diff.support_x()) {
    Eigen::MatrixXd D = diff.coeff_matrix_d(alpha, Exps{});
    double nrm = spectral_norm(D);
    if (nrm > rep.max_residual) {
      rep.max_residual = nrm;
      rep.worst_alpha = alpha;
    }
  }

  rep.grams_psd = true;
  rep.min_gram_eig = 0.0;
  auto check_gram = [&](const SOSGram<K>& g) {
    PsdCheck c = validate_psd(g);
    rep.grams_psd = rep.grams_psd && c.ok;
    rep.min_gram_eig = std::min(rep.min_gram_eig, c.min_eig);
  };
  if (cert.sigma0) check_gram(*cert.sigma0);
  if (cert.sigma) check_gram(*cert.sigma);
  for (const auto& ex : cert.extras) check_gram(ex.gram);

  rep.pass = rep.max_residual <= tol && rep.grams_psd;
  rep.detail = rep.pass ? "PASS" : (rep.grams_psd ? "coefficient residual too large"
                                                  : "Gram PSD validation failed");
  return rep;
}

template VerifyReport verify_certificate<double>(const PolyMatrix<double>&,
                                                 const SOSCertificate<double>&,
                                                 const std::vector<PolyMatrix<double>>&,
                                                 const std::vector<PolyMatrix<double>>&,
                                                 const MeasureSpec&, int, double);
template VerifyReport verify_certificate<Rat>(const PolyMatrix<Rat>&,
                                              const SOSCertificate<Rat>&,
                                              const std::vector<PolyMatrix<Rat>>&,
                                              const std::vector<PolyMatrix<Rat>>&,
                                              const MeasureSpec&, int, double);

VerifyReport verify_certificate(const PMIProblem& prob,
                                const SOSCertificate<double>& cert, double tol) {
  PolyMatrix<double> target = certificate_target(prob, cert.meta);
  std::vector<PolyMatrix<double>> G, extras;
  for (const auto& g : prob.G) G.push_back(to_double_matrix(g));
  for (const auto& h : prob.extras) extras.push_back(to_double_matrix(h));
  // The homogeneous/inhomogeneous/robust-noncompact targets may live in a
  // different variable count than the original data only through the same n,
  // so the G list is usable as-is.
  return verify_certificate(target, cert, G, extras, prob.nu, target.size(), tol);
}

std::vector<std::vector<double>> grid_points(int n, double C, int density) {
  if (density < 2) throw std::invalid_argument("grid density must be >= 2");
  std::vector<std::vector<double>> pts;
  std::vector<int> idx(n, 0);
  while (true) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i)
      x[i] = -C + 2.0 * C * double(idx[i]) / double(density - 1);
    pts.push_back(x);
    int pos = 0;
    while (pos < n && ++idx[pos] == density) idx[pos++] = 0;
    if (pos == n) break;
    if (n == 0) break;
  }
  if (n == 0) pts.assign(1, {});
  return pts;
}

namespace {

std::vector<std::vector<double>> y_samples(const MeasureSpec& nu, int y_density) {
  std::vector<std::vector<double>> ys;
  switch (nu.kind()) {
    case MeasureKind::Discrete:
      for (const auto& atom : nu.atoms()) {
        std::vector<double> y(atom.y.size());
        for (size_t j = 0; j < atom.y.size(); ++j) y[j] = to_double(atom.y[j]);
        ys.push_back(y);
      }
      break;
    case MeasureKind::Box: {
      std::vector<int> idx(nu.m(), 0);
      while (true) {
        std::vector<double> y(nu.m());
        for (int j = 0; j < nu.m(); ++j) {
          double a = to_double(nu.box_a()[j]), b = to_double(nu.box_b()[j]);
          y[j] = a + (b - a) * double(idx[j]) / double(y_density - 1);
        }
        ys.push_back(y);
        int pos = 0;
        while (pos < nu.m() && ++idx[pos] == y_density) idx[pos++] = 0;
        if (pos == nu.m()) break;
        if (nu.m() == 0) break;
      }
      if (nu.m() == 0) ys.assign(1, {});
      break;
    }
    case MeasureKind::Gaussian:
      throw std::invalid_argument("compact y-sampling unavailable for the Gaussian");
  }
  return ys;
}

double min_eig_at(const PolyMatrix<double>& H, const std::vector<double>& x,
                  const std::vector<double>& y = {}) {
  Eigen::MatrixXd M = H.eval(x, y);
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().minCoeff();
}

}  // namespace

GridReport grid_pd_check(const PolyMatrix<double>& H, double C, int grid_density,
                         const std::vector<PolyMatrix<double>>& G,
                         const std::optional<MeasureSpec>& nu, int y_density) {
  GridReport rep;
  auto pts = grid_points(H.n(), C, grid_density);
  rep.total_points = int(pts.size());
  std::vector<std::vector<double>> ys;
  if (!G.empty()) {
    ys = nu ? y_samples(*nu, y_density) : std::vector<std::vector<double>>{{}};
  }
  bool first = true;
  for (const auto& x : pts) {
    bool feasible = true;
    for (const auto& Gj : G) {
      for (const auto& y : ys) {
        std::vector<double> ypad = y;
        ypad.resize(Gj.m(), 0.0);
        if (min_eig_at(Gj, x, ypad) < -1e-9) {
          feasible = false;
          break;
        }
      }
      if (!feasible) break;
    }
    if (!feasible) continue;
    ++rep.feasible_points;
    double le = min_eig_at(H, x);
    if (first || le < rep.min_eig) {
      rep.min_eig = le;
      rep.argmin = x;
      first = false;
    }
  }
  rep.no_feasible_sample = rep.feasible_points == 0;
  return rep;
}

double estimate_M(const std::vector<PolyMatrix<double>>& G, double C,
                  const std::optional<MeasureSpec>& nu, int grid_density,
                  int y_density) {
  if (G.empty()) throw std::invalid_argument("estimate_M needs constraints");
  std::vector<std::vector<double>> ys =
      nu ? y_samples(*nu, y_density) : std::vector<std::vector<double>>{{}};
  double best = 0.0;
  for (const auto& Gj : G) {
    auto pts = grid_points(Gj.n(), C, grid_density);
    for (const auto& x : pts)
      for (const auto& y : ys) {
        std::vector<double> ypad = y;
        ypad.resize(Gj.m(), 0.0);
        Eigen::MatrixXd M = Gj.eval(x, ypad);
        M = 0.5 * (M + M.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        best = std::max(best, std::abs(es.eigenvalues().maxCoeff()));
      }
  }
  return 1.1 * best;
}

PropMainReport prop_main_check(const PolyMatrix<double>& F,
                               const std::vector<PolyMatrix<double>>& G,
                               const MeasureSpec& nu, double C, double M, int k_max,
                               int grid_density) {
  if (M <= 0) throw std::invalid_argument("M must be positive");
  PropMainReport rep;
  rep.M = M;
  for (int k = 0; k <= k_max; ++k) {
    PolyMatrix<double> R = F;
    for (const auto& Gj : G) {
      auto mult = multiplier_power(Gj, M, k, F.size());
      R -= integrate_y(mult, nu);
    }
    auto grid = grid_pd_check(R, C, grid_density, {}, std::nullopt);
    rep.table.push_back({k, grid.min_eig});
    if (rep.k_bar < 0 && grid.min_eig > 0) rep.k_bar = k;
  }
  return rep;
}

}  // namespace pmi
