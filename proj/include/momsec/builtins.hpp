#pragma once

// Builtin scenario catalog.  Every builtin is regenerated from its parameters
// on each request -- nothing is cached or read from disk -- so two runs with
// the same name and parameters always verify the same object.
//
// Request syntax: "name" or "name:key=value[,key=value...]", e.g.
// "r2n1_cotangent:n=2".

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scenario.hpp"

namespace momsec {

struct BuiltinInfo {
  std::string name;
  std::string params;  // "" when the builtin takes none
  std::string summary;
};

inline const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog = {
      {"r2n1_cotangent", "n=1..4",
       "cotangent algebroid of a degenerate constant bivector on R^(2n+1); "
       "momentum components are exact, bracket compatibility fails by "
       "design"},
      {"so3_cotangent_lift", "",
       "angular momentum of the lifted rotation action on T*R^3 with the "
       "canonical symplectic form; every condition holds"},
      {"symplectic_r2n", "n=1..4",
       "abelian translation algebroid on canonical R^2n; every condition "
       "holds"},
      {"flat_sections_demo", "",
       "flat-section classification for the trivial connection over the "
       "rotation algebroid"},
      {"broken_momentum", "",
       "anchor orientation flipped against the momentum component; exactly "
       "the momentum condition fails"},
      {"broken_pi_parallel", "",
       "connection coefficients arranged so exactly bivector parallelism "
       "fails"},
      {"broken_bracket_compat", "",
       "constant offset on one momentum component with a single designated "
       "section; exactly bracket compatibility fails"},
      {"broken_compatibility", "",
       "non-constant designated section against a flat connection; exactly "
       "the compatibility condition fails"},
      {"broken_jacobi", "",
       "bivector violating the Jacobi identity; rejected at structure "
       "validation before any condition runs"},
  };
  return catalog;
}

inline bool is_builtin_name(const std::string& name) {
  for (const auto& b : builtin_catalog())
    if (b.name == name) return true;
  return false;
}

namespace detail {

inline Expr bK(double v) { return Expr::constant(v); }
inline Expr bX(int i) { return Expr::coord(i); }

// q1..qn, p1..pn
inline Chart phase_chart(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  return Chart(std::move(names));
}

// canonical bivector on the first 2*pairs coordinates, zero elsewhere
inline PoissonChart canonical_bivector(const Chart& chart, int pairs) {
  const int dim = chart.dim();
  std::vector<Expr> pi(static_cast<std::size_t>(dim) * dim, bK(0.0));
  for (int i = 0; i < pairs; ++i) {
    pi[i * dim + (pairs + i)] = bK(1.0);
    pi[(pairs + i) * dim + i] = bK(-1.0);
  }
  return PoissonChart(chart, std::move(pi));
}

inline Expr sum_of_squares(int offset, int count) {
  Expr e = bK(0.0);
  for (int i = 0; i < count; ++i) e = e + bX(offset + i) * bX(offset + i);
  return simplify(e);
}

// parse "name:k=v,k=v" into (name, params)
inline std::map<std::string, std::string> split_builtin_request(
    const std::string& request, std::string* name) {
  std::string::size_type colon = request.find(':');
  *name = request.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon == std::string::npos) return params;
  std::string rest = request.substr(colon + 1);
  std::string::size_type pos = 0;
  while (pos <= rest.size()) {
    std::string::size_type comma = rest.find(',', pos);
    std::string item = rest.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::string::size_type eq = item.find('=');
    if (item.empty() || eq == std::string::npos || eq == 0)
      throw ScenarioError("builtin '" + *name +
                          "': malformed parameter '" + item +
                          "' (expected key=value)");
    params[item.substr(0, eq)] = item.substr(eq + 1);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return params;
}

inline int take_int_param(std::map<std::string, std::string>* params,
                          const std::string& builtin, const std::string& key,
                          int def, int lo, int hi) {
  auto it = params->find(key);
  if (it == params->end()) return def;
  int v = 0;
  try {
    std::size_t used = 0;
    v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ScenarioError("builtin '" + builtin + "': parameter " + key + "='" +
                        it->second + "' is not an integer");
  }
  if (v < lo || v > hi)
    throw ScenarioError("builtin '" + builtin + "': parameter " + key + "=" +
                        std::to_string(v) + " outside [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
  params->erase(it);
  return v;
}

inline void reject_leftover_params(
    const std::map<std::string, std::string>& params,
    const std::string& builtin) {
  if (!params.empty())
    throw ScenarioError("builtin '" + builtin + "': unknown parameter '" +
                        params.begin()->first + "'");
}

// --- individual builders ---------------------------------------------------

// Degenerate constant bivector on (q1..qn, p1..pn, y) with its cotangent
// algebroid; mu_a = -x_a on the symplectic block, 0 on the y generator.  The
// momentum, parallelism and compatibility conditions hold exactly while the
// bracket conditions miss by the factor-two mismatch between the algebroid
// differential of a one-form and the bivector pairing of exact covectors.
inline Scenario build_r2n1(int n) {
  Scenario sc;
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  names.push_back("y");
  sc.chart = Chart(std::move(names));
  sc.poisson = canonical_bivector(sc.chart, n);
  Algebroid alg = cotangent_algebroid(sc.poisson);
  std::vector<Expr> mu;
  for (int a = 0; a < 2 * n; ++a) mu.push_back(simplify(neg(bX(a))));
  mu.push_back(bK(0.0));
  sc.ms = MomentumSection(Connection::flat(std::move(alg)), std::move(mu));
  Expr y = bX(2 * n);
  ExtensionSpec ext;
  ext.name = "level_coordinate";
  ext.f = y;
  ext.g = simplify(y * y);
  ext.g_alt = simplify(y * y + y * sum_of_squares(0, 2 * n));
  sc.extensions.push_back(std::move(ext));
  return sc;
}

// Angular momentum of the lifted rotation action, stated against the
// canonical symplectic form so both the form-side and bivector-side checks
// run.  Everything holds; the origin is excluded as the singular locus of
// the zero level set.
inline Scenario build_so3_cotangent_lift() {
  Scenario sc;
  sc.chart = phase_chart(3);
  sc.symplectic = SymplecticChart::canonical(sc.chart);
  sc.poisson = poisson_from_symplectic(*sc.symplectic);
  Algebroid alg = rotation_action_algebroid(sc.chart);
  sc.ms = MomentumSection(Connection::flat(std::move(alg)),
                          angular_momentum_components(sc.chart));
  Expr q2 = sum_of_squares(0, 3), p2 = sum_of_squares(3, 3);
  Expr qp = simplify(bX(0) * bX(3) + bX(1) * bX(4) + bX(2) * bX(5));
  std::vector<Expr> J = angular_momentum_components(sc.chart);
  Expr j2 = simplify(J[0] * J[0] + J[1] * J[1] + J[2] * J[2]);
  ExtensionSpec e1;
  e1.name = "q_norm_p_norm";
  e1.f = q2;
  e1.g = p2;
  e1.g_alt = simplify(p2 + j2);
  sc.extensions.push_back(std::move(e1));
  sc.extensions.push_back({"q_norm_qp", q2, qp, std::nullopt});
  sc.extensions.push_back({"p_norm_qp", p2, qp, std::nullopt});
  sc.seeds.push_back({1.0, 0.0, 0.0, 0.9, 0.01, 0.0});
  sc.sampling.exclude.push_back(std::vector<double>(6, 0.0));
  return sc;
}

// Abelian algebroid rho(e_a) = -d/dq_a with mu_a = p_a on canonical R^2n;
// every condition holds and the level set {p = 0} is regular.
inline Scenario build_symplectic_r2n(int n) {
  Scenario sc;
  sc.chart = phase_chart(n);
  sc.symplectic = SymplecticChart::canonical(sc.chart);
  sc.poisson = poisson_from_symplectic(*sc.symplectic);
  const int dim = 2 * n, r = n;
  std::vector<Expr> anchor(static_cast<std::size_t>(dim) * r, bK(0.0));
  for (int a = 0; a < r; ++a) anchor[a * r + a] = bK(-1.0);
  std::vector<Expr> structure(static_cast<std::size_t>(r) * r * r, bK(0.0));
  Algebroid alg(sc.chart, r, std::move(anchor), std::move(structure));
  std::vector<Expr> mu;
  for (int a = 0; a < r; ++a) mu.push_back(bX(n + a));
  sc.ms = MomentumSection(Connection::flat(std::move(alg)), std::move(mu));
  ExtensionSpec ext;
  ext.name = "vertical";
  ext.f = bX(n);
  ext.g = simplify(bX(n) * bX(n));
  sc.extensions.push_back(std::move(ext));
  return sc;
}

// Trivial connection over the rotation algebroid: constant sections are
// flat, coordinate-scaled ones are not, and flat pairs close under the
// bracket.
inline Scenario build_flat_sections_demo() {
  Scenario sc;
  sc.chart = phase_chart(3);
  sc.poisson = canonical_bivector(sc.chart, 3);
  Algebroid alg = rotation_action_algebroid(sc.chart);
  sc.ms = MomentumSection(Connection::flat(std::move(alg)),
                          angular_momentum_components(sc.chart));
  sc.flat_candidates.emplace_back(
      sc.chart, std::vector<Expr>{bK(1.0), bK(0.0), bK(0.0)});
  sc.flat_candidates.emplace_back(
      sc.chart, std::vector<Expr>{bX(0), bK(0.0), bK(0.0)});
  sc.flat_candidates.emplace_back(
      sc.chart, std::vector<Expr>{bK(0.0), bK(1.0), bK(-1.0)});
  sc.sampling.count = 50;
  sc.sampling.exclude.push_back(std::vector<double>(6, 0.0));
  return sc;
}

// rho(e_1) = +d/dq against mu_1 = p on canonical (q, p): the anchor is the
// negative of what the bivector produces from d mu, so the momentum
// condition misses by exactly 2 while everything else stays exact.
inline Scenario build_broken_momentum() {
  Scenario sc;
  sc.chart = Chart({"q", "p"});
  sc.poisson = canonical_bivector(sc.chart, 1);
  Algebroid alg(sc.chart, 1, {bK(1.0), bK(0.0)}, {bK(0.0)});
  sc.ms = MomentumSection(Connection::flat(std::move(alg)), {bX(1)});
  return sc;
}

// Rank-2 frame with one zero generator and connection coefficients
// Gamma^1_{q2} = 1, Gamma^2_{q2} = -p: the Gamma terms cancel inside the
// compatibility pairing but not inside the bivector derivation, so exactly
// pi_parallel fails (by 1).  The level set p = 0, 1 = 0 is empty, which the
// report records as a skipped reduction stage.
inline Scenario build_broken_pi_parallel() {
  Scenario sc;
  sc.chart = Chart({"q", "p"});
  sc.poisson = canonical_bivector(sc.chart, 1);
  const int r = 2;
  std::vector<Expr> anchor(4, bK(0.0));
  anchor[0 * r + 0] = bK(-1.0);  // rho(e_1) = -d/dq
  std::vector<Expr> structure(8, bK(0.0));
  Algebroid alg(sc.chart, r, std::move(anchor), std::move(structure));
  std::vector<Expr> gamma(static_cast<std::size_t>(2) * r * r, bK(0.0));
  gamma[(0 * r + 1) * r + 0] = bK(1.0);          // Gamma^1_{q2} = 1
  gamma[(0 * r + 1) * r + 1] = simplify(neg(bX(1)));  // Gamma^2_{q2} = -p
  Connection conn(std::move(alg), std::move(gamma));
  sc.ms = MomentumSection(std::move(conn), {bX(1), bK(1.0)});
  return sc;
}

// Constant offset on the first angular-momentum component.  Differentials
// are unchanged, so the momentum and parallelism conditions still hold, and
// restricting the designated set to e_1 keeps the section-dependent checks
// vacuous; the structure-function term C^c_{ab} mu_c shifts bracket
// compatibility by exactly 1 on the (e_2, e_3) pair.
inline Scenario build_broken_bracket_compat() {
  Scenario sc;
  sc.chart = phase_chart(3);
  sc.poisson = canonical_bivector(sc.chart, 3);
  Algebroid alg = rotation_action_algebroid(sc.chart);
  std::vector<Expr> mu = angular_momentum_components(sc.chart);
  mu[0] = simplify(mu[0] + bK(1.0));
  std::vector<ASection> designated{ASection::frame(alg, 0)};
  sc.ms = MomentumSection(Connection::flat(std::move(alg)), std::move(mu),
                          std::move(designated));
  return sc;
}

// Designated section q * e_1 against a flat connection: the covariant
// pairing misses the differential of the pairing by the derivative of the
// section coefficient, so exactly the compatibility condition fails (by
// |p| at the sample point).
inline Scenario build_broken_compatibility() {
  Scenario sc;
  sc.chart = Chart({"q", "p"});
  sc.poisson = canonical_bivector(sc.chart, 1);
  Algebroid alg(sc.chart, 1, {bK(-1.0), bK(0.0)}, {bK(0.0)});
  std::vector<ASection> designated;
  designated.emplace_back(sc.chart, std::vector<Expr>{bX(0)});
  sc.ms = MomentumSection(Connection::flat(std::move(alg)), {bX(1)},
                          std::move(designated));
  return sc;
}

// Pi^{12} = Pi^{34} = q1 is antisymmetric but not Poisson: the Schouten
// component on (2,3,4) equals q1.  Structure validation must reject it and
// every later stage must be reported as skipped.
inline Scenario build_broken_jacobi() {
  Scenario sc;
  sc.chart = Chart({"q1", "q2", "q3", "q4"});
  std::vector<Expr> pi(16, bK(0.0));
  pi[0 * 4 + 1] = bX(0);
  pi[1 * 4 + 0] = simplify(neg(bX(0)));
  pi[2 * 4 + 3] = bX(0);
  pi[3 * 4 + 2] = simplify(neg(bX(0)));
  sc.poisson = PoissonChart(sc.chart, std::move(pi));
  Algebroid alg(sc.chart, 1, std::vector<Expr>(4, bK(0.0)), {bK(0.0)});
  sc.ms = MomentumSection(Connection::flat(std::move(alg)), {bX(0)});
  return sc;
}

}  // namespace detail

inline Scenario make_builtin(const std::string& request) {
  std::string name;
  std::map<std::string, std::string> params =
      detail::split_builtin_request(request, &name);
  Scenario sc;
  if (name == "r2n1_cotangent") {
    int n = detail::take_int_param(&params, name, "n", 1, 1, 4);
    sc = detail::build_r2n1(n);
  } else if (name == "so3_cotangent_lift") {
    sc = detail::build_so3_cotangent_lift();
  } else if (name == "symplectic_r2n") {
    int n = detail::take_int_param(&params, name, "n", 1, 1, 4);
    sc = detail::build_symplectic_r2n(n);
  } else if (name == "flat_sections_demo") {
    sc = detail::build_flat_sections_demo();
  } else if (name == "broken_momentum") {
    sc = detail::build_broken_momentum();
  } else if (name == "broken_pi_parallel") {
    sc = detail::build_broken_pi_parallel();
  } else if (name == "broken_bracket_compat") {
    sc = detail::build_broken_bracket_compat();
  } else if (name == "broken_compatibility") {
    sc = detail::build_broken_compatibility();
  } else if (name == "broken_jacobi") {
    sc = detail::build_broken_jacobi();
  } else {
    throw ScenarioError("unknown builtin '" + name + "'");
  }
  detail::reject_leftover_params(params, name);
  sc.name = request;
  return sc;
}

}  // namespace momsec
