#pragma once

// Scenario descriptions: everything one verification run needs -- a chart, a
// Poisson bivector or symplectic form, an anchored frame with structure
// functions, a connection, momentum components with their designated
// sections, plus optional level-set seeds, extension pairs and flat-section
// candidates, and the sampling/tolerance knobs.  Scenarios are built from
// JSON files (load_scenario_file) or programmatically (builtins.hpp); the
// runner consumes them.
//
// Loader errors always carry the JSON field path, e.g.
//   "algebroid.anchor[2][1]: unknown identifier 'w' at offset 0"

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "algebroid.hpp"
#include "expr.hpp"
#include "geometry.hpp"
#include "hamiltonian.hpp"

namespace momsec {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An extension pair (f, g) of orbit-space functions, with an optional second
// extension g_alt agreeing with g on the level set.
struct ExtensionSpec {
  std::string name;
  Expr f, g;
  std::optional<Expr> g_alt;
};

struct SamplingSpec {
  int count = 100;
  double box_lo = -1.5;
  double box_hi = 1.5;
  std::uint64_t seed = 20260814;
  std::vector<std::vector<double>> exclude;  // declared singular loci
  double exclusion_radius = 1e-3;
};

struct Tolerances {
  double on_level = 1e-10;  // Newton convergence onto the level set
  double subspace = 1e-8;   // rank cuts, membership and invariance residuals
  double residual = 1e-9;   // structure validation and condition checks
};

struct Scenario {
  std::string name;
  Chart chart;
  PoissonChart poisson;  // derived as -omega^{-1} for symplectic scenarios
  std::optional<SymplecticChart> symplectic;
  MomentumSection ms;
  std::vector<std::vector<double>> seeds;  // explicit level-set seeds
  std::vector<ExtensionSpec> extensions;
  std::vector<ASection> flat_candidates;
  SamplingSpec sampling;
  Tolerances tol;

  const Algebroid& alg() const { return ms.alg(); }
  bool is_symplectic() const { return symplectic.has_value(); }
};

// ---------------------------------------------------------------------------
// Stock constructions shared by the loader's algebroid shortcuts and the
// builtin catalog.

inline double levi_civita3(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0.0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
      (i == 2 && j == 0 && k == 1))
    return 1.0;
  return -1.0;
}

// Diagonal rotation action lifted to a 6-dim phase chart (q1..q3, p1..p3):
// rho(e_a) = -(e_a x q, e_a x p), [e_a, e_b] = eps_{abc} e_c.  The anchor is
// minus the Hamiltonian field of the angular momentum component (q x p)_a
// for the canonical bivector.
inline Algebroid rotation_action_algebroid(const Chart& chart) {
  if (chart.dim() != 6)
    throw ScenarioError(
        "action algebroid: chart must have 6 coordinates (q1..q3, p1..p3)");
  const int n = 6, r = 3;
  std::vector<Expr> anchor(static_cast<std::size_t>(n) * r,
                           Expr::constant(0.0));
  for (int a = 0; a < r; ++a)
    for (int i = 0; i < 3; ++i) {
      Expr qc = Expr::constant(0.0), pc = Expr::constant(0.0);
      for (int k = 0; k < 3; ++k) {
        double e = levi_civita3(i, a, k);
        if (e != 0.0) {
          qc = qc + Expr::constant(e) * Expr::coord(k);
          pc = pc + Expr::constant(e) * Expr::coord(3 + k);
        }
      }
      anchor[i * r + a] = simplify(neg(qc));
      anchor[(3 + i) * r + a] = simplify(neg(pc));
    }
  std::vector<Expr> structure(static_cast<std::size_t>(r) * r * r,
                              Expr::constant(0.0));
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        structure[(a * r + b) * r + c] = Expr::constant(levi_civita3(a, b, c));
  return Algebroid(chart, r, std::move(anchor), std::move(structure));
}

// J_a = (q x p)_a on the same 6-dim chart layout.
inline std::vector<Expr> angular_momentum_components(const Chart& chart) {
  if (chart.dim() != 6)
    throw ScenarioError(
        "angular momentum: chart must have 6 coordinates (q1..q3, p1..p3)");
  std::vector<Expr> J;
  for (int a = 0; a < 3; ++a) {
    Expr e = Expr::constant(0.0);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        double s = levi_civita3(a, i, k);
        if (s != 0.0)
          e = e + Expr::constant(s) * Expr::coord(i) * Expr::coord(3 + k);
      }
    J.push_back(simplify(e));
  }
  return J;
}

// ---------------------------------------------------------------------------
// JSON loader.

namespace detail {

using sjson = nlohmann::ordered_json;

[[noreturn]] inline void sfail(const std::string& path, const std::string& m) {
  throw ScenarioError(path + ": " + m);
}

inline const sjson* sfind(const sjson& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline const sjson& srequire(const sjson& j, const char* key,
                             const std::string& path) {
  const sjson* p = sfind(j, key);
  if (!p) sfail(path, std::string("missing required field '") + key + "'");
  return *p;
}

inline void expect_object(const sjson& j, const std::string& path) {
  if (!j.is_object()) sfail(path, "expected an object");
}

inline void expect_array(const sjson& j, const std::string& path) {
  if (!j.is_array()) sfail(path, "expected an array");
}

inline void allow_keys(const sjson& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) sfail(path, "unknown field '" + it.key() + "'");
  }
}

inline std::string get_string(const sjson& j, const std::string& path) {
  if (!j.is_string()) sfail(path, "expected a string");
  return j.get<std::string>();
}

inline double get_number(const sjson& j, const std::string& path) {
  if (!j.is_number()) sfail(path, "expected a number");
  return j.get<double>();
}

inline int get_int(const sjson& j, const std::string& path) {
  if (!j.is_number_integer()) sfail(path, "expected an integer");
  return j.get<int>();
}

inline Expr get_expr(const sjson& j, const Chart& chart,
                     const std::string& path) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (!j.is_string()) sfail(path, "expected an expression string or a number");
  try {
    return parse(j.get<std::string>(), chart);
  } catch (const ParseError& e) {
    sfail(path, e.what());
  }
}

// rows x cols expression matrix given as an array of rows
inline std::vector<Expr> get_expr_matrix(const sjson& j, const Chart& chart,
                                         int rows, int cols,
                                         const std::string& path) {
  expect_array(j, path);
  if (static_cast<int>(j.size()) != rows)
    sfail(path, "expected " + std::to_string(rows) + " rows, got " +
                    std::to_string(j.size()));
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    std::string rpath = path + "[" + std::to_string(i) + "]";
    expect_array(j[i], rpath);
    if (static_cast<int>(j[i].size()) != cols)
      sfail(rpath, "expected " + std::to_string(cols) + " entries, got " +
                       std::to_string(j[i].size()));
    for (int k = 0; k < cols; ++k)
      out.push_back(
          get_expr(j[i][k], chart, rpath + "[" + std::to_string(k) + "]"));
  }
  return out;
}

inline std::vector<Expr> get_expr_list(const sjson& j, const Chart& chart,
                                       int count, const std::string& path) {
  expect_array(j, path);
  if (static_cast<int>(j.size()) != count)
    sfail(path, "expected " + std::to_string(count) + " entries, got " +
                    std::to_string(j.size()));
  std::vector<Expr> out;
  for (int k = 0; k < count; ++k)
    out.push_back(get_expr(j[k], chart, path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::vector<double> get_point(const sjson& j, int dim,
                                     const std::string& path) {
  expect_array(j, path);
  if (static_cast<int>(j.size()) != dim)
    sfail(path, "expected " + std::to_string(dim) + " coordinates, got " +
                    std::to_string(j.size()));
  std::vector<double> out;
  for (int k = 0; k < dim; ++k)
    out.push_back(get_number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline Chart load_chart(const sjson& j) {
  expect_object(j, "chart");
  allow_keys(j, "chart", {"coords", "dim"});
  const sjson& c = srequire(j, "coords", "chart");
  expect_array(c, "chart.coords");
  if (c.empty()) sfail("chart.coords", "expected at least one coordinate");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < c.size(); ++i)
    names.push_back(
        get_string(c[i], "chart.coords[" + std::to_string(i) + "]"));
  Chart chart;
  try {
    chart = Chart(std::move(names));
  } catch (const std::invalid_argument& e) {
    sfail("chart.coords", e.what());
  }
  if (const sjson* d = sfind(j, "dim")) {
    int dim = get_int(*d, "chart.dim");
    if (dim != chart.dim())
      sfail("chart.dim", "declared dimension " + std::to_string(dim) +
                             " != " + std::to_string(chart.dim()) +
                             " coordinates");
  }
  return chart;
}

struct LoadedStructure {
  PoissonChart poisson;
  std::optional<SymplecticChart> symplectic;
};

inline LoadedStructure load_structure(const sjson& j, const Chart& chart) {
  expect_object(j, "structure");
  allow_keys(j, "structure", {"poisson", "symplectic"});
  const sjson* po = sfind(j, "poisson");
  const sjson* sy = sfind(j, "symplectic");
  if ((po != nullptr) == (sy != nullptr))
    sfail("structure", "expected exactly one of 'poisson' or 'symplectic'");
  const int n = chart.dim();
  if (po) {
    expect_object(*po, "structure.poisson");
    allow_keys(*po, "structure.poisson", {"pi"});
    std::vector<Expr> pi =
        get_expr_matrix(srequire(*po, "pi", "structure.poisson"), chart, n, n,
                        "structure.poisson.pi");
    return {PoissonChart(chart, std::move(pi)), std::nullopt};
  }
  expect_object(*sy, "structure.symplectic");
  allow_keys(*sy, "structure.symplectic", {"omega"});
  std::vector<Expr> w =
      get_expr_matrix(srequire(*sy, "omega", "structure.symplectic"), chart,
                      n, n, "structure.symplectic.omega");
  SymplecticChart S(chart, std::move(w));
  PoissonChart P = poisson_from_symplectic(S);
  return {std::move(P), std::move(S)};
}

inline Algebroid load_algebroid(const sjson& j, const Chart& chart,
                                const PoissonChart& poisson) {
  expect_object(j, "algebroid");
  if (const sjson* b = sfind(j, "builtin")) {
    allow_keys(j, "algebroid", {"builtin"});
    std::string kind = get_string(*b, "algebroid.builtin");
    if (kind == "cotangent") return cotangent_algebroid(poisson);
    if (kind == "action") {
      try {
        return rotation_action_algebroid(chart);
      } catch (const ScenarioError& e) {
        sfail("algebroid.builtin", e.what());
      }
    }
    sfail("algebroid.builtin",
          "unknown builtin '" + kind + "' (expected 'cotangent' or 'action')");
  }
  allow_keys(j, "algebroid", {"rank", "anchor", "structure_functions"});
  int rank = get_int(srequire(j, "rank", "algebroid"), "algebroid.rank");
  if (rank < 1) sfail("algebroid.rank", "rank must be positive");
  const int n = chart.dim();
  std::vector<Expr> anchor =
      get_expr_matrix(srequire(j, "anchor", "algebroid"), chart, n, rank,
                      "algebroid.anchor");
  // structure_functions[a][b][c] = C^c_{ab}
  const sjson& sf = srequire(j, "structure_functions", "algebroid");
  expect_array(sf, "algebroid.structure_functions");
  if (static_cast<int>(sf.size()) != rank)
    sfail("algebroid.structure_functions",
          "expected " + std::to_string(rank) + " outer entries, got " +
              std::to_string(sf.size()));
  std::vector<Expr> structure;
  structure.reserve(static_cast<std::size_t>(rank) * rank * rank);
  for (int a = 0; a < rank; ++a) {
    std::vector<Expr> block = get_expr_matrix(
        sf[a], chart, rank, rank,
        "algebroid.structure_functions[" + std::to_string(a) + "]");
    for (auto& e : block) structure.push_back(std::move(e));
  }
  return Algebroid(chart, rank, std::move(anchor), std::move(structure));
}

inline Connection load_connection(const sjson* j, Algebroid alg) {
  if (!j) return Connection::flat(std::move(alg));
  expect_object(*j, "connection");
  allow_keys(*j, "connection", {"gamma"});
  const sjson& g = srequire(*j, "gamma", "connection");
  expect_array(g, "connection.gamma");
  const int n = alg.dim(), r = alg.rank;
  if (static_cast<int>(g.size()) != n)
    sfail("connection.gamma", "expected " + std::to_string(n) +
                                  " outer entries, got " +
                                  std::to_string(g.size()));
  // gamma[i][a][b] = Gamma^b_{ia}
  std::vector<Expr> gamma;
  gamma.reserve(static_cast<std::size_t>(n) * r * r);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> block =
        get_expr_matrix(g[i], alg.chart, r, r,
                        "connection.gamma[" + std::to_string(i) + "]");
    for (auto& e : block) gamma.push_back(std::move(e));
  }
  return Connection(std::move(alg), std::move(gamma));
}

inline MomentumSection load_momentum(const sjson& j, Connection conn) {
  expect_object(j, "momentum");
  allow_keys(j, "momentum", {"components", "designated_sections"});
  const int r = conn.alg.rank;
  std::vector<Expr> mu =
      get_expr_list(srequire(j, "components", "momentum"), conn.alg.chart, r,
                    "momentum.components");
  std::vector<ASection> designated;
  if (const sjson* d = sfind(j, "designated_sections")) {
    expect_array(*d, "momentum.designated_sections");
    for (std::size_t k = 0; k < d->size(); ++k) {
      std::string path =
          "momentum.designated_sections[" + std::to_string(k) + "]";
      designated.emplace_back(conn.alg.chart,
                              get_expr_list((*d)[k], conn.alg.chart, r, path));
    }
    if (designated.empty())
      sfail("momentum.designated_sections",
            "expected at least one section (omit the field to use the frame)");
  }
  return MomentumSection(std::move(conn), std::move(mu),
                         std::move(designated));
}

inline void load_sampling(const sjson* j, int dim, SamplingSpec* out) {
  if (!j) return;
  expect_object(*j, "sampling");
  allow_keys(*j, "sampling",
             {"count", "box", "seed", "exclude", "exclusion_radius"});
  if (const sjson* c = sfind(*j, "count")) {
    out->count = get_int(*c, "sampling.count");
    if (out->count < 1) sfail("sampling.count", "expected a positive count");
  }
  if (const sjson* b = sfind(*j, "box")) {
    expect_array(*b, "sampling.box");
    if (b->size() != 2) sfail("sampling.box", "expected [lo, hi]");
    out->box_lo = get_number((*b)[0], "sampling.box[0]");
    out->box_hi = get_number((*b)[1], "sampling.box[1]");
    if (!(out->box_lo < out->box_hi))
      sfail("sampling.box", "expected lo < hi");
  }
  if (const sjson* s = sfind(*j, "seed")) {
    if (!s->is_number_integer() || s->get<long long>() < 0)
      sfail("sampling.seed", "expected a non-negative integer");
    out->seed = s->get<std::uint64_t>();
  }
  if (const sjson* e = sfind(*j, "exclude")) {
    expect_array(*e, "sampling.exclude");
    for (std::size_t k = 0; k < e->size(); ++k)
      out->exclude.push_back(get_point(
          (*e)[k], dim, "sampling.exclude[" + std::to_string(k) + "]"));
  }
  if (const sjson* r = sfind(*j, "exclusion_radius")) {
    out->exclusion_radius = get_number(*r, "sampling.exclusion_radius");
    if (out->exclusion_radius <= 0.0)
      sfail("sampling.exclusion_radius", "expected a positive radius");
  }
}

inline void load_tolerances(const sjson* j, Tolerances* out) {
  if (!j) return;
  expect_object(*j, "tolerances");
  allow_keys(*j, "tolerances", {"on_level", "subspace", "residual"});
  auto grab = [&](const char* key, double* dst) {
    if (const sjson* v = sfind(*j, key)) {
      *dst = get_number(*v, std::string("tolerances.") + key);
      if (*dst <= 0.0)
        sfail(std::string("tolerances.") + key, "expected a positive value");
    }
  };
  grab("on_level", &out->on_level);
  grab("subspace", &out->subspace);
  grab("residual", &out->residual);
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::ordered_json& j) {
  using detail::sfail;
  using detail::sfind;
  using detail::srequire;
  detail::expect_object(j, "scenario");
  detail::allow_keys(j, "scenario",
                     {"schema_version", "name", "chart", "structure",
                      "algebroid", "connection", "momentum", "level_set",
                      "extensions", "flat_sections", "sampling",
                      "tolerances"});
  if (const auto* v = sfind(j, "schema_version")) {
    int ver = detail::get_int(*v, "schema_version");
    if (ver != 1)
      sfail("schema_version",
            "unsupported version " + std::to_string(ver) + " (expected 1)");
  }
  Scenario sc;
  sc.name = detail::get_string(srequire(j, "name", "scenario"), "name");
  if (sc.name.empty()) sfail("name", "expected a non-empty name");
  sc.chart = detail::load_chart(srequire(j, "chart", "scenario"));
  detail::LoadedStructure st =
      detail::load_structure(srequire(j, "structure", "scenario"), sc.chart);
  sc.poisson = std::move(st.poisson);
  sc.symplectic = std::move(st.symplectic);
  Algebroid alg = detail::load_algebroid(srequire(j, "algebroid", "scenario"),
                                         sc.chart, sc.poisson);
  Connection conn = detail::load_connection(sfind(j, "connection"),
                                            std::move(alg));
  sc.ms = detail::load_momentum(srequire(j, "momentum", "scenario"),
                                std::move(conn));
  if (const auto* ls = sfind(j, "level_set")) {
    detail::expect_object(*ls, "level_set");
    detail::allow_keys(*ls, "level_set", {"seeds"});
    if (const auto* seeds = sfind(*ls, "seeds")) {
      detail::expect_array(*seeds, "level_set.seeds");
      for (std::size_t k = 0; k < seeds->size(); ++k)
        sc.seeds.push_back(detail::get_point(
            (*seeds)[k], sc.chart.dim(),
            "level_set.seeds[" + std::to_string(k) + "]"));
    }
  }
  if (const auto* exts = sfind(j, "extensions")) {
    detail::expect_array(*exts, "extensions");
    for (std::size_t k = 0; k < exts->size(); ++k) {
      std::string path = "extensions[" + std::to_string(k) + "]";
      const auto& e = (*exts)[k];
      detail::expect_object(e, path);
      detail::allow_keys(e, path, {"name", "f", "g", "g_alt"});
      ExtensionSpec spec;
      spec.name = sfind(e, "name")
                      ? detail::get_string(*sfind(e, "name"), path + ".name")
                      : "extension_" + std::to_string(k + 1);
      spec.f = detail::get_expr(srequire(e, "f", path), sc.chart, path + ".f");
      spec.g = detail::get_expr(srequire(e, "g", path), sc.chart, path + ".g");
      if (const auto* alt = sfind(e, "g_alt"))
        spec.g_alt = detail::get_expr(*alt, sc.chart, path + ".g_alt");
      sc.extensions.push_back(std::move(spec));
    }
  }
  if (const auto* fs = sfind(j, "flat_sections")) {
    detail::expect_object(*fs, "flat_sections");
    detail::allow_keys(*fs, "flat_sections", {"candidates"});
    const auto& cands = srequire(*fs, "candidates", "flat_sections");
    detail::expect_array(cands, "flat_sections.candidates");
    for (std::size_t k = 0; k < cands.size(); ++k) {
      std::string path = "flat_sections.candidates[" + std::to_string(k) + "]";
      sc.flat_candidates.emplace_back(
          sc.chart,
          detail::get_expr_list(cands[k], sc.chart, sc.alg().rank, path));
    }
  }
  detail::load_sampling(sfind(j, "sampling"), sc.chart.dim(), &sc.sampling);
  detail::load_tolerances(sfind(j, "tolerances"), &sc.tol);
  return sc;
}

inline Scenario scenario_from_text(const std::string& text,
                                   const std::string& origin) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    // dimension mismatches thrown by the geometry constructors
    throw ScenarioError(origin + ": " + e.what());
  }
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_text(buf.str(), path);
}

}  // namespace momsec
