#pragma once

// Lie algebroids in a trivialized frame over a coordinate chart: anchor and
// structure functions, section brackets, the algebroid differential on
// low-degree forms, linear connections with their duals, and the derivation
// operator a section induces on tensor fields through a connection.
//
// Index conventions:
//   rho^i_a           anchor of frame section e_a, vector index i
//   C^c_{ab}          [e_a, e_b] = C^c_{ab} e_c, antisymmetric in (a, b)
//   Gamma^b_{ia}      nabla_{d_i} e_a = Gamma^b_{ia} e_b
//   bracket:  [al, be]^c = al^a be^b C^c_{ab} + rho(al)(be^c) - rho(be)(al^c)
//   dual:     (nabla_i th)_a = d_i th_a - Gamma^b_{ia} th_b

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"
#include "geometry.hpp"

namespace momsec {

struct ASection;

struct Algebroid {
  Chart chart;
  int rank = 0;
  std::vector<Expr> anchor;     // n x r row-major: anchor[i * r + a]
  std::vector<Expr> structure;  // structure[(a * r + b) * r + c] = C^c_{ab}

  Algebroid() = default;
  Algebroid(Chart ch, int r, std::vector<Expr> rho, std::vector<Expr> c)
      : chart(std::move(ch)), rank(r), anchor(std::move(rho)),
        structure(std::move(c)) {
    if (rank <= 0) throw std::invalid_argument("algebroid: rank must be positive");
    const int n = chart.dim();
    if (static_cast<int>(anchor.size()) != n * rank)
      throw std::invalid_argument("algebroid: anchor must be dim x rank (" +
                                  std::to_string(n) + "x" + std::to_string(rank) +
                                  ")");
    if (static_cast<int>(structure.size()) != rank * rank * rank)
      throw std::invalid_argument("algebroid: structure must be rank^3");
  }

  int dim() const { return chart.dim(); }

  const Expr& rho(int i, int a) const { return anchor[i * rank + a]; }
  const Expr& c(int a, int b, int cc) const {
    return structure[(a * rank + b) * rank + cc];
  }

  // max |C^c_{ab} + C^c_{ba}| at x
  double structure_antisymmetry_residual(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int a = 0; a < rank; ++a)
      for (int b = a; b < rank; ++b)
        for (int cc = 0; cc < rank; ++cc)
          worst = std::max(worst, std::abs(eval(c(a, b, cc), x) +
                                           eval(c(b, a, cc), x)));
    return worst;
  }
};

struct ASection {
  Chart chart;
  std::vector<Expr> comps;  // rank entries

  ASection() = default;
  ASection(Chart ch, std::vector<Expr> v)
      : chart(std::move(ch)), comps(std::move(v)) {}

  static ASection frame(const Algebroid& A, int a) {
    std::vector<Expr> v(A.rank, Expr::constant(0.0));
    v[a] = Expr::constant(1.0);
    return ASection(A.chart, std::move(v));
  }

  static ASection zero(const Algebroid& A) {
    return ASection(A.chart, std::vector<Expr>(A.rank, Expr::constant(0.0)));
  }
};

namespace detail {
inline void require_section(const Algebroid& A, const ASection& s,
                            const char* op) {
  if (s.chart != A.chart)
    throw std::invalid_argument(std::string(op) + ": chart mismatch");
  if (static_cast<int>(s.comps.size()) != A.rank)
    throw std::invalid_argument(std::string(op) +
                                ": section components != rank");
}
}  // namespace detail

// rho(alpha) as a vector field.
inline VectorField anchor_of(const Algebroid& A, const ASection& alpha) {
  detail::require_section(A, alpha, "anchor_of");
  const int n = A.dim();
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int a = 0; a < A.rank; ++a)
      terms.push_back(A.rho(i, a) * alpha.comps[a]);
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return VectorField(A.chart, std::move(comps));
}

// Numeric anchor matrix at a point (columns are the frame images).
inline Matrix anchor_matrix(const Algebroid& A, const std::vector<double>& x) {
  Matrix m(A.dim(), A.rank);
  for (int i = 0; i < A.dim(); ++i)
    for (int a = 0; a < A.rank; ++a) m.at(i, a) = eval(A.rho(i, a), x);
  return m;
}

// Section bracket extending the frame structure functions by Leibniz:
// [al, be]^c = al^a be^b C^c_{ab} + rho(al)(be^c) - rho(be)(al^c)
inline ASection bracket(const Algebroid& A, const ASection& al,
                        const ASection& be) {
  detail::require_section(A, al, "bracket");
  detail::require_section(A, be, "bracket");
  VectorField ra = anchor_of(A, al), rb = anchor_of(A, be);
  std::vector<Expr> comps;
  comps.reserve(A.rank);
  for (int cc = 0; cc < A.rank; ++cc) {
    std::vector<Expr> terms;
    for (int a = 0; a < A.rank; ++a)
      for (int b = 0; b < A.rank; ++b) {
        const Expr& cab = A.c(a, b, cc);
        if (!cab.is_constant(0.0))
          terms.push_back(al.comps[a] * be.comps[b] * cab);
      }
    terms.push_back(derive(ra, ScalarField(A.chart, be.comps[cc])).f);
    terms.push_back(neg(derive(rb, ScalarField(A.chart, al.comps[cc])).f));
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return ASection(A.chart, std::move(comps));
}

// ---------------------------------------------------------------------------
// Algebroid forms of degree 0..3, stored on strictly increasing index tuples
// in lexicographic order.

namespace detail {

inline std::vector<std::vector<int>> combinations(int r, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i <= r - (k - static_cast<int>(cur.size())); ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

inline int comb_rank(const std::vector<int>& tuple, int r) {
  // lexicographic rank of a strictly increasing tuple
  int k = static_cast<int>(tuple.size());
  auto choose = [](int n, int m) {
    if (m < 0 || m > n) return 0ll;
    long long res = 1;
    for (int i = 0; i < m; ++i) res = res * (n - i) / (i + 1);
    return res;
  };
  long long idx = 0;
  int prev = -1;
  for (int pos = 0; pos < k; ++pos) {
    for (int v = prev + 1; v < tuple[pos]; ++v)
      idx += choose(r - v - 1, k - pos - 1);
    prev = tuple[pos];
  }
  return static_cast<int>(idx);
}

// Sorts a tuple of frame indices; returns permutation sign, or 0 on repeats.
inline int sort_sign(std::vector<int>& t) {
  int sign = 1;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (t[i] == t[j]) return 0;
      if (t[i] > t[j]) {
        std::swap(t[i], t[j]);
        sign = -sign;
      }
    }
  return sign;
}

}  // namespace detail

struct AForm {
  Chart chart;
  int rank = 0;
  int degree = 0;
  std::vector<Expr> comps;  // C(rank, degree) entries, lex order

  AForm() = default;
  AForm(Chart ch, int r, int deg, std::vector<Expr> c)
      : chart(std::move(ch)), rank(r), degree(deg), comps(std::move(c)) {
    if (degree < 0 || degree > 3)
      throw std::invalid_argument("algebroid form: degree must be 0..3");
    if (static_cast<int>(comps.size()) !=
        static_cast<int>(detail::combinations(rank, degree).size()))
      throw std::invalid_argument("algebroid form: component count mismatch");
  }

  static AForm function(const Algebroid& A, Expr f) {
    return AForm(A.chart, A.rank, 0, {std::move(f)});
  }

  static AForm one_form(const Algebroid& A, std::vector<Expr> comps) {
    return AForm(A.chart, A.rank, 1, std::move(comps));
  }

  // frame covector e^a
  static AForm frame_covector(const Algebroid& A, int a) {
    std::vector<Expr> c(A.rank, Expr::constant(0.0));
    c[a] = Expr::constant(1.0);
    return one_form(A, std::move(c));
  }

  // component on an arbitrary index tuple (antisymmetric lookup)
  Expr component(std::vector<int> tuple) const {
    int sign = detail::sort_sign(tuple);
    if (sign == 0) return Expr::constant(0.0);
    const Expr& c = comps[detail::comb_rank(tuple, rank)];
    return sign > 0 ? c : simplify(neg(c));
  }
};

// theta(alpha_1, ..., alpha_k) as a scalar field (multilinear antisymmetric
// expansion over the stored components).
inline ScalarField apply(const Algebroid& A, const AForm& th,
                         const std::vector<ASection>& args) {
  if (static_cast<int>(args.size()) != th.degree)
    throw std::invalid_argument("apply: expected " +
                                std::to_string(th.degree) + " sections");
  for (const auto& s : args) detail::require_section(A, s, "apply");
  if (th.degree == 0) return ScalarField(A.chart, th.comps[0]);
  auto tuples = detail::combinations(th.rank, th.degree);
  std::vector<Expr> terms;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto& tup = tuples[t];
    if (th.comps[t].is_constant(0.0)) continue;
    // determinant of the k x k matrix args[j]^{tup[i]} by permutation
    // expansion (k <= 3)
    const int k = th.degree;
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    std::vector<Expr> det_terms;
    do {
      std::vector<int> p = perm;
      int sign = detail::sort_sign(p);  // parity of perm relative to identity
      std::vector<Expr> factors;
      for (int i = 0; i < k; ++i)
        factors.push_back(args[perm[i]].comps[tup[i]]);
      Expr prod = product_of(std::move(factors));
      det_terms.push_back(sign > 0 ? prod : neg(prod));
    } while (std::next_permutation(perm.begin(), perm.end()));
    terms.push_back(th.comps[t] * sum_of(std::move(det_terms)));
  }
  return ScalarField(A.chart, simplify(sum_of(std::move(terms))));
}

// ---------------------------------------------------------------------------
// The algebroid differential.
//
// (d th)(al_0, ..., al_k) = sum_i (-1)^i rho(al_i) th(..no al_i..)
//                         + sum_{i<j} (-1)^{i+j} th([al_i, al_j], ..rest..)

// Direct evaluation on arbitrary sections; independent of the frame-component
// path below, which makes the two cross-checkable.
inline ScalarField a_differential_apply(const Algebroid& A, const AForm& th,
                                        const std::vector<ASection>& args) {
  const int k = th.degree;
  if (static_cast<int>(args.size()) != k + 1)
    throw std::invalid_argument("a_differential_apply: expected " +
                                std::to_string(k + 1) + " sections");
  std::vector<Expr> terms;
  for (int i = 0; i <= k; ++i) {
    std::vector<ASection> rest;
    for (int j = 0; j <= k; ++j)
      if (j != i) rest.push_back(args[j]);
    Expr t = derive(anchor_of(A, args[i]), apply(A, th, rest)).f;
    terms.push_back(i % 2 == 0 ? t : neg(t));
  }
  for (int i = 0; i <= k; ++i)
    for (int j = i + 1; j <= k; ++j) {
      std::vector<ASection> rest;
      rest.push_back(bracket(A, args[i], args[j]));
      for (int l = 0; l <= k; ++l)
        if (l != i && l != j) rest.push_back(args[l]);
      Expr t = apply(A, th, rest).f;
      terms.push_back((i + j) % 2 == 1 ? neg(t) : t);
    }
  return ScalarField(A.chart, simplify(sum_of(std::move(terms))));
}

// Frame-component form of the differential.  Degree overflow (input degree 3)
// is an error since degree-4 forms are not represented.
inline AForm a_differential(const Algebroid& A, const AForm& th) {
  if (th.degree >= 3)
    throw std::invalid_argument(
        "a_differential: degree overflow (max stored degree is 3)");
  const int k = th.degree;
  auto tuples = detail::combinations(th.rank, k + 1);
  std::vector<Expr> comps;
  comps.reserve(tuples.size());
  for (const auto& tup : tuples) {
    std::vector<Expr> terms;
    for (int i = 0; i <= k; ++i) {
      std::vector<int> rest;
      for (int j = 0; j <= k; ++j)
        if (j != i) rest.push_back(tup[j]);
      // rho(e_{tup[i]}) applied to th_{rest}
      Expr base = th.component(rest);
      std::vector<Expr> dterms;
      for (int l = 0; l < A.dim(); ++l)
        dterms.push_back(A.rho(l, tup[i]) * diff(base, l));
      Expr t = sum_of(std::move(dterms));
      terms.push_back(i % 2 == 0 ? t : neg(t));
    }
    for (int i = 0; i <= k; ++i)
      for (int j = i + 1; j <= k; ++j) {
        std::vector<int> rest;
        for (int l = 0; l <= k; ++l)
          if (l != i && l != j) rest.push_back(tup[l]);
        std::vector<Expr> bterms;
        for (int cc = 0; cc < A.rank; ++cc) {
          const Expr& cab = A.c(tup[i], tup[j], cc);
          if (cab.is_constant(0.0)) continue;
          std::vector<int> full;
          full.push_back(cc);
          for (int v : rest) full.push_back(v);
          Expr comp = th.component(full);
          if (!comp.is_constant(0.0)) bterms.push_back(cab * comp);
        }
        Expr t = sum_of(std::move(bterms));
        terms.push_back((i + j) % 2 == 1 ? neg(t) : t);
      }
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return AForm(A.chart, th.rank, k + 1, std::move(comps));
}

// ---------------------------------------------------------------------------
// d^2 diagnostics.  d^2 = 0 on functions encodes that the anchor is a
// morphism onto its image bracket; d^2 = 0 on frame covectors encodes the
// Jacobi identity of the structure functions.  Both are reported as symbolic
// component lists so callers can evaluate them at many points cheaply.

struct DSquaredComponents {
  std::vector<Expr> on_functions;   // d(d x_m) components, all m
  std::vector<Expr> on_covectors;   // d(d e^a) components, all a (rank >= 3 only
                                    // has nonempty degree-3 storage)
};

inline DSquaredComponents d_squared_components(const Algebroid& A) {
  DSquaredComponents out;
  for (int m = 0; m < A.dim(); ++m) {
    AForm f = AForm::function(A, Expr::coord(m));
    AForm dd = a_differential(A, a_differential(A, f));
    for (const auto& c : dd.comps) out.on_functions.push_back(c);
  }
  for (int a = 0; a < A.rank; ++a) {
    AForm e = AForm::frame_covector(A, a);
    AForm dd = a_differential(A, a_differential(A, e));
    for (const auto& c : dd.comps) out.on_covectors.push_back(c);
  }
  return out;
}

struct DSquaredResidual {
  double anchor_morphism = 0.0;
  double jacobi = 0.0;
  double max() const { return std::max(anchor_morphism, jacobi); }
};

inline DSquaredResidual d_squared_residual(const Algebroid& A,
                                           const std::vector<double>& x) {
  DSquaredComponents c = d_squared_components(A);
  DSquaredResidual r;
  for (const auto& e : c.on_functions)
    r.anchor_morphism = std::max(r.anchor_morphism, std::abs(eval(e, x)));
  for (const auto& e : c.on_covectors)
    r.jacobi = std::max(r.jacobi, std::abs(eval(e, x)));
  return r;
}

// ---------------------------------------------------------------------------
// Connections.

struct Connection {
  Algebroid alg;
  std::vector<Expr> gamma;  // gamma[(i * r + a) * r + b] = Gamma^b_{ia}

  Connection() = default;
  Connection(Algebroid A, std::vector<Expr> g)
      : alg(std::move(A)), gamma(std::move(g)) {
    const int n = alg.dim(), r = alg.rank;
    if (static_cast<int>(gamma.size()) != n * r * r)
      throw std::invalid_argument("connection: expected dim x rank x rank "
                                  "coefficients");
  }

  static Connection flat(Algebroid A) {
    const int n = A.dim(), r = A.rank;
    return Connection(std::move(A),
                      std::vector<Expr>(static_cast<std::size_t>(n) * r * r,
                                        Expr::constant(0.0)));
  }

  const Expr& coeff(int i, int a, int b) const {
    return gamma[(i * alg.rank + a) * alg.rank + b];
  }
};

// (nabla_{d_i} alpha)^b = d_i alpha^b + Gamma^b_{ia} alpha^a
inline ASection nabla_coord(const Connection& conn, int i,
                            const ASection& alpha) {
  const Algebroid& A = conn.alg;
  detail::require_section(A, alpha, "nabla_coord");
  std::vector<Expr> comps;
  comps.reserve(A.rank);
  for (int b = 0; b < A.rank; ++b) {
    std::vector<Expr> terms{diff(alpha.comps[b], i)};
    for (int a = 0; a < A.rank; ++a)
      terms.push_back(conn.coeff(i, a, b) * alpha.comps[a]);
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return ASection(A.chart, std::move(comps));
}

inline ASection nabla(const Connection& conn, const VectorField& X,
                      const ASection& alpha) {
  const Algebroid& A = conn.alg;
  detail::require_same_chart(A.chart, X.chart, "nabla");
  std::vector<std::vector<Expr>> per_coord;
  for (int i = 0; i < A.dim(); ++i)
    per_coord.push_back(nabla_coord(conn, i, alpha).comps);
  std::vector<Expr> comps;
  for (int b = 0; b < A.rank; ++b) {
    std::vector<Expr> terms;
    for (int i = 0; i < A.dim(); ++i)
      terms.push_back(X.comps[i] * per_coord[i][b]);
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return ASection(A.chart, std::move(comps));
}

// Dual connection on degree-1 forms: (nabla_i th)_a = d_i th_a - Gamma^b_{ia} th_b
inline AForm dual_nabla_coord(const Connection& conn, int i, const AForm& th) {
  const Algebroid& A = conn.alg;
  if (th.degree != 1)
    throw std::invalid_argument("dual_nabla_coord: expected a degree-1 form");
  std::vector<Expr> comps;
  comps.reserve(A.rank);
  for (int a = 0; a < A.rank; ++a) {
    std::vector<Expr> terms{diff(th.comps[a], i)};
    for (int b = 0; b < A.rank; ++b)
      terms.push_back(neg(conn.coeff(i, a, b) * th.comps[b]));
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return AForm::one_form(A, std::move(comps));
}

// ---------------------------------------------------------------------------
// The derivation a section induces on tensor fields through a connection:
//   on vector fields:  D_al X = [rho(al), X] + rho(nabla_X al)
//   on 1-forms:        (D_al xi)(X) = rho(al)(xi(X)) - xi(D_al X)
//   on bivectors:      (D_al Pi)(xi, eta) = rho(al)(Pi(xi, eta))
//                        - Pi(D_al xi, eta) - Pi(xi, D_al eta)

inline VectorField section_derivation(const Connection& conn,
                                      const ASection& alpha,
                                      const VectorField& X) {
  const Algebroid& A = conn.alg;
  detail::require_section(A, alpha, "section_derivation");
  detail::require_same_chart(A.chart, X.chart, "section_derivation");
  VectorField ra = anchor_of(A, alpha);
  VectorField part1 = lie_bracket(ra, X);
  VectorField part2 = anchor_of(A, nabla(conn, X, alpha));
  std::vector<Expr> comps;
  for (int i = 0; i < A.dim(); ++i)
    comps.push_back(simplify(part1.comps[i] + part2.comps[i]));
  return VectorField(A.chart, std::move(comps));
}

inline OneForm section_derivation(const Connection& conn,
                                  const ASection& alpha, const OneForm& xi) {
  const Algebroid& A = conn.alg;
  detail::require_section(A, alpha, "section_derivation");
  detail::require_same_chart(A.chart, xi.chart, "section_derivation");
  const int n = A.dim();
  VectorField ra = anchor_of(A, alpha);
  // (D xi)_j = rho(al)^l d_l xi_j - sum_i xi_i (D_al d_j)^i
  std::vector<Expr> comps;
  comps.reserve(n);
  std::vector<VectorField> dcols;
  for (int j = 0; j < n; ++j) {
    VectorField ej = VectorField::zero(A.chart);
    ej.comps[j] = Expr::constant(1.0);
    dcols.push_back(section_derivation(conn, alpha, ej));
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Expr> terms;
    for (int l = 0; l < n; ++l) terms.push_back(ra.comps[l] * diff(xi.comps[j], l));
    for (int i = 0; i < n; ++i)
      terms.push_back(neg(xi.comps[i] * dcols[j].comps[i]));
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return OneForm(A.chart, std::move(comps));
}

// Component matrix of the derivation applied to the Poisson bivector.
inline std::vector<Expr> bivector_derivation(const Connection& conn,
                                             const PoissonChart& P,
                                             const ASection& alpha) {
  const Algebroid& A = conn.alg;
  detail::require_same_chart(A.chart, P.chart, "bivector_derivation");
  const int n = A.dim();
  VectorField ra = anchor_of(A, alpha);
  std::vector<OneForm> dxi;
  for (int i = 0; i < n; ++i)
    dxi.push_back(
        section_derivation(conn, alpha, OneForm::coordinate(A.chart, i)));
  std::vector<Expr> out(static_cast<std::size_t>(n) * n, Expr::constant(0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      // rho(al)(Pi^{ij})
      for (int l = 0; l < n; ++l)
        terms.push_back(ra.comps[l] * diff(P.at(i, j), l));
      // - Pi(D dx^i, dx^j) - Pi(dx^i, D dx^j)
      for (int k = 0; k < n; ++k) {
        terms.push_back(neg(dxi[i].comps[k] * P.at(k, j)));
        terms.push_back(neg(P.at(i, k) * dxi[j].comps[k]));
      }
      out[i * n + j] = simplify(sum_of(std::move(terms)));
    }
  }
  return out;
}

inline double bivector_derivation_residual(const Connection& conn,
                                           const PoissonChart& P,
                                           const ASection& alpha,
                                           const std::vector<double>& x) {
  auto comps = bivector_derivation(conn, P, alpha);
  double worst = 0.0;
  for (const auto& e : comps) worst = std::max(worst, std::abs(eval(e, x)));
  return worst;
}

// ---------------------------------------------------------------------------
// The algebroid structure carried by the cotangent bundle of a Poisson
// manifold: anchor = sharp, bracket of coordinate covectors given by the
// induced bracket of 1-forms.

inline Algebroid cotangent_algebroid(const PoissonChart& P) {
  const int n = P.dim();
  std::vector<Expr> anchor(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      anchor[i * n + a] = simplify(P.at(i, a));  // rho^i_a = Pi^{ia}
  std::vector<Expr> structure(static_cast<std::size_t>(n) * n * n,
                              Expr::constant(0.0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      OneForm br = form_bracket(P, OneForm::coordinate(P.chart, a),
                                OneForm::coordinate(P.chart, b));
      for (int cc = 0; cc < n; ++cc)
        structure[(a * n + b) * n + cc] = br.comps[cc];
    }
  return Algebroid(P.chart, n, std::move(anchor), std::move(structure));
}

}  // namespace momsec
