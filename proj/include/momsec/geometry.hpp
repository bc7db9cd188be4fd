#pragma once

// Coordinate-chart differential geometry: scalar fields, vector fields,
// 1-forms, Poisson bivectors, and symplectic forms, all with symbolic
// components.
//
// Conventions (fixed across the whole library):
//   {f, g} = sum_ij (d_i f) Pi^ij (d_j g)        bracket from the bivector
//   (sharp a)^i = sum_j Pi^ij a_j                anchor of a 1-form
//   <xi ^ eta, Pi> = sum_ij xi_i Pi^ij eta_j     pairing with a wedge
//   iota_{X_f} omega = df                        Hamiltonian fields from omega
// With these, the bivector induced by omega has matrix -inverse(omega), and
// on R^2 with omega = dq ^ dp one gets {q, p} = +1 both ways.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>
#include <unordered_map>

#include "expr.hpp"
#include "linalg.hpp"

namespace momsec {

namespace detail {
inline void require_same_chart(const Chart& a, const Chart& b,
                               const char* op) {
  if (a != b)
    throw std::invalid_argument(std::string(op) + ": chart mismatch");
}
}  // namespace detail

struct ScalarField {
  Chart chart;
  Expr f;

  ScalarField() = default;
  ScalarField(Chart c, Expr e) : chart(std::move(c)), f(std::move(e)) {}
};

struct VectorField {
  Chart chart;
  std::vector<Expr> comps;

  VectorField() = default;
  VectorField(Chart c, std::vector<Expr> v)
      : chart(std::move(c)), comps(std::move(v)) {
    if (static_cast<int>(comps.size()) != chart.dim())
      throw std::invalid_argument("vector field: component count != dim");
  }

  static VectorField zero(const Chart& c) {
    return VectorField(c, std::vector<Expr>(c.dim(), Expr::constant(0.0)));
  }
};

struct OneForm {
  Chart chart;
  std::vector<Expr> comps;

  OneForm() = default;
  OneForm(Chart c, std::vector<Expr> v)
      : chart(std::move(c)), comps(std::move(v)) {
    if (static_cast<int>(comps.size()) != chart.dim())
      throw std::invalid_argument("one-form: component count != dim");
  }

  static OneForm zero(const Chart& c) {
    return OneForm(c, std::vector<Expr>(c.dim(), Expr::constant(0.0)));
  }

  // coordinate covector dx^i
  static OneForm coordinate(const Chart& c, int i) {
    OneForm w = zero(c);
    w.comps[i] = Expr::constant(1.0);
    return w;
  }
};

// d f as a 1-form.
inline OneForm d(const ScalarField& f) {
  std::vector<Expr> comps;
  comps.reserve(f.chart.dim());
  for (int i = 0; i < f.chart.dim(); ++i)
    comps.push_back(simplify(diff(f.f, i)));
  return OneForm(f.chart, std::move(comps));
}

inline ScalarField apply(const OneForm& a, const VectorField& X) {
  detail::require_same_chart(a.chart, X.chart, "apply");
  std::vector<Expr> terms;
  for (int i = 0; i < a.chart.dim(); ++i)
    terms.push_back(a.comps[i] * X.comps[i]);
  return ScalarField(a.chart, simplify(sum_of(std::move(terms))));
}

// Directional derivative X(f).
inline ScalarField derive(const VectorField& X, const ScalarField& f) {
  detail::require_same_chart(X.chart, f.chart, "derive");
  std::vector<Expr> terms;
  for (int i = 0; i < X.chart.dim(); ++i)
    terms.push_back(X.comps[i] * diff(f.f, i));
  return ScalarField(X.chart, simplify(sum_of(std::move(terms))));
}

// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i
inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  detail::require_same_chart(X.chart, Y.chart, "lie_bracket");
  const int n = X.chart.dim();
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j) {
      terms.push_back(X.comps[j] * diff(Y.comps[i], j));
      terms.push_back(neg(Y.comps[j] * diff(X.comps[i], j)));
    }
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return VectorField(X.chart, std::move(comps));
}

// (L_X eta)_i = X^j d_j eta_i + eta_j d_i X^j
inline OneForm lie_derivative(const VectorField& X, const OneForm& eta) {
  detail::require_same_chart(X.chart, eta.chart, "lie_derivative");
  const int n = X.chart.dim();
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j) {
      terms.push_back(X.comps[j] * diff(eta.comps[i], j));
      terms.push_back(eta.comps[j] * diff(X.comps[j], i));
    }
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return OneForm(X.chart, std::move(comps));
}

// ---------------------------------------------------------------------------
// Poisson structure.

struct PoissonChart {
  Chart chart;
  std::vector<Expr> pi;  // row-major n x n, pi[i*n+j] = Pi^{ij}

  PoissonChart() = default;
  PoissonChart(Chart c, std::vector<Expr> entries)
      : chart(std::move(c)), pi(std::move(entries)) {
    const int n = chart.dim();
    if (static_cast<int>(pi.size()) != n * n)
      throw std::invalid_argument("poisson: expected " + std::to_string(n) +
                                  "x" + std::to_string(n) +
                                  " bivector components");
  }

  const Expr& at(int i, int j) const { return pi[i * chart.dim() + j]; }
  Expr& at(int i, int j) { return pi[i * chart.dim() + j]; }
  int dim() const { return chart.dim(); }
};

inline Matrix eval_bivector(const PoissonChart& P,
                            const std::vector<double>& x) {
  const int n = P.dim();
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = eval(P.at(i, j), x);
  return m;
}

// max_{i<=j} |Pi^{ij} + Pi^{ji}| at x
inline double antisymmetry_residual(const PoissonChart& P,
                                    const std::vector<double>& x) {
  double worst = 0.0;
  for (int i = 0; i < P.dim(); ++i)
    for (int j = i; j < P.dim(); ++j)
      worst = std::max(worst,
                       std::abs(eval(P.at(i, j), x) + eval(P.at(j, i), x)));
  return worst;
}

inline ScalarField poisson_bracket(const PoissonChart& P, const ScalarField& f,
                                   const ScalarField& g) {
  detail::require_same_chart(P.chart, f.chart, "poisson_bracket");
  detail::require_same_chart(P.chart, g.chart, "poisson_bracket");
  const int n = P.dim();
  std::vector<Expr> terms;
  for (int i = 0; i < n; ++i) {
    Expr dif = simplify(diff(f.f, i));
    if (dif.is_constant(0.0)) continue;
    for (int j = 0; j < n; ++j)
      terms.push_back(dif * P.at(i, j) * diff(g.f, j));
  }
  return ScalarField(P.chart, simplify(sum_of(std::move(terms))));
}

// (sharp a)^i = sum_j Pi^{ij} a_j
inline VectorField sharp(const PoissonChart& P, const OneForm& a) {
  detail::require_same_chart(P.chart, a.chart, "sharp");
  const int n = P.dim();
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < n; ++j) terms.push_back(P.at(i, j) * a.comps[j]);
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return VectorField(P.chart, std::move(comps));
}

// <xi ^ eta, Pi> = sum_ij xi_i Pi^{ij} eta_j
inline ScalarField pair_with_bivector(const PoissonChart& P, const OneForm& xi,
                                      const OneForm& eta) {
  detail::require_same_chart(P.chart, xi.chart, "pair_with_bivector");
  detail::require_same_chart(P.chart, eta.chart, "pair_with_bivector");
  const int n = P.dim();
  std::vector<Expr> terms;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      terms.push_back(xi.comps[i] * P.at(i, j) * eta.comps[j]);
  return ScalarField(P.chart, simplify(sum_of(std::move(terms))));
}

inline VectorField hamiltonian_vector_field(const PoissonChart& P,
                                            const ScalarField& f) {
  return sharp(P, d(f));
}

// Bracket of 1-forms induced by the bivector:
//   {xi, eta} = L_{sharp xi} eta - L_{sharp eta} xi + d<xi ^ eta, Pi>
inline OneForm form_bracket(const PoissonChart& P, const OneForm& xi,
                            const OneForm& eta) {
  OneForm a = lie_derivative(sharp(P, xi), eta);
  OneForm b = lie_derivative(sharp(P, eta), xi);
  OneForm c = d(pair_with_bivector(P, xi, eta));
  std::vector<Expr> comps;
  comps.reserve(P.dim());
  for (int i = 0; i < P.dim(); ++i)
    comps.push_back(simplify(a.comps[i] - b.comps[i] + c.comps[i]));
  return OneForm(P.chart, std::move(comps));
}

// Jacobi diagnostic: the (i,j,k) component of [Pi, Pi] up to normalization,
//   sum_l ( Pi^{li} d_l Pi^{jk} + Pi^{lj} d_l Pi^{ki} + Pi^{lk} d_l Pi^{ij} )
inline Expr schouten_component(const PoissonChart& P, int i, int j, int k) {
  const int n = P.dim();
  std::vector<Expr> terms;
  for (int l = 0; l < n; ++l) {
    terms.push_back(P.at(l, i) * diff(P.at(j, k), l));
    terms.push_back(P.at(l, j) * diff(P.at(k, i), l));
    terms.push_back(P.at(l, k) * diff(P.at(i, j), l));
  }
  return simplify(sum_of(std::move(terms)));
}

inline double schouten_residual(const PoissonChart& P, int i, int j, int k,
                                const std::vector<double>& x) {
  return eval(schouten_component(P, i, j, k), x);
}

// Max |schouten| over strictly increasing triples at x.
inline double jacobi_residual(const PoissonChart& P,
                              const std::vector<double>& x) {
  double worst = 0.0;
  const int n = P.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        worst = std::max(worst, std::abs(schouten_residual(P, i, j, k, x)));
  return worst;
}

struct KoszulIdentityResiduals {
  double differential;  // || d{f,g} + {df, dg} ||_inf at x
  double morphism;      // || [sharp df, sharp dg] - sharp {df, dg} ||_inf at x
};

inline KoszulIdentityResiduals koszul_identity_residuals(
    const PoissonChart& P, const ScalarField& f, const ScalarField& g,
    const std::vector<double>& x) {
  OneForm df = d(f), dg = d(g);
  OneForm bracket_forms = form_bracket(P, df, dg);
  OneForm d_of_bracket = d(poisson_bracket(P, f, g));
  double r1 = 0.0;
  for (int i = 0; i < P.dim(); ++i)
    r1 = std::max(r1, std::abs(eval(d_of_bracket.comps[i], x) +
                               eval(bracket_forms.comps[i], x)));
  VectorField lhs = lie_bracket(sharp(P, df), sharp(P, dg));
  VectorField rhs = sharp(P, bracket_forms);
  double r2 = 0.0;
  for (int i = 0; i < P.dim(); ++i)
    r2 = std::max(r2,
                  std::abs(eval(lhs.comps[i], x) - eval(rhs.comps[i], x)));
  return {r1, r2};
}

// ---------------------------------------------------------------------------
// Symplectic structure.

struct SymplecticChart {
  Chart chart;
  std::vector<Expr> omega;  // row-major n x n, omega[i*n+j] = omega_{ij}

  SymplecticChart() = default;
  SymplecticChart(Chart c, std::vector<Expr> entries)
      : chart(std::move(c)), omega(std::move(entries)) {
    const int n = chart.dim();
    if (static_cast<int>(omega.size()) != n * n)
      throw std::invalid_argument("symplectic: expected " + std::to_string(n) +
                                  "x" + std::to_string(n) + " components");
  }

  const Expr& at(int i, int j) const { return omega[i * chart.dim() + j]; }
  int dim() const { return chart.dim(); }

  // canonical form sum_i dq_i ^ dp_i on a chart (q_1..q_n, p_1..p_n)
  static SymplecticChart canonical(const Chart& c) {
    const int n = c.dim();
    if (n % 2 != 0)
      throw std::invalid_argument("canonical symplectic: odd dimension");
    std::vector<Expr> w(static_cast<std::size_t>(n) * n, Expr::constant(0.0));
    for (int i = 0; i < n / 2; ++i) {
      w[i * n + (n / 2 + i)] = Expr::constant(1.0);
      w[(n / 2 + i) * n + i] = Expr::constant(-1.0);
    }
    return SymplecticChart(c, std::move(w));
  }
};

inline Matrix eval_form(const SymplecticChart& S, const std::vector<double>& x) {
  const int n = S.dim();
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = eval(S.at(i, j), x);
  return m;
}

inline double antisymmetry_residual(const SymplecticChart& S,
                                    const std::vector<double>& x) {
  double worst = 0.0;
  for (int i = 0; i < S.dim(); ++i)
    for (int j = i; j < S.dim(); ++j)
      worst = std::max(worst,
                       std::abs(eval(S.at(i, j), x) + eval(S.at(j, i), x)));
  return worst;
}

// (d omega)_{ijk} = d_i omega_{jk} + d_j omega_{ki} + d_k omega_{ij}
inline double closedness_residual(const SymplecticChart& S,
                                  const std::vector<double>& x) {
  double worst = 0.0;
  const int n = S.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Expr c = simplify(diff(S.at(j, k), i) + diff(S.at(k, i), j) +
                          diff(S.at(i, j), k));
        worst = std::max(worst, std::abs(eval(c, x)));
      }
  return worst;
}

// omega(X, Y) = sum_ij omega_{ij} X^i Y^j
inline ScalarField omega_apply(const SymplecticChart& S, const VectorField& X,
                               const VectorField& Y) {
  detail::require_same_chart(S.chart, X.chart, "omega_apply");
  detail::require_same_chart(S.chart, Y.chart, "omega_apply");
  std::vector<Expr> terms;
  for (int i = 0; i < S.dim(); ++i)
    for (int j = 0; j < S.dim(); ++j)
      terms.push_back(S.at(i, j) * X.comps[i] * Y.comps[j]);
  return ScalarField(S.chart, simplify(sum_of(std::move(terms))));
}

// (iota_X omega)_j = sum_i X^i omega_{ij}
inline OneForm interior_product(const SymplecticChart& S,
                                const VectorField& X) {
  detail::require_same_chart(S.chart, X.chart, "interior_product");
  const int n = S.dim();
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int j = 0; j < n; ++j) {
    std::vector<Expr> terms;
    for (int i = 0; i < n; ++i) terms.push_back(X.comps[i] * S.at(i, j));
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return OneForm(S.chart, std::move(comps));
}

namespace detail {

// Determinant over the rows/columns selected by bitmasks, by Laplace
// expansion along the first selected row, memoized on (rowmask, colmask).
class SymDet {
 public:
  SymDet(const std::vector<Expr>& entries, int n) : m_(entries), n_(n) {}

  Expr det(unsigned rowmask, unsigned colmask) {
    if (rowmask == 0) return Expr::constant(1.0);
    std::uint64_t key = (static_cast<std::uint64_t>(rowmask) << 32) | colmask;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    int r = 0;
    while (!(rowmask & (1u << r))) ++r;
    std::vector<Expr> terms;
    int sign = 1;
    for (int c = 0; c < n_; ++c) {
      if (!(colmask & (1u << c))) continue;
      const Expr& entry = m_[r * n_ + c];
      if (!entry.is_constant(0.0)) {
        Expr sub = det(rowmask & ~(1u << r), colmask & ~(1u << c));
        Expr term = entry * sub;
        terms.push_back(sign > 0 ? term : neg(term));
      }
      sign = -sign;
    }
    Expr result = simplify(sum_of(std::move(terms)));
    memo_.emplace(key, result);
    return result;
  }

 private:
  const std::vector<Expr>& m_;
  int n_;
  std::unordered_map<std::uint64_t, Expr> memo_;
};

}  // namespace detail

// The Poisson bivector whose Hamiltonian fields satisfy iota_{X_f} omega = df:
// in components Pi = -inverse(omega).  Entries are exact adjugate/determinant
// quotients; they fold to constants whenever omega is constant.  Degeneracy of
// omega surfaces as a division-by-zero domain error at evaluation points.
inline PoissonChart poisson_from_symplectic(const SymplecticChart& S) {
  const int n = S.dim();
  if (n > 30)
    throw std::invalid_argument("poisson_from_symplectic: dimension too large");
  detail::SymDet dets(S.omega, n);
  const unsigned full = (1u << n) - 1;
  Expr det = dets.det(full, full);
  std::vector<Expr> pi(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // inverse(omega)_{ij} = (-1)^{i+j} minor(delete row j, col i) / det
      Expr minor = dets.det(full & ~(1u << j), full & ~(1u << i));
      Expr cof = ((i + j) % 2 == 0) ? minor : neg(minor);
      pi[i * n + j] = simplify(neg(quotient(cof, det)));
    }
  }
  return PoissonChart(S.chart, std::move(pi));
}

}  // namespace momsec
