#pragma once

// Pointwise reduction machinery on the zero level set of a momentum section:
// Gauss-Newton projection onto mu = 0, the characteristic distribution and
// its annihilator at a point, the reducibility condition in its direct and
// annihilator-dual forms, invariance of brackets of invariants, and
// reduced-bracket evaluation through extensions.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "algebroid.hpp"
#include "expr.hpp"
#include "geometry.hpp"
#include "hamiltonian.hpp"
#include "linalg.hpp"

namespace momsec {

// ---------------------------------------------------------------------------
// Level-set projection.

struct LevelSetPoint {
  std::vector<double> x;
  double mu_norm = 0.0;    // max |mu_a| at x
  Matrix jacobian;         // r x n, entries d mu_a / d x_i at x
  bool regular = false;    // jacobian has full row rank
  bool accepted = false;   // mu_norm <= tolerance was reached
  int iterations = 0;
  int rank_deficient_steps = 0;  // iterates where the pseudo-inverse truncated
};

// Precompiled value and Jacobian expressions for mu = 0, so repeated Newton
// runs do not re-differentiate.
struct LevelProjector {
  int dim = 0;
  std::vector<Expr> mu;
  std::vector<Expr> jac;  // row-major, jac[a * dim + i] = d mu_a / d x_i

  LevelProjector() = default;

  LevelProjector(int n, std::vector<Expr> comps)
      : dim(n), mu(std::move(comps)) {
    jac.reserve(mu.size() * static_cast<std::size_t>(dim));
    for (const auto& m : mu)
      for (int i = 0; i < dim; ++i) jac.push_back(simplify(diff(m, i)));
  }

  explicit LevelProjector(const MomentumSection& ms)
      : LevelProjector(ms.alg().dim(), ms.mu) {}

  int rank_count() const { return static_cast<int>(mu.size()); }

  std::vector<double> value_at(const std::vector<double>& x) const {
    std::vector<double> v;
    v.reserve(mu.size());
    for (const auto& m : mu) v.push_back(eval(m, x));
    return v;
  }

  double residual_at(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& m : mu) worst = std::max(worst, std::abs(eval(m, x)));
    return worst;
  }

  Matrix jacobian_at(const std::vector<double>& x) const {
    const int r = rank_count();
    Matrix J(r, dim);
    for (int a = 0; a < r; ++a)
      for (int i = 0; i < dim; ++i) J.at(a, i) = eval(jac[a * dim + i], x);
    return J;
  }

  // Gauss-Newton iteration x <- x - J^+ mu(x).  Rank-deficient Jacobians are
  // handled by the pseudo-inverse (minimum-norm step) and counted.  A seed
  // already on the level set is returned unchanged with zero iterations;
  // non-convergence returns the last iterate with accepted = false.
  LevelSetPoint project(std::vector<double> seed, double tol = 1e-10,
                        int max_iter = 50, double rank_tol = 1e-10) const {
    if (static_cast<int>(seed.size()) != dim)
      throw std::invalid_argument("project: seed dimension != chart dimension");
    if (tol <= 0.0) throw std::invalid_argument("project: tolerance must be positive");
    LevelSetPoint out;
    out.x = std::move(seed);
    try {
      for (int it = 0; it <= max_iter; ++it) {
        out.mu_norm = residual_at(out.x);
        out.iterations = it;
        if (out.mu_norm <= tol) {
          out.accepted = true;
          break;
        }
        if (it == max_iter) break;
        Matrix J = jacobian_at(out.x);
        bool deficient = false;
        std::vector<double> step =
            solve_least_squares(J, value_at(out.x), 1e-12, &deficient);
        if (deficient) ++out.rank_deficient_steps;
        double moved = 0.0;
        for (int i = 0; i < dim; ++i) {
          out.x[i] -= step[i];
          moved = std::max(moved, std::abs(step[i]));
        }
        if (moved == 0.0) {  // stationary; no further progress possible
          out.mu_norm = residual_at(out.x);
          out.iterations = it + 1;
          break;
        }
      }
      out.jacobian = jacobian_at(out.x);
      out.regular = rank(out.jacobian, rank_tol) == rank_count();
    } catch (const DomainError&) {
      out.accepted = false;  // an iterate left the expression domain
    }
    return out;
  }
};

inline LevelSetPoint newton_project(const MomentumSection& ms,
                                    std::vector<double> seed,
                                    double tol = 1e-10, int max_iter = 50) {
  return LevelProjector(ms).project(std::move(seed), tol, max_iter);
}

// ---------------------------------------------------------------------------
// Characteristic distribution and level-set tangent at a point.

struct PointGeometry {
  std::vector<double> x;
  Subspace distribution;              // D, image of the anchor
  Subspace level_tangent;             // T, kernel of the mu Jacobian
  Subspace distribution_annihilator;  // ann D, covectors killing D
  Matrix sharp_annihilator;  // columns Pi(x) * eta for each ann D basis eta
};

inline PointGeometry point_geometry(const MomentumSection& ms,
                                    const PoissonChart& P,
                                    const LevelSetPoint& z,
                                    double tol = 1e-8) {
  const Algebroid& A = ms.alg();
  detail::require_same_chart(A.chart, P.chart, "point_geometry");
  const int n = A.dim();
  PointGeometry g;
  g.x = z.x;
  g.distribution = column_space(anchor_matrix(A, z.x), tol);
  g.level_tangent = nullspace(z.jacobian, tol);
  g.distribution_annihilator = annihilator(g.distribution, tol);
  Matrix pi = eval_bivector(P, z.x);
  const int k = g.distribution_annihilator.dim();
  g.sharp_annihilator = Matrix(n, k);
  for (int j = 0; j < k; ++j) {
    std::vector<double> w = pi * g.distribution_annihilator.basis.col(j);
    g.sharp_annihilator.set_col(j, w);
  }
  return g;
}

// Direct form: every column of Pi^sharp(ann D) lies in T + D.  The residual
// is the largest relative projection defect over the columns.
inline std::pair<bool, double> check_reducibility(const PointGeometry& g,
                                                  double tol = 1e-8) {
  Subspace sum = subspace_sum(g.level_tangent, g.distribution, tol);
  double worst = 0.0;
  for (int j = 0; j < g.sharp_annihilator.cols; ++j) {
    std::vector<double> w = g.sharp_annihilator.col(j);
    double nw = norm2(w);
    if (nw == 0.0) continue;
    worst = std::max(worst, membership_residual(sum, w) / nw);
  }
  return {worst <= tol, worst};
}

// Annihilator-dual form: ann(T) intersect ann(D) pairs to zero with every
// column of Pi^sharp(ann D).  Equivalent to the direct form in exact
// arithmetic but computed through a different subspace route, which makes the
// agreement of the two verdicts a meaningful consistency check.
inline std::pair<bool, double> check_dual_form(const PointGeometry& g,
                                               double tol = 1e-8) {
  Subspace conormal = intersection(annihilator(g.level_tangent, tol),
                                   g.distribution_annihilator, tol);
  double worst = 0.0;
  for (int j = 0; j < g.sharp_annihilator.cols; ++j) {
    std::vector<double> w = g.sharp_annihilator.col(j);
    double nw = norm2(w);
    if (nw == 0.0) continue;
    for (double& c : w) c /= nw;
    for (int i = 0; i < conormal.dim(); ++i)
      worst = std::max(worst, std::abs(dot(conormal.basis.col(i), w)));
  }
  return {worst <= tol, worst};
}

// ---------------------------------------------------------------------------
// Invariants and the reduced bracket.  Candidate invariants are extensions
// defined on the whole chart; the precondition for every use is that their
// differentials annihilate the distribution at the test point, checked
// through the frame generators.

namespace detail {
inline std::vector<Expr> directional_derivatives(const Algebroid& A,
                                                 const Expr& f) {
  std::vector<Expr> out;
  out.reserve(A.rank);
  for (int a = 0; a < A.rank; ++a) {
    std::vector<Expr> terms;
    for (int i = 0; i < A.dim(); ++i) terms.push_back(A.rho(i, a) * diff(f, i));
    out.push_back(simplify(sum_of(std::move(terms))));
  }
  return out;
}

inline std::string describe_violation(const std::string& label, int generator,
                                      double value, double tol) {
  std::ostringstream os;
  os << "d" << label << "(rho(e_" << (generator + 1) << ")) = " << value
     << " exceeds tolerance " << tol;
  return os.str();
}

// index of the worst generator if the directional derivatives exceed tol,
// else -1
inline int worst_generator(const std::vector<Expr>& dirs,
                           const std::vector<double>& x, double tol,
                           double* value) {
  int bad = -1;
  double worst = tol;
  for (std::size_t a = 0; a < dirs.size(); ++a) {
    double v = std::abs(eval(dirs[a], x));
    if (v > worst) {
      worst = v;
      bad = static_cast<int>(a);
    }
  }
  if (value) *value = worst;
  return bad;
}
}  // namespace detail

struct InvariantPair {
  Expr f, g;
  Expr bracket;                         // {f, g}
  std::vector<Expr> f_dir, g_dir;       // df(rho(e_a)), dg(rho(e_a))
  std::vector<Expr> bracket_dir;        // d{f, g}(rho(e_a))
};

inline InvariantPair make_invariant_pair(const PoissonChart& P,
                                         const Algebroid& A, const Expr& f,
                                         const Expr& g) {
  detail::require_same_chart(P.chart, A.chart, "make_invariant_pair");
  InvariantPair pr;
  pr.f = f;
  pr.g = g;
  pr.bracket = poisson_bracket(P, ScalarField(P.chart, f),
                               ScalarField(P.chart, g)).f;
  pr.f_dir = detail::directional_derivatives(A, f);
  pr.g_dir = detail::directional_derivatives(A, g);
  pr.bracket_dir = detail::directional_derivatives(A, pr.bracket);
  return pr;
}

// Empty string when both differentials annihilate the distribution at x;
// otherwise names the failing function and generator.
inline std::string invariant_pair_violation(const InvariantPair& pr,
                                            const std::vector<double>& x,
                                            double tol = 1e-8) {
  double v = 0.0;
  int bad = detail::worst_generator(pr.f_dir, x, tol, &v);
  if (bad >= 0) return detail::describe_violation("f", bad, v, tol);
  bad = detail::worst_generator(pr.g_dir, x, tol, &v);
  if (bad >= 0) return detail::describe_violation("g", bad, v, tol);
  return {};
}

// Conclusion of the invariance property: the bracket of two invariants is
// again invariant, measured as max_a |d{f,g}(rho(e_a))| at x.
inline double invariance_residual(const InvariantPair& pr,
                                  const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& e : pr.bracket_dir)
    worst = std::max(worst, std::abs(eval(e, x)));
  return worst;
}

// Representative value {f, g}(x) of the reduced bracket at the orbit of x.
inline double reduced_bracket_value(const InvariantPair& pr,
                                    const std::vector<double>& x) {
  return eval(pr.bracket, x);
}

// ---------------------------------------------------------------------------
// Extension independence: two extensions g, g_alt that agree on the level
// set must produce the same bracket against any f there.

struct ExtensionTriple {
  Expr f, g, g_alt;
  Expr gap;                          // g - g_alt, vanishes on the level set
  Expr bracket_g, bracket_alt;       // {f, g}, {f, g_alt}
  std::vector<Expr> g_dir, alt_dir;  // directional derivatives along anchors
};

inline ExtensionTriple make_extension_triple(const PoissonChart& P,
                                             const Algebroid& A, const Expr& f,
                                             const Expr& g, const Expr& g_alt) {
  detail::require_same_chart(P.chart, A.chart, "make_extension_triple");
  ExtensionTriple tr;
  tr.f = f;
  tr.g = g;
  tr.g_alt = g_alt;
  tr.gap = simplify(g - g_alt);
  tr.bracket_g = poisson_bracket(P, ScalarField(P.chart, f),
                                 ScalarField(P.chart, g)).f;
  tr.bracket_alt = poisson_bracket(P, ScalarField(P.chart, f),
                                   ScalarField(P.chart, g_alt)).f;
  tr.g_dir = detail::directional_derivatives(A, g);
  tr.alt_dir = detail::directional_derivatives(A, g_alt);
  return tr;
}

struct ExtensionOutcome {
  bool ok = false;
  std::string violation;    // set when a precondition failed at the point
  double difference = 0.0;  // |{f,g} - {f,g_alt}| when ok
};

inline ExtensionOutcome extension_difference(const ExtensionTriple& tr,
                                             const std::vector<double>& x,
                                             double agree_tol = 1e-8,
                                             double dir_tol = 1e-8) {
  ExtensionOutcome out;
  double gap = std::abs(eval(tr.gap, x));
  if (gap > agree_tol) {
    std::ostringstream os;
    os << "extensions differ by " << gap << " at the test point (tolerance "
       << agree_tol << ")";
    out.violation = os.str();
    return out;
  }
  double v = 0.0;
  int bad = detail::worst_generator(tr.g_dir, x, dir_tol, &v);
  if (bad >= 0) {
    out.violation = detail::describe_violation("g", bad, v, dir_tol);
    return out;
  }
  bad = detail::worst_generator(tr.alt_dir, x, dir_tol, &v);
  if (bad >= 0) {
    out.violation = detail::describe_violation("g_alt", bad, v, dir_tol);
    return out;
  }
  out.ok = true;
  out.difference =
      std::abs(eval(tr.bracket_g, x) - eval(tr.bracket_alt, x));
  return out;
}

// Max bracket difference over the accepted points; per-point outcomes
// (including precondition rejections) are appended to *outcomes when given.
inline double extension_independence(const ExtensionTriple& tr,
                                     const std::vector<LevelSetPoint>& points,
                                     double agree_tol = 1e-8,
                                     double dir_tol = 1e-8,
                                     std::vector<ExtensionOutcome>* outcomes =
                                         nullptr) {
  double worst = 0.0;
  for (const auto& z : points) {
    ExtensionOutcome o = extension_difference(tr, z.x, agree_tol, dir_tol);
    if (o.ok) worst = std::max(worst, o.difference);
    if (outcomes) outcomes->push_back(std::move(o));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// One classical Runge-Kutta step along a vector field, used to test that
// reduced-bracket values are constant along anchor orbits (integrate, then
// re-project).

inline std::vector<double> rk4_step(const VectorField& X,
                                    const std::vector<double>& x, double h) {
  const int n = X.chart.dim();
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("rk4_step: point dimension != chart dimension");
  auto field = [&](const std::vector<double>& p) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = eval(X.comps[i], p);
    return v;
  };
  auto shifted = [&](const std::vector<double>& k, double c) {
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = x[i] + c * k[i];
    return p;
  };
  std::vector<double> k1 = field(x);
  std::vector<double> k2 = field(shifted(k1, h / 2));
  std::vector<double> k3 = field(shifted(k2, h / 2));
  std::vector<double> k4 = field(shifted(k3, h));
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace momsec
