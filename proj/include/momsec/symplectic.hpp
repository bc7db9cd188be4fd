#pragma once

// Momentum-section conditions stated directly against a symplectic form,
// plus the symplectic-orthogonal reducibility condition.  These are written
// independently of the Poisson-side checks: with Pi = -omega^{-1} the two
// formulations are equivalent, and running both paths on the same scenario
// is one of the workbench's consistency checks.
//
//   momentum_omega        <nabla mu, al> + iota_{rho(al)} omega = 0
//   anchored_omega        the derivation induced by each section kills omega
//   bracket_compat_omega  (d_A mu)(al, be) = omega(rho(al), rho(be))
//   orthogonal condition  D^omega contained in T + D at level-set points

#include <string>
#include <utility>
#include <vector>

#include "algebroid.hpp"
#include "expr.hpp"
#include "geometry.hpp"
#include "hamiltonian.hpp"
#include "linalg.hpp"
#include "reduction.hpp"

namespace momsec {

struct SymplecticScenario {
  SymplecticChart symp;
  MomentumSection ms;

  SymplecticScenario(SymplecticChart s, MomentumSection m)
      : symp(std::move(s)), ms(std::move(m)) {
    detail::require_same_chart(symp.chart, ms.alg().chart,
                               "symplectic scenario");
  }

  const Algebroid& alg() const { return ms.alg(); }
};

namespace detail {
inline VectorField coordinate_field(const Chart& chart, int i) {
  std::vector<Expr> comps(chart.dim(), Expr::constant(0.0));
  comps[i] = Expr::constant(1.0);
  return VectorField(chart, std::move(comps));
}
}  // namespace detail

// <nabla mu, al> + iota_{rho(al)} omega, componentwise per section.
inline ResidualCheck check_momentum_omega(const SymplecticScenario& s,
                                          std::vector<ASection> sections = {}) {
  const Algebroid& A = s.alg();
  if (sections.empty()) sections = detail::frame_sections(A);
  ResidualCheck out{"momentum_omega", {}};
  for (const auto& al : sections) {
    OneForm pairing = covariant_pairing(s.ms, al);
    OneForm contraction = interior_product(s.symp, anchor_of(A, al));
    for (int i = 0; i < A.dim(); ++i)
      out.residuals.push_back(
          simplify(pairing.comps[i] + contraction.comps[i]));
  }
  return out;
}

// Components of the induced derivation applied to omega:
//   (U_al omega)(d_i, d_j) = rho(al)(omega_ij)
//                          - omega(U_al d_i, d_j) - omega(d_i, U_al d_j)
inline ResidualCheck check_symplectically_anchored(
    const SymplecticScenario& s, std::vector<ASection> sections = {}) {
  const Algebroid& A = s.alg();
  const int n = A.dim();
  if (sections.empty()) sections = detail::frame_sections(A);
  ResidualCheck out{"anchored_omega", {}};
  for (const auto& al : sections) {
    VectorField flow = anchor_of(A, al);
    std::vector<VectorField> derived;
    derived.reserve(n);
    for (int i = 0; i < n; ++i)
      derived.push_back(
          section_derivation(s.ms.conn, al, detail::coordinate_field(A.chart, i)));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Expr lead = derive(flow, ScalarField(A.chart, s.symp.at(i, j))).f;
        Expr left =
            omega_apply(s.symp, derived[i], detail::coordinate_field(A.chart, j)).f;
        Expr right =
            omega_apply(s.symp, detail::coordinate_field(A.chart, i), derived[j]).f;
        out.residuals.push_back(simplify(lead - left - right));
      }
  }
  return out;
}

// (d_A mu)(al, be) - omega(rho(al), rho(be)) over pairs.
inline ResidualCheck check_bracket_compat_omega(
    const SymplecticScenario& s, std::vector<ASection> sections = {}) {
  const Algebroid& A = s.alg();
  if (sections.empty()) sections = detail::frame_sections(A);
  ResidualCheck out{"bracket_compat_omega", {}};
  AForm muform = s.ms.as_form();
  for (std::size_t i = 0; i < sections.size(); ++i)
    for (std::size_t j = i + 1; j < sections.size(); ++j) {
      ScalarField lhs =
          a_differential_apply(A, muform, {sections[i], sections[j]});
      ScalarField rhs = omega_apply(s.symp, anchor_of(A, sections[i]),
                                    anchor_of(A, sections[j]));
      out.residuals.push_back(simplify(lhs.f - rhs.f));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Symplectic orthogonals.

// U^omega = { v : omega(u, v) = 0 for all u in U } = nullspace(basis(U)^T W).
inline Subspace symplectic_orthogonal(const Matrix& omega, const Subspace& u,
                                      double tol = 1e-10) {
  if (omega.rows != u.ambient || omega.cols != u.ambient)
    throw std::invalid_argument(
        "symplectic_orthogonal: form and subspace dimensions differ");
  return nullspace(u.basis.transposed() * omega, tol);
}

// sigma_min / sigma_max of omega at x; zero signals a degenerate form.
inline double nondegeneracy_ratio(const SymplecticChart& S,
                                  const std::vector<double>& x) {
  Matrix w = eval_form(S, x);
  Svd s = svd(w);
  if (s.sigma.empty() || s.sigma.front() == 0.0) return 0.0;
  return s.sigma.back() / s.sigma.front();
}

// D^omega subset of T + D at an accepted level-set point; returns the verdict
// and the largest membership residual over a basis of D^omega.
inline std::pair<bool, double> check_symplectic_orthogonal_condition(
    const SymplecticScenario& s, const LevelSetPoint& z, double tol = 1e-8) {
  const Algebroid& A = s.alg();
  Matrix w = eval_form(s.symp, z.x);
  Svd sv = svd(w);
  if (sv.sigma.empty() || sv.sigma.front() == 0.0 ||
      sv.sigma.back() <= 1e-12 * sv.sigma.front())
    throw DomainError("symplectic form is singular at the test point");
  Subspace d = column_space(anchor_matrix(A, z.x), tol);
  Subspace t = nullspace(z.jacobian, tol);
  Subspace dw = symplectic_orthogonal(w, d, tol);
  Subspace sum = subspace_sum(t, d, tol);
  double worst = 0.0;
  for (int j = 0; j < dw.dim(); ++j)
    worst = std::max(worst, membership_residual(sum, dw.basis.col(j)));
  return {worst <= tol, worst};
}

}  // namespace momsec
