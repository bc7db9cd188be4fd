#pragma once

// Momentum sections on a Lie algebroid with connection over a Poisson chart,
// and the pointwise conditions a verification run evaluates:
//
//   momentum        rho(al) + sharp<nabla mu, al> = 0
//   pi_parallel     the derivation induced by each frame section kills Pi
//   bracket_compat  (d_A mu)(al, be) = <(nabla mu, al) ^ (nabla mu, be), Pi>
//   compatibility   <nabla mu, al> = d(mu(al)) for designated sections al
//   lie_hom         mu([al, be]) = {mu(al), mu(be)} for designated pairs
//
// The first three are tensorial, so checking them on the frame suffices; the
// last two depend on the actual sections and run over a designated list.

#include <string>
#include <utility>
#include <vector>

#include "algebroid.hpp"
#include "expr.hpp"
#include "geometry.hpp"

namespace momsec {

struct MomentumSection {
  Connection conn;
  std::vector<Expr> mu;               // mu_a = mu(e_a), rank entries
  std::vector<ASection> designated;   // sections for the non-tensorial checks

  MomentumSection() = default;
  MomentumSection(Connection c, std::vector<Expr> m,
                  std::vector<ASection> des = {})
      : conn(std::move(c)), mu(std::move(m)), designated(std::move(des)) {
    if (static_cast<int>(mu.size()) != conn.alg.rank)
      throw std::invalid_argument("momentum section: component count != rank");
    if (designated.empty())
      for (int a = 0; a < conn.alg.rank; ++a)
        designated.push_back(ASection::frame(conn.alg, a));
    for (const auto& s : designated)
      detail::require_section(conn.alg, s, "momentum section");
  }

  const Algebroid& alg() const { return conn.alg; }

  // mu(al) as a scalar field
  ScalarField pair(const ASection& al) const {
    detail::require_section(conn.alg, al, "momentum pairing");
    std::vector<Expr> terms;
    for (int a = 0; a < conn.alg.rank; ++a)
      terms.push_back(mu[a] * al.comps[a]);
    return ScalarField(conn.alg.chart, simplify(sum_of(std::move(terms))));
  }

  AForm as_form() const {
    return AForm::one_form(conn.alg, mu);
  }
};

// <nabla mu, al> as a 1-form on the base:
//   component i = (d_i mu_b - Gamma^c_{ib} mu_c) al^b
inline OneForm covariant_pairing(const MomentumSection& ms,
                                 const ASection& al) {
  const Algebroid& A = ms.alg();
  detail::require_section(A, al, "covariant_pairing");
  const int n = A.dim(), r = A.rank;
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (int b = 0; b < r; ++b) {
      std::vector<Expr> inner{diff(ms.mu[b], i)};
      for (int c = 0; c < r; ++c)
        inner.push_back(neg(ms.conn.coeff(i, b, c) * ms.mu[c]));
      terms.push_back(sum_of(std::move(inner)) * al.comps[b]);
    }
    comps.push_back(simplify(sum_of(std::move(terms))));
  }
  return OneForm(A.chart, std::move(comps));
}

// ---------------------------------------------------------------------------
// Condition checks.  Each builds its residual expressions once; evaluating
// the maximum absolute value at a point is then cheap.

struct ResidualCheck {
  std::string id;
  std::vector<Expr> residuals;

  double eval_max(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& e : residuals)
      worst = std::max(worst, std::abs(eval(e, x)));
    return worst;
  }
};

namespace detail {
inline std::vector<ASection> frame_sections(const Algebroid& A) {
  std::vector<ASection> out;
  for (int a = 0; a < A.rank; ++a) out.push_back(ASection::frame(A, a));
  return out;
}
}  // namespace detail

// rho(al) + sharp <nabla mu, al> = 0, componentwise for each section.
inline ResidualCheck check_momentum(const MomentumSection& ms,
                                    const PoissonChart& P,
                                    std::vector<ASection> sections = {}) {
  const Algebroid& A = ms.alg();
  detail::require_same_chart(A.chart, P.chart, "check_momentum");
  if (sections.empty()) sections = detail::frame_sections(A);
  ResidualCheck out{"momentum", {}};
  for (const auto& al : sections) {
    VectorField lhs = anchor_of(A, al);
    VectorField corr = sharp(P, covariant_pairing(ms, al));
    for (int i = 0; i < A.dim(); ++i)
      out.residuals.push_back(simplify(lhs.comps[i] + corr.comps[i]));
  }
  return out;
}

// Components of the induced derivation applied to Pi, for each section.
inline ResidualCheck check_pi_parallel(const MomentumSection& ms,
                                       const PoissonChart& P,
                                       std::vector<ASection> sections = {}) {
  const Algebroid& A = ms.alg();
  detail::require_same_chart(A.chart, P.chart, "check_pi_parallel");
  if (sections.empty()) sections = detail::frame_sections(A);
  ResidualCheck out{"pi_parallel", {}};
  for (const auto& al : sections) {
    auto comps = bivector_derivation(ms.conn, P, al);
    for (auto& e : comps) out.residuals.push_back(std::move(e));
  }
  return out;
}

// (d_A mu)(al, be) - <(nabla mu, al) ^ (nabla mu, be), Pi> over pairs.
inline ResidualCheck check_bracket_compat(const MomentumSection& ms,
                                          const PoissonChart& P,
                                          std::vector<ASection> sections = {}) {
  const Algebroid& A = ms.alg();
  detail::require_same_chart(A.chart, P.chart, "check_bracket_compat");
  if (sections.empty()) sections = detail::frame_sections(A);
  ResidualCheck out{"bracket_compat", {}};
  AForm muform = ms.as_form();
  for (std::size_t i = 0; i < sections.size(); ++i)
    for (std::size_t j = i + 1; j < sections.size(); ++j) {
      ScalarField lhs =
          a_differential_apply(A, muform, {sections[i], sections[j]});
      ScalarField rhs = pair_with_bivector(P, covariant_pairing(ms, sections[i]),
                                           covariant_pairing(ms, sections[j]));
      out.residuals.push_back(simplify(lhs.f - rhs.f));
    }
  return out;
}

// <nabla mu, al> - d(mu(al)) for the designated sections.
inline ResidualCheck check_compatibility(const MomentumSection& ms) {
  const Algebroid& A = ms.alg();
  ResidualCheck out{"compatibility", {}};
  for (const auto& al : ms.designated) {
    OneForm lhs = covariant_pairing(ms, al);
    OneForm rhs = d(ms.pair(al));
    for (int i = 0; i < A.dim(); ++i)
      out.residuals.push_back(simplify(lhs.comps[i] - rhs.comps[i]));
  }
  return out;
}

// mu([al, be]) - {mu(al), mu(be)} for designated pairs.
inline ResidualCheck check_lie_hom(const MomentumSection& ms,
                                   const PoissonChart& P) {
  const Algebroid& A = ms.alg();
  detail::require_same_chart(A.chart, P.chart, "check_lie_hom");
  ResidualCheck out{"lie_hom", {}};
  for (std::size_t i = 0; i < ms.designated.size(); ++i)
    for (std::size_t j = i + 1; j < ms.designated.size(); ++j) {
      ScalarField lhs = ms.pair(bracket(A, ms.designated[i], ms.designated[j]));
      ScalarField rhs = poisson_bracket(P, ms.pair(ms.designated[i]),
                                        ms.pair(ms.designated[j]));
      out.residuals.push_back(simplify(lhs.f - rhs.f));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Flat-section classification for a connection: a candidate al is flat when
// nabla_{d_i} al = 0 for every i.  For pairs of flat candidates the bracket
// should again be flat if the flat sections close under the bracket.

struct FlatCandidateResult {
  std::vector<Expr> residuals;  // all (i, b) components of nabla al

  double eval_max(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& e : residuals)
      worst = std::max(worst, std::abs(eval(e, x)));
    return worst;
  }
};

inline FlatCandidateResult flat_residual(const Connection& conn,
                                         const ASection& al) {
  FlatCandidateResult out;
  for (int i = 0; i < conn.alg.dim(); ++i) {
    ASection na = nabla_coord(conn, i, al);
    for (const auto& e : na.comps) out.residuals.push_back(e);
  }
  return out;
}

inline FlatCandidateResult flat_closure_residual(const Connection& conn,
                                                 const ASection& al,
                                                 const ASection& be) {
  return flat_residual(conn, bracket(conn.alg, al, be));
}

}  // namespace momsec
