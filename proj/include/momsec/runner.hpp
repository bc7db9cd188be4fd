#pragma once

// Scenario runner.  Stages, in order, each gated on the previous ones:
//
//   1. sample points (deterministic in the seed, rejecting declared loci)
//   2. structure validation   antisymmetry + Jacobi for a bivector,
//                             antisymmetry + closedness + nondegeneracy for
//                             a symplectic form
//   3. algebroid validation   d^2 = 0 on functions and frame covectors,
//                             antisymmetry of the structure functions
//   4. condition checks       the five bivector-side checks, plus the three
//                             form-side checks for symplectic scenarios
//   5. flat-section classification (when candidates are declared)
//   6. level-set work         Newton projection, characteristic geometry,
//                             reducibility in two forms, invariants,
//                             reduced-bracket values, orbit constancy,
//                             extension independence
//
// A stage that cannot run is reported as "skipped (<reason>)"; conditions
// and reduction never execute against a structure or algebroid that failed
// validation, and the invariance stage is skipped when the compatibility
// condition failed (it is a hypothesis of the invariance statement).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reduction.hpp"
#include "report.hpp"
#include "scenario.hpp"
#include "symplectic.hpp"

namespace momsec {

struct RunOverrides {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_on_level;
  std::optional<double> tol_subspace;
  std::optional<double> tol_residual;
};

namespace detail {

// splitmix64: tiny, seedable, identical across platforms, which is what
// byte-identical reports need.
struct SampleRng {
  std::uint64_t state;
  explicit SampleRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
};

inline double point_distance(const std::vector<double>& a,
                             const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool near_excluded(const SamplingSpec& s,
                          const std::vector<double>& x) {
  for (const auto& locus : s.exclude)
    if (point_distance(locus, x) < s.exclusion_radius) return true;
  return false;
}

inline std::vector<std::vector<double>> sample_points(const SamplingSpec& s,
                                                      int dim) {
  SampleRng rng(s.seed);
  std::vector<std::vector<double>> pts;
  pts.reserve(s.count);
  long attempts = 0;
  const long cap = 10000L * std::max(1, s.count);
  while (static_cast<int>(pts.size()) < s.count) {
    if (++attempts > cap)
      throw ScenarioError(
          "sampling: exclusion zones reject nearly the whole box");
    std::vector<double> x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.uniform(s.box_lo, s.box_hi);
    if (near_excluded(s, x)) continue;
    pts.push_back(std::move(x));
  }
  return pts;
}

// Evaluate one expression family over all points: max-abs per point, global
// max, and the RMS over every (point, component) sample.
inline CheckLine evaluate_line(const std::string& id,
                               const std::vector<Expr>& exprs,
                               const std::vector<std::vector<double>>& pts,
                               double tol) {
  CheckLine line;
  line.id = id;
  line.points = static_cast<int>(pts.size());
  line.components = static_cast<int>(exprs.size());
  double sumsq = 0.0;
  long samples = 0;
  for (const auto& x : pts) {
    double worst = 0.0;
    for (const auto& e : exprs) {
      double v = eval(e, x);
      worst = std::max(worst, std::abs(v));
      sumsq += v * v;
      ++samples;
    }
    line.per_point.push_back(worst);
    line.value = std::max(line.value, worst);
  }
  line.rms = samples > 0 ? std::sqrt(sumsq / static_cast<double>(samples))
                         : 0.0;
  line.pass = line.value <= tol;
  return line;
}

inline std::vector<Expr> bivector_antisymmetry_exprs(const PoissonChart& P) {
  std::vector<Expr> out;
  for (int i = 0; i < P.dim(); ++i)
    for (int j = i; j < P.dim(); ++j)
      out.push_back(simplify(P.at(i, j) + P.at(j, i)));
  return out;
}

inline std::vector<Expr> jacobi_exprs(const PoissonChart& P) {
  std::vector<Expr> out;
  for (int i = 0; i < P.dim(); ++i)
    for (int j = i + 1; j < P.dim(); ++j)
      for (int k = j + 1; k < P.dim(); ++k)
        out.push_back(schouten_component(P, i, j, k));
  return out;
}

inline std::vector<Expr> form_antisymmetry_exprs(const SymplecticChart& S) {
  std::vector<Expr> out;
  for (int i = 0; i < S.dim(); ++i)
    for (int j = i; j < S.dim(); ++j)
      out.push_back(simplify(S.at(i, j) + S.at(j, i)));
  return out;
}

inline std::vector<Expr> closedness_exprs(const SymplecticChart& S) {
  std::vector<Expr> out;
  for (int i = 0; i < S.dim(); ++i)
    for (int j = i + 1; j < S.dim(); ++j)
      for (int k = j + 1; k < S.dim(); ++k)
        out.push_back(simplify(diff(S.at(j, k), i) + diff(S.at(k, i), j) +
                               diff(S.at(i, j), k)));
  return out;
}

inline std::vector<Expr> structure_antisymmetry_exprs(const Algebroid& A) {
  std::vector<Expr> out;
  for (int a = 0; a < A.rank; ++a)
    for (int b = a; b < A.rank; ++b)
      for (int c = 0; c < A.rank; ++c)
        out.push_back(simplify(A.c(a, b, c) + A.c(b, a, c)));
  return out;
}

// Orbit constancy is an absolute statement about one RK4 step of size 0.1,
// so its tolerance is fixed rather than scenario-tunable.
constexpr double kOrbitStep = 0.1;
constexpr double kOrbitTol = 1e-6;

inline ExtensionReport run_extension(const Scenario& s,
                                     const ExtensionSpec& ext,
                                     const LevelProjector& proj,
                                     const std::vector<LevelSetPoint>& zs) {
  ExtensionReport er;
  er.name = ext.name;
  InvariantPair pr = make_invariant_pair(s.poisson, s.alg(), ext.f, ext.g);
  const LevelSetPoint* first_ok = nullptr;
  for (const auto& z : zs) {
    std::string violation = invariant_pair_violation(pr, z.x, s.tol.subspace);
    if (!violation.empty()) {
      ++er.invariance_rejections;
      if (er.invariance_status == "ok")
        er.invariance_status = std::move(violation);
      continue;
    }
    ++er.invariance_points;
    er.invariance_max =
        std::max(er.invariance_max, invariance_residual(pr, z.x));
    double b = reduced_bracket_value(pr, z.x);
    if (!er.bracket_seen) {
      er.bracket_seen = true;
      er.bracket_min = er.bracket_max = b;
      first_ok = &z;
    } else {
      er.bracket_min = std::min(er.bracket_min, b);
      er.bracket_max = std::max(er.bracket_max, b);
    }
  }
  er.invariance_pass =
      er.invariance_points > 0 && er.invariance_max <= s.tol.subspace;

  if (!first_ok) {
    er.orbit_status = "skipped (no point passed the invariance precondition)";
  } else {
    double v0 = reduced_bracket_value(pr, first_ok->x);
    for (int a = 0; a < s.alg().rank; ++a) {
      VectorField gen = anchor_of(s.alg(), ASection::frame(s.alg(), a));
      std::vector<double> moved = rk4_step(gen, first_ok->x, kOrbitStep);
      LevelSetPoint back = proj.project(std::move(moved), s.tol.on_level, 50);
      if (!back.accepted) {
        er.orbit_status =
            "re-projection failed after flowing along generator e_" +
            std::to_string(a + 1);
        er.orbit_pass = false;
        break;
      }
      er.orbit_drift = std::max(
          er.orbit_drift, std::abs(reduced_bracket_value(pr, back.x) - v0));
    }
    if (er.orbit_pass) er.orbit_pass = er.orbit_drift <= kOrbitTol;
  }

  if (ext.g_alt) {
    er.has_alternative = true;
    ExtensionTriple tr =
        make_extension_triple(s.poisson, s.alg(), ext.f, ext.g, *ext.g_alt);
    std::vector<ExtensionOutcome> outcomes;
    er.independence_max = extension_independence(
        tr, zs, s.tol.subspace, s.tol.subspace, &outcomes);
    for (const auto& o : outcomes) {
      if (o.ok) {
        ++er.independence_points;
      } else {
        ++er.independence_rejections;
        if (er.independence_status == "ok")
          er.independence_status = o.violation;
      }
    }
    er.independence_pass = er.independence_points > 0 &&
                           er.independence_max <= s.tol.subspace;
  }
  return er;
}

}  // namespace detail

inline Report run_scenario(const Scenario& scenario,
                           const RunOverrides& ov = {}) {
  Scenario s = scenario;
  if (ov.samples) s.sampling.count = *ov.samples;
  if (ov.seed) s.sampling.seed = *ov.seed;
  if (ov.tol_on_level) s.tol.on_level = *ov.tol_on_level;
  if (ov.tol_subspace) s.tol.subspace = *ov.tol_subspace;
  if (ov.tol_residual) s.tol.residual = *ov.tol_residual;
  if (s.sampling.count < 1)
    throw ScenarioError("sampling.count must be at least 1");
  if (s.tol.on_level <= 0.0 || s.tol.subspace <= 0.0 || s.tol.residual <= 0.0)
    throw ScenarioError("tolerances must be positive");

  Report rep;
  rep.name = s.name;
  rep.structure_kind = s.is_symplectic() ? "symplectic" : "poisson";
  rep.sample_count = s.sampling.count;
  rep.seed = s.sampling.seed;
  rep.box_lo = s.sampling.box_lo;
  rep.box_hi = s.sampling.box_hi;
  rep.tol_on_level = s.tol.on_level;
  rep.tol_subspace = s.tol.subspace;
  rep.tol_residual = s.tol.residual;
  rep.sample_points = detail::sample_points(s.sampling, s.chart.dim());
  const auto& pts = rep.sample_points;
  const double rtol = s.tol.residual;

  // structure validation
  if (s.is_symplectic()) {
    const SymplecticChart& W = *s.symplectic;
    rep.structure.checks.push_back(detail::evaluate_line(
        "antisymmetry", detail::form_antisymmetry_exprs(W), pts, rtol));
    rep.structure.checks.push_back(detail::evaluate_line(
        "closedness", detail::closedness_exprs(W), pts, rtol));
    CheckLine nd;
    nd.id = "nondegeneracy";
    nd.metric = "min_singular_ratio";
    nd.points = static_cast<int>(pts.size());
    nd.value = std::numeric_limits<double>::infinity();
    for (const auto& x : pts) {
      double ratio = nondegeneracy_ratio(W, x);
      nd.per_point.push_back(ratio);
      nd.value = std::min(nd.value, ratio);
    }
    nd.pass = nd.value >= 1e-6;
    rep.structure.checks.push_back(std::move(nd));
  } else {
    rep.structure.checks.push_back(detail::evaluate_line(
        "antisymmetry", detail::bivector_antisymmetry_exprs(s.poisson), pts,
        rtol));
    rep.structure.checks.push_back(detail::evaluate_line(
        "jacobi", detail::jacobi_exprs(s.poisson), pts, rtol));
  }
  const bool structure_ok = rep.structure.pass();

  // algebroid validation (self-contained, so it runs regardless)
  {
    DSquaredComponents d2 = d_squared_components(s.alg());
    rep.algebroid.checks.push_back(detail::evaluate_line(
        "anchor_morphism", d2.on_functions, pts, rtol));
    rep.algebroid.checks.push_back(detail::evaluate_line(
        "jacobi_identity", d2.on_covectors, pts, rtol));
    rep.algebroid.checks.push_back(detail::evaluate_line(
        "structure_antisymmetry",
        detail::structure_antisymmetry_exprs(s.alg()), pts, rtol));
  }
  const bool algebroid_ok = rep.algebroid.pass();

  // condition checks
  bool compat_ok = false;
  if (!structure_ok) {
    rep.conditions.status = "skipped (structure validation failed)";
  } else if (!algebroid_ok) {
    rep.conditions.status = "skipped (algebroid validation failed)";
  } else {
    auto add = [&](const ResidualCheck& c) {
      rep.conditions.checks.push_back(
          detail::evaluate_line(c.id, c.residuals, pts, rtol));
    };
    add(check_momentum(s.ms, s.poisson));
    add(check_pi_parallel(s.ms, s.poisson));
    add(check_bracket_compat(s.ms, s.poisson));
    add(check_compatibility(s.ms));
    add(check_lie_hom(s.ms, s.poisson));
    if (s.is_symplectic()) {
      SymplecticScenario ss(*s.symplectic, s.ms);
      add(check_momentum_omega(ss));
      add(check_symplectically_anchored(ss));
      add(check_bracket_compat_omega(ss));
    }
    for (const auto& c : rep.conditions.checks)
      if (c.id == "compatibility") compat_ok = c.pass;
  }

  // flat-section classification
  if (!s.flat_candidates.empty()) {
    FlatReport fr;
    if (!algebroid_ok) {
      fr.status = "skipped (algebroid validation failed)";
    } else {
      for (std::size_t i = 0; i < s.flat_candidates.size(); ++i) {
        FlatCandidateResult res =
            flat_residual(s.ms.conn, s.flat_candidates[i]);
        double worst = 0.0;
        for (const auto& x : pts) worst = std::max(worst, res.eval_max(x));
        fr.candidates.push_back(
            {static_cast<int>(i), worst <= rtol, worst});
      }
      for (std::size_t i = 0; i < s.flat_candidates.size(); ++i)
        for (std::size_t j = i + 1; j < s.flat_candidates.size(); ++j) {
          if (!fr.candidates[i].flat || !fr.candidates[j].flat) continue;
          FlatCandidateResult res = flat_closure_residual(
              s.ms.conn, s.flat_candidates[i], s.flat_candidates[j]);
          double worst = 0.0;
          for (const auto& x : pts) worst = std::max(worst, res.eval_max(x));
          fr.closures.push_back({static_cast<int>(i), static_cast<int>(j),
                                 worst, worst <= rtol});
        }
    }
    rep.flat = std::move(fr);
  }

  // level-set work
  ReductionReport& red = rep.reduction;
  if (!structure_ok) {
    red.status = "skipped (structure validation failed)";
  } else if (!algebroid_ok) {
    red.status = "skipped (algebroid validation failed)";
  } else {
    LevelProjector proj(s.ms);
    std::vector<LevelSetPoint> accepted;
    std::vector<std::vector<double>> all_seeds = s.seeds;
    all_seeds.insert(all_seeds.end(), pts.begin(), pts.end());
    red.seeds = static_cast<int>(all_seeds.size());
    for (const auto& seed : all_seeds) {
      LevelSetPoint z = proj.project(seed, s.tol.on_level, 50);
      if (!z.accepted) {
        ++red.failed;
        continue;
      }
      if (detail::near_excluded(s.sampling, z.x)) {
        ++red.near_singular;
        continue;
      }
      accepted.push_back(std::move(z));
    }
    red.accepted = static_cast<int>(accepted.size());
    if (accepted.empty()) {
      red.status = "skipped (no seed converged to the level set)";
    } else {
      for (const auto& z : accepted) {
        PointGeometry g = point_geometry(s.ms, s.poisson, z, s.tol.subspace);
        auto [reducible, rres] = check_reducibility(g, s.tol.subspace);
        auto [dual, dres] = check_dual_form(g, s.tol.subspace);
        PointReport p;
        p.x = z.x;
        p.mu_norm = z.mu_norm;
        p.iterations = z.iterations;
        p.regular = z.regular;
        p.dim_distribution = g.distribution.dim();
        p.dim_level_tangent = g.level_tangent.dim();
        p.reducible = reducible;
        p.reducibility_residual = rres;
        p.dual_holds = dual;
        p.dual_residual = dres;
        p.verdicts_agree = reducible == dual;
        red.reducible_all = red.reducible_all && reducible;
        red.reducibility_worst = std::max(red.reducibility_worst, rres);
        red.dual_all = red.dual_all && dual;
        red.dual_worst = std::max(red.dual_worst, dres);
        red.agreement = red.agreement && p.verdicts_agree;
        red.points.push_back(std::move(p));
      }
      if (!compat_ok) {
        red.invariants_status = "skipped (compatibility condition failed)";
      } else if (s.extensions.empty()) {
        red.invariants_status = "skipped (no extensions declared)";
      } else {
        for (const auto& ext : s.extensions)
          red.extensions.push_back(
              detail::run_extension(s, ext, proj, accepted));
      }
    }
  }

  // recorded assumptions
  rep.assumptions.push_back(
      "orbit-space smoothness: the quotient of the level set by the anchor "
      "distribution is assumed to be a smooth manifold with submersion "
      "projection; no pointwise computation certifies this");
  double mu_obstruction = 0.0;
  for (const auto& x : pts)
    for (const auto& m : s.ms.mu)
      mu_obstruction = std::max(mu_obstruction, std::abs(eval(m, x)));
  rep.assumptions.push_back(
      "compatibility quantifier: the compatibility and lie_hom conditions "
      "range over the designated sections only; the any-section reading "
      "would force every momentum pairing with a covariant derivative to "
      "vanish, hence the components themselves (sampled obstruction "
      "max|mu| = " +
      fmt12(mu_obstruction) + ")");
  return rep;
}

}  // namespace momsec
