#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <momsec/reduction.hpp>

#include "test_fixtures.hpp"
#include "test_util.hpp"

using namespace momsec;
using fixtures::K;
using fixtures::X;
using testutil::Rng;

namespace {

struct RotationFixture {
  PoissonChart P;
  MomentumSection ms;
};

RotationFixture rotation() {
  Algebroid A = fixtures::so3_action_algebroid();
  PoissonChart P = fixtures::canonical_poisson(A.chart);
  return {P, MomentumSection(Connection::flat(A), fixtures::angular_momentum())};
}

Expr norm_sq(int offset, int count) {
  Expr e = K(0.0);
  for (int i = 0; i < count; ++i) e = e + X(offset + i) * X(offset + i);
  return simplify(e);
}

Expr dot_qp() {
  Expr e = K(0.0);
  for (int i = 0; i < 3; ++i) e = e + X(i) * X(3 + i);
  return simplify(e);
}

double cross_norm(const std::vector<double>& z) {
  double qxp[3] = {z[1] * z[5] - z[2] * z[4], z[2] * z[3] - z[0] * z[5],
                   z[0] * z[4] - z[1] * z[3]};
  return std::sqrt(qxp[0] * qxp[0] + qxp[1] * qxp[1] + qxp[2] * qxp[2]);
}

// rank-2 algebroid on canonical R^4 whose distribution misses the direction
// Pi^sharp needs: rho(e_1) = d/dq1, rho(e_2) = 0, mu = (-p1, p2)
struct NarrowFixture {
  PoissonChart P;
  MomentumSection ms;
};

NarrowFixture narrow() {
  Chart chart({"q1", "q2", "p1", "p2"});
  PoissonChart P = fixtures::canonical_poisson(chart);
  std::vector<Expr> anchor(4 * 2, K(0.0));
  anchor[0 * 2 + 0] = K(1.0);  // rho(e_1) = d/dq1
  Algebroid A(chart, 2, std::move(anchor), std::vector<Expr>(8, K(0.0)));
  return {P, MomentumSection(Connection::flat(A), {neg(X(2)), X(3)})};
}

}  // namespace

TEST_CASE("newton projection converges to a collinear configuration") {
  RotationFixture fx = rotation();
  LevelProjector lp(fx.ms);
  LevelSetPoint z = lp.project({1.0, 0.0, 0.0, 0.9, 0.01, 0.0}, 1e-12);
  REQUIRE(z.accepted);
  CHECK(z.mu_norm <= 1e-12);
  CHECK(cross_norm(z.x) <= 1e-11);     // q x p is exactly the section
  CHECK_FALSE(z.regular);              // dJ has rank 2 < 3 on the level set
  CHECK(z.iterations > 0);
}

TEST_CASE("newton projection returns an on-level seed unchanged") {
  RotationFixture fx = rotation();
  std::vector<double> seed{0.4, 0.0, 0.0, -0.7, 0.0, 0.0};  // parallel q, p
  LevelSetPoint z = newton_project(fx.ms, seed, 1e-10);
  REQUIRE(z.accepted);
  CHECK(z.iterations == 0);
  CHECK(z.x == seed);
}

TEST_CASE("newton projection reports failure when no zero exists") {
  Chart chart({"q"});
  Algebroid A(chart, 1, {K(0.0)}, {K(0.0)});
  MomentumSection ms(Connection::flat(A),
                     {simplify(K(1.0) + X(0) * X(0))});
  LevelSetPoint z = newton_project(ms, {0.5}, 1e-10, 50);
  CHECK_FALSE(z.accepted);
  CHECK(z.mu_norm >= 1.0);
  CHECK(z.x.size() == 1);  // last iterate is still reported
}

TEST_CASE("newton projection solves a linear system in one step") {
  // mu = (-q, -p, 0) on (q, p, y): the pseudo-inverse step zeroes q and p
  // and leaves the level coordinate alone.
  Chart chart({"q", "p", "y"});
  std::vector<Expr> anchor(3 * 3, K(0.0));
  Algebroid A(chart, 3, std::move(anchor),
              std::vector<Expr>(27, K(0.0)));
  MomentumSection ms(Connection::flat(A), {neg(X(0)), neg(X(1)), K(0.0)});
  LevelSetPoint z = newton_project(ms, {0.8, -0.3, 0.6});
  REQUIRE(z.accepted);
  CHECK(z.iterations == 1);
  CHECK(std::abs(z.x[0]) <= 1e-15);
  CHECK(std::abs(z.x[1]) <= 1e-15);
  CHECK(z.x[2] == 0.6);
  CHECK_FALSE(z.regular);               // the zero row keeps rank below 3
  CHECK(z.rank_deficient_steps == 1);   // pseudo-inverse handled it
}

TEST_CASE("accepted regular points have complementary tangent dimensions") {
  Chart chart({"q", "p"});
  PoissonChart P = fixtures::canonical_poisson(chart);
  Algebroid A(chart, 1, {K(-1.0), K(0.0)}, {K(0.0)});
  MomentumSection ms(Connection::flat(A), {X(1)});
  LevelSetPoint z = newton_project(ms, {0.7, 0.4});
  REQUIRE(z.accepted);
  CHECK(z.regular);
  PointGeometry g = point_geometry(ms, P, z);
  CHECK(g.level_tangent.dim() == 1);  // n - r = 2 - 1
  CHECK(g.distribution.dim() == 1);
}

TEST_CASE("projection validates its inputs") {
  RotationFixture fx = rotation();
  LevelProjector lp(fx.ms);
  CHECK_THROWS_AS(lp.project({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(lp.project({0, 0, 0, 0, 0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("zero anchor yields a trivial distribution and full annihilator") {
  Chart chart({"q", "p"});
  PoissonChart P = fixtures::canonical_poisson(chart);
  Algebroid A(chart, 1, {K(0.0), K(0.0)}, {K(0.0)});
  MomentumSection ms(Connection::flat(A), {X(1)});
  LevelSetPoint z = newton_project(ms, {0.3, 0.2});
  PointGeometry g = point_geometry(ms, P, z);
  CHECK(g.distribution.dim() == 0);
  CHECK(g.distribution_annihilator.dim() == 2);
  CHECK(g.sharp_annihilator.cols == 2);
}

TEST_CASE("collinear rotation points have a two-dimensional distribution") {
  RotationFixture fx = rotation();
  LevelProjector lp(fx.ms);
  for (double c : {0.5, -1.2, 2.0}) {
    LevelSetPoint z = lp.project({c, 0.0, 0.0, 0.8 * c, 0.0, 0.0});
    REQUIRE(z.accepted);
    PointGeometry g = point_geometry(fx.ms, fx.P, z);
    CHECK(g.distribution.dim() == 2);
    CHECK(g.level_tangent.dim() == 4);
    CHECK(g.distribution_annihilator.dim() == 4);
  }
}

TEST_CASE("sharp annihilator columns are recomputable from the bivector") {
  RotationFixture fx = rotation();
  LevelSetPoint z = newton_project(fx.ms, {1.0, 0.2, -0.4, 0.5, 0.1, -0.2});
  REQUIRE(z.accepted);
  PointGeometry g = point_geometry(fx.ms, fx.P, z);
  Matrix pi = eval_bivector(fx.P, z.x);
  for (int j = 0; j < g.sharp_annihilator.cols; ++j) {
    std::vector<double> w = pi * g.distribution_annihilator.basis.col(j);
    for (int i = 0; i < 6; ++i)
      CHECK(std::abs(w[i] - g.sharp_annihilator.at(i, j)) <= 1e-14);
  }
}

TEST_CASE("reducibility holds at rotation level-set points in both forms") {
  RotationFixture fx = rotation();
  LevelProjector lp(fx.ms);
  Rng rng(1009);
  int checked = 0;
  for (int t = 0; t < 12; ++t) {
    LevelSetPoint z = lp.project(testutil::random_point(rng, 6, -1.5, 1.5));
    if (!z.accepted) continue;
    double scale = 0.0;
    for (double c : z.x) scale = std::max(scale, std::abs(c));
    if (scale < 1e-3) continue;  // skip projections that fell into the origin
    PointGeometry g = point_geometry(fx.ms, fx.P, z);
    auto direct = check_reducibility(g);
    auto dual = check_dual_form(g);
    CHECK(direct.first);
    CHECK(direct.second <= 1e-9);
    CHECK(dual.first);
    CHECK(dual.second <= 1e-9);
    ++checked;
  }
  REQUIRE(checked >= 5);
}

TEST_CASE("full distribution makes reducibility trivial") {
  Chart chart({"q", "p"});
  PoissonChart P = fixtures::canonical_poisson(chart);
  std::vector<Expr> anchor{K(1.0), K(0.0), K(0.0), K(1.0)};
  Algebroid A(chart, 2, std::move(anchor), std::vector<Expr>(8, K(0.0)));
  MomentumSection ms(Connection::flat(A), {K(0.0), K(0.0)});
  LevelSetPoint z = newton_project(ms, {0.4, -0.9});
  PointGeometry g = point_geometry(ms, P, z);
  CHECK(g.distribution_annihilator.dim() == 0);
  auto direct = check_reducibility(g);
  auto dual = check_dual_form(g);
  CHECK(direct.first);
  CHECK(direct.second == 0.0);
  CHECK(dual.first);
  CHECK(dual.second == 0.0);
}

TEST_CASE("a too-narrow distribution fails reducibility in both forms") {
  NarrowFixture fx = narrow();
  LevelSetPoint z = newton_project(fx.ms, {0.7, -0.3, 0.2, 0.5});
  REQUIRE(z.accepted);
  PointGeometry g = point_geometry(fx.ms, fx.P, z);
  // by hand at (q1, q2, 0, 0): T = span{dq1, dq2 directions},
  // D = span{d/dq1}, and Pi^sharp(ann D) contains -d/dp2, which is not in
  // T + D; both routes must see it.
  auto direct = check_reducibility(g);
  auto dual = check_dual_form(g);
  CHECK_FALSE(direct.first);
  CHECK(direct.second > 0.5);
  CHECK_FALSE(dual.first);
  CHECK(dual.second > 0.5);
}

TEST_CASE("direct and dual reducibility verdicts agree on random data") {
  Rng rng(1013);
  int holds = 0, fails = 0;
  for (int t = 0; t < 50; ++t) {
    int n = 2 + static_cast<int>(rng.next_int(5));  // ambient dim 2..6
    int r = 1 + static_cast<int>(rng.next_int(4));
    auto ientry = [&]() { return static_cast<double>(rng.next_int(5)) - 2.0; };
    Matrix anchor(n, r);
    for (double& v : anchor.a) v = ientry();
    Matrix jac(1 + static_cast<int>(rng.next_int(3)), n);
    for (double& v : jac.a) v = ientry();
    Matrix pi(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        pi.at(i, j) = ientry();
        pi.at(j, i) = -pi.at(i, j);
      }
    PointGeometry g;
    g.x.assign(n, 0.0);
    g.distribution = column_space(anchor);
    g.level_tangent = nullspace(jac);
    g.distribution_annihilator = annihilator(g.distribution);
    g.sharp_annihilator = Matrix(n, g.distribution_annihilator.dim());
    for (int j = 0; j < g.distribution_annihilator.dim(); ++j)
      g.sharp_annihilator.set_col(
          j, pi * g.distribution_annihilator.basis.col(j));
    auto direct = check_reducibility(g);
    auto dual = check_dual_form(g);
    CHECK(direct.first == dual.first);
    (direct.first ? holds : fails) += 1;
  }
  // the sweep must exercise both outcomes to mean anything
  CHECK(holds > 0);
  CHECK(fails > 0);
}

TEST_CASE("reducibility verdict survives a constant change of frame") {
  RotationFixture fx = rotation();
  const Algebroid& A = fx.ms.alg();
  // recombine the generators by an invertible constant matrix
  double m[3][3] = {{2, 1, 0}, {0, 1, 0}, {1, 0, 3}};
  std::vector<Expr> mixed(6 * 3, K(0.0));
  for (int i = 0; i < 6; ++i)
    for (int a = 0; a < 3; ++a) {
      Expr e = K(0.0);
      for (int b = 0; b < 3; ++b) e = e + K(m[b][a]) * A.anchor[i * 3 + b];
      mixed[i * 3 + a] = simplify(e);
    }
  Algebroid B(A.chart, 3, std::move(mixed), A.structure);
  MomentumSection ms2(Connection::flat(B), fixtures::angular_momentum());

  LevelProjector lp(fx.ms);
  LevelSetPoint z = lp.project({1.0, 0.0, 0.0, 0.9, 0.01, 0.0});
  REQUIRE(z.accepted);
  PointGeometry g1 = point_geometry(fx.ms, fx.P, z);
  PointGeometry g2 = point_geometry(ms2, fx.P, z);
  CHECK(g1.distribution.dim() == g2.distribution.dim());
  CHECK(check_reducibility(g1).first == check_reducibility(g2).first);
  CHECK(check_dual_form(g1).first == check_dual_form(g2).first);
}

TEST_CASE("rotation invariants pass the directional precondition everywhere") {
  RotationFixture fx = rotation();
  Expr f = norm_sq(0, 3), g = norm_sq(3, 3), h = dot_qp();
  for (const Expr* fn : {&f, &g, &h}) {
    auto dirs = detail::directional_derivatives(fx.ms.alg(), *fn);
    for (const auto& e : dirs) CHECK(identical(e, K(0.0)));
  }
}

TEST_CASE("invariance of the bracket of two rotation invariants") {
  RotationFixture fx = rotation();
  InvariantPair pr =
      make_invariant_pair(fx.P, fx.ms.alg(), norm_sq(0, 3), norm_sq(3, 3));
  LevelProjector lp(fx.ms);
  Rng rng(1019);
  int checked = 0;
  for (int t = 0; t < 8; ++t) {
    LevelSetPoint z = lp.project(testutil::random_point(rng, 6, -1.5, 1.5));
    if (!z.accepted) continue;
    CHECK(invariant_pair_violation(pr, z.x).empty());
    CHECK(invariance_residual(pr, z.x) <= 1e-10);
    ++checked;
  }
  REQUIRE(checked >= 4);
}

TEST_CASE("the bracket of a function with itself is invariant for free") {
  RotationFixture fx = rotation();
  Expr f = dot_qp();
  InvariantPair pr = make_invariant_pair(fx.P, fx.ms.alg(), f, f);
  CHECK(identical(pr.bracket, K(0.0)));
  CHECK(invariance_residual(pr, {0.3, 0.1, -0.2, 0.5, 0.4, 0.6}) == 0.0);
}

TEST_CASE("a non-invariant function is rejected with the failing generator") {
  RotationFixture fx = rotation();
  InvariantPair pr = make_invariant_pair(fx.P, fx.ms.alg(), X(0), norm_sq(3, 3));
  // generic, non-axis-aligned point: coordinate functions move under rotation
  std::string why = invariant_pair_violation(pr, {0.3, -0.7, 0.4, 0.9, 0.2, -0.5});
  REQUIRE_FALSE(why.empty());
  CHECK(why.find("df(rho(e_") != std::string::npos);

  // swapped order reports the other slot
  InvariantPair rev = make_invariant_pair(fx.P, fx.ms.alg(), norm_sq(3, 3), X(0));
  std::string why2 =
      invariant_pair_violation(rev, {0.3, -0.7, 0.4, 0.9, 0.2, -0.5});
  REQUIRE_FALSE(why2.empty());
  CHECK(why2.find("dg(rho(e_") != std::string::npos);
}

TEST_CASE("reduced bracket of the squared norms is four times q dot p") {
  RotationFixture fx = rotation();
  InvariantPair pr =
      make_invariant_pair(fx.P, fx.ms.alg(), norm_sq(0, 3), norm_sq(3, 3));
  LevelProjector lp(fx.ms);
  Rng rng(1021);
  for (int t = 0; t < 5; ++t) {
    LevelSetPoint z = lp.project(testutil::random_point(rng, 6, -1.5, 1.5));
    if (!z.accepted) continue;
    double qp = 0.0;
    for (int i = 0; i < 3; ++i) qp += z.x[i] * z.x[3 + i];
    CHECK(std::abs(reduced_bracket_value(pr, z.x) - 4.0 * qp) <= 1e-12);
  }
}

TEST_CASE("reduced bracket with a constant function vanishes") {
  RotationFixture fx = rotation();
  InvariantPair pr = make_invariant_pair(fx.P, fx.ms.alg(), K(3.5), dot_qp());
  CHECK(identical(pr.bracket, K(0.0)));
}

TEST_CASE("reduced bracket values are constant along anchor orbits") {
  RotationFixture fx = rotation();
  InvariantPair pr =
      make_invariant_pair(fx.P, fx.ms.alg(), norm_sq(0, 3), norm_sq(3, 3));
  LevelProjector lp(fx.ms);
  LevelSetPoint z = lp.project({1.0, 0.2, -0.3, 0.7, 0.15, -0.2});
  REQUIRE(z.accepted);
  double v0 = reduced_bracket_value(pr, z.x);
  for (int a = 0; a < 3; ++a) {
    VectorField flow =
        anchor_of(fx.ms.alg(), ASection::frame(fx.ms.alg(), a));
    std::vector<double> moved = rk4_step(flow, z.x, 0.1);
    LevelSetPoint z2 = lp.project(moved);
    REQUIRE(z2.accepted);
    CHECK(std::abs(reduced_bracket_value(pr, z2.x) - v0) <= 1e-6);
  }
}

TEST_CASE("one rk4 step tracks the exact rotation flow") {
  Chart chart({"q", "p"});
  VectorField rot(chart, {neg(X(1)), X(0)});
  std::vector<double> out = rk4_step(rot, {1.0, 0.0}, 0.1);
  CHECK(std::abs(out[0] - std::cos(0.1)) <= 1e-7);
  CHECK(std::abs(out[1] - std::sin(0.1)) <= 1e-7);
  CHECK_THROWS_AS(rk4_step(rot, {1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("extensions differing by the squared section agree on brackets") {
  RotationFixture fx = rotation();
  Expr g = dot_qp();
  Expr jsq = K(0.0);
  for (const auto& j : fixtures::angular_momentum()) jsq = jsq + j * j;
  ExtensionTriple tr = make_extension_triple(fx.P, fx.ms.alg(), norm_sq(0, 3),
                                             g, simplify(g + jsq));
  LevelProjector lp(fx.ms);
  Rng rng(1031);
  std::vector<LevelSetPoint> pts;
  while (pts.size() < 6) {
    LevelSetPoint z = lp.project(testutil::random_point(rng, 6, -1.5, 1.5));
    if (z.accepted) pts.push_back(z);
  }
  std::vector<ExtensionOutcome> outcomes;
  double worst = extension_independence(tr, pts, 1e-8, 1e-8, &outcomes);
  for (const auto& o : outcomes) CHECK(o.ok);
  CHECK(worst <= 1e-8);
}

TEST_CASE("identical extensions give exactly zero difference") {
  RotationFixture fx = rotation();
  Expr g = dot_qp();
  ExtensionTriple tr =
      make_extension_triple(fx.P, fx.ms.alg(), norm_sq(0, 3), g, g);
  ExtensionOutcome o = extension_difference(tr, {0.4, 0, 0, 0.3, 0, 0});
  REQUIRE(o.ok);
  CHECK(o.difference == 0.0);
}

TEST_CASE("an extension moved by the flow is rejected by name") {
  // one generator pointing across the level set {p = 0}: q + p agrees with q
  // there but its differential does not annihilate the distribution
  Chart chart({"q", "p"});
  PoissonChart P = fixtures::canonical_poisson(chart);
  Algebroid A(chart, 1, {K(0.0), K(1.0)}, {K(0.0)});  // rho(e_1) = d/dp
  MomentumSection ms(Connection::flat(A), {X(1)});
  ExtensionTriple tr =
      make_extension_triple(P, A, X(0), X(0), simplify(X(0) + X(1)));
  ExtensionOutcome o = extension_difference(tr, {0.7, 0.0});
  REQUIRE_FALSE(o.ok);
  CHECK(o.violation.find("g_alt") != std::string::npos);
  CHECK(o.violation.find("e_1") != std::string::npos);

  // off the level set the agreement precondition fires first
  ExtensionOutcome off = extension_difference(tr, {0.7, 0.5});
  REQUIRE_FALSE(off.ok);
  CHECK(off.violation.find("extensions differ") != std::string::npos);
}
