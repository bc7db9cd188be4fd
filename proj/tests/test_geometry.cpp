#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <momsec/geometry.hpp>

#include "test_util.hpp"

using namespace momsec;
using testutil::Rng;

namespace {

Expr C(double v) { return Expr::constant(v); }
Expr X(int i) { return Expr::coord(i); }

// canonical bivector dq_i ^ dp_i on chart (q_1..q_n, p_1..p_n)
PoissonChart canonical_poisson(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  Chart chart(names);
  std::vector<Expr> pi(4 * n * n, C(0.0));
  for (int i = 0; i < n; ++i) {
    pi[i * 2 * n + (n + i)] = C(1.0);
    pi[(n + i) * 2 * n + i] = C(-1.0);
  }
  return PoissonChart(chart, std::move(pi));
}

// linear bivector on the dual of so(3): Pi^{ij} = eps_{ijk} x_k
PoissonChart so3_star() {
  Chart chart({"x1", "x2", "x3"});
  std::vector<Expr> pi(9, C(0.0));
  auto set = [&](int i, int j, Expr e) {
    pi[i * 3 + j] = e;
    pi[j * 3 + i] = simplify(neg(e));
  };
  set(0, 1, X(2));
  set(0, 2, neg(X(1)));
  set(1, 2, X(0));
  return PoissonChart(chart, std::move(pi));
}

ScalarField sf(const PoissonChart& P, const std::string& src) {
  return ScalarField(P.chart, parse(src, P.chart));
}

// Brute-force pairing of a decomposable 2-covector with the bivector:
// <xi ^ eta, Pi> = sum_{k<l} Pi^{kl} (xi_k eta_l - xi_l eta_k).
double wedge_pairing_oracle(const PoissonChart& P, const std::vector<double>& xi,
                            const std::vector<double>& eta,
                            const std::vector<double>& x) {
  double s = 0.0;
  const int n = P.dim();
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l)
      s += eval(P.at(k, l), x) * (xi[k] * eta[l] - xi[l] * eta[k]);
  return s;
}

}  // namespace

TEST_CASE("canonical bracket pins the sign convention") {
  PoissonChart P = canonical_poisson(1);
  ScalarField q = sf(P, "q1"), p = sf(P, "p1");
  Expr b = poisson_bracket(P, q, p).f;
  CHECK(identical(b, C(1.0)));
  Expr bb = poisson_bracket(P, p, q).f;
  CHECK(identical(bb, C(-1.0)));
}

TEST_CASE("bracket is antisymmetric and satisfies Leibniz") {
  PoissonChart P = so3_star();
  Rng rng(404);
  for (int t = 0; t < 10; ++t) {
    ScalarField f(P.chart, testutil::random_poly(rng, 3));
    ScalarField g(P.chart, testutil::random_poly(rng, 3));
    ScalarField h(P.chart, testutil::random_poly(rng, 3));
    auto x = testutil::random_point(rng, 3);

    CHECK(std::abs(eval(poisson_bracket(P, f, f).f, x)) <= 1e-12);
    double anti = eval(poisson_bracket(P, f, g).f, x) +
                  eval(poisson_bracket(P, g, f).f, x);
    CHECK(std::abs(anti) <= 1e-12);

    double lhs = eval(poisson_bracket(P, f, ScalarField(P.chart, g.f * h.f)).f, x);
    double rhs = eval(poisson_bracket(P, f, g).f, x) * eval(h.f, x) +
                 eval(g.f, x) * eval(poisson_bracket(P, f, h).f, x);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("bracket satisfies Jacobi on a linear Poisson structure") {
  PoissonChart P = so3_star();
  Rng rng(405);
  for (int t = 0; t < 10; ++t) {
    ScalarField f(P.chart, testutil::random_poly(rng, 3));
    ScalarField g(P.chart, testutil::random_poly(rng, 3));
    ScalarField h(P.chart, testutil::random_poly(rng, 3));
    auto x = testutil::random_point(rng, 3);
    double cyc =
        eval(poisson_bracket(P, f, poisson_bracket(P, g, h)).f, x) +
        eval(poisson_bracket(P, g, poisson_bracket(P, h, f)).f, x) +
        eval(poisson_bracket(P, h, poisson_bracket(P, f, g)).f, x);
    CHECK(std::abs(cyc) <= 1e-9);
  }
}

TEST_CASE("so(3) dual: structure bracket reproduces the coordinates") {
  PoissonChart P = so3_star();
  Expr b12 = poisson_bracket(P, sf(P, "x1"), sf(P, "x2")).f;
  CHECK(identical(simplify(b12), X(2)));
  Expr b23 = poisson_bracket(P, sf(P, "x2"), sf(P, "x3")).f;
  CHECK(identical(simplify(b23), X(0)));
  Expr b31 = poisson_bracket(P, sf(P, "x3"), sf(P, "x1")).f;
  CHECK(identical(simplify(b31), X(1)));
}

TEST_CASE("sharp matches the wedge-pairing oracle") {
  Rng rng(406);
  for (const PoissonChart& P : {canonical_poisson(2), so3_star()}) {
    const int n = P.dim();
    for (int t = 0; t < 10; ++t) {
      auto x = testutil::random_point(rng, n);
      std::vector<double> alpha(n);
      for (auto& v : alpha) v = rng.uniform(-2.0, 2.0);
      OneForm a(P.chart, [&] {
        std::vector<Expr> c;
        for (double v : alpha) c.push_back(C(v));
        return c;
      }());
      VectorField s = sharp(P, a);
      for (int i = 0; i < n; ++i) {
        std::vector<double> xi(n, 0.0);
        xi[i] = 1.0;
        double expected = wedge_pairing_oracle(P, xi, alpha, x);
        CHECK(std::abs(eval(s.comps[i], x) - expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("sharp of coordinate differentials on the canonical chart") {
  PoissonChart P = canonical_poisson(1);
  VectorField xq = sharp(P, OneForm::coordinate(P.chart, 0));  // sharp dq
  CHECK(identical(xq.comps[0], C(0.0)));
  CHECK(identical(xq.comps[1], C(-1.0)));
  VectorField xp = sharp(P, OneForm::coordinate(P.chart, 1));  // sharp dp
  CHECK(identical(xp.comps[0], C(1.0)));
  CHECK(identical(xp.comps[1], C(0.0)));
}

TEST_CASE("pairing with the bivector is antisymmetric and tensorial") {
  PoissonChart P = so3_star();
  Rng rng(407);
  for (int t = 0; t < 5; ++t) {
    OneForm a(P.chart, {testutil::random_poly(rng, 3),
                        testutil::random_poly(rng, 3),
                        testutil::random_poly(rng, 3)});
    OneForm b(P.chart, {testutil::random_poly(rng, 3),
                        testutil::random_poly(rng, 3),
                        testutil::random_poly(rng, 3)});
    auto x = testutil::random_point(rng, 3);
    double anti = eval(pair_with_bivector(P, a, b).f, x) +
                  eval(pair_with_bivector(P, b, a).f, x);
    CHECK(std::abs(anti) <= 1e-12);
    // contracting a with sharp(b) reproduces the pairing in the same order:
    // a(sharp b) = sum_ij a_i Pi^{ij} b_j = <a ^ b, Pi>
    double via_sharp = eval(apply(a, sharp(P, b)).f, x);
    double direct = eval(pair_with_bivector(P, a, b).f, x);
    CHECK(std::abs(via_sharp - direct) <= 1e-12);
  }
}

TEST_CASE("lie bracket of vector fields: pinned example and antisymmetry") {
  Chart chart({"q", "p"});
  VectorField Xf(chart, {C(0.0), X(0)});  // q d/dp
  VectorField Yf(chart, {X(1), C(0.0)});  // p d/dq
  VectorField br = lie_bracket(Xf, Yf);
  CHECK(identical(br.comps[0], X(0)));
  CHECK(identical(br.comps[1], simplify(neg(X(1)))));

  VectorField rev = lie_bracket(Yf, Xf);
  for (int i = 0; i < 2; ++i)
    CHECK(identical(simplify(br.comps[i] + rev.comps[i]), C(0.0)));
}

TEST_CASE("lie derivative of an exact form is exact") {
  Chart chart({"u", "v"});
  Rng rng(408);
  for (int t = 0; t < 10; ++t) {
    VectorField Xf(chart,
                   {testutil::random_poly(rng, 2), testutil::random_poly(rng, 2)});
    ScalarField f(chart, testutil::random_poly(rng, 2));
    OneForm lhs = lie_derivative(Xf, d(f));
    OneForm rhs = d(derive(Xf, f));
    auto x = testutil::random_point(rng, 2);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(eval(lhs.comps[i], x) - eval(rhs.comps[i], x)) <= 1e-10);
  }
}

TEST_CASE("form bracket on coordinate differentials of so(3) dual") {
  PoissonChart P = so3_star();
  OneForm dx1 = OneForm::coordinate(P.chart, 0);
  OneForm dx2 = OneForm::coordinate(P.chart, 1);
  OneForm br = form_bracket(P, dx1, dx2);
  // expect -dx3
  CHECK(identical(br.comps[0], C(0.0)));
  CHECK(identical(br.comps[1], C(0.0)));
  CHECK(identical(br.comps[2], C(-1.0)));

  // flat case: constant bivector kills brackets of coordinate differentials
  PoissonChart Pc = canonical_poisson(1);
  OneForm flat = form_bracket(Pc, OneForm::coordinate(Pc.chart, 0),
                              OneForm::coordinate(Pc.chart, 1));
  for (const auto& c : flat.comps) CHECK(identical(c, C(0.0)));
}

TEST_CASE("form bracket identities against the function bracket") {
  Rng rng(409);
  for (const PoissonChart& P : {so3_star(), canonical_poisson(2)}) {
    const int n = P.dim();
    for (int t = 0; t < 5; ++t) {
      ScalarField f(P.chart, testutil::random_poly(rng, n));
      ScalarField g(P.chart, testutil::random_poly(rng, n));
      auto x = testutil::random_point(rng, n);
      auto r = koszul_identity_residuals(P, f, g, x);
      CHECK(r.differential <= 1e-9);
      CHECK(r.morphism <= 1e-9);
    }
  }
}

TEST_CASE("hamiltonian vector fields anti-represent the bracket") {
  PoissonChart P = so3_star();
  Rng rng(410);
  for (int t = 0; t < 5; ++t) {
    ScalarField f(P.chart, testutil::random_poly(rng, 3));
    ScalarField g(P.chart, testutil::random_poly(rng, 3));
    auto x = testutil::random_point(rng, 3);
    VectorField lhs =
        lie_bracket(hamiltonian_vector_field(P, f), hamiltonian_vector_field(P, g));
    VectorField rhs = hamiltonian_vector_field(P, poisson_bracket(P, f, g));
    // With X_f = sharp df and {f,g} = (df, Pi, dg) one has X_f g = -{f,g},
    // so the map f -> X_f is an anti-homomorphism: [X_f, X_g] = -X_{{f,g}}.
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, std::abs(eval(lhs.comps[i], x) +
                                       eval(rhs.comps[i], x)));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("jacobi diagnostic: exact zeros and a planted violation") {
  // constant bivector: identically zero components
  PoissonChart Pc = canonical_poisson(2);
  Rng rng(411);
  for (int t = 0; t < 5; ++t) {
    auto x = testutil::random_point(rng, 4);
    CHECK(jacobi_residual(Pc, x) == 0.0);
  }
  // linear so(3) structure: zero to rounding
  PoissonChart Ps = so3_star();
  for (int t = 0; t < 50; ++t) {
    auto x = testutil::random_point(rng, 3);
    CHECK(jacobi_residual(Ps, x) <= 1e-12);
  }
  // planted violation: Pi^{12} = Pi^{34} = x1 on R^4
  Chart chart({"y1", "y2", "y3", "y4"});
  std::vector<Expr> pi(16, C(0.0));
  pi[0 * 4 + 1] = X(0);
  pi[1 * 4 + 0] = neg(X(0));
  pi[2 * 4 + 3] = X(0);
  pi[3 * 4 + 2] = neg(X(0));
  PoissonChart Pbad(chart, std::move(pi));
  std::vector<double> x{0.7, 0.1, -0.3, 0.5};
  CHECK(std::abs(schouten_residual(Pbad, 1, 2, 3, x) - 0.7) <= 1e-12);
  CHECK(jacobi_residual(Pbad, x) >= 0.7 - 1e-12);
}

TEST_CASE("poisson_from_symplectic: sign pinned by brute force in 2d") {
  Chart chart({"q", "p"});
  SymplecticChart S = SymplecticChart::canonical(chart);
  PoissonChart P = poisson_from_symplectic(S);

  // Numeric oracle: try both candidate signs of inverse(omega); the bracket
  // convention {q,p} = +1 with iota_{X_f} omega = df selects -inverse(omega).
  std::vector<double> x{0.3, -0.8};
  Matrix W = eval_form(S, x);
  double det = W.at(0, 0) * W.at(1, 1) - W.at(0, 1) * W.at(1, 0);
  Matrix Winv(2, 2);
  Winv.at(0, 0) = W.at(1, 1) / det;
  Winv.at(0, 1) = -W.at(0, 1) / det;
  Winv.at(1, 0) = -W.at(1, 0) / det;
  Winv.at(1, 1) = W.at(0, 0) / det;

  Matrix Pm = eval_bivector(P, x);
  double err_minus = 0.0, err_plus = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      err_minus = std::max(err_minus, std::abs(Pm.at(i, j) + Winv.at(i, j)));
      err_plus = std::max(err_plus, std::abs(Pm.at(i, j) - Winv.at(i, j)));
    }
  CHECK(err_minus <= 1e-14);   // Pi == -inverse(omega)
  CHECK(err_plus >= 1.0);      // and differs from +inverse(omega)

  Expr b = poisson_bracket(P, ScalarField(chart, X(0)), ScalarField(chart, X(1))).f;
  CHECK(identical(simplify(b), C(1.0)));
}

TEST_CASE("poisson_from_symplectic inverts block and scaled forms") {
  // block-diagonal canonical form in dimension 6
  std::vector<std::string> names{"q1", "q2", "q3", "p1", "p2", "p3"};
  Chart chart(names);
  SymplecticChart S = SymplecticChart::canonical(chart);
  PoissonChart P = poisson_from_symplectic(S);
  Rng rng(412);
  auto x = testutil::random_point(rng, 6);
  Matrix Pm = eval_bivector(P, x);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double expect = (i == j) ? 1.0 : 0.0;
      CHECK(std::abs(Pm.at(i, 3 + j) - expect) <= 1e-14);
      CHECK(std::abs(Pm.at(3 + i, j) + expect) <= 1e-14);
      CHECK(std::abs(Pm.at(i, j)) <= 1e-14);
      CHECK(std::abs(Pm.at(3 + i, 3 + j)) <= 1e-14);
    }

  // scaled form c*omega gives bivector Pi/c
  Chart c2({"q", "p"});
  std::vector<Expr> w(4, C(0.0));
  w[1] = C(2.5);
  w[2] = C(-2.5);
  PoissonChart Ps = poisson_from_symplectic(SymplecticChart(c2, std::move(w)));
  Expr b = poisson_bracket(Ps, ScalarField(c2, X(0)), ScalarField(c2, X(1))).f;
  CHECK(std::abs(eval(b, std::vector<double>{0.0, 0.0}) - 1.0 / 2.5) <= 1e-15);

  // position-dependent conformal factor
  std::vector<Expr> wq(4, C(0.0));
  Expr factor = C(1.0) + X(0) * X(0);
  wq[1] = factor;
  wq[2] = neg(factor);
  PoissonChart Pq = poisson_from_symplectic(SymplecticChart(c2, std::move(wq)));
  std::vector<double> pt{0.5, 0.2};
  Expr bq = poisson_bracket(Pq, ScalarField(c2, X(0)), ScalarField(c2, X(1))).f;
  CHECK(std::abs(eval(bq, pt) - 1.0 / 1.25) <= 1e-14);
}

TEST_CASE("hamiltonian fields from the derived bivector satisfy the defining relation") {
  std::vector<std::string> names{"q1", "q2", "p1", "p2"};
  Chart chart(names);
  SymplecticChart S = SymplecticChart::canonical(chart);
  PoissonChart P = poisson_from_symplectic(S);
  Rng rng(413);
  for (int t = 0; t < 5; ++t) {
    ScalarField f(chart, testutil::random_poly(rng, 4));
    VectorField Xf = hamiltonian_vector_field(P, f);
    OneForm lhs = interior_product(S, Xf);
    OneForm rhs = d(f);
    auto x = testutil::random_point(rng, 4);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(eval(lhs.comps[i], x) - eval(rhs.comps[i], x)) <= 1e-12);
  }
}

TEST_CASE("symplectic validation helpers") {
  std::vector<std::string> names{"a1", "a2", "b1", "b2"};
  Chart chart(names);
  SymplecticChart S = SymplecticChart::canonical(chart);
  Rng rng(414);
  auto x = testutil::random_point(rng, 4);
  CHECK(antisymmetry_residual(S, x) == 0.0);
  CHECK(closedness_residual(S, x) == 0.0);
  CHECK(std::abs(momsec::abs_det(eval_form(S, x)) - 1.0) <= 1e-12);

  // omega = da1^db1 + a1 da2^db2 is non-closed
  std::vector<Expr> w(16, C(0.0));
  w[0 * 4 + 2] = C(1.0);
  w[2 * 4 + 0] = C(-1.0);
  w[1 * 4 + 3] = X(0);
  w[3 * 4 + 1] = neg(X(0));
  SymplecticChart Sbad(chart, std::move(w));
  std::vector<double> pt{0.9, 0.1, 0.2, 0.3};
  CHECK(std::abs(closedness_residual(Sbad, pt) - 1.0) <= 1e-12);
}

TEST_CASE("chart mismatch is rejected") {
  PoissonChart P = canonical_poisson(1);
  Chart other({"a", "b"});
  ScalarField f(other, X(0));
  CHECK_THROWS_AS(poisson_bracket(P, f, f), std::invalid_argument);
  CHECK_THROWS_AS(sharp(P, OneForm::coordinate(other, 0)),
                  std::invalid_argument);
}
