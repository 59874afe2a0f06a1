#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pbgw/contributions.hpp"
#include "pbgw/engine.hpp"

using namespace pbgw;

TEST_CASE("psi integrals and their recursions") {
  CHECK(psi_integral({0, 0, 0}) == Rational(1));
  CHECK(psi_integral({1, 0, 0, 0}) == Rational(1));
  CHECK(psi_integral({1, 1, 0, 0, 0}) == Rational(2));
  CHECK(psi_integral({2, 0, 0, 0, 0}) == Rational(1));
  CHECK(psi_integral({1, 0, 0}) == Rational(0));  // dimension mismatch
  CHECK_THROWS_AS(psi_integral({0, 0}), std::domain_error);

  // String: <τ_{a1}...τ_{an} τ_0> = Σ_i <...τ_{a_i - 1}...> for n ≤ 8.
  std::function<void(std::vector<int>&, int, int)> sweep =
      [&](std::vector<int>& a, int slots, int budget) {
        if (slots == 0) {
          if (a.size() < 3) return;
          std::vector<int> with0 = a;
          with0.push_back(0);
          Rational lhs = psi_integral(with0);
          Rational rhs(0);
          for (size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0) continue;
            std::vector<int> shifted = a;
            shifted[i] -= 1;
            rhs += psi_integral(shifted);
          }
          // Only meaningful when both sides are dimension matched.
          long tot = 0;
          for (int x : a) tot += x;
          if (tot == static_cast<long>(a.size()) - 3 + 1) CHECK(lhs == rhs);
          return;
        }
        for (int v = 0; v <= budget; ++v) {
          a.push_back(v);
          sweep(a, slots - 1, budget - v);
          a.pop_back();
        }
      };
  for (int n = 3; n <= 7; ++n) {
    std::vector<int> a;
    sweep(a, n, n - 2);
  }

  // Dilaton: <τ_{a1}..τ_{an} τ_1> = (n-2)<τ_{a1}..τ_{an}>.
  for (int n = 3; n <= 8 - 1; ++n) {
    std::vector<int> a(n, 0);
    a[0] = n - 3;  // dimension matched
    std::vector<int> with1 = a;
    with1.push_back(1);
    CHECK(psi_integral(with1) == Rational(n - 2) * psi_integral(a));
  }
}

TEST_CASE("point vertex closed form") {
  // n = 3, trivial insertions, rank r: λ^{-r}.
  int r = 4;
  std::vector<std::vector<LaurentScalar>> legs(3, {LaurentScalar(1)});
  CHECK(point_vertex_value(r, legs) == LaurentScalar::monomial(Rational(1), -r));

  // ψ¹-term dies on the 3-pointed moduli.
  legs[2] = {LaurentScalar(5), LaurentScalar(7)};
  CHECK(point_vertex_value(r, legs) ==
        LaurentScalar::monomial(Rational(5), -r));

  // Four inverted edge legs Σ_j ψ^j λ^{-j-1}: one leg supplies ψ¹.
  std::vector<LaurentScalar> leg;
  for (int j = 0; j <= 2; ++j)
    leg.push_back(LaurentScalar::monomial(Rational(1), -j - 1));
  std::vector<std::vector<LaurentScalar>> legs4(4, leg);
  CHECK(point_vertex_value(r, legs4) ==
        LaurentScalar::monomial(Rational(4), -r - 5));

  // Multilinearity in each slot.
  std::vector<std::vector<LaurentScalar>> a = legs4, b = legs4, s = legs4;
  a[1] = {LaurentScalar(2), LaurentScalar(3)};
  b[1] = {LaurentScalar::lambda(), LaurentScalar(1)};
  s[1] = {a[1][0] + b[1][0], a[1][1] + b[1][1], LaurentScalar()};
  CHECK(point_vertex_value(r, s) ==
        point_vertex_value(r, a) + point_vertex_value(r, b));
}

TEST_CASE("insertion lifting restricts correctly") {
  auto t = TargetModel::split_over_p1({0, 2});
  EqClass one = EqClass::unit(t->fiber_ctx());
  CHECK(lift_insertion(*t, one) == EqClass::unit(t->master_ctx()));

  EqClass h = EqClass::generator(t->fiber_ctx());
  {
    // Basis forms H^e with e < r lift to h^e and restrict to λ^e at zero.
    EqClass lifted = lift_insertion(*t, h);
    CHECK(restrict_infinity(lifted, t->fiber_ctx()) == h);
    CHECK(restrict_zero(lifted, t->base_ctx()) == EqClass::lambda(t->base_ctx()));
  }
  auto p3 = TargetModel::projective_space(3);
  EqClass h3 = EqClass::generator(p3->fiber_ctx());
  for (int e = 1; e <= 3; ++e) {
    EqClass lifted = lift_insertion(*p3, h3.pow(e));
    CHECK(restrict_infinity(lifted, p3->fiber_ctx()) == h3.pow(e));
    CHECK(restrict_zero(lifted, p3->base_ctx()) ==
          EqClass::lambda(p3->base_ctx(), e));
  }

  EqClass f = EqClass::base_element(t->fiber_ctx(), t->base()->basis_class(1));
  EqClass lifted = lift_insertion(*t, h * f);
  CHECK(restrict_infinity(lifted, t->fiber_ctx()) == h * f);
}

TEST_CASE("vertex factors") {
  auto t = TargetModel::projective_space(2);
  EqClass h = EqClass::generator(t->fiber_ctx());
  EqClass lam = EqClass::lambda(t->fiber_ctx());
  CHECK(vertex_factor(*t, DecoratedGraph::SideZero) == EqClass::lambda(t->fiber_ctx(), 3));
  CHECK(vertex_factor(*t, DecoratedGraph::SideInf) == h - lam);
  CHECK(vertex_sign(DecoratedGraph::SideZero) == 1);
  CHECK(vertex_sign(DecoratedGraph::SideInf) == -1);
}

TEST_CASE("edge contribution closed forms") {
  int n = 2;
  auto t = TargetModel::projective_space(n);
  auto ctx = t->fiber_ctx();
  EqClass h = EqClass::generator(ctx);
  EqClass lam = EqClass::lambda(ctx);

  // Single edge k=1: Vert₀·Vert∞ / ((H-λ)λ^{n+1}) = 1.
  auto graphs = enumerate_graphs(*t, t->fiber_class(1), 0);
  for (auto& g : graphs) {
    if (g.is_gamma0()) continue;
    auto cls = classify(g);
    CHECK(edge_contribution(*t, g, cls, 0) == EqClass::unit(ctx));
  }

  // k=2 single edge: denominator (1/2)(H-λ)((H+λ)/2)^{n+1}·(H-λ)λ^{n+1}.
  auto g2 = enumerate_graphs(*t, t->fiber_class(2), 0);
  bool checked_k2 = false, checked_chain = false;
  for (auto& g : g2) {
    if (g.edges.size() == 1 && g.edges[0].k == 2) {
      auto cls = classify(g);
      EqClass den = (h - lam).scaled(LaurentScalar(Rational(1, 2))) *
                    chern_poly_eval(t->rank(), t->chern(),
                                    (h + lam).scaled(LaurentScalar(Rational(1, 2)))) *
                    (h - lam) *
                    chern_poly_eval(t->rank(), t->chern(), lam);
      EqClass expect = EqClass::lambda(ctx, n + 1) * (h - lam) * den.invert();
      CHECK(edge_contribution(*t, g, cls, 0) == expect);
      checked_k2 = true;
    }
    if (g.edges.size() == 2) {
      auto cls = classify(g);
      if (cls.edge_classes.size() != 1) continue;
      int mid = cls.edge_classes[0].interior[0];
      if (g.vertices[mid].side == DecoratedGraph::SideInf) {
        // Chain through an infinity V² vertex: numerator gains (H-λ) for
        // middle and ends; denominator gains (1/1+1/1)(-1)(λ-H).
        EqClass num = EqClass::lambda(ctx, n + 1).pow(2) * (h - lam);
        EqClass den = edge_contribution(*t, g, cls, 0);  // computed value
        EqClass d1 = (h - lam) * chern_poly_eval(t->rank(), t->chern(), lam);
        EqClass expect = num * (d1 * d1 * (lam - h).scaled(LaurentScalar(Rational(-2))))
                                 .invert();
        CHECK(den == expect);
        checked_chain = true;
      } else {
        CHECK_THROWS_AS(edge_contribution(*t, g, cls, 0), std::invalid_argument);
      }
    }
  }
  CHECK(checked_k2);
  CHECK(checked_chain);
}

TEST_CASE("the worked example integrand, term for term") {
  for (int n = 1; n <= 3; ++n) {
    auto t = TargetModel::projective_space(n);
    auto ctx = t->fiber_ctx();
    EqClass h = EqClass::generator(ctx);
    EqClass lam = EqClass::lambda(ctx);
    std::vector<Insertion> ins = {{2 * n - 1, EqClass::unit(ctx)}};
    auto graphs = enumerate_graphs(*t, t->fiber_class(1), 1);
    EqClass denom = ((h - lam) * EqClass::lambda(ctx, n + 1)).invert();
    LaurentScalar total;
    int found = 0;
    for (auto& g : graphs) {
      if (g.is_gamma0()) continue;
      // Both graphs are pure chains; their closed-form value must equal the
      // displayed integral.
      auto assembly = assemble_graph(*t, g, ins);
      REQUIRE(assembly.pure);
      bool mark_at_inf =
          !g.vertices[g.edges[0].v].marks.empty();
      EqClass integrand =
          mark_at_inf
              ? (lam - h).pow(2 * n - 1) * (lam - h) * denom
              : (h - lam).pow(2 * n - 1) * (h - lam) * denom;
      CHECK(assembly.pure_value == integrate_total(integrand));
      total += assembly.pure_value;
      ++found;
    }
    CHECK(found == 2);
    // Sum: -2(-1)^n C(2n-1, n) λ^{-2}.
    LaurentScalar expect = LaurentScalar::monomial(
        Rational(-2) * Rational(n % 2 ? -1 : 1) * binomial(2 * n - 1, n), -2);
    CHECK(total == expect);
  }
}

TEST_CASE("plus minus labeling of a tail does not matter") {
  // d=2 graph: edge k=1 with a V¹ zero-end and a stable infinity vertex of
  // class f; evaluated with the end roles derived both ways by reversing
  // the chain orientation through a relabeled copy.
  auto t = TargetModel::projective_space(1);
  auto ctx = t->fiber_ctx();
  std::vector<Insertion> ins = {{3, EqClass::unit(ctx)}};
  auto graphs = enumerate_graphs(*t, t->fiber_class(2), 1);
  Engine eng(t);
  InfinityBracketFn prov = [&](const TargetModel&, const CurveClass& b,
                               const std::vector<PsiSeries>& legs) {
    return eng.twisted_series_bracket(b, legs, t->fiber_class(2));
  };
  for (auto& g : graphs) {
    if (g.is_gamma0() || g.edges.size() != 1) continue;
    // Relabel vertices (swap ids) and compare contributions.
    DecoratedGraph swapped = g;
    std::swap(swapped.vertices[0], swapped.vertices[1]);
    for (auto& e : swapped.edges) std::swap(e.u, e.v);
    for (auto& e : swapped.edges)
      if (swapped.vertices[e.u].side == DecoratedGraph::SideInf) std::swap(e.u, e.v);
    LaurentScalar a = evaluate_graph(*t, g, ins, prov);
    LaurentScalar b = evaluate_graph(*t, swapped, ins, prov);
    CHECK(a == b);
  }
}
