#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "pbgw/eq_class.hpp"
#include "pbgw/targets.hpp"

using namespace pbgw;

namespace {

// Independent dense-polynomial reducer used to cross-check the long-division
// reduction: multiplies out in unreduced degree and divides by the relation
// with naive coefficient bookkeeping over BaseVec.
std::vector<BaseVec> dense_reduce(const RingCtxPtr& ctx, std::vector<BaseVec> c) {
  auto& B = *ctx->base;
  int d = ctx->relation_degree;
  while (static_cast<int>(c.size()) > d) {
    int j = static_cast<int>(c.size()) - 1;
    if (!BaseRing::is_zero(c[j])) {
      for (int i = 0; i < d; ++i)
        c[j - d + i] = B.sub(c[j - d + i], B.mul(c[j], ctx->relation[i]));
    }
    c.pop_back();
  }
  c.resize(d, B.zero());
  return c;
}

EqClass random_class(const RingCtxPtr& ctx, std::mt19937& rng, bool invertible) {
  std::uniform_int_distribution<int> num(-3, 3), exp(-2, 2);
  std::vector<BaseVec> c(ctx->relation_degree, ctx->base->zero());
  for (int j = 0; j < ctx->relation_degree; ++j)
    for (int i = 0; i < ctx->base->size(); ++i)
      if (num(rng) > 1)
        c[j][i] = LaurentScalar::monomial(Rational(num(rng)), exp(rng));
  if (invertible) c[0][0] = LaurentScalar::monomial(Rational(2), exp(rng));
  return EqClass(ctx, std::move(c));
}

}  // namespace

TEST_CASE("master ring relation over a point") {
  // V = C^{r+1} trivial over a point: relation h^{r+1}(h-λ) = 0.
  int r = 2;
  auto t = TargetModel::projective_space(r + 1 - 1);  // rank r+1 = 4? no:
  // projective_space(n) has rank n+1; pick n = r+1-1 = 2 => rank 3 = r+1.
  auto ctx = t->master_ctx();
  EqClass h = EqClass::generator(ctx);
  // h^{r+2} reduces to λ·h^{r+1}.
  EqClass lhs = h.pow(r + 1 + 1);
  EqClass rhs = h.pow(r + 1).scaled(LaurentScalar::lambda());
  CHECK(lhs == rhs);
  // (h-λ)·1 + λ·1 = h.
  EqClass lam = EqClass::lambda(ctx);
  CHECK((h - lam) + lam == h);
}

TEST_CASE("master ring reduction over P1 cross-checked densely") {
  // V = O ⊕ O(2) over P¹: relation (h² + 2Fh)(h-λ) = 0.
  auto t = TargetModel::split_over_p1({0, 2});
  auto ctx = t->master_ctx();
  EqClass h = EqClass::generator(ctx);
  EqClass h3 = h * h * h;
  // Dense check: reduce raw h³.
  std::vector<BaseVec> raw(4, ctx->base->zero());
  raw[3] = ctx->base->unit();
  auto expect = dense_reduce(ctx, raw);
  for (int j = 0; j < ctx->relation_degree; ++j) CHECK(h3.coeff(j) == expect[j]);

  std::mt19937 rng(3);
  for (int it = 0; it < 30; ++it) {
    EqClass a = random_class(ctx, rng, false);
    EqClass b = random_class(ctx, rng, false);
    EqClass prod = a * b;
    // Re-multiply densely.
    int d = ctx->relation_degree;
    std::vector<BaseVec> dense(2 * d - 1, ctx->base->zero());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        dense[i + j] = ctx->base->add(dense[i + j],
                                      ctx->base->mul(a.coeff(i), b.coeff(j)));
    auto expect2 = dense_reduce(ctx, dense);
    for (int j = 0; j < d; ++j) CHECK(prod.coeff(j) == expect2[j]);
  }
}

TEST_CASE("reduction is idempotent on random classes") {
  auto t = TargetModel::split_over_p1({-1, -1});
  auto ctx = t->master_ctx();
  std::mt19937 rng(5);
  for (int it = 0; it < 40; ++it) {
    EqClass a = random_class(ctx, rng, false);
    std::vector<BaseVec> coeffs;
    for (int j = 0; j < ctx->relation_degree; ++j) coeffs.push_back(a.coeff(j));
    EqClass again(ctx, coeffs);  // runs reduce() once more
    CHECK(a == again);
  }
}

TEST_CASE("mismatched presentations are a structural error") {
  auto t1 = TargetModel::projective_space(1);
  auto t2 = TargetModel::projective_space(2);
  EqClass a = EqClass::unit(t1->fiber_ctx());
  EqClass b = EqClass::unit(t2->fiber_ctx());
  CHECK_THROWS_AS(a + b, std::invalid_argument);
  CHECK_THROWS_AS(a * b, std::invalid_argument);
}

TEST_CASE("invert: trivial and nilpotent-series cases") {
  auto t = TargetModel::projective_space(3);  // P³, H⁴ = 0
  auto ctx = t->fiber_ctx();
  int n = 3;

  EqClass lam = EqClass::lambda(ctx);
  CHECK(lam.invert() == EqClass::lambda(ctx, -1));

  // invert(λ - H) = Σ_{i<=n} H^i λ^{-i-1}.
  EqClass h = EqClass::generator(ctx);
  EqClass a = lam - h;
  EqClass inv = a.invert();
  EqClass expect(ctx);
  for (int i = 0; i <= n; ++i)
    expect += h.pow(i).scaled(LaurentScalar::lambda(-i - 1));
  CHECK(inv == expect);
  CHECK(a * inv == EqClass::unit(ctx));

  // invert(λ^{n+1}(H-λ)) for n=1 on P¹: -λ^{-3} - Hλ^{-4}.
  auto p1 = TargetModel::projective_space(1);
  auto c1 = p1->fiber_ctx();
  EqClass h1 = EqClass::generator(c1);
  EqClass prod = (h1 - EqClass::lambda(c1)).scaled(LaurentScalar::lambda(2));
  EqClass pinv = prod.invert();
  EqClass pexpect = EqClass::scalar(c1, LaurentScalar::monomial(Rational(-1), -3)) +
                    h1.scaled(LaurentScalar::monomial(Rational(-1), -4));
  CHECK(pinv == pexpect);
  CHECK(prod * pinv == EqClass::unit(c1));
}

TEST_CASE("invert is a two-sided inverse on random invertibles") {
  auto t = TargetModel::split_over_p1({-1, -2});
  auto ctx = t->fiber_ctx();
  std::mt19937 rng(9);
  for (int it = 0; it < 30; ++it) {
    EqClass a = random_class(ctx, rng, true);
    EqClass inv = a.invert();
    CHECK(a * inv == EqClass::unit(ctx));
    CHECK(inv * a == EqClass::unit(ctx));
  }
}

TEST_CASE("invert rejects non-units") {
  auto t = TargetModel::projective_space(2);
  EqClass h = EqClass::generator(t->fiber_ctx());
  CHECK_THROWS_AS(h.invert(), std::domain_error);
  EqClass zero(t->fiber_ctx());
  CHECK_THROWS_AS(zero.invert(), std::domain_error);
  // λ + λ²: degree-0 part not a monomial.
  EqClass mixed = EqClass::lambda(t->fiber_ctx()) + EqClass::lambda(t->fiber_ctx(), 2);
  CHECK_THROWS_AS(mixed.invert(), std::domain_error);
  // h in the master ring is not nilpotent: series must not terminate.
  EqClass hm = EqClass::generator(t->master_ctx());
  EqClass shifted = hm - EqClass::lambda(t->master_ctx());
  CHECK_THROWS_AS(shifted.invert(), std::domain_error);
}

TEST_CASE("chern polynomial evaluation") {
  // S = pt, V = C^{n+1}, x = λ: λ^{n+1} (the edge denominator factor).
  int n = 2;
  auto t = TargetModel::projective_space(n);
  auto ctx = t->fiber_ctx();
  EqClass lam = EqClass::lambda(ctx);
  EqClass val = chern_poly_eval(t->rank(), t->chern(), lam);
  CHECK(val == EqClass::lambda(ctx, n + 1));

  // S = P¹, V = O(1)⊕O(1), x = λ: λ² + 2Fλ.
  auto tb = TargetModel::split_over_p1({1, 1});
  auto cb = tb->fiber_ctx();
  EqClass lam_b = EqClass::lambda(cb);
  EqClass val_b = chern_poly_eval(tb->rank(), tb->chern(), lam_b);
  EqClass f = EqClass::base_element(cb, tb->base()->basis_class(1));
  EqClass expect = EqClass::lambda(cb, 2) + f.scaled(LaurentScalar::lambda(1)).scaled(
                                                LaurentScalar(Rational(2)));
  CHECK(val_b == expect);
}

TEST_CASE("restriction to the fixed loci") {
  auto t = TargetModel::split_over_p1({0, 2});
  auto mc = t->master_ctx();
  EqClass h = EqClass::generator(mc);
  // h|_{X0} = λ.
  EqClass at0 = restrict_zero(h, t->base_ctx());
  CHECK(at0 == EqClass::lambda(t->base_ctx()));
  // (h-λ)|_{X0} = 0.
  CHECK(restrict_zero(h - EqClass::lambda(mc), t->base_ctx()).is_zero());
  // h^e·π*σ at infinity: H^e·π*σ.
  EqClass f = EqClass::base_element(mc, t->base()->basis_class(1));
  EqClass cls = h * f;
  EqClass atInf = restrict_infinity(cls, t->fiber_ctx());
  EqClass hh = EqClass::generator(t->fiber_ctx());
  EqClass ff = EqClass::base_element(t->fiber_ctx(), t->base()->basis_class(1));
  CHECK(atInf == hh * ff);
}

TEST_CASE("fiber integration and total integration") {
  int n = 3;
  auto t = TargetModel::projective_space(n);
  auto ctx = t->fiber_ctx();
  EqClass h = EqClass::generator(ctx);
  // π_*(H^{r-1}) = 1, below: 0, and π_*(H^r) = -c₁ (zero for trivial V).
  CHECK(t->base()->integral(fiber_integrate(h.pow(n))) == LaurentScalar(1));
  CHECK(BaseRing::is_zero(fiber_integrate(h.pow(n - 1))));
  CHECK(integrate_total(h.pow(n)) == LaurentScalar(1));

  // π_*(H^r) = -c₁(V) over P¹ with V = O(0)⊕O(2): -2F.
  auto tb = TargetModel::split_over_p1({0, 2});
  EqClass hb = EqClass::generator(tb->fiber_ctx());
  BaseVec push = fiber_integrate(hb.pow(2));
  BaseVec expect = tb->base()->scale(tb->base()->basis_class(1),
                                     LaurentScalar(Rational(-2)));
  CHECK(push == expect);

  // The worked single integral: ∫_{P¹} (λ-H)^{2}·invert(λ²(H-λ)) = λ^{-2};
  // doubled across the two mirrored terms this is 2λ^{-2}.
  auto p1 = TargetModel::projective_space(1);
  auto c1 = p1->fiber_ctx();
  EqClass h1 = EqClass::generator(c1);
  EqClass lam1 = EqClass::lambda(c1);
  EqClass denom = (h1 - lam1).scaled(LaurentScalar::lambda(2));
  EqClass integrand = (lam1 - h1).pow(2) * denom.invert();
  LaurentScalar one_side = integrate_total(integrand);
  CHECK(one_side == LaurentScalar::monomial(Rational(1), -2));
  LaurentScalar doubled = one_side + one_side;
  CHECK(doubled == LaurentScalar::monomial(Rational(2), -2));
}

TEST_CASE("projection formula for fiber integration") {
  auto t = TargetModel::split_over_p1({-1, -3});
  auto ctx = t->fiber_ctx();
  std::mt19937 rng(21);
  for (int it = 0; it < 25; ++it) {
    EqClass a = random_class(ctx, rng, false);
    BaseVec sigma = t->base()->basis_class(1);
    EqClass pulled = EqClass::base_element(ctx, sigma);
    BaseVec lhs = fiber_integrate(a * pulled);
    BaseVec rhs = t->base()->mul(fiber_integrate(a), sigma);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("integration of non-top homogeneous classes vanishes") {
  auto t = TargetModel::projective_space(2);
  EqClass h = EqClass::generator(t->fiber_ctx());
  CHECK(integrate_total(h) == LaurentScalar());
  CHECK(integrate_total(EqClass::unit(t->fiber_ctx())) == LaurentScalar());
  CHECK(h.homogeneous_degree() == 2);
  CHECK(h.pow(2).homogeneous_degree() == 4);
}
