#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <thread>

#include "pbgw/engine.hpp"
#include "pbgw/gkm.hpp"

using namespace pbgw;

TEST_CASE("dimension gate") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  EqClass one = EqClass::unit(p1->fiber_ctx());
  EqClass h = EqClass::generator(p1->fiber_ctx());
  CHECK(eng.dimension_gate(p1->fiber_class(1), {{1, one}}));
  CHECK(eng.dimension_gate(p1->fiber_class(1), {{0, h}, {0, h}}));
  CHECK(!eng.dimension_gate(p1->fiber_class(1), {{0, one}}));
  CHECK(!eng.dimension_gate(p1->fiber_class(2), {{1, one}}));

  auto p2 = TargetModel::projective_space(2);
  Engine eng2(p2);
  EqClass h2 = EqClass::generator(p2->fiber_ctx());
  CHECK(eng2.dimension_gate(p2->fiber_class(1), {{0, h2 * h2}, {0, h2 * h2}}));
}

TEST_CASE("leading lambda power") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  CHECK(eng.leading_rho(p1->fiber_class(1)) == 2);
  CHECK(eng.leading_rho(p1->fiber_class(2)) == 3);
  auto p2 = TargetModel::projective_space(2);
  Engine eng2(p2);
  CHECK(eng2.leading_rho(p2->fiber_class(1)) == 2);
}

TEST_CASE("paper example values") {
  for (int n = 1; n <= 2; ++n) {
    auto t = TargetModel::projective_space(n);
    Engine eng(t);
    Insertion ins{2 * n - 1, EqClass::unit(t->fiber_ctx())};
    Rational v = eng.compute_invariant(t->fiber_class(1), {ins});
    CHECK(v == Rational(n % 2 ? -1 : 1) * binomial(2 * n, n));
  }
}

TEST_CASE("classical counts through the engine") {
  auto p2 = TargetModel::projective_space(2);
  Engine eng(p2);
  EqClass h = EqClass::generator(p2->fiber_ctx());
  EqClass pt = h * h;
  CHECK(eng.compute_invariant(p2->fiber_class(1), {{0, pt}, {0, pt}}) ==
        Rational(1));
  auto p1 = TargetModel::projective_space(1);
  Engine eng1(p1);
  CHECK(eng1.compute_invariant(p1->fiber_class(1), {}) == Rational(1));
}

TEST_CASE("permutation symmetry of computed invariants") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  EqClass h = EqClass::generator(p1->fiber_ctx());
  EqClass one = EqClass::unit(p1->fiber_ctx());
  std::vector<Insertion> a = {{2, h}, {1, one}, {0, h}};
  std::vector<Insertion> b = {{0, h}, {2, h}, {1, one}};
  std::vector<Insertion> c = {{1, one}, {0, h}, {2, h}};
  Rational va = eng.compute_invariant(p1->fiber_class(2), a);
  Rational vb = eng.compute_invariant(p1->fiber_class(2), b);
  Rational vc = eng.compute_invariant(p1->fiber_class(2), c);
  CHECK(va == vb);
  CHECK(va == vc);
}

TEST_CASE("string dilaton divisor equations on engine tables") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  EqClass h = EqClass::generator(p1->fiber_ctx());
  EqClass one = EqClass::unit(p1->fiber_ctx());
  long d = 2;
  CurveClass beta = p1->fiber_class(d);
  // Base value <psi^2 H, H, H> with Σ(k+deg) = vdim(0,3,2) = 5.
  Rational base = eng.compute_invariant(beta, {{2, h}, {0, h}, {0, h}});
  // String: <1, psi^3 H, H, H> = <psi^2 H, H, H> (only the ψ³ slot shifts).
  Rational lhs = eng.compute_invariant(beta, {{0, one}, {3, h}, {0, h}, {0, h}});
  CHECK(lhs == base);
  // String with several shiftable slots.
  Rational lhs_b =
      eng.compute_invariant(beta, {{0, one}, {2, h}, {1, h}, {0, h}});
  Rational rhs_b = eng.compute_invariant(beta, {{1, h}, {1, h}, {0, h}}) +
                   eng.compute_invariant(beta, {{2, h}, {0, h}, {0, h}});
  CHECK(lhs_b == rhs_b);
  // Dilaton: <psi·1, X> = (n-2)<X> with n = 3.
  Rational dil = eng.compute_invariant(beta, {{1, one}, {2, h}, {0, h}, {0, h}});
  CHECK(dil == Rational(3 - 2) * base);
  // Divisor: <H, X> = (β,H)<X>; the ψ-shifted terms carry H² = 0.
  Rational lhs2 = eng.compute_invariant(beta, {{0, h}, {2, h}, {0, h}, {0, h}});
  CHECK(lhs2 == Rational(d) * base);
}

TEST_CASE("lambda residue detection is hard") {
  // Sabotage: a wrong provider must trigger the residue check, not silently
  // round. Use a provider returning garbage for positive-degree brackets.
  auto p1 = TargetModel::projective_space(1);
  auto graphs = enumerate_graphs(*p1, p1->fiber_class(2), 1);
  std::vector<Insertion> ins = {{3, EqClass::unit(p1->fiber_ctx())}};
  InfinityBracketFn bad = [&](const TargetModel&, const CurveClass& b,
                              const std::vector<PsiSeries>&) {
    return b.is_zero() ? LaurentScalar(1) : LaurentScalar::lambda(-2);
  };
  LaurentScalar sum;
  for (auto& g : graphs)
    if (!g.is_gamma0()) sum += evaluate_graph(*p1, g, ins, bad);
  // The honest engine asserts λ-freeness after solving; emulate.
  LaurentScalar solved = sum * LaurentScalar::monomial(Rational(-1), 3);
  CHECK(!solved.lambda_free());
}

TEST_CASE("unresolved dependency lists the needed key") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  eng.set_table_only(true);
  EqClass h = EqClass::generator(p1->fiber_ctx());
  // Degree 2 requires twisted brackets: must fail loudly, naming a key.
  bool threw = false;
  try {
    eng.compute_invariant(p1->fiber_class(2), {{2, h}, {0, h}, {0, h}});
  } catch (const UnresolvedDependency& e) {
    threw = true;
    CHECK(std::string(e.what()).find("no provider") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("recursion well-foundedness is checked dynamically") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  std::vector<BracketInsertion> none;
  CHECK_THROWS_AS(eng.twisted_lookup(p1->fiber_class(2), none, p1->fiber_class(2)),
                  std::logic_error);
}

TEST_CASE("cache store load and conflicts") {
  InvariantCache cache;
  InvariantKey key;
  key.target = "P1";
  key.beta = {1, {}};
  key.insertions = {{1, "H"}, {0, "1"}};
  key.canonicalize();
  cache.store(key, LaurentScalar(Rational(7, 3)));
  CHECK(cache.load(key).has_value());
  CHECK(*cache.load(key) == LaurentScalar(Rational(7, 3)));
  // Same value twice: fine. Different value: hard error.
  cache.store(key, LaurentScalar(Rational(7, 3)));
  CHECK_THROWS_AS(cache.store(key, LaurentScalar(1)), std::runtime_error);

  // Round trip through a file, including a Laurent record.
  InvariantKey key2 = key;
  key2.twist = TwistTag::TwO1;
  cache.store(key2, LaurentScalar::monomial(Rational(-5, 2), -3) + LaurentScalar(2));
  std::string path = "cache_test_roundtrip.jsonl";
  cache.save_file(path);
  InvariantCache back;
  back.load_file(path);
  CHECK(back.size() == cache.size());
  CHECK(*back.load(key2) == *cache.load(key2));

  // Conflicting value on load names the key.
  InvariantCache conflicting;
  conflicting.store(key, LaurentScalar(1));
  bool threw = false;
  try {
    conflicting.load_file(path);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("P1") != std::string::npos);
  }
  CHECK(threw);

  // Empty file loads an empty map.
  std::string empty_path = "cache_test_empty.jsonl";
  { std::ofstream out(empty_path); }
  InvariantCache empty;
  empty.load_file(empty_path);
  CHECK(empty.size() == 0);
  std::remove(path.c_str());
  std::remove(empty_path.c_str());
}

TEST_CASE("concurrent cache writers must agree") {
  InvariantCache cache;
  InvariantKey key;
  key.target = "X";
  key.beta = {1, {}};
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&cache, &key] {
      for (int j = 0; j < 50; ++j) cache.store(key, LaurentScalar(42));
    });
  for (auto& th : threads) th.join();
  CHECK(cache.size() == 1);
  CHECK(*cache.load(key) == LaurentScalar(42));
}

TEST_CASE("engine values are shared through the cache") {
  auto p1 = TargetModel::projective_space(1);
  Engine eng(p1);
  EqClass h = EqClass::generator(p1->fiber_ctx());
  Rational first = eng.compute_invariant(p1->fiber_class(1), {{0, h}, {0, h}});
  size_t after_first = eng.cache().size();
  Rational second = eng.compute_invariant(p1->fiber_class(1), {{0, h}, {0, h}});
  CHECK(first == second);
  CHECK(eng.cache().size() == after_first);
}
