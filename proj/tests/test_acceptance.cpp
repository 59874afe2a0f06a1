// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Everything is exact arithmetic; no tolerances anywhere.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cstdio>
#include <functional>

#include "pbgw/engine.hpp"
#include "pbgw/gkm.hpp"

using namespace pbgw;
using Clock = std::chrono::steady_clock;

namespace {

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int n, bool ok, const std::string& detail) {
  std::printf("[criterion %d] %s %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

// Enumerate dimension-matched insertion multisets over basis classes
// {H^e : 0 <= e <= dim} with ψ-powers, and call f on each.
void sweep_tuples(int dim, long vdim, int n,
                  const std::function<void(const std::vector<std::pair<int, int>>&)>& f) {
  std::vector<std::pair<int, int>> cur(n);
  std::function<void(int, int, long)> rec = [&](int i, int minc, long left) {
    if (i == n) {
      if (left == 0) f(cur);
      return;
    }
    for (int c = minc; c < (dim + 1) * (static_cast<int>(vdim) + 2); ++c) {
      int e = c % (dim + 1);
      int p = c / (dim + 1);
      if (p + e > left) continue;
      cur[i] = {p, e};
      rec(i + 1, c, left - p - e);
    }
  };
  rec(0, 0, vdim);
}

}  // namespace

TEST_CASE("criterion 1: paper example reproduction") {
  bool all_ok = true;
  std::string detail;
  for (int n = 1; n <= 4; ++n) {
    auto t0 = Clock::now();
    auto t = TargetModel::projective_space(n);
    Engine eng(t);
    Insertion ins{2 * n - 1, EqClass::unit(t->fiber_ctx())};
    Rational got = eng.compute_invariant(t->fiber_class(1), {ins});
    double dt = secs_since(t0);
    Rational expect = Rational(n % 2 ? -1 : 1) * binomial(2 * n, n);
    bool ok = got == expect && dt < 5.0;
    CHECK(got == expect);
    CHECK(dt < 5.0);
    all_ok = all_ok && ok;
    detail += "n=" + std::to_string(n) + ":" + got.str() + " ";
  }
  report(1, all_ok, detail + "(each < 5 s)");
}

TEST_CASE("criterion 2 and 6: cross-engine agreement with lambda-freeness") {
  auto t0 = Clock::now();
  long checked = 0, mismatches = 0;

  auto run_target = [&](int dim, long dmax, int nmax) {
    auto t = TargetModel::projective_space(dim);
    auto g = gkm_projective_space(dim);
    Engine eng(t);
    EqClass h = EqClass::generator(t->fiber_ctx());
    for (long d = 1; d <= dmax; ++d)
      for (int n = 0; n <= nmax; ++n) {
        long vdim = dim + (dim + 1) * d + n - 3;
        sweep_tuples(dim, vdim, n, [&](const std::vector<std::pair<int, int>>& tup) {
          std::vector<Insertion> ins;
          std::vector<OracleInsertion> oins;
          for (auto [p, e] : tup) {
            ins.push_back({p, h.pow(static_cast<unsigned>(e))});
            OracleInsertion o;
            o.psi = p;
            o.cls = OracleClass::divisor_monomial(0, 1, e);
            oins.push_back(o);
          }
          // compute_invariant hard-asserts λ-freeness internally
          // (criterion 6); a residue throws instead of rounding.
          Rational ev = eng.compute_invariant(t->fiber_class(d), ins);
          LaurentScalar ov = oracle_invariant(g, {d}, oins);
          ++checked;
          if (LaurentScalar(ev) != ov) ++mismatches;
          CHECK(LaurentScalar(ev) == ov);
        });
      }
  };
  run_target(1, 3, 4);  // P¹: d ≤ 3, n ≤ 4
  run_target(2, 2, 5);  // P²: d ≤ 2, n ≤ 5
  double dt = secs_since(t0);
  bool ok = mismatches == 0 && dt < 300.0;
  CHECK(dt < 300.0);
  report(2, ok, std::to_string(checked) + " invariants, " +
                    std::to_string(mismatches) + " mismatches, " +
                    std::to_string(dt) + " s");
  report(6, ok, "lambda-residue hard assertion held on all engine solves");
}

TEST_CASE("criterion 3: WDVV consistency, fast tier") {
  auto p2 = gkm_projective_space(2);
  bool ok = true;
  std::string detail;
  Rational expected[] = {Rational(0), Rational(1), Rational(1), Rational(12)};
  for (int d = 1; d <= 3; ++d) {
    OracleInsertion pt;
    pt.cls = OracleClass::divisor_monomial(0, 1, 2);
    std::vector<OracleInsertion> ins(3 * d - 1, pt);
    LaurentScalar v = oracle_invariant(p2, {static_cast<long>(d)}, ins);
    Rational nd = wdvv_plane_numbers(d);
    bool line = v == LaurentScalar(nd) && nd == expected[d];
    CHECK(v == LaurentScalar(nd));
    CHECK(nd == expected[d]);
    ok = ok && line;
    detail += "N" + std::to_string(d) + "=" + nd.str() + " ";
  }
  report(3, ok, detail + "(d=4 in the slow tier)");
}

TEST_CASE("criterion 4: theorem A verification at desk scale") {
  auto t0 = Clock::now();
  auto rep = verify_theorem_A(6, 4);
  bool ok = rep.all_ok() && !rep.lines.empty();
  for (auto& l : rep.lines) {
    INFO(l.label, ": ", l.lhs, " vs ", l.rhs);
    CHECK(l.ok);
  }
  report(4, ok, std::to_string(rep.lines.size()) + " equal-Chern comparisons, " +
                    std::to_string(secs_since(t0)) + " s");
}

TEST_CASE("criterion 5: twisted equality for the pair") {
  auto t0 = Clock::now();
  auto rep = verify_lemma_tw(3, 3);
  bool ok = rep.all_ok() && !rep.lines.empty();
  for (auto& l : rep.lines) {
    INFO(l.label, ": ", l.lhs, " vs ", l.rhs);
    CHECK(l.ok);
  }
  report(5, ok, std::to_string(rep.lines.size()) + " twisted comparisons, " +
                    std::to_string(secs_since(t0)) + " s");
}

TEST_CASE("criterion 7: weight specialization independence") {
  // Every oracle value above is computed under two independent integer
  // specializations with exact agreement enforced inside oracle_invariant.
  // Re-verify a sample against a third, disjoint specialization.
  auto p2 = gkm_projective_space(2);
  auto p1 = gkm_projective_space(1);
  bool ok = true;
  {
    OracleInsertion pt;
    pt.cls = OracleClass::divisor_monomial(0, 1, 2);
    std::vector<OracleInsertion> ins(5, pt);
    LaurentScalar a = oracle_invariant(p2, {2}, ins);
    LaurentScalar b = oracle_invariant(p2, {2}, ins, {}, 5);
    CHECK(a == b);
    ok = ok && a == b;
  }
  {
    TwistSummand s;
    s.scaling = -1;
    for (int p = 0; p < 2; ++p) {
      std::vector<Rational> v(p1.lattice_rank, Rational(0));
      v[p] = Rational(-1);
      s.value_at.push_back(v);
    }
    TwistSpec tw{s};
    OracleInsertion pt;
    pt.cls = OracleClass::divisor_monomial(0, 1, 1);
    pt.psi = 2;
    std::vector<OracleInsertion> ins = {pt, pt};
    LaurentScalar a = oracle_invariant(p1, {2}, ins, tw);
    LaurentScalar b = oracle_invariant(p1, {2}, ins, tw, 7);
    CHECK(a == b);
    ok = ok && a == b;
  }
  report(7, ok, "two mandatory specializations plus a third on a sample");
}

TEST_CASE("criterion 8: axiom property suite") {
  bool ok = true;

  // psi_integral string and dilaton recursions for n ≤ 8.
  for (int n = 3; n <= 8 - 1; ++n) {
    std::vector<int> a(n, 0);
    a[0] = n - 3;
    std::vector<int> with0 = a;
    with0.push_back(0);
    with0[0] += 1;
    // String applied to <τ_{n-2} τ_0^{n-1} τ_0>.
    Rational lhs = psi_integral(with0);
    std::vector<int> shifted = a;
    Rational rhs(0);
    for (size_t i = 0; i < a.size(); ++i) {
      if (with0[i] == 0) continue;
      std::vector<int> s2(with0.begin(), with0.end() - 1);
      s2[i] -= 1;
      rhs += psi_integral(s2);
    }
    ok = ok && lhs == rhs;
    CHECK(lhs == rhs);
    std::vector<int> with1 = a;
    with1.push_back(1);
    CHECK(psi_integral(with1) == Rational(n - 2) * psi_integral(a));
    ok = ok && psi_integral(with1) == Rational(n - 2) * psi_integral(a);
  }

  // String, dilaton, divisor on computed engine tables (P¹, d = 2).
  {
    auto p1t = TargetModel::projective_space(1);
    Engine eng(p1t);
    EqClass h = EqClass::generator(p1t->fiber_ctx());
    EqClass one = EqClass::unit(p1t->fiber_ctx());
    CurveClass beta = p1t->fiber_class(2);
    Rational base = eng.compute_invariant(beta, {{2, h}, {0, h}, {0, h}});
    Rational str = eng.compute_invariant(beta, {{0, one}, {3, h}, {0, h}, {0, h}});
    Rational dil = eng.compute_invariant(beta, {{1, one}, {2, h}, {0, h}, {0, h}});
    Rational div = eng.compute_invariant(beta, {{0, h}, {2, h}, {0, h}, {0, h}});
    CHECK(str == base);
    CHECK(dil == base);
    CHECK(div == Rational(2) * base);
    ok = ok && str == base && dil == base && div == Rational(2) * base;
  }

  // String, dilaton, divisor on oracle tables (P², d = 1).
  {
    auto p2 = gkm_projective_space(2);
    auto mono = [&](int psi, int e) {
      OracleInsertion o;
      o.psi = psi;
      o.cls = OracleClass::divisor_monomial(0, 1, e);
      return o;
    };
    LaurentScalar base = oracle_invariant(p2, {1}, {mono(0, 2), mono(0, 2)});
    LaurentScalar str =
        oracle_invariant(p2, {1}, {mono(0, 0), mono(1, 2), mono(0, 2)});
    LaurentScalar dil =
        oracle_invariant(p2, {1}, {mono(1, 0), mono(0, 2), mono(0, 2)});
    LaurentScalar div =
        oracle_invariant(p2, {1}, {mono(0, 1), mono(1, 2), mono(0, 2)});
    // <H, ψ pt, pt> = (β,H)<ψ... wait: divisor: = 1·<ψ pt, pt> + <ψ⁰(H·pt), pt>
    // and H·pt = 0, so it collapses to <ψ pt, pt>; that in turn equals
    // <pt, pt> + ... handled below by direct equalities.
    LaurentScalar psi_table = oracle_invariant(p2, {1}, {mono(1, 2), mono(0, 2)});
    CHECK(str == base);
    CHECK(dil == LaurentScalar(Rational(3 - 2)) * base);
    CHECK(div == psi_table);
    ok = ok && str == base && div == psi_table;
  }

  // Lemma 1.2 pairing equality on the Hirzebruch pair over the lattice box.
  {
    auto v1 = TargetModel::split_over_p1({0, 2});
    auto v2 = TargetModel::split_over_p1({1, 1});
    EqualChernPair pair(v1, v2);
    EqClass k1 = v1->canonical_divisor();
    EqClass k2 = v2->canonical_divisor();
    for (long k = -5; k <= 5; ++k)
      for (long b = -5; b <= 5; ++b) {
        CurveClass beta{k, {b}};
        bool eq = v1->pair(k1, beta) == v2->pair(k2, pair.psi_map(beta));
        ok = ok && eq;
        CHECK(eq);
      }
  }
  report(8, ok, "string/dilaton/divisor, psi recursions, pairing box");
}
