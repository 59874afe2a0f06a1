#include "pbgw/contributions.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>

namespace pbgw {

Rational psi_integral(const std::vector<int>& exponents) {
  int n = static_cast<int>(exponents.size());
  if (n < 3) throw std::domain_error("psi_integral: needs n >= 3 markings");
  long total = 0;
  for (int a : exponents) {
    if (a < 0) throw std::domain_error("psi_integral: negative exponent");
    total += a;
  }
  if (total != n - 3) return Rational(0);
  Rational r = factorial(n - 3);
  for (int a : exponents) r /= factorial(a);
  return r;
}

LaurentScalar point_vertex_value(
    int rank, const std::vector<std::vector<LaurentScalar>>& legs) {
  int m = static_cast<int>(legs.size());
  if (m < 3) throw std::logic_error("point_vertex_value: unstable vertex");
  LaurentScalar sum;
  std::vector<int> pick(m, 0);
  std::function<void(int, int, LaurentScalar)> rec = [&](int i, int left,
                                                         LaurentScalar acc) {
    if (acc.is_zero()) return;
    if (i == m) {
      if (left != 0) return;
      Rational w = factorial(m - 3);
      for (int a : pick) w /= factorial(a);
      sum += acc.scaled(w);
      return;
    }
    for (int a = 0; a <= left && a < static_cast<int>(legs[i].size()); ++a) {
      pick[i] = a;
      rec(i + 1, left - a, acc * legs[i][a]);
    }
    pick[i] = 0;
  };
  rec(0, m - 3, LaurentScalar(1));
  return sum * LaurentScalar::monomial(Rational(1), -rank);
}

EqClass lift_insertion(const TargetModel& t, const EqClass& alpha) {
  if (!alpha.ctx()->same_as(*t.fiber_ctx()))
    throw std::invalid_argument("lift_insertion: class not on P(V)");
  auto master = t.master_ctx();
  EqClass h = EqClass::generator(master);
  EqClass out(master);
  for (int j = 0; j <= alpha.max_t_degree(); ++j) {
    EqClass term = EqClass::base_element(master, alpha.coeff(j));
    if (j > 0) term *= h.pow(static_cast<unsigned>(j));
    out += term;
  }
  return out;
}

EqClass vertex_factor(const TargetModel& t, DecoratedGraph::Side side) {
  auto ctx = t.fiber_ctx();
  if (side == DecoratedGraph::SideZero)
    return chern_poly_eval(t.rank(), t.chern(), EqClass::lambda(ctx));
  return EqClass::generator(ctx) - EqClass::lambda(ctx);
}

int vertex_sign(DecoratedGraph::Side side) {
  return side == DecoratedGraph::SideZero ? 1 : -1;
}

namespace {

// Tangent weight of edge e at vertex v: δ_v (λ - H)/k_e.
EqClass flag_weight(const TargetModel& t, const DecoratedGraph& g, int edge,
                    int vertex) {
  auto ctx = t.fiber_ctx();
  auto& e = g.edges[edge];
  EqClass w = EqClass::lambda(ctx) - EqClass::generator(ctx);
  return w.scaled(
      LaurentScalar(Rational(vertex_sign(g.vertices[vertex].side), e.k)));
}

// Π_{m=1}^{k} (m/k)(H-λ)·c_V(H + (m/k)(λ-H)) on one fiber line.
EqClass edge_denominator(const TargetModel& t, int k) {
  auto ctx = t.fiber_ctx();
  EqClass h = EqClass::generator(ctx);
  EqClass lam = EqClass::lambda(ctx);
  EqClass acc = EqClass::unit(ctx);
  for (int m = 1; m <= k; ++m) {
    EqClass lin = (h - lam).scaled(LaurentScalar(Rational(m, k)));
    EqClass arg = h + (lam - h).scaled(LaurentScalar(Rational(m, k)));
    acc *= lin * chern_poly_eval(t.rank(), t.chern(), arg);
  }
  return acc;
}

// Inverses of the edge blocks recur across graphs; memoize per ring.
const EqClass& edge_denominator_inverse(const TargetModel& t, int k) {
  static std::map<std::pair<const RingContext*, int>, EqClass> memo;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(t.fiber_ctx().get(), k);
  auto it = memo.find(key);
  if (it == memo.end())
    it = memo.emplace(key, edge_denominator(t, k).invert()).first;
  return it->second;
}

BaseVec chern_at_lambda_base(const TargetModel& t) {
  auto& B = *t.base();
  BaseVec acc = B.scale(B.unit(), LaurentScalar::lambda(t.rank()));
  for (int i = 1; i <= t.rank(); ++i) {
    BaseVec ci = B.from_rationals(t.chern()[i - 1]);
    acc = B.add(acc, B.scale(ci, LaurentScalar::lambda(t.rank() - i)));
  }
  return acc;
}

struct ChainTerm {
  int jminus = -1;          // ψ-power at the minus end; -1 when absent
  bool minus_open = false;  // first line pinned to the minus evaluation
  EqClass minus;            // insertion coefficient for the minus bracket
  EqClass cur;              // accumulated class on the current line
};

struct ChainData {
  std::vector<int> verts;
  std::vector<int> edges;
};

ChainData orient_chain(const DecoratedGraph& g, const EdgeClassChain& ch,
                       int start_vertex) {
  ChainData out;
  int cur = start_vertex;
  out.verts.push_back(cur);
  std::vector<bool> used(ch.edge_ids.size(), false);
  for (size_t step = 0; step < ch.edge_ids.size(); ++step) {
    bool advanced = false;
    for (size_t i = 0; i < ch.edge_ids.size() && !advanced; ++i) {
      if (used[i]) continue;
      auto& e = g.edges[ch.edge_ids[i]];
      if (e.u == cur || e.v == cur) {
        used[i] = true;
        out.edges.push_back(ch.edge_ids[i]);
        cur = (e.u == cur) ? e.v : e.u;
        out.verts.push_back(cur);
        advanced = true;
      }
    }
    if (!advanced) throw std::logic_error("orient_chain: broken chain");
  }
  return out;
}

// ψ-truncation bound: virtual dimension of the bracket at a stable vertex.
int vertex_truncation(const TargetModel& t, const DecoratedGraph& g, int v) {
  auto& vert = g.vertices[v];
  int m = g.valence(v) + static_cast<int>(vert.marks.size());
  if (vert.side == DecoratedGraph::SideInf)
    return static_cast<int>(t.virtual_dim(m, vert.beta));
  long acdeg = 0;
  if (t.base()->has_canonical()) {
    auto& deg2 = t.base()->degree2_indices();
    auto& ks = t.base()->canonical_class();
    for (int i : deg2)
      if (!ks[i].is_zero())
        acdeg -= std::stol(
            (ks[i] * Rational(t.base()->pair_divisor(i, vert.beta.base))).str());
  }
  return static_cast<int>(t.base()->dim() + acdeg + m - 3);
}

// The lifted insertion restricted to the fixed locus a vertex maps into,
// expressed as a fiber-ring class (constant along the line for side zero).
EqClass restricted_lift(const TargetModel& t, const EqClass& alpha,
                        DecoratedGraph::Side side) {
  if (side == DecoratedGraph::SideInf) return alpha;
  EqClass lifted = lift_insertion(t, alpha);
  EqClass at_zero = restrict_zero(lifted, t.base_ctx());
  return EqClass::base_element(t.fiber_ctx(), at_zero.coeff(0));
}

// 1/((λ-H_L)/k + (λ-H_R)/k') expanded as Σ_u A_u(H_L) ⊗ B_u(H_R): the two
// lines only share the base point of their fiber, so the geometric series
// in the nilpotent part separates into split tensors.
std::vector<std::pair<EqClass, EqClass>> smoothing_expansion_impl(
    const TargetModel& t, int k_left, int k_right) {
  auto ctx = t.fiber_ctx();
  EqClass h = EqClass::generator(ctx);
  Rational c = Rational(1, k_left) + Rational(1, k_right);
  LaurentScalar c_lam_inv = LaurentScalar::monomial(Rational(1) / c, -1);
  std::vector<std::pair<EqClass, EqClass>> out;
  int bound = 2 * (t.base()->dim() + t.rank()) + 1;
  for (int p = 0; p <= bound; ++p) {
    bool any = false;
    LaurentScalar clam = c_lam_inv.pow(static_cast<unsigned>(p + 1));
    for (int a = 0; a <= p; ++a) {
      Rational scale = binomial(p, a) / (Rational(k_left).pow(a) *
                                         Rational(k_right).pow(p - a));
      EqClass A = h.pow(static_cast<unsigned>(a)).scaled(clam.scaled(scale));
      EqClass B = h.pow(static_cast<unsigned>(p - a));
      if (A.is_zero() || B.is_zero()) continue;
      out.push_back({std::move(A), std::move(B)});
      any = true;
    }
    if (!any) break;
  }
  return out;
}

const std::vector<std::pair<EqClass, EqClass>>& smoothing_expansion(
    const TargetModel& t, int k_left, int k_right) {
  static std::map<std::tuple<const RingContext*, int, int>,
                  std::vector<std::pair<EqClass, EqClass>>>
      memo;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(t.fiber_ctx().get(), k_left, k_right);
  auto it = memo.find(key);
  if (it == memo.end())
    it = memo.emplace(key, smoothing_expansion_impl(t, k_left, k_right)).first;
  return it->second;
}

// Interior chain factor on one line: Vert(∞)/((1/k₁+1/k₂)(H-λ)).
const EqClass& interior_inf_factor(const TargetModel& t, int k1, int k2) {
  static std::map<std::tuple<const RingContext*, int, int>, EqClass> memo;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(t.fiber_ctx().get(), k1, k2);
  auto it = memo.find(key);
  if (it == memo.end()) {
    auto ctx = t.fiber_ctx();
    EqClass f = vertex_factor(t, DecoratedGraph::SideInf) *
                (EqClass::generator(ctx) - EqClass::lambda(ctx))
                    .scaled(LaurentScalar(Rational(1, k1) + Rational(1, k2)))
                    .invert();
    it = memo.emplace(key, std::move(f)).first;
  }
  return it->second;
}

EqClass lift_base(const TargetModel& t, const BaseVec& v) {
  return EqClass::base_element(t.fiber_ctx(), v);
}

BaseVec dual_vec(const BaseRing& B, int i) {
  return B.from_rationals(
      std::vector<Rational>(B.dual(i).begin(), B.dual(i).end()));
}

}  // namespace

EqClass edge_contribution(const TargetModel& t, const DecoratedGraph& g,
                          const GraphClassification& cls, int chain_index) {
  auto& ch = cls.edge_classes[chain_index];
  auto ctx = t.fiber_ctx();
  for (int v : ch.interior)
    if (g.vertices[v].side == DecoratedGraph::SideZero)
      throw std::invalid_argument(
          "edge_contribution: chains through the zero section couple two "
          "fiber lines and are evaluated by the chain transfer");
  EqClass num = vertex_factor(t, g.vertices[ch.end_a].side) *
                vertex_factor(t, g.vertices[ch.end_b].side);
  for (int v : ch.interior) num *= vertex_factor(t, g.vertices[v].side);
  EqClass den = EqClass::unit(ctx);
  for (int ei : ch.edge_ids) den *= edge_denominator(t, g.edges[ei].k);
  ChainData cd = orient_chain(g, ch, ch.end_a);
  for (size_t i = 0; i + 2 < cd.verts.size(); ++i) {
    int v = cd.verts[i + 1];
    int k1 = g.edges[cd.edges[i]].k;
    int k2 = g.edges[cd.edges[i + 1]].k;
    EqClass lam_h = EqClass::lambda(ctx) - EqClass::generator(ctx);
    den *= lam_h.scaled(LaurentScalar(Rational(vertex_sign(g.vertices[v].side)) *
                                      (Rational(1, k1) + Rational(1, k2))));
  }
  return num * den.invert();
}

GraphAssembly assemble_graph(const TargetModel& t, const DecoratedGraph& g,
                             const std::vector<Insertion>& insertions) {
  auto cls = classify(g);
  auto ctx = t.fiber_ctx();
  GraphAssembly out;

  bool any_stable = false;
  for (auto& vc : cls.vertex_class)
    if (vc == VertexClass::Stable) any_stable = true;

  auto end_factor = [&](int v, int edge) -> EqClass {
    if (cls.vertex_class[v] == VertexClass::V1) return flag_weight(t, g, edge, v);
    auto& ins = insertions[g.vertices[v].marks[0]];
    EqClass w = flag_weight(t, g, edge, v);
    EqClass psi_loc = (-w).pow(static_cast<unsigned>(ins.psi));
    return psi_loc * restricted_lift(t, ins.cls, g.vertices[v].side);
  };

  BaseVec cV_lambda = chern_at_lambda_base(t);
  auto& B = *t.base();

  auto process_chain = [&](const EdgeClassChain& ch)
      -> std::vector<AssemblyChoice> {
    bool a_stable = cls.vertex_class[ch.end_a] == VertexClass::Stable;
    bool b_stable = cls.vertex_class[ch.end_b] == VertexClass::Stable;
    int start = ch.end_a, finish = ch.end_b;
    if (!b_stable && a_stable) std::swap(start, finish);
    ChainData cd = orient_chain(g, ch, start);
    int m = static_cast<int>(cd.edges.size());
    bool start_stable = cls.vertex_class[start] == VertexClass::Stable;
    bool finish_stable = cls.vertex_class[finish] == VertexClass::Stable;

    int d_minus = start_stable ? vertex_truncation(t, g, start) : 0;
    int d_plus = finish_stable ? vertex_truncation(t, g, finish) : 0;

    std::vector<ChainTerm> terms;
    if (!start_stable) {
      ChainTerm term;
      term.cur = end_factor(start, cd.edges[0]);
      terms.push_back(std::move(term));
    } else if (g.vertices[start].side == DecoratedGraph::SideZero) {
      // The minus bracket lives on S; the dual-basis split happens at its
      // node, and the ψ-leg denominator rides on the first line in `cur`.
      EqClass winv = flag_weight(t, g, cd.edges[0], start).invert();
      for (int i = 0; i < B.size(); ++i) {
        EqClass acc = lift_base(t, B.mul(B.basis_class(i), cV_lambda));
        for (int jm = 0; jm <= d_minus; ++jm) {
          acc *= winv;
          ChainTerm term;
          term.jminus = jm;
          term.minus = EqClass::base_element(t.base_ctx(), dual_vec(B, i));
          term.cur = acc;
          terms.push_back(std::move(term));
        }
      }
    } else {
      // Stable infinity end: its line is pinned to the evaluation point, so
      // factors accumulate into the minus insertion until the chain first
      // touches the zero section.
      EqClass winv = flag_weight(t, g, cd.edges[0], start).invert();
      EqClass acc = vertex_factor(t, DecoratedGraph::SideInf);
      for (int jm = 0; jm <= d_minus; ++jm) {
        acc *= winv;
        ChainTerm term;
        term.jminus = jm;
        term.minus_open = true;
        term.minus = acc;
        term.cur = EqClass::unit(ctx);
        terms.push_back(std::move(term));
      }
    }

    auto mul_into = [&](ChainTerm& term, const EqClass& f) {
      if (term.minus_open)
        term.minus *= f;
      else
        term.cur *= f;
    };

    for (int i = 0; i < m; ++i) {
      const EqClass& dinv = edge_denominator_inverse(t, g.edges[cd.edges[i]].k);
      for (auto& term : terms) mul_into(term, dinv);
      if (i + 1 == m) break;
      int v = cd.verts[i + 1];
      int k1 = g.edges[cd.edges[i]].k;
      int k2 = g.edges[cd.edges[i + 1]].k;
      if (g.vertices[v].side == DecoratedGraph::SideInf) {
        const EqClass& factor = interior_inf_factor(t, k1, k2);
        for (auto& term : terms) mul_into(term, factor);
      } else {
        auto expansion = smoothing_expansion(t, k1, k2);
        std::vector<ChainTerm> next;
        for (auto& term : terms) {
          for (auto& [A, Bf] : expansion) {
            if (term.minus_open) {
              for (int bi = 0; bi < B.size(); ++bi) {
                ChainTerm nt;
                nt.jminus = term.jminus;
                nt.minus = term.minus * A * lift_base(t, dual_vec(B, bi));
                nt.cur = term.cur * Bf *
                         lift_base(t, B.mul(B.basis_class(bi), cV_lambda));
                if (!nt.minus.is_zero() && !nt.cur.is_zero())
                  next.push_back(std::move(nt));
              }
            } else {
              BaseVec folded = fiber_integrate(term.cur * A);
              if (BaseRing::is_zero(folded)) continue;
              ChainTerm nt;
              nt.jminus = term.jminus;
              nt.minus = term.minus;
              nt.cur = lift_base(t, B.mul(folded, cV_lambda)) * Bf;
              if (!nt.cur.is_zero()) next.push_back(std::move(nt));
            }
          }
        }
        terms = std::move(next);
      }
    }

    std::vector<AssemblyChoice> choices;
    if (!finish_stable) {
      EqClass endf = end_factor(finish, cd.edges[m - 1]);
      LaurentScalar total;
      for (auto& term : terms) {
        if (term.minus_open || term.jminus >= 0)
          throw std::logic_error("pure chain with a stable end");
        total += integrate_total(term.cur * endf);
      }
      out.pure_value += total;
      return choices;
    }

    EqClass wplus_inv = flag_weight(t, g, cd.edges[m - 1], finish).invert();
    EqClass vert_plus = vertex_factor(t, g.vertices[finish].side);
    bool plus_zero = g.vertices[finish].side == DecoratedGraph::SideZero;

    for (auto& term : terms) {
      if (term.minus_open) {
        // The chain never left the pinned line: it ends on the zero
        // section and the plus ψ-denominator lives on the pinned line too.
        if (!plus_zero)
          throw std::logic_error("pinned chain must finish on the zero section");
        EqClass pinned_acc = term.minus * term.cur * vert_plus;
        for (int bi = 0; bi < B.size(); ++bi) {
          EqClass acc = pinned_acc * lift_base(t, dual_vec(B, bi));
          for (int jp = 0; jp <= d_plus; ++jp) {
            acc *= wplus_inv;
            const EqClass& minus_final = acc;
            if (minus_final.is_zero()) continue;
            AssemblyChoice choice;
            PsiSeries minus_leg(ctx, d_minus);
            minus_leg.coeff(term.jminus) = minus_final;
            PsiSeries plus_leg(t.base_ctx(), d_plus);
            plus_leg.coeff(jp) =
                EqClass::base_element(t.base_ctx(), B.basis_class(bi));
            choice.legs.push_back({start, minus_leg});
            choice.legs.push_back({finish, plus_leg});
            choices.push_back(std::move(choice));
          }
        }
        continue;
      }
      PsiSeries plus_leg(plus_zero ? t.base_ctx() : ctx, d_plus);
      bool nonzero = false;
      EqClass raw_acc = term.cur * vert_plus;
      for (int jp = 0; jp <= d_plus; ++jp) {
        raw_acc *= wplus_inv;
        const EqClass& raw = raw_acc;
        if (plus_zero) {
          BaseVec pushed = fiber_integrate(raw);
          if (!BaseRing::is_zero(pushed)) {
            plus_leg.coeff(jp) = EqClass::base_element(t.base_ctx(), pushed);
            nonzero = true;
          }
        } else if (!raw.is_zero()) {
          plus_leg.coeff(jp) = raw;
          nonzero = true;
        }
      }
      if (!nonzero) continue;
      AssemblyChoice choice;
      if (term.jminus >= 0) {
        PsiSeries minus_leg(term.minus.ctx(), d_minus);
        minus_leg.coeff(term.jminus) = term.minus;
        choice.legs.push_back({start, minus_leg});
      }
      choice.legs.push_back({finish, plus_leg});
      choices.push_back(std::move(choice));
    }
    return choices;
  };

  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    if (cls.vertex_class[v] != VertexClass::Stable) continue;
    int trunc = vertex_truncation(t, g, v);
    for (int mk : g.vertices[v].marks) {
      if (g.vertices[v].side == DecoratedGraph::SideZero) {
        EqClass at0 =
            restrict_zero(lift_insertion(t, insertions[mk].cls), t.base_ctx());
        out.mark_legs.push_back(
            {v, PsiSeries::single(at0, insertions[mk].psi, trunc)});
      } else {
        out.mark_legs.push_back(
            {v, PsiSeries::single(insertions[mk].cls, insertions[mk].psi, trunc)});
      }
    }
  }

  if (!any_stable) {
    out.pure = true;
    if (cls.edge_classes.size() != 1)
      throw std::logic_error("fully unstable graph must be a single chain");
    process_chain(cls.edge_classes[0]);
    return out;
  }

  for (auto& ch : cls.edge_classes)
    out.class_terms.push_back(process_chain(ch));
  return out;
}

LaurentScalar evaluate_graph(const TargetModel& t, const DecoratedGraph& g,
                             const std::vector<Insertion>& insertions,
                             const InfinityBracketFn& infinity_bracket) {
  auto cls = classify(g);
  GraphAssembly assembly = assemble_graph(t, g, insertions);
  Rational norm = Rational(1) / (Rational(automorphism_order(g)) *
                                 Rational(edge_multiplicity(g)));

  if (assembly.pure) return assembly.pure_value.scaled(norm);

  auto bracket = [&](int v, const std::vector<PsiSeries>& legs) -> LaurentScalar {
    auto& vert = g.vertices[v];
    if (vert.side == DecoratedGraph::SideZero) {
      if (t.base()->size() != 1)
        throw std::runtime_error(
            "unresolved dependency: twisted invariants of a positive-"
            "dimensional base need a user-supplied table");
      std::vector<std::vector<LaurentScalar>> scalar_legs;
      for (auto& leg : legs) {
        std::vector<LaurentScalar> c;
        for (int j = 0; j <= leg.truncation(); ++j)
          c.push_back(leg.coeff(j).is_zero() ? LaurentScalar()
                                             : leg.coeff(j).coeff(0)[0]);
        scalar_legs.push_back(std::move(c));
      }
      return point_vertex_value(t.rank(), scalar_legs);
    }
    // Infinity vertex: the provider takes whole series legs.
    for (auto& leg : legs) {
      bool nonzero = false;
      for (int j = 0; j <= leg.truncation(); ++j)
        if (!leg.coeff(j).is_zero()) nonzero = true;
      if (!nonzero) return LaurentScalar();
    }
    return infinity_bracket(t, vert.beta, legs);
  };

  int nclasses = static_cast<int>(assembly.class_terms.size());
  LaurentScalar sum;
  std::vector<int> pick(nclasses, 0);
  std::function<void(int)> rec = [&](int ci) {
    if (ci == nclasses) {
      std::map<int, std::vector<PsiSeries>> legs_by_vertex;
      for (auto& [v, leg] : assembly.mark_legs) legs_by_vertex[v].push_back(leg);
      for (int c = 0; c < nclasses; ++c)
        for (auto& [v, leg] : assembly.class_terms[c][pick[c]].legs)
          legs_by_vertex[v].push_back(leg);
      LaurentScalar prod(Rational(1));
      for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
        if (cls.vertex_class[v] != VertexClass::Stable) continue;
        auto it = legs_by_vertex.find(v);
        static const std::vector<PsiSeries> empty;
        prod *= bracket(v, it == legs_by_vertex.end() ? empty : it->second);
        if (prod.is_zero()) break;
      }
      sum += prod;
      return;
    }
    if (assembly.class_terms[ci].empty()) return;
    for (int c = 0; c < static_cast<int>(assembly.class_terms[ci].size()); ++c) {
      pick[ci] = c;
      rec(ci + 1);
    }
  };
  rec(0);
  return sum.scaled(norm);
}

}  // namespace pbgw
