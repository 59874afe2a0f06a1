#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pbgw/graphs.hpp"

namespace pbgw {

/// Finite ψ-expansion with EqClass coefficients; index j holds the ψ^j
/// coefficient. Truncated at the virtual dimension of the moduli space the
/// series is integrated against, which loses nothing.
class PsiSeries {
public:
  PsiSeries(RingCtxPtr ctx, int truncation)
      : ctx_(std::move(ctx)), c_(truncation + 1, EqClass(ctx_)) {}
  static PsiSeries single(const EqClass& cls, int psi_power, int truncation) {
    PsiSeries s(cls.ctx(), truncation);
    if (psi_power <= truncation) s.c_[psi_power] = cls;
    return s;
  }
  int truncation() const { return static_cast<int>(c_.size()) - 1; }
  const EqClass& coeff(int j) const { return c_[j]; }
  EqClass& coeff(int j) { return c_[j]; }
  const RingCtxPtr& ctx() const { return ctx_; }
  PsiSeries& operator+=(const PsiSeries& o) {
    for (int j = 0; j <= std::min(truncation(), o.truncation()); ++j)
      c_[j] += o.c_[j];
    return *this;
  }

private:
  RingCtxPtr ctx_;
  std::vector<EqClass> c_;
};

/// An insertion ψ^k·α with α a class on P(V) (fiber ring).
struct Insertion {
  int psi = 0;
  EqClass cls;
};

/// ∫_{M̄_{0,n}} ψ^{a_1}...ψ^{a_n} = (n-3)!/(a_1!...a_n!) when Σa = n-3.
Rational psi_integral(const std::vector<int>& exponents);

/// Twisted point-vertex bracket over S = pt: λ^{-r} times the ψ-moduli
/// integral of the given scalar-coefficient series legs.
LaurentScalar point_vertex_value(int rank,
                                 const std::vector<std::vector<LaurentScalar>>& legs);

/// Lift α = Σ H^e π*σ̄ on P(V) to Σ h^e π*σ̄ on the master space.
EqClass lift_insertion(const TargetModel& t, const EqClass& alpha);

/// Vert(v) and δ_v of the localization formula.
EqClass vertex_factor(const TargetModel& t, DecoratedGraph::Side side);
int vertex_sign(DecoratedGraph::Side side);

/// The displayed closed form for the edge-class contribution, valid for
/// chains without interior zero-section vertices (all factors live on one
/// fiber line). Chains through zero-section vertices couple two lines and
/// are evaluated by the chain transfer inside graph assembly instead.
EqClass edge_contribution(const TargetModel& t, const DecoratedGraph& g,
                          const GraphClassification& cls, int chain_index);

/// Lookup of twisted invariants of the infinity divisor P(V). The legs are
/// whole ψ-series; the provider owns any multilinear expansion. The
/// monomial form (ψ-power, H-exponent, base index) is the unit the
/// monomial-level provider API works in.
struct BracketInsertion {
  int psi;
  int h_exp;
  int base_idx;
};
using InfinityBracketFn = std::function<LaurentScalar(
    const TargetModel&, const CurveClass&, const std::vector<PsiSeries>&)>;

/// One summand of a fully assembled graph: ψ-series legs per stable vertex.
struct AssemblyChoice {
  std::vector<std::pair<int, PsiSeries>> legs;  // (vertex id, leg)
};

/// Assembled data of a decorated graph: either a closed-form scalar (every
/// vertex unstable) or, per edge class, the list of kernel summands whose
/// legs feed the stable-vertex brackets.
struct GraphAssembly {
  bool pure = false;
  LaurentScalar pure_value;
  // One entry per edge class; the graph value sums over one choice from
  // each list (node-index sums).
  std::vector<std::vector<AssemblyChoice>> class_terms;
  // Marking legs already attached to stable vertices.
  std::vector<std::pair<int, PsiSeries>> mark_legs;
};

GraphAssembly assemble_graph(const TargetModel& t, const DecoratedGraph& g,
                             const std::vector<Insertion>& insertions);

/// Full contribution of a graph Γ ≠ Γ₀ to the localization sum, including
/// the 1/(|Aut|·Πk_e) normalization. Stable infinity-vertex brackets are
/// evaluated through the provided twisted lookup.
LaurentScalar evaluate_graph(const TargetModel& t, const DecoratedGraph& g,
                             const std::vector<Insertion>& insertions,
                             const InfinityBracketFn& infinity_bracket);

}  // namespace pbgw
