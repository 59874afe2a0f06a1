#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pbgw/eq_class.hpp"

namespace pbgw {

/// Numerical curve class of P(V) (equivalently of the master space P(V⊕O)),
/// stored in the splitting Z·f ⊕ ι_*N₁(S) induced by the zero section:
/// `fiber` is the pairing against O(1), `base` the pushforward to S.
struct CurveClass {
  long fiber = 0;
  std::vector<long> base;

  bool is_zero() const {
    if (fiber != 0) return false;
    for (long b : base)
      if (b != 0) return false;
    return true;
  }
  friend bool operator==(const CurveClass& a, const CurveClass& b) {
    return a.fiber == b.fiber && a.base == b.base;
  }
  friend CurveClass operator+(CurveClass a, const CurveClass& b) {
    a.fiber += b.fiber;
    for (size_t i = 0; i < a.base.size(); ++i) a.base[i] += b.base[i];
    return a;
  }
  friend CurveClass operator-(CurveClass a, const CurveClass& b) {
    a.fiber -= b.fiber;
    for (size_t i = 0; i < a.base.size(); ++i) a.base[i] -= b.base[i];
    return a;
  }
  std::string str() const;
};

/// A projective bundle P(V) → S presented by the data the algorithms
/// consume: base ring presentation, rank and Chern classes of V, curve
/// lattice, and effective-cone tests for both P(V) and the master space.
///
/// Convention: P(V) parametrizes lines in the fibers of V, so that the
/// Leray-Hirsch relation reads H^r + c₁(V)H^{r-1} + ... + c_r(V) = 0 and a
/// section given by a line subbundle L pairs with H as -deg L.
class TargetModel {
public:
  TargetModel(std::string id, std::shared_ptr<const BaseRing> base, int rank,
              std::vector<std::vector<Rational>> chern,
              std::optional<long> split_min_section_pairing,
              bool o1_ample);

  const std::string& id() const { return id_; }
  const std::shared_ptr<const BaseRing>& base() const { return base_; }
  int rank() const { return rank_; }
  int dim() const { return base_->dim() + rank_ - 1; }
  const std::vector<std::vector<Rational>>& chern() const { return chern_; }
  bool o1_ample() const { return o1_ample_; }

  const RingCtxPtr& base_ctx() const { return base_ring_ctx_; }
  const RingCtxPtr& fiber_ctx() const { return fiber_ctx_; }
  const RingCtxPtr& master_ctx() const { return master_ctx_; }

  CurveClass zero_class() const { return {0, std::vector<long>(base_->curve_rank(), 0)}; }
  CurveClass fiber_class(long k = 1) const {
    return {k, std::vector<long>(base_->curve_rank(), 0)};
  }

  /// Pairing of a degree-2 class aH + π*D against a curve class.
  long pair(const EqClass& degree2, const CurveClass& beta) const;

  /// K_{P(V)} = -r·H - π*c₁(V) + π*K_S as a fiber-ring class.
  EqClass canonical_divisor() const;

  /// dim P(V) + (-K, β) + n - 3 at genus zero.
  long virtual_dim(int n_marks, const CurveClass& beta) const;

  bool effective(const CurveClass& beta) const;         // NE(P(V))
  bool master_effective(const CurveClass& beta) const;  // NE(P(V⊕O))

  /// Strict partial order driving the recursion: β < β′ iff π_*β′-π_*β is
  /// effective nonzero on S, or β′-β is effective nonzero on the master
  /// space.
  bool curve_less(const CurveClass& beta, const CurveClass& beta_prime) const;

  // Built-ins.
  static std::shared_ptr<const TargetModel> projective_space(int n);
  static std::shared_ptr<const TargetModel> split_over_p1(std::vector<long> twists);
  static std::shared_ptr<const TargetModel> trivial_over(
      std::shared_ptr<const BaseRing> base, int rank);
  static std::shared_ptr<const TargetModel> builtin(const std::string& name);
  static std::shared_ptr<const TargetModel> from_json(const std::string& text);

private:
  std::string id_;
  std::shared_ptr<const BaseRing> base_;
  int rank_;
  std::vector<std::vector<Rational>> chern_;
  // min over sections σ_L of (σ_L, H) for built-in split bundles over P¹;
  // 0 for trivial bundles. Defines the cone inequality k ≥ m·(π_*β).
  std::optional<long> min_section_pairing_;
  bool o1_ample_;
  RingCtxPtr base_ring_ctx_, fiber_ctx_, master_ctx_;
};

using TargetPtr = std::shared_ptr<const TargetModel>;

/// Two targets over the same base with identical rank and Chern classes.
/// Carries the induced identifications F (cohomology) and Ψ (curve classes).
class EqualChernPair {
public:
  EqualChernPair(TargetPtr first, TargetPtr second);

  const TargetPtr& first() const { return a_; }
  const TargetPtr& second() const { return b_; }

  /// F: H*(P(V₁)) → H*(P(V₂)), π₁*σ ↦ π₂*σ, h₁ ↦ h₂.
  EqClass f_map(const EqClass& cls) const;

  /// Ψ: N₁(P(V₁)) → N₁(P(V₂)), determined by (D,β) = (F(D),Ψβ); solved from
  /// the pairing system on a lattice basis.
  CurveClass psi_map(const CurveClass& beta) const;

private:
  TargetPtr a_, b_;
};

}  // namespace pbgw
