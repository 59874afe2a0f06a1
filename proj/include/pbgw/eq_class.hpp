#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pbgw/base_ring.hpp"

namespace pbgw {

/// Ambient truncated ring H*(S)[t]/(monic relation) ⊗ C[λ,λ⁻¹]. Three kinds
/// appear: the master-space ring (relation c_V(h)(h−λ), degree r+1), the
/// fiber ring of P(V) (relation c_V(H), degree r), and the base ring itself
/// (relation t, degree 1).
struct RingContext {
  enum class Kind { Master, Fiber, Base };

  std::shared_ptr<const BaseRing> base;
  Kind kind;
  int relation_degree;             // D: elements are stored with t-degree < D
  std::vector<BaseVec> relation;   // t^D + rel[D-1] t^{D-1} + ... + rel[0] = 0
  bool lambda_free_relation;       // true for Fiber and Base rings
  std::string var;                 // display name of the generator

  // Largest power to attempt in nilpotency-driven loops before declaring the
  // element non-invertible. Only meaningful when the relation is λ-free.
  int nilpotency_bound() const { return base->dim() + relation_degree + 1; }

  bool same_as(const RingContext& o) const;
};

using RingCtxPtr = std::shared_ptr<const RingContext>;

/// Relation-reduced polynomial in the ring generator with H*(S)⊗C[λ,λ⁻¹]
/// coefficients. The universal value type of all contribution arithmetic.
/// Immutable in spirit: all operations return fresh values.
class EqClass {
public:
  EqClass() = default;
  explicit EqClass(RingCtxPtr ctx);  // zero
  EqClass(RingCtxPtr ctx, std::vector<BaseVec> coeffs);  // reduces if needed

  static EqClass unit(RingCtxPtr ctx);
  static EqClass scalar(RingCtxPtr ctx, const LaurentScalar& s);
  static EqClass generator(RingCtxPtr ctx);                 // h (or H)
  static EqClass base_element(RingCtxPtr ctx, const BaseVec& v);
  static EqClass lambda(RingCtxPtr ctx, int exp = 1);

  const RingCtxPtr& ctx() const { return ctx_; }
  bool is_zero() const;
  bool lambda_free() const;

  // Coefficient of t^j as a base-ring vector (j < relation degree).
  const BaseVec& coeff(int j) const { return c_[j]; }
  int max_t_degree() const;  // largest j with nonzero coefficient, -1 if zero

  // If the class is a pure scalar (multiple of the unit), return it.
  LaurentScalar as_scalar() const;

  // Topological degree bookkeeping: returns the (even) degree when the class
  // is homogeneous with λ counted as degree 0, else throws.
  int homogeneous_degree() const;

  EqClass operator-() const;
  friend EqClass operator+(const EqClass& a, const EqClass& b);
  friend EqClass operator-(const EqClass& a, const EqClass& b);
  friend EqClass operator*(const EqClass& a, const EqClass& b);
  EqClass& operator+=(const EqClass& o) { return *this = *this + o; }
  EqClass& operator-=(const EqClass& o) { return *this = *this - o; }
  EqClass& operator*=(const EqClass& o) { return *this = *this * o; }
  EqClass scaled(const LaurentScalar& s) const;
  EqClass pow(unsigned e) const;

  friend bool operator==(const EqClass& a, const EqClass& b);
  friend bool operator!=(const EqClass& a, const EqClass& b) { return !(a == b); }

  /// Exact multiplicative inverse, via the unit-times-(1+nilpotent) split.
  /// Requires the degree-0 part to be a nonzero λ-monomial and positive
  /// degrees to be nilpotent (λ-free relation).
  EqClass invert() const;

  std::string str() const;

private:
  void reduce();

  RingCtxPtr ctx_;
  std::vector<BaseVec> c_;  // c_[j] = coefficient of t^j, size = relation degree
};

// Ring context factories.
RingCtxPtr make_base_ctx(std::shared_ptr<const BaseRing> base);
RingCtxPtr make_fiber_ctx(std::shared_ptr<const BaseRing> base, int rank,
                          const std::vector<std::vector<Rational>>& chern);
RingCtxPtr make_master_ctx(std::shared_ptr<const BaseRing> base, int rank,
                           const std::vector<std::vector<Rational>>& chern);

/// c_V(x) = x^r + c₁(V)x^{r-1} + ... + c_r(V), evaluated in x's ring.
EqClass chern_poly_eval(int rank, const std::vector<std::vector<Rational>>& chern,
                        const EqClass& x);

/// Restriction of a master-ring class to the zero-section fixed locus
/// (h ↦ λ), landing in the base ring.
EqClass restrict_zero(const EqClass& a, const RingCtxPtr& base_ctx);

/// Restriction to the infinity divisor (h ↦ H), landing in the fiber ring.
EqClass restrict_infinity(const EqClass& a, const RingCtxPtr& fiber_ctx);

/// Fiberwise pushforward π_* of a fiber-ring class: the Segre / coefficient
/// extraction sending Σ H^j π*σ_j to its H^{r-1} component.
BaseVec fiber_integrate(const EqClass& a);

/// Total integral over P(V) (fiber ring) or S (base ring).
LaurentScalar integrate_total(const EqClass& a);

}  // namespace pbgw
