#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pbgw/laurent.hpp"
#include "pbgw/rational.hpp"

namespace pbgw {

/// Element of H*(S) ⊗ C[λ,λ⁻¹], stored as coordinates over the ring basis.
using BaseVec = std::vector<LaurentScalar>;

/// Finite presentation of the even cohomology ring of a smooth projective
/// base S: a graded basis, its multiplication table, and the integration
/// functional selecting the top-degree component. Also carries the curve
/// lattice N₁(S) with its pairing against degree-2 basis classes and the
/// effective-cone test, which the target layer needs.
class BaseRing {
public:
  struct SparseTerm { int k; Rational coef; };

  BaseRing(std::string name,
           std::vector<std::string> basis_names,
           std::vector<int> degrees,
           std::vector<std::vector<std::vector<SparseTerm>>> table,
           std::vector<Rational> integral,
           int curve_rank,
           std::vector<std::vector<long>> curve_pairing,
           std::vector<Rational> canonical);

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(names_.size()); }
  int degree(int i) const { return degs_[i]; }
  int top_degree() const { return top_; }
  int dim() const { return top_ / 2; }
  const std::string& basis_name(int i) const { return names_[i]; }
  int index_of(const std::string& nm) const;  // -1 if absent

  // Curve lattice N₁(S).
  int curve_rank() const { return curve_rank_; }
  // Pairing of the i-th degree-2 basis class against a lattice vector.
  long pair_divisor(int i, const std::vector<long>& beta) const;
  bool effective(const std::vector<long>& beta) const;  // NE(S) membership
  bool has_canonical() const { return !canonical_.empty(); }
  const std::vector<Rational>& canonical_class() const { return canonical_; }

  // --- value arithmetic -----------------------------------------------
  BaseVec zero() const { return BaseVec(size()); }
  BaseVec unit() const;
  BaseVec basis_class(int i) const;
  BaseVec from_rationals(const std::vector<Rational>& coords) const;
  static bool is_zero(const BaseVec& a);
  BaseVec add(const BaseVec& a, const BaseVec& b) const;
  BaseVec sub(const BaseVec& a, const BaseVec& b) const;
  BaseVec mul(const BaseVec& a, const BaseVec& b) const;
  BaseVec scale(const BaseVec& a, const LaurentScalar& s) const;
  LaurentScalar integral(const BaseVec& a) const;

  // Dual basis under the Poincaré pairing: dual(i) is T^i expanded over {T_j}.
  const std::vector<Rational>& dual(int i) const { return dual_[i]; }

  // Degree-2 basis indices in basis order.
  const std::vector<int>& degree2_indices() const { return deg2_; }

  std::string to_json() const;
  static std::shared_ptr<const BaseRing> from_json(const std::string& text);

  // Built-in presentations.
  static std::shared_ptr<const BaseRing> point();
  static std::shared_ptr<const BaseRing> p1();
  static std::shared_ptr<const BaseRing> p2();
  static std::shared_ptr<const BaseRing> p1xp1();
  static std::shared_ptr<const BaseRing> builtin(const std::string& name);

private:
  void validate() const;
  void compute_duals();

  std::string name_;
  std::vector<std::string> names_;
  std::vector<int> degs_;
  std::vector<std::vector<std::vector<SparseTerm>>> table_;  // [i][j] -> terms
  std::vector<Rational> integral_;
  std::vector<std::vector<Rational>> dual_;
  std::vector<int> deg2_;
  int top_ = 0;
  int curve_rank_ = 0;
  // curve_pairing_[d2_slot][lattice coord]: pairing of degree-2 basis classes
  // (in deg2_ order) against lattice generators.
  std::vector<std::vector<long>> curve_pairing_;
  std::vector<Rational> canonical_;  // K_S over the basis; empty when unknown
};

}  // namespace pbgw
