#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pbgw/laurent.hpp"
#include "pbgw/rational.hpp"

namespace pbgw {

/// Moment-graph description of a smooth toric target: fixed points with
/// tangent weights in an integer character lattice, one-dimensional orbits
/// with the matching of tangent directions across them, divisor classes by
/// their localizations, and the curve lattice with pairings.
struct GKMData {
  struct Direction {
    std::vector<long> w_p, w_q;  // matched weights at the two ends
    long degree;                 // of the corresponding line summand of TX
  };
  struct Edge {
    int p, q;
    std::vector<Direction> dirs;  // dirs[0] is along the orbit (degree 2)
    std::vector<long> curve_class;
  };
  struct Divisor {
    std::string name;
    // Equivariant localization at each fixed point, lattice coordinates.
    std::vector<std::vector<Rational>> value_at;
    std::vector<long> curve_pairing;  // against the curve lattice basis
  };

  std::string name;
  int lattice_rank = 0;
  int dim = 0;
  int curve_rank = 0;
  std::vector<std::string> point_names;
  std::vector<std::vector<std::vector<long>>> tangent;  // [point][dir] weights
  std::vector<Edge> edges;
  std::vector<Divisor> divisors;
  std::vector<long> anticanonical;  // (-K_X, ·) on the curve lattice

  int points() const { return static_cast<int>(point_names.size()); }
  int divisor_index(const std::string& nm) const;
  void validate() const;

  std::string to_json() const;
  static GKMData from_json(const std::string& text);

private:
  static GKMData from_json_checked(const std::string& text);
};

/// One C*-scaled bundle summand entering a twisted invariant: fixed-point
/// values of an equivariant lift plus the global scaling character (+1 for
/// V-type twists, -1 for O(1)-type twists).
struct TwistSummand {
  std::vector<std::vector<Rational>> value_at;  // per point, lattice coords
  int scaling;                                  // +1 or -1
};
using TwistSpec = std::vector<TwistSummand>;

/// Insertion class for the oracle: a polynomial in the named divisor
/// generators with rational coefficients, paired with a ψ-power.
struct OracleClass {
  struct Term {
    Rational coef;
    std::vector<int> divisor_power;  // exponent per divisor generator
  };
  std::vector<Term> terms;

  static OracleClass one() { return {{{Rational(1), {}}}}; }
  static OracleClass divisor_monomial(int index, int count, int exp);
  int degree(const GKMData& g) const;  // complex degree; throws if mixed
};

struct OracleInsertion {
  int psi = 0;
  OracleClass cls;
};

/// Genus-0 fixed-point graph-sum invariant. Untwisted calls return a
/// constant; twisted calls return the full Laurent polynomial in λ.
/// Every value is computed under two independent integer weight
/// specializations and must agree; a third specialization is drawn when a
/// specialization hits a vanishing denominator.
LaurentScalar oracle_invariant(const GKMData& gkm, const std::vector<long>& beta,
                               const std::vector<OracleInsertion>& insertions,
                               const std::optional<TwistSpec>& twist = {},
                               int spec_offset = 0);

/// One marked point carrying a finite ψ-series Σ_t coef_t ψ^{a_t} γ_t with
/// λ-Laurent coefficients. Twisted brackets are multilinear in these, so a
/// single graph sum evaluates what would otherwise be a large grid of
/// monomial lookups.
struct OracleSeriesTerm {
  int psi;
  OracleClass cls;
  LaurentScalar coef;
};
struct OracleSeriesInsertion {
  std::vector<OracleSeriesTerm> terms;
};

/// Twisted graph-sum bracket with series insertions (twist required).
LaurentScalar oracle_series_invariant(const GKMData& gkm,
                                      const std::vector<long>& beta,
                                      const std::vector<OracleSeriesInsertion>& ins,
                                      const TwistSpec& twist, int spec_offset = 0);

/// ∫_X of a divisor polynomial, by localization (degree-matched part only).
Rational gkm_integral(const GKMData& gkm, const OracleClass& cls);

/// Classical WDVV recursion for counts of degree-d rational plane curves.
Rational wdvv_plane_numbers(int d);

// Built-in moment graphs.
GKMData gkm_projective_space(int n);
GKMData gkm_product_p1xp1();
/// P(O(t_1) ⊕ ... ⊕ O(t_r)) over P¹ with its natural torus; divisors are
/// named "H" (the O(1) class of the subspace-convention projectivization)
/// and "F" (a base point). F_a is the a = |t_2 - t_1| case.
GKMData gkm_split_over_p1(const std::vector<long>& twists);
GKMData gkm_hirzebruch(int a);
GKMData gkm_builtin(const std::string& name);

struct VerificationLine {
  std::string label;
  bool ok;
  std::string lhs, rhs;
};
struct VerificationReport {
  std::vector<VerificationLine> lines;
  bool all_ok() const {
    for (auto& l : lines)
      if (!l.ok) return false;
    return true;
  }
};

/// Main-theorem check at desk scale: untwisted invariants of the F₂/F₀
/// equal-Chern pair agree under the cohomology and curve-class
/// identifications, swept over anticanonical degree ≤ max_acdeg with basis
/// insertions and up to max_marks markings.
VerificationReport verify_theorem_A(int max_acdeg, int max_marks);

/// Twisted-invariant equality for V₁ = O⊕O(2) vs V₂ = O(1)⊕O(1) on P¹
/// (scaling character +1), all degrees ≤ max_degree.
VerificationReport verify_lemma_tw(int max_degree, int max_marks);

}  // namespace pbgw
