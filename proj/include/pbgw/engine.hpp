#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pbgw/contributions.hpp"

namespace pbgw {

enum class TwistTag { Untwisted, TwO1, TwV };

/// Cache key of a single invariant. Insertions are canonicalized by sorting,
/// which is harmless because the invariants are permutation symmetric.
struct InvariantKey {
  std::string target;
  CurveClass beta;
  std::vector<std::pair<int, std::string>> insertions;  // (ψ-power, class text)
  TwistTag twist = TwistTag::Untwisted;

  void canonicalize() { std::sort(insertions.begin(), insertions.end()); }
  std::string str() const;
  friend bool operator<(const InvariantKey& a, const InvariantKey& b) {
    return a.str() < b.str();
  }
};

/// Persistent exact-value store. Writing a differing value for an existing
/// key is a hard error; concurrent writers must agree.
class InvariantCache {
public:
  void store(const InvariantKey& key, const LaurentScalar& value);
  std::optional<LaurentScalar> load(const InvariantKey& key) const;
  size_t size() const;

  void save_file(const std::string& path) const;
  /// Merges records from a JSONL file; a conflicting value is an error
  /// naming the key.
  void load_file(const std::string& path);
  std::vector<std::pair<std::string, LaurentScalar>> records() const;

private:
  mutable std::mutex mu_;
  std::map<std::string, std::pair<InvariantKey, LaurentScalar>> map_;
};

/// Genus-0 master-space engine: solves the localization identity for the
/// untwisted invariants of P(V), with twisted infinity-vertex brackets
/// supplied by a provider (the moment-graph oracle for projective spaces,
/// or a user table).
class Engine {
public:
  explicit Engine(TargetPtr target);

  const TargetModel& target() const { return *target_; }
  InvariantCache& cache() { return cache_; }

  /// True iff Σ(k_i + deg α_i) equals the virtual dimension and the class
  /// pairs positively with O(1); the master-space integral then vanishes.
  bool dimension_gate(const CurveClass& beta,
                      const std::vector<Insertion>& ins) const;

  /// λ-power relating the unknown untwisted invariant to the leading
  /// twisted term: twisted = untwisted/(-λ)^ρ with ρ = 1 + (β, O(1)).
  int leading_rho(const CurveClass& beta) const;

  /// Solves the localization identity for ⟨ψ^{k_1}α_1,...⟩_{0,n,β}.
  Rational compute_invariant(const CurveClass& beta,
                             const std::vector<Insertion>& ins);

  /// Twisted infinity-divisor bracket used by the graph sum; memoized.
  LaurentScalar twisted_lookup(const CurveClass& beta,
                               const std::vector<BracketInsertion>& ins,
                               const CurveClass& ambient);

  /// Series form: one oracle graph sum per bracket, memoized by content.
  LaurentScalar twisted_series_bracket(const CurveClass& beta,
                                       const std::vector<PsiSeries>& legs,
                                       const CurveClass& ambient);

  /// Per-graph contributions of the last computation (for --explain).
  struct Explain {
    std::string graph;
    LaurentScalar value;
  };
  const std::vector<Explain>& last_breakdown() const { return breakdown_; }

  /// Install a table-only provider (drops the built-in oracle); used to
  /// exercise the unresolved-dependency path.
  void set_table_only(bool v) { table_only_ = v; }

private:
  InvariantKey make_key(const CurveClass& beta, const std::vector<Insertion>& ins,
                        TwistTag tag) const;

  TargetPtr target_;
  InvariantCache cache_;
  std::vector<Explain> breakdown_;
  bool table_only_ = false;
  std::shared_ptr<void> oracle_state_;  // lazily built moment-graph data
  // Fast in-memory memo for twisted lookups: flat-encoded key -> value.
  std::map<std::vector<long>, LaurentScalar> fast_twisted_;
  std::map<std::string, LaurentScalar> series_bracket_memo_;

  void ensure_oracle();
};

/// Thrown when a twisted lookup has no provider; lists the needed keys.
struct UnresolvedDependency : std::runtime_error {
  explicit UnresolvedDependency(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace pbgw
