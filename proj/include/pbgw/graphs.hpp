#pragma once

#include <string>
#include <vector>

#include "pbgw/targets.hpp"

namespace pbgw {

/// Decorated graph labelling a fixed-locus component of the fiberwise C*
/// action on M̄_{0,n}(P(V⊕O), β): a bipartite tree whose vertices carry a
/// side (zero section / infinity divisor), a curve class and markings, and
/// whose edges carry covering degrees of fiber lines.
struct DecoratedGraph {
  enum Side { SideZero = 0, SideInf = 1 };

  struct Vertex {
    Side side;
    CurveClass beta;        // base-lattice class on side 0 (fiber part 0)
    std::vector<int> marks; // sorted 0-based marking labels
  };
  struct Edge {
    int u, v;  // u on side 0, v on side infinity
    int k;     // covering degree >= 1
  };

  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  bool is_gamma0() const { return edges.empty(); }
  int valence(int v) const;
  std::vector<int> incident_edges(int v) const;
  std::string canonical_key() const;
  std::string dump_line() const;  // stable one-line text encoding
};

enum class VertexClass { Stable, V1, V11, V2 };

/// Maximal chain of edges through valence-2 unstable vertices, with its
/// interior and endpoint vertex sets.
struct EdgeClassChain {
  std::vector<int> edge_ids;      // in chain order
  std::vector<int> interior;      // V² vertices between consecutive edges
  int end_a, end_b;               // chain endpoint vertices (not in V²)
  bool tail;                      // an endpoint lies in V¹ ∪ V^{1,1}
};

struct GraphClassification {
  std::vector<VertexClass> vertex_class;
  std::vector<EdgeClassChain> edge_classes;
  std::vector<int> side_zero, side_inf;  // V⁰(Γ), V^∞(Γ)
};

/// Complete duplicate-free list of decorated-graph isomorphism classes with
/// total class β, n markings, genus 0. Γ₀ (single infinity vertex, no edges)
/// is first when it exists.
std::vector<DecoratedGraph> enumerate_graphs(const TargetModel& target,
                                             const CurveClass& beta, int n_marks);

GraphClassification classify(const DecoratedGraph& g);

/// Order of the group of decoration-preserving automorphisms fixing all
/// markings pointwise. The covering-multiplicity factor ∏k_e is reported
/// separately; the localization sum divides by their product.
long automorphism_order(const DecoratedGraph& g);
long edge_multiplicity(const DecoratedGraph& g);

}  // namespace pbgw
