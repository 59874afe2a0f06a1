#include "pbgw/graphs.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pbgw {

int DecoratedGraph::valence(int v) const {
  int c = 0;
  for (auto& e : edges)
    if (e.u == v || e.v == v) ++c;
  return c;
}

std::vector<int> DecoratedGraph::incident_edges(int v) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i)
    if (edges[i].u == v || edges[i].v == v) out.push_back(i);
  return out;
}

namespace {

std::string vertex_tag(const DecoratedGraph::Vertex& v) {
  std::ostringstream os;
  os << (v.side == DecoratedGraph::SideZero ? "0" : "inf") << "|" << v.beta.str()
     << "|{";
  for (size_t i = 0; i < v.marks.size(); ++i) {
    if (i) os << ",";
    os << v.marks[i] + 1;
  }
  os << "}";
  return os.str();
}

// Canonical string of the tree rooted at `root` arriving through `parent`.
std::string rooted_key(const DecoratedGraph& g, int root, int parent,
                       int parent_edge) {
  std::vector<std::string> child_keys;
  for (int ei : g.incident_edges(root)) {
    auto& e = g.edges[ei];
    int other = (e.u == root) ? e.v : e.u;
    if (other == parent && ei == parent_edge) continue;
    child_keys.push_back("k" + std::to_string(e.k) + ":" +
                         rooted_key(g, other, root, ei));
  }
  std::sort(child_keys.begin(), child_keys.end());
  std::ostringstream os;
  os << "(" << vertex_tag(g.vertices[root]);
  for (auto& c : child_keys) os << "[" << c << "]";
  os << ")";
  return os.str();
}

}  // namespace

std::string DecoratedGraph::canonical_key() const {
  if (vertices.empty()) return "()";
  // Minimal rooted key over all root choices; trees are small enough that
  // center-finding is unnecessary.
  std::string best;
  for (int r = 0; r < static_cast<int>(vertices.size()); ++r) {
    std::string k = rooted_key(*this, r, -1, -1);
    if (best.empty() || k < best) best = k;
  }
  return best;
}

std::string DecoratedGraph::dump_line() const {
  std::ostringstream os;
  os << "V:";
  for (auto& v : vertices) os << " (" << vertex_tag(v) << ")";
  os << " E:";
  for (auto& e : edges) os << " (" << e.u << "," << e.v << "," << e.k << ")";
  os << " aut: " << automorphism_order(*this) * edge_multiplicity(*this);
  return os.str();
}

GraphClassification classify(const DecoratedGraph& g) {
  GraphClassification out;
  int nv = static_cast<int>(g.vertices.size());
  out.vertex_class.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto& v = g.vertices[i];
    int val = g.valence(i);
    int nm = static_cast<int>(v.marks.size());
    bool stable = (2 * 0 - 2 + val + nm > 0) || !v.beta.is_zero();
    if (stable)
      out.vertex_class[i] = VertexClass::Stable;
    else if (val == 1 && nm == 0)
      out.vertex_class[i] = VertexClass::V1;
    else if (val == 1 && nm == 1)
      out.vertex_class[i] = VertexClass::V11;
    else if (val == 2 && nm == 0)
      out.vertex_class[i] = VertexClass::V2;
    else
      throw std::logic_error("classify: unstable vertex outside V1/V11/V2");
    if (v.side == DecoratedGraph::SideZero)
      out.side_zero.push_back(i);
    else
      out.side_inf.push_back(i);
  }

  // Edge classes: walk chains through V² vertices.
  int ne = static_cast<int>(g.edges.size());
  std::vector<bool> used(ne, false);
  for (int e0 = 0; e0 < ne; ++e0) {
    if (used[e0]) continue;
    EdgeClassChain chain;
    // Extend in both directions through V² vertices.
    std::vector<int> seq{e0};
    used[e0] = true;
    int front_v = g.edges[e0].u, back_v = g.edges[e0].v;
    auto extend = [&](int& endpoint, bool at_front) {
      while (out.vertex_class[endpoint] == VertexClass::V2) {
        int next_e = -1;
        for (int ei : g.incident_edges(endpoint))
          if (!used[ei]) next_e = ei;
        if (next_e < 0) break;  // should not happen: V² has valence 2
        used[next_e] = true;
        if (at_front)
          seq.insert(seq.begin(), next_e);
        else
          seq.push_back(next_e);
        auto& e = g.edges[next_e];
        endpoint = (e.u == endpoint) ? e.v : e.u;
      }
    };
    extend(front_v, true);
    extend(back_v, false);
    chain.edge_ids = seq;
    chain.end_a = front_v;
    chain.end_b = back_v;
    // Interior vertices in order.
    int cur = front_v;
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
      auto& e = g.edges[seq[i]];
      cur = (e.u == cur) ? e.v : e.u;
      chain.interior.push_back(cur);
    }
    auto is_tailish = [&](int v) {
      return out.vertex_class[v] == VertexClass::V1 ||
             out.vertex_class[v] == VertexClass::V11;
    };
    chain.tail = is_tailish(chain.end_a) || is_tailish(chain.end_b);
    out.edge_classes.push_back(std::move(chain));
  }
  return out;
}

long automorphism_order(const DecoratedGraph& g) {
  int nv = static_cast<int>(g.vertices.size());
  // Brute-force count of vertex bijections preserving side, class, markings
  // and the degree-labelled adjacency. Graphs here have at most a handful of
  // vertices.
  std::vector<int> perm(nv);
  std::iota(perm.begin(), perm.end(), 0);
  auto compatible = [&](int a, int b) {
    auto& va = g.vertices[a];
    auto& vb = g.vertices[b];
    return va.side == vb.side && va.beta == vb.beta && va.marks == vb.marks;
  };
  std::multiset<std::tuple<int, int, int>> adj;
  for (auto& e : g.edges) adj.insert({std::min(e.u, e.v), std::max(e.u, e.v), e.k});
  long count = 0;
  do {
    bool ok = true;
    for (int i = 0; i < nv && ok; ++i)
      if (!compatible(i, perm[i])) ok = false;
    if (!ok) continue;
    std::multiset<std::tuple<int, int, int>> mapped;
    for (auto& e : g.edges) {
      int a = perm[e.u], b = perm[e.v];
      mapped.insert({std::min(a, b), std::max(a, b), e.k});
    }
    if (mapped == adj) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

long edge_multiplicity(const DecoratedGraph& g) {
  long m = 1;
  for (auto& e : g.edges) m *= e.k;
  return m;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

// All decompositions of `total` into `parts` ordered nonnegative summands.
void compositions(long total, int parts, std::vector<long>& cur,
                  const std::function<void(const std::vector<long>&)>& emit) {
  if (parts == 1) {
    cur.push_back(total);
    emit(cur);
    cur.pop_back();
    return;
  }
  for (long x = 0; x <= total; ++x) {
    cur.push_back(x);
    compositions(total - x, parts - 1, cur, emit);
    cur.pop_back();
  }
}

// Enumerate vectors in the product of per-coordinate ranges [0, cap_i].
void boxed(const std::vector<long>& caps, std::vector<long>& cur,
           const std::function<void(const std::vector<long>&)>& emit) {
  if (cur.size() == caps.size()) {
    emit(cur);
    return;
  }
  for (long x = 0; x <= caps[cur.size()]; ++x) {
    cur.push_back(x);
    boxed(caps, cur, emit);
    cur.pop_back();
  }
}

// All labeled trees on n vertices via Prüfer sequences.
std::vector<std::vector<std::pair<int, int>>> labeled_trees(int n) {
  std::vector<std::vector<std::pair<int, int>>> out;
  if (n == 1) {
    out.push_back({});
    return out;
  }
  if (n == 2) {
    out.push_back({{0, 1}});
    return out;
  }
  std::vector<int> seq(n - 2, 0);
  while (true) {
    // Decode.
    std::vector<int> deg(n, 1);
    for (int s : seq) deg[s]++;
    std::vector<std::pair<int, int>> edges;
    std::set<int> leaves;
    for (int i = 0; i < n; ++i)
      if (deg[i] == 1) leaves.insert(i);
    std::vector<int> work = seq;
    for (int s : work) {
      int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edges.push_back({leaf, s});
      if (--deg[s] == 1) leaves.insert(s);
    }
    int a = *leaves.begin(), b = *leaves.rbegin();
    edges.push_back({a, b});
    out.push_back(edges);
    // Increment sequence.
    int pos = n - 3;
    while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
    if (pos < 0) break;
    seq[pos]++;
  }
  return out;
}

}  // namespace

std::vector<DecoratedGraph> enumerate_graphs(const TargetModel& target,
                                             const CurveClass& beta, int n_marks) {
  if (!target.master_effective(beta))
    throw std::domain_error("enumerate_graphs: class not effective on the master space");

  std::vector<DecoratedGraph> out;
  std::set<std::string> seen;
  auto push = [&](DecoratedGraph g) {
    for (auto& v : g.vertices) std::sort(v.marks.begin(), v.marks.end());
    auto key = g.canonical_key();
    if (seen.insert(key).second) out.push_back(std::move(g));
  };

  int crank = target.base()->curve_rank();

  // Γ₀: a single infinity vertex carrying everything.
  if (target.effective(beta)) {
    DecoratedGraph g0;
    DecoratedGraph::Vertex v;
    v.side = DecoratedGraph::SideInf;
    v.beta = beta;
    for (int i = 0; i < n_marks; ++i) v.marks.push_back(i);
    g0.vertices.push_back(v);
    push(std::move(g0));
  }

  long k0 = beta.fiber;
  // Graphs with m >= 1 edges; each edge consumes fiber degree >= 1.
  for (int m = 1; m <= k0; ++m) {
    int nv = m + 1;
    for (auto& tree : labeled_trees(nv)) {
      // Proper 2-colorings of a tree: two, by the color of vertex 0.
      for (int c0 = 0; c0 < 2; ++c0) {
        std::vector<int> side(nv, -1);
        side[0] = c0;
        // BFS color.
        std::vector<std::vector<int>> nbr(nv);
        for (auto& [a, b] : tree) {
          nbr[a].push_back(b);
          nbr[b].push_back(a);
        }
        std::vector<int> stack{0};
        while (!stack.empty()) {
          int v = stack.back();
          stack.pop_back();
          for (int w : nbr[v])
            if (side[w] < 0) {
              side[w] = 1 - side[v];
              stack.push_back(w);
            }
        }
        // Edge degrees: each edge takes k_e >= 1; whatever fiber degree is
        // left over sits on infinity-vertex classes.
        for (long edge_total = m; edge_total <= k0; ++edge_total) {
        std::vector<long> cur;
        compositions(edge_total - m, m, cur, [&](const std::vector<long>& extra) {
          std::vector<long> ks(m);
          for (int i = 0; i < m; ++i) ks[i] = extra[i] + 1;
          long vertex_fiber_budget = k0 - edge_total;
          // Distribute remaining fiber degree over infinity vertices.
          std::vector<int> inf_vs;
          for (int v = 0; v < nv; ++v)
            if (side[v] == 1) inf_vs.push_back(v);
          std::vector<long> cur2;
          compositions(vertex_fiber_budget, std::max(1, (int)inf_vs.size()), cur2,
                       [&](const std::vector<long>& fdeg) {
            if (inf_vs.empty() && vertex_fiber_budget != 0) return;
            // Distribute base classes over all vertices: enumerate boxes.
            std::vector<long> caps;
            for (int coord = 0; coord < crank; ++coord)
              for (int v = 0; v < nv; ++v) caps.push_back(beta.base[coord]);
            std::vector<long> cur3;
            boxed(caps, cur3, [&](const std::vector<long>& flat) {
              // flat[(coord * nv) + v]: base coordinate of vertex v.
              for (int coord = 0; coord < crank; ++coord) {
                long s = 0;
                for (int v = 0; v < nv; ++v) s += flat[coord * nv + v];
                if (s != beta.base[coord]) return;
              }
              // Build vertex classes; check effectivity.
              std::vector<CurveClass> vbeta(nv);
              for (int v = 0; v < nv; ++v) {
                vbeta[v].fiber = 0;
                vbeta[v].base.assign(crank, 0);
                for (int coord = 0; coord < crank; ++coord)
                  vbeta[v].base[coord] = flat[coord * nv + v];
              }
              for (size_t i = 0; i < inf_vs.size(); ++i)
                vbeta[inf_vs[i]].fiber = fdeg[i];
              for (int v = 0; v < nv; ++v) {
                if (side[v] == 0) {
                  if (!target.base()->effective(vbeta[v].base)) return;
                } else {
                  if (!target.effective(vbeta[v])) return;
                }
              }
              // Markings: all assignments.
              std::vector<int> assign(n_marks, 0);
              while (true) {
                DecoratedGraph g;
                g.vertices.resize(nv);
                for (int v = 0; v < nv; ++v) {
                  g.vertices[v].side = side[v] == 0 ? DecoratedGraph::SideZero
                                                    : DecoratedGraph::SideInf;
                  g.vertices[v].beta = vbeta[v];
                }
                for (int i = 0; i < n_marks; ++i)
                  g.vertices[assign[i]].marks.push_back(i);
                for (int i = 0; i < m; ++i) {
                  auto [a, b] = tree[i];
                  if (side[a] == 1) std::swap(a, b);
                  g.edges.push_back({a, b, static_cast<int>(ks[i])});
                }
                push(std::move(g));
                // Next assignment.
                int pos = n_marks - 1;
                while (pos >= 0 && assign[pos] == nv - 1) assign[pos--] = 0;
                if (pos < 0) break;
                assign[pos]++;
              }
            });
          });
        });
        }
      }
    }
  }
  return out;
}

}  // namespace pbgw
