#include "pbgw/gkm.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <cstdlib>
#include <stdexcept>

#include "json.hpp"

namespace pbgw {

using nlohmann::json;

namespace {

// Thrown when an integer weight specialization hits a vanishing denominator
// that is not identically zero; the driver redraws and retries.
struct RespecializeError : std::runtime_error {
  RespecializeError() : std::runtime_error("weight specialization degenerate") {}
};

Rational dot(const std::vector<Rational>& w, const std::vector<long>& spec) {
  Rational s(0);
  for (size_t i = 0; i < w.size(); ++i) s += w[i] * Rational(spec[i]);
  return s;
}

std::vector<Rational> to_rat(const std::vector<long>& v) {
  std::vector<Rational> out;
  for (long x : v) out.push_back(Rational(x));
  return out;
}

bool identically_zero(const std::vector<Rational>& w) {
  for (auto& x : w)
    if (!x.is_zero()) return false;
  return true;
}

std::vector<Rational> axpy(const std::vector<Rational>& a, const Rational& t,
                           const std::vector<Rational>& b) {
  std::vector<Rational> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * b[i];
  return out;
}

}  // namespace

int GKMData::divisor_index(const std::string& nm) const {
  for (int i = 0; i < static_cast<int>(divisors.size()); ++i)
    if (divisors[i].name == nm) return i;
  throw std::invalid_argument("GKM: unknown divisor " + nm);
}

void GKMData::validate() const {
  if (points() == 0) throw std::invalid_argument("GKM: no fixed points");
  if (static_cast<int>(tangent.size()) != points())
    throw std::invalid_argument("GKM: tangent table size");
  for (auto& t : tangent)
    if (static_cast<int>(t.size()) != dim)
      throw std::invalid_argument("GKM: tangent count != dim at a fixed point");
  for (auto& e : edges) {
    if (e.p < 0 || e.p >= points() || e.q < 0 || e.q >= points() || e.p == e.q)
      throw std::invalid_argument("GKM: bad edge endpoints");
    if (static_cast<int>(e.dirs.size()) != dim)
      throw std::invalid_argument("GKM: edge direction count != dim");
    if (e.dirs[0].degree != 2)
      throw std::invalid_argument("GKM: dirs[0] must be the orbit direction");
    if (static_cast<int>(e.curve_class.size()) != curve_rank)
      throw std::invalid_argument("GKM: edge curve class rank");
    auto& omega = e.dirs[0].w_p;
    for (auto& d : e.dirs) {
      // Weights at the two ends are matched with w_q = w_p - degree·ω.
      for (int i = 0; i < lattice_rank; ++i)
        if (d.w_q[i] != d.w_p[i] - d.degree * omega[i])
          throw std::invalid_argument("GKM: direction matching violates degree");
    }
    long sum = 0;
    for (auto& d : e.dirs) sum += d.degree;
    long expect = 0;
    for (int i = 0; i < curve_rank; ++i) expect += anticanonical[i] * e.curve_class[i];
    if (sum != expect)
      throw std::invalid_argument("GKM: anticanonical pairing mismatch on an edge");
  }
  for (auto& d : divisors) {
    if (static_cast<int>(d.value_at.size()) != points())
      throw std::invalid_argument("GKM: divisor localization count");
    if (static_cast<int>(d.curve_pairing.size()) != curve_rank)
      throw std::invalid_argument("GKM: divisor curve pairing rank");
    for (auto& e : edges) {
      long pairing = 0;
      for (int i = 0; i < curve_rank; ++i)
        pairing += d.curve_pairing[i] * e.curve_class[i];
      auto omega = to_rat(e.dirs[0].w_p);
      auto diff = axpy(d.value_at[e.p], Rational(-1), d.value_at[e.q]);
      auto expect = axpy(std::vector<Rational>(lattice_rank, Rational(0)),
                         Rational(pairing), omega);
      if (diff != expect)
        throw std::invalid_argument("GKM: divisor " + d.name +
                                    " violates moment-graph compatibility");
    }
  }
}

OracleClass OracleClass::divisor_monomial(int index, int count, int exp) {
  OracleClass c;
  Term t;
  t.coef = Rational(1);
  t.divisor_power.assign(count, 0);
  t.divisor_power[index] = exp;
  c.terms.push_back(std::move(t));
  return c;
}

int OracleClass::degree(const GKMData& g) const {
  (void)g;
  int deg = -1;
  for (auto& t : terms) {
    if (t.coef.is_zero()) continue;
    int d = 0;
    for (int e : t.divisor_power) d += e;
    if (deg < 0) deg = d;
    else if (deg != d)
      throw std::invalid_argument("OracleClass: inhomogeneous insertion");
  }
  return deg < 0 ? 0 : deg;
}

// ---------------------------------------------------------------------------
// Scalar fields. Untwisted dimension-matched sums are weight-degree zero
// term by term and run in plain rationals. Twisted sums scale the auxiliary
// torus by ε and extract the ε⁰ coefficient of the total, which is the
// λ-only content; the ε-negative parts must cancel across the sum.

namespace {

struct RatField {
  using V = Rational;
  V one() const { return Rational(1); }
  V from_rat(const Rational& r) const { return r; }
  V from_laurent(const LaurentScalar& v) const {
    if (!v.lambda_free())
      throw std::logic_error("λ-coefficient in an untwisted evaluation");
    return v.constant_part();
  }
  V pure(const Rational& w) const {
    if (w.is_zero()) throw RespecializeError();
    return w;
  }
  V twistw(const Rational&, int) const {
    throw std::logic_error("twist factor in untwisted evaluation");
  }
  V mul(const V& a, const V& b) const { return a * b; }
  V add(const V& a, const V& b) const { return a + b; }
  V neg(const V& a) const { return -a; }
  V inv(const V& a) const {
    if (a.is_zero()) throw RespecializeError();
    return Rational(1) / a;
  }
  V powi(V a, int e) const {
    V r(1);
    for (int i = 0; i < e; ++i) r *= a;
    return r;
  }
};

// Truncated ε-series with λ-Laurent coefficients, trusted on
// [off, off + c.size()). An exact zero is stored with an empty coefficient
// vector and a large offset so that it never limits anyone's trusted
// window.
struct EpsSeries {
  static constexpr int kZeroOffset = 1 << 20;
  int off = 0;
  std::vector<LaurentScalar> c;
  bool exact_zero() const { return c.empty(); }
};

struct EpsField {
  int window;
  explicit EpsField(int w) : window(std::max(2, w)) {}

  using V = EpsSeries;
  V zero() const {
    V v;
    v.off = EpsSeries::kZeroOffset;
    return v;
  }
  V one() const { return from_rat(Rational(1)); }
  V from_rat(const Rational& r) const {
    if (r.is_zero()) return zero();
    V v;
    v.off = 0;
    v.c.assign(window, LaurentScalar());
    v.c[0] = LaurentScalar(r);
    return v;
  }
  V from_laurent(const LaurentScalar& x) const {
    if (x.is_zero()) return zero();
    V v;
    v.off = 0;
    v.c.assign(window, LaurentScalar());
    v.c[0] = x;
    return v;
  }
  V pure(const Rational& w) const {
    if (w.is_zero()) throw RespecializeError();
    V v;
    v.off = 1;
    v.c.assign(window, LaurentScalar());
    v.c[0] = LaurentScalar(w);
    return v;
  }
  V twistw(const Rational& u, int s) const {
    V v;
    v.off = 0;
    v.c.assign(window, LaurentScalar());
    v.c[0] = LaurentScalar::monomial(Rational(s), 1);
    v.c[1] = LaurentScalar(u);
    return v;
  }
  V mul(const V& a, const V& b) const {
    if (a.exact_zero() || b.exact_zero()) return zero();
    V r;
    r.off = a.off + b.off;
    int len = static_cast<int>(std::min(a.c.size(), b.c.size()));
    r.c.assign(len, LaurentScalar());
    for (int i = 0; i < static_cast<int>(a.c.size()); ++i) {
      if (a.c[i].is_zero()) continue;
      for (int j = 0; j < static_cast<int>(b.c.size()) && i + j < len; ++j) {
        if (b.c[j].is_zero()) continue;
        r.c[i + j] += a.c[i] * b.c[j];
      }
    }
    return r;
  }
  V add(const V& a, const V& b) const {
    if (a.exact_zero()) return b;
    if (b.exact_zero()) return a;
    int lo = std::min(a.off, b.off);
    int hi = std::min(a.off + static_cast<int>(a.c.size()),
                      b.off + static_cast<int>(b.c.size()));
    if (hi <= lo) throw std::logic_error("EpsSeries: precision exhausted in add");
    V r;
    r.off = lo;
    r.c.assign(hi - lo, LaurentScalar());
    for (int i = 0; i < static_cast<int>(a.c.size()); ++i)
      if (a.off + i < hi) r.c[a.off + i - lo] += a.c[i];
    for (int i = 0; i < static_cast<int>(b.c.size()); ++i)
      if (b.off + i < hi) r.c[b.off + i - lo] += b.c[i];
    return r;
  }
  V neg(const V& a) const {
    V r = a;
    for (auto& x : r.c) x = -x;
    return r;
  }
  V inv(const V& a) const {
    if (a.exact_zero()) throw RespecializeError();
    int j = -1;
    for (int i = 0; i < static_cast<int>(a.c.size()); ++i)
      if (!a.c[i].is_zero()) { j = i; break; }
    if (j < 0) throw RespecializeError();
    LaurentScalar lead_inv = a.c[j].invert_monomial();
    int len = static_cast<int>(a.c.size()) - j;
    std::vector<LaurentScalar> n(len, LaurentScalar());
    for (int i = 1; i < len; ++i) n[i] = a.c[j + i] * lead_inv;
    std::vector<LaurentScalar> acc(len, LaurentScalar()), pw(len, LaurentScalar());
    acc[0] = LaurentScalar(1);
    pw[0] = LaurentScalar(1);
    for (int m = 1; m < len; ++m) {
      std::vector<LaurentScalar> nx(len, LaurentScalar());
      for (int i = 0; i < len; ++i) {
        if (pw[i].is_zero()) continue;
        for (int k = 1; i + k < len; ++k) nx[i + k] += pw[i] * n[k];
      }
      pw = std::move(nx);
      bool all0 = true;
      for (auto& x : pw) all0 = all0 && x.is_zero();
      if (all0) break;
      for (int i = 0; i < len; ++i) acc[i] += (m % 2 ? -pw[i] : pw[i]);
    }
    V r;
    r.off = -(a.off + j);
    r.c.assign(len, LaurentScalar());
    for (int i = 0; i < len; ++i) r.c[i] = acc[i] * lead_inv;
    return r;
  }
  V powi(V a, int e) const {
    V r = one();
    for (int i = 0; i < e; ++i) r = mul(r, a);
    return r;
  }
};

// ---------------------------------------------------------------------------
// Decorated trees for the classical fixed-point sum. Identical insertions
// are aggregated into per-vertex counts; the labeled sum is recovered by a
// multinomial multiplicity divided by the count-automorphism order.

struct OTree {
  struct E {
    int u, v;
    int gkm_edge;
    int k;
  };
  std::vector<int> pt;
  std::vector<E> edges;
  std::vector<std::vector<int>> counts;

  int valence(int v) const {
    int c = 0;
    for (auto& e : edges)
      if (e.u == v || e.v == v) ++c;
    return c;
  }
};

std::string otree_rooted_key(const OTree& t, int root, int parent_edge) {
  std::vector<std::string> child;
  for (int ei = 0; ei < static_cast<int>(t.edges.size()); ++ei) {
    if (ei == parent_edge) continue;
    auto& e = t.edges[ei];
    int other;
    if (e.u == root) other = e.v;
    else if (e.v == root) other = e.u;
    else continue;
    child.push_back("k" + std::to_string(e.k) + "e" + std::to_string(e.gkm_edge) +
                    ":" + otree_rooted_key(t, other, ei));
  }
  std::sort(child.begin(), child.end());
  std::ostringstream os;
  os << "(p" << t.pt[root] << "c";
  for (int c : t.counts[root]) os << c << ",";
  for (auto& s : child) os << "[" << s << "]";
  os << ")";
  return os.str();
}

std::string otree_key(const OTree& t) {
  std::string best;
  for (int r = 0; r < static_cast<int>(t.pt.size()); ++r) {
    auto k = otree_rooted_key(t, r, -1);
    if (best.empty() || k < best) best = k;
  }
  return best;
}

long otree_aut(const OTree& t) {
  int n = static_cast<int>(t.pt.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::multiset<std::tuple<int, int, int, int>> adj;
  for (auto& e : t.edges)
    adj.insert({std::min(e.u, e.v), std::max(e.u, e.v), e.gkm_edge, e.k});
  long count = 0;
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      ok = t.pt[i] == t.pt[perm[i]] && t.counts[i] == t.counts[perm[i]];
    if (!ok) continue;
    std::multiset<std::tuple<int, int, int, int>> mapped;
    for (auto& e : t.edges)
      mapped.insert({std::min(perm[e.u], perm[e.v]),
                     std::max(perm[e.u], perm[e.v]), e.gkm_edge, e.k});
    if (mapped == adj) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

std::vector<std::vector<std::pair<int, int>>> all_trees(int n) {
  std::vector<std::vector<std::pair<int, int>>> out;
  if (n <= 1) {
    out.push_back({});
    return out;
  }
  if (n == 2) {
    out.push_back({{0, 1}});
    return out;
  }
  std::vector<int> seq(n - 2, 0);
  while (true) {
    std::vector<int> deg(n, 1);
    for (int s : seq) deg[s]++;
    std::set<int> leaves;
    for (int i = 0; i < n; ++i)
      if (deg[i] == 1) leaves.insert(i);
    std::vector<std::pair<int, int>> edges;
    for (int s : seq) {
      int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edges.push_back({leaf, s});
      if (--deg[s] == 1) leaves.insert(s);
    }
    edges.push_back({*leaves.begin(), *leaves.rbegin()});
    out.push_back(edges);
    int pos = n - 3;
    while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
    if (pos < 0) break;
    seq[pos]++;
  }
  return out;
}

struct GroupedInsertions {
  struct Group {
    int psi;
    OracleClass cls;
    int count;
  };
  std::vector<Group> groups;
  int total = 0;
};

std::string class_fingerprint(const OracleClass& c) {
  std::ostringstream os;
  for (auto& t : c.terms) {
    os << t.coef.str() << ":";
    for (int e : t.divisor_power) os << e << ",";
    os << ";";
  }
  return os.str();
}

GroupedInsertions group_insertions(const std::vector<OracleInsertion>& ins) {
  GroupedInsertions g;
  std::map<std::string, int> idx;
  for (auto& i : ins) {
    std::string key = std::to_string(i.psi) + "|" + class_fingerprint(i.cls);
    auto it = idx.find(key);
    if (it == idx.end()) {
      idx[key] = static_cast<int>(g.groups.size());
      g.groups.push_back({i.psi, i.cls, 1});
    } else {
      g.groups[it->second].count++;
    }
    g.total++;
  }
  return g;
}

std::vector<long> default_ample(const GKMData& gkm) {
  // Positivity functional on orbit classes from small nonnegative divisor
  // combinations; termination bound for the tree enumeration.
  int nd = static_cast<int>(gkm.divisors.size());
  for (long mask = 1; mask < (1l << (3 * nd)); ++mask) {
    std::vector<long> amp(gkm.curve_rank, 0);
    for (int d = 0; d < nd; ++d) {
      long c = (mask >> (3 * d)) & 7;
      for (int i = 0; i < gkm.curve_rank; ++i)
        amp[i] += c * gkm.divisors[d].curve_pairing[i];
    }
    bool ok = true;
    for (auto& e : gkm.edges) {
      long s = 0;
      for (int i = 0; i < gkm.curve_rank; ++i) s += amp[i] * e.curve_class[i];
      if (s < 1) ok = false;
    }
    if (ok) return amp;
  }
  throw std::invalid_argument("GKM: no positivity functional on orbit classes");
}

std::vector<OTree> enumerate_otrees_counts(const GKMData& gkm,
                                           const std::vector<long>& beta,
                                           const std::vector<int>& group_counts,
                                           int total_marks,
                                           const std::vector<long>& ample) {
  std::vector<OTree> out;
  std::set<std::string> seen;
  int ng = static_cast<int>(group_counts.size());

  bool beta_zero = true;
  for (long b : beta) beta_zero = beta_zero && b == 0;

  auto add_mark_distributions = [&](OTree base) {
    int nv = static_cast<int>(base.pt.size());
    base.counts.assign(nv, std::vector<int>(ng, 0));
    std::function<void(int)> rec_group = [&](int g) {
      if (g == ng) {
        auto key = otree_key(base);
        if (seen.insert(key).second) out.push_back(base);
        return;
      }
      std::function<void(int, int)> rec_v = [&](int v, int left) {
        if (v == nv - 1) {
          base.counts[v][g] = left;
          rec_group(g + 1);
          base.counts[v][g] = 0;
          return;
        }
        for (int c = 0; c <= left; ++c) {
          base.counts[v][g] = c;
          rec_v(v + 1, left - c);
        }
        base.counts[v][g] = 0;
      };
      rec_v(0, group_counts[g]);
    };
    rec_group(0);
  };

  if (beta_zero) {
    if (total_marks < 3) return out;
    for (int p = 0; p < gkm.points(); ++p) {
      OTree t;
      t.pt = {p};
      add_mark_distributions(t);
    }
    return out;
  }

  long budget = 0;
  for (int i = 0; i < gkm.curve_rank; ++i) budget += ample[i] * beta[i];
  if (budget <= 0) return out;

  std::map<std::pair<int, int>, int> orbit;
  for (int e = 0; e < static_cast<int>(gkm.edges.size()); ++e) {
    orbit[{gkm.edges[e].p, gkm.edges[e].q}] = e;
    orbit[{gkm.edges[e].q, gkm.edges[e].p}] = e;
  }

  for (long m = 1; m <= budget; ++m) {
    int nv = static_cast<int>(m) + 1;
    for (auto& shape : all_trees(nv)) {
      std::vector<int> pt(nv, -1);
      std::function<void(int)> rec_pt = [&](int v) {
        if (v == nv) {
          std::vector<int> ks(m, 0);
          std::function<void(int, std::vector<long>&)> rec_k =
              [&](int ei, std::vector<long>& acc) {
                if (ei == m) {
                  if (acc != beta) return;
                  OTree t;
                  t.pt = pt;
                  for (int i = 0; i < m; ++i)
                    t.edges.push_back(
                        {shape[i].first, shape[i].second,
                         orbit[{pt[shape[i].first], pt[shape[i].second]}], ks[i]});
                  add_mark_distributions(std::move(t));
                  return;
                }
                int eid = orbit[{pt[shape[ei].first], pt[shape[ei].second]}];
                auto& cls = gkm.edges[eid].curve_class;
                long amp_e = 0;
                for (int i = 0; i < gkm.curve_rank; ++i) amp_e += ample[i] * cls[i];
                for (int k = 1; static_cast<long>(k) * amp_e <= budget; ++k) {
                  std::vector<long> next = acc;
                  for (int i = 0; i < gkm.curve_rank; ++i) next[i] += k * cls[i];
                  long used = 0;
                  for (int i = 0; i < gkm.curve_rank; ++i) used += ample[i] * next[i];
                  if (used > budget) continue;
                  ks[ei] = k;
                  rec_k(ei + 1, next);
                }
              };
          std::vector<long> acc(gkm.curve_rank, 0);
          rec_k(0, acc);
          return;
        }
        for (int p = 0; p < gkm.points(); ++p) {
          bool ok = true;
          for (size_t i = 0; i < shape.size() && ok; ++i) {
            auto [a, b] = shape[i];
            if (a == v && pt[b] >= 0 && !orbit.count({p, pt[b]})) ok = false;
            if (b == v && pt[a] >= 0 && !orbit.count({pt[a], p})) ok = false;
          }
          if (!ok) continue;
          pt[v] = p;
          rec_pt(v + 1);
          pt[v] = -1;
        }
      };
      rec_pt(0);
    }
  }
  return out;
}

std::vector<OTree> enumerate_otrees(const GKMData& gkm, const std::vector<long>& beta,
                                    const GroupedInsertions& ins,
                                    const std::vector<long>& ample) {
  std::vector<int> counts;
  for (auto& g : ins.groups) counts.push_back(g.count);
  return enumerate_otrees_counts(gkm, beta, counts, ins.total, ample);
}

// ---------------------------------------------------------------------------
// Per-tree evaluation. The assembly follows the genus-0 virtual
// localization bookkeeping: full moving H⁰/H¹ weights per edge, e(T_p) and
// node-smoothing corrections per vertex, reparametrization weights at free
// ends, and 1/e_{C*} factors of the twist complex throughout.

template <class Field>
typename Field::V eval_tree(const Field& F, const GKMData& gkm,
                            const GroupedInsertions& ins, const OTree& t,
                            const std::optional<TwistSpec>& twist,
                            const std::vector<long>& spec) {
  using V = typename Field::V;
  int ng = static_cast<int>(ins.groups.size());

  auto weight_of = [&](const std::vector<Rational>& w) {
    return F.pure(dot(w, spec));
  };

  Rational mult(1);
  for (int g = 0; g < ng; ++g) {
    Rational m = factorial(ins.groups[g].count);
    for (auto& row : t.counts) m /= factorial(row[g]);
    mult *= m;
  }
  mult /= Rational(otree_aut(t));
  for (auto& e : t.edges) mult /= Rational(e.k);

  V acc = F.from_rat(mult);

  for (auto& e : t.edges) {
    auto& ge = gkm.edges[e.gkm_edge];
    bool forward = (t.pt[e.u] == ge.p) || (t.pt[e.v] == ge.q);
    int pend = forward ? ge.p : ge.q;
    auto omega_p = to_rat(forward ? ge.dirs[0].w_p : ge.dirs[0].w_q);
    for (auto& dir : ge.dirs) {
      auto wp = to_rat(forward ? dir.w_p : dir.w_q);
      long D = e.k * dir.degree;
      if (D >= 0) {
        for (long a = 0; a <= D; ++a) {
          auto w = axpy(wp, Rational(-a, e.k), omega_p);
          if (identically_zero(w)) continue;  // the fixed reparametrization
          acc = F.mul(acc, F.inv(weight_of(w)));
        }
      } else {
        for (long a = 1; a <= -D - 1; ++a) {
          auto w = axpy(wp, Rational(a, e.k), omega_p);
          acc = F.mul(acc, weight_of(w));
        }
      }
    }
    if (twist) {
      for (auto& L : *twist) {
        auto& up = L.value_at[pend];
        auto& uq = L.value_at[forward ? ge.q : ge.p];
        Rational deg_r(0);
        for (int i = 0; i < gkm.lattice_rank; ++i)
          if (!omega_p[i].is_zero()) {
            deg_r = (up[i] - uq[i]) / omega_p[i];
            break;
          }
        if (!deg_r.is_integer())
          throw std::invalid_argument("twist summand degree is not integral");
        long D = e.k * std::stol(deg_r.str());
        if (D >= 0) {
          for (long a = 0; a <= D; ++a)
            acc = F.mul(acc, F.inv(F.twistw(
                                 dot(axpy(up, Rational(-a, e.k), omega_p), spec),
                                 L.scaling)));
        } else {
          for (long a = 1; a <= -D - 1; ++a)
            acc = F.mul(acc, F.twistw(
                                 dot(axpy(up, Rational(a, e.k), omega_p), spec),
                                 L.scaling));
        }
      }
    }
  }

  int nv = static_cast<int>(t.pt.size());
  for (int v = 0; v < nv; ++v) {
    int p = t.pt[v];
    int val = t.valence(v);
    int marks = 0, psi_total = 0;
    for (int g = 0; g < ng; ++g) {
      marks += t.counts[v][g];
      psi_total += t.counts[v][g] * ins.groups[g].psi;
    }
    int total = val + marks;

    for (int g = 0; g < ng; ++g) {
      for (int copy = 0; copy < t.counts[v][g]; ++copy) {
        bool started = false;
        V loc = F.from_rat(Rational(0));
        for (auto& term : ins.groups[g].cls.terms) {
          V m = F.from_rat(term.coef);
          for (size_t di = 0; di < term.divisor_power.size(); ++di)
            for (int e = 0; e < term.divisor_power[di]; ++e) {
              Rational w = dot(gkm.divisors[di].value_at[p], spec);
              if (w.is_zero()) {
                m = F.from_rat(Rational(0));
              } else {
                m = F.mul(m, F.pure(w));
              }
            }
          loc = started ? F.add(loc, m) : m;
          started = true;
        }
        if (!started) loc = F.from_rat(Rational(0));
        acc = F.mul(acc, loc);
      }
    }

    std::vector<std::vector<Rational>> flag_w;
    for (auto& e : t.edges) {
      if (e.u != v && e.v != v) continue;
      auto& ge = gkm.edges[e.gkm_edge];
      auto omega = to_rat(p == ge.p ? ge.dirs[0].w_p : ge.dirs[0].w_q);
      std::vector<Rational> w(gkm.lattice_rank);
      for (int i = 0; i < gkm.lattice_rank; ++i) w[i] = omega[i] / Rational(e.k);
      flag_w.push_back(std::move(w));
    }

    V ep = F.one();
    for (auto& w : gkm.tangent[p]) ep = F.mul(ep, weight_of(to_rat(w)));

    if (total >= 3) {
      if (val >= 1) acc = F.mul(acc, F.powi(ep, val - 1));
      else acc = F.mul(acc, F.inv(ep));
      if (twist) {
        for (auto& L : *twist) {
          V u = F.twistw(dot(L.value_at[p], spec), L.scaling);
          if (val >= 1) acc = F.mul(acc, F.powi(u, val - 1));
          else acc = F.mul(acc, F.inv(u));
        }
      }
      int budget = total - 3 - psi_total;
      if (budget < 0) return F.from_rat(Rational(0));
      std::vector<V> winv;
      for (auto& w : flag_w) winv.push_back(F.inv(weight_of(w)));
      Rational base_coef = factorial(total - 3);
      for (int g = 0; g < ng; ++g)
        for (int c = 0; c < t.counts[v][g]; ++c)
          base_coef /= factorial(ins.groups[g].psi);
      if (val == 0) {
        // Pure ψ-integral.
        if (budget != 0) return F.from_rat(Rational(0));
        acc = F.mul(acc, F.from_rat(base_coef));
      } else {
        V sum = F.from_rat(Rational(0));
        bool first = true;
        std::vector<int> cf(val, 0);
        std::function<void(int, int)> rec2 = [&](int fi, int left) {
          if (fi == val) {
            if (left != 0) return;
            V term = F.from_rat(base_coef);
            for (int f = 0; f < val; ++f) {
              term = F.mul(term, F.from_rat(Rational(1) / factorial(cf[f])));
              term = F.mul(term, F.powi(winv[f], 1 + cf[f]));
            }
            sum = first ? term : F.add(sum, term);
            first = false;
            return;
          }
          for (int c = 0; c <= left; ++c) {
            cf[fi] = c;
            rec2(fi + 1, left - c);
          }
          cf[fi] = 0;
        };
        rec2(0, budget);
        if (first) return F.from_rat(Rational(0));
        acc = F.mul(acc, sum);
      }
    } else if (val == 2 && marks == 0) {
      acc = F.mul(acc, ep);
      if (twist)
        for (auto& L : *twist)
          acc = F.mul(acc, F.twistw(dot(L.value_at[p], spec), L.scaling));
      V smoothing = F.add(weight_of(flag_w[0]), weight_of(flag_w[1]));
      acc = F.mul(acc, F.inv(smoothing));
    } else if (val == 1 && marks == 0) {
      acc = F.mul(acc, weight_of(flag_w[0]));
    } else if (val == 1 && marks == 1) {
      acc = F.mul(acc, F.powi(F.neg(weight_of(flag_w[0])), psi_total));
    } else {
      throw std::logic_error("GKM: impossible unstable vertex");
    }
  }
  return acc;
}

// Lower bound for the ε-valuation of a tree term (numerator degrees minus
// denominator degrees of the ε-positive weight factors); the series window
// only needs to reach ε⁰ from there.
int tree_eps_window(const GKMData& gkm, const GroupedInsertions& ins,
                    const OTree& t) {
  int ng = static_cast<int>(ins.groups.size());
  long val_bound = 0;
  for (auto& e : t.edges)
    for (auto& dir : gkm.edges[e.gkm_edge].dirs) {
      long D = e.k * dir.degree;
      if (D >= 0)
        val_bound -= D + (dir.degree == 2 ? 0 : 1);  // one zero weight skipped
      else
        val_bound += -D - 1;  // obstruction block in the numerator
    }
  int nv = static_cast<int>(t.pt.size());
  for (int v = 0; v < nv; ++v) {
    int val = t.valence(v);
    int marks = 0, psi_total = 0;
    for (int g = 0; g < ng; ++g) {
      marks += t.counts[v][g];
      psi_total += t.counts[v][g] * ins.groups[g].psi;
      val_bound += t.counts[v][g] * ins.groups[g].cls.degree(gkm);
    }
    int total = val + marks;
    if (total >= 3) {
      if (val >= 1) {
        val_bound += gkm.dim * (val - 1);
        val_bound -= val + std::max(0, total - 3 - psi_total);
      } else {
        val_bound -= gkm.dim;
      }
    } else if (val == 2) {
      val_bound += gkm.dim - 1;
    } else {
      val_bound += 1;  // free or marked end weight factor
    }
  }
  return static_cast<int>(std::max<long>(2, 2 - val_bound)) + 2;
}

std::vector<long> make_spec(const GKMData& gkm, int which) {
  static const long base1[] = {1, 3, 7, 17, 41, 97};
  static const long base2[] = {2, 5, 13, 29, 59, 101};
  std::vector<long> s(gkm.lattice_rank);
  if (which == 0)
    for (int i = 0; i < gkm.lattice_rank; ++i) s[i] = base1[i % 6] + 6 * (i / 6);
  else if (which == 1)
    for (int i = 0; i < gkm.lattice_rank; ++i) s[i] = base2[i % 6] + 7 * (i / 6);
  else {
    unsigned long x = 2463534242ul + 7919ul * static_cast<unsigned long>(which);
    for (int i = 0; i < gkm.lattice_rank; ++i) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
      s[i] = static_cast<long>(x % 211) + 1 + i;
    }
  }
  return s;
}

LaurentScalar eval_sum(const GKMData& gkm, const std::vector<OTree>& trees,
                       const GroupedInsertions& ins,
                       const std::optional<TwistSpec>& twist,
                       const std::vector<long>& spec) {
  if (!twist) {
    RatField F;
    Rational total(0);
    for (auto& t : trees) total += eval_tree(F, gkm, ins, t, twist, spec);
    return LaurentScalar(total);
  }
  std::map<int, LaurentScalar> eps_coeffs;
  int trusted_hi = 1000000;
  for (auto& t : trees) {
    EpsField F(tree_eps_window(gkm, ins, t));
    EpsSeries s = eval_tree(F, gkm, ins, t, twist, spec);
    trusted_hi = std::min(trusted_hi, s.off + static_cast<int>(s.c.size()));
    for (int i = 0; i < static_cast<int>(s.c.size()); ++i)
      if (!s.c[i].is_zero()) eps_coeffs[s.off + i] += s.c[i];
  }
  if (!trees.empty() && trusted_hi <= 0)
    throw std::logic_error("GKM: ε-window did not reach the constant term");
  for (auto& [e, c] : eps_coeffs)
    if (e < 0 && !c.is_zero())
      throw std::logic_error("GKM: fixed-point sum left a residual ε-pole");
  auto it = eps_coeffs.find(0);
  return it == eps_coeffs.end() ? LaurentScalar() : it->second;
}


// ---------------------------------------------------------------------------
// Series insertions: each marked point carries Σ_t coef_t ψ^{a_t} γ_t. The
// per-vertex mark sums aggregate into a polynomial in the ψ-budget, so one
// graph sum covers the whole multilinear grid.

struct SeriesGroups {
  struct Group {
    std::vector<OracleSeriesTerm> terms;
    int count;
  };
  std::vector<Group> groups;
  int total = 0;
};

std::string series_fingerprint(const std::vector<OracleSeriesTerm>& terms) {
  std::ostringstream os;
  for (auto& t : terms)
    os << t.psi << "|" << class_fingerprint(t.cls) << "|" << t.coef.str() << "&";
  return os.str();
}

SeriesGroups group_series(const std::vector<OracleSeriesInsertion>& ins) {
  SeriesGroups g;
  std::map<std::string, int> idx;
  for (auto& i : ins) {
    auto key = series_fingerprint(i.terms);
    auto it = idx.find(key);
    if (it == idx.end()) {
      idx[key] = static_cast<int>(g.groups.size());
      g.groups.push_back({i.terms, 1});
    } else {
      g.groups[it->second].count++;
    }
    g.total++;
  }
  return g;
}

int tree_eps_window_series(const GKMData& gkm, const SeriesGroups& ins,
                           const OTree& t) {
  long val_bound = 0;
  for (auto& e : t.edges)
    for (auto& dir : gkm.edges[e.gkm_edge].dirs) {
      long D = e.k * dir.degree;
      if (D >= 0)
        val_bound -= D + (dir.degree == 2 ? 0 : 1);
      else
        val_bound += -D - 1;
    }
  int ng = static_cast<int>(ins.groups.size());
  int nv = static_cast<int>(t.pt.size());
  for (int v = 0; v < nv; ++v) {
    int val = t.valence(v);
    int marks = 0;
    for (int g = 0; g < ng; ++g) marks += t.counts[v][g];
    int total = val + marks;
    if (total >= 3) {
      if (val >= 1) {
        val_bound += gkm.dim * (val - 1);
        val_bound -= val + std::max(0, total - 3);
      } else {
        val_bound -= gkm.dim;
      }
      // Insertion localizations raise the valuation by at least the
      // smallest class degree in each series.
      for (int g = 0; g < ng; ++g) {
        if (t.counts[v][g] == 0) continue;
        int mindeg = 1000;
        for (auto& term : ins.groups[g].terms)
          mindeg = std::min(mindeg, term.cls.degree(gkm));
        if (mindeg < 1000) val_bound += t.counts[v][g] * mindeg;
      }
    } else if (val == 2) {
      val_bound += gkm.dim - 1;
    } else if (marks == 0) {
      val_bound += 1;  // free end reparametrization weight
    } else {
      // Marked end: (−ŵ)^a times the localization, at least the minimum
      // over the series terms.
      int g_found = -1;
      for (int g = 0; g < ng; ++g)
        if (t.counts[v][g] == 1) g_found = g;
      int minval = 1000;
      for (auto& term : ins.groups[g_found].terms)
        minval = std::min(minval, term.psi + term.cls.degree(gkm));
      if (minval < 1000) val_bound += minval;
    }
  }
  return static_cast<int>(std::max<long>(2, 2 - val_bound)) + 4;
}

// Shared cache of edge factors within one specialization pass.
struct EdgeFactorCache {
  std::map<std::tuple<int, int, bool>, EpsSeries> memo;
};

EpsSeries series_edge_factor(const EpsField& F, const GKMData& gkm,
                             int gkm_edge, int k, bool forward,
                             const TwistSpec& twist,
                             const std::vector<long>& spec) {
  using V = EpsSeries;
  auto weight_of = [&](const std::vector<Rational>& w) {
    return F.pure(dot(w, spec));
  };
  auto& ge = gkm.edges[gkm_edge];
  int pend = forward ? ge.p : ge.q;
  auto omega_p = to_rat(forward ? ge.dirs[0].w_p : ge.dirs[0].w_q);
  V acc = F.one();
  for (auto& dir : ge.dirs) {
    auto wp = to_rat(forward ? dir.w_p : dir.w_q);
    long D = k * dir.degree;
    if (D >= 0) {
      for (long a = 0; a <= D; ++a) {
        auto w = axpy(wp, Rational(-a, k), omega_p);
        if (identically_zero(w)) continue;
        acc = F.mul(acc, F.inv(weight_of(w)));
      }
    } else {
      for (long a = 1; a <= -D - 1; ++a)
        acc = F.mul(acc, weight_of(axpy(wp, Rational(a, k), omega_p)));
    }
  }
  for (auto& L : twist) {
    auto& up = L.value_at[pend];
    auto& uq = L.value_at[forward ? ge.q : ge.p];
    Rational deg_r(0);
    for (int i = 0; i < gkm.lattice_rank; ++i)
      if (!omega_p[i].is_zero()) {
        deg_r = (up[i] - uq[i]) / omega_p[i];
        break;
      }
    long D = k * std::stol(deg_r.str());
    if (D >= 0) {
      for (long a = 0; a <= D; ++a)
        acc = F.mul(acc,
                    F.inv(F.twistw(dot(axpy(up, Rational(-a, k), omega_p), spec),
                                   L.scaling)));
    } else {
      for (long a = 1; a <= -D - 1; ++a)
        acc = F.mul(acc, F.twistw(dot(axpy(up, Rational(a, k), omega_p), spec),
                                  L.scaling));
    }
  }
  return acc;
}

// loc_table[g][term][point]: coef·γ|_p values shared across trees.
using LocTable = std::vector<std::vector<std::vector<EpsSeries>>>;

LocTable build_loc_table(const EpsField& F, const GKMData& gkm,
                         const SeriesGroups& ins, const std::vector<long>& spec) {
  LocTable table(ins.groups.size());
  for (size_t g = 0; g < ins.groups.size(); ++g) {
    table[g].resize(ins.groups[g].terms.size());
    for (size_t ti = 0; ti < ins.groups[g].terms.size(); ++ti) {
      auto& term = ins.groups[g].terms[ti];
      table[g][ti].reserve(gkm.points());
      for (int p = 0; p < gkm.points(); ++p) {
        EpsSeries loc = F.zero();
        bool started = false;
        for (auto& mono : term.cls.terms) {
          EpsSeries m = F.from_rat(mono.coef);
          bool dead = false;
          for (size_t di = 0; di < mono.divisor_power.size() && !dead; ++di)
            for (int e = 0; e < mono.divisor_power[di]; ++e) {
              Rational w = dot(gkm.divisors[di].value_at[p], spec);
              if (w.is_zero()) {
                dead = true;
                break;
              }
              m = F.mul(m, F.pure(w));
            }
          if (dead) continue;
          loc = started ? F.add(loc, m) : m;
          started = true;
        }
        if (started) loc = F.mul(loc, F.from_laurent(term.coef));
        table[g][ti].push_back(started ? loc : F.zero());
      }
    }
  }
  return table;
}

EpsSeries eval_tree_series(const EpsField& F, const GKMData& gkm,
                           const SeriesGroups& ins, const OTree& t,
                           const TwistSpec& twist,
                           const std::vector<long>& spec,
                           EdgeFactorCache& edge_cache, const LocTable& locs,
                           const EpsField& Fmax) {
  using V = EpsSeries;
  int ng = static_cast<int>(ins.groups.size());
  auto weight_of = [&](const std::vector<Rational>& w) {
    return F.pure(dot(w, spec));
  };

  Rational mult(1);
  for (int g = 0; g < ng; ++g) {
    Rational m = factorial(ins.groups[g].count);
    for (auto& row : t.counts) m /= factorial(row[g]);
    mult *= m;
  }
  mult /= Rational(otree_aut(t));
  for (auto& e : t.edges) mult /= Rational(e.k);

  V acc = F.from_rat(mult);

  for (auto& e : t.edges) {
    auto& ge = gkm.edges[e.gkm_edge];
    bool forward = (t.pt[e.u] == ge.p) || (t.pt[e.v] == ge.q);
    auto key = std::make_tuple(e.gkm_edge, e.k, forward);
    auto it = edge_cache.memo.find(key);
    if (it == edge_cache.memo.end())
      it = edge_cache.memo
               .emplace(key, series_edge_factor(Fmax, gkm, e.gkm_edge, e.k,
                                                forward, twist, spec))
               .first;
    acc = F.mul(acc, it->second);
  }

  int nv = static_cast<int>(t.pt.size());
  for (int v = 0; v < nv; ++v) {
    int p = t.pt[v];
    int val = t.valence(v);
    int marks = 0;
    for (int g = 0; g < ng; ++g) marks += t.counts[v][g];
    int total = val + marks;

    std::vector<std::vector<Rational>> flag_w;
    for (auto& e : t.edges) {
      if (e.u != v && e.v != v) continue;
      auto& ge = gkm.edges[e.gkm_edge];
      auto omega = to_rat(p == ge.p ? ge.dirs[0].w_p : ge.dirs[0].w_q);
      std::vector<Rational> w(gkm.lattice_rank);
      for (int i = 0; i < gkm.lattice_rank; ++i) w[i] = omega[i] / Rational(e.k);
      flag_w.push_back(std::move(w));
    }

    V ep = F.one();
    for (auto& w : gkm.tangent[p]) ep = F.mul(ep, weight_of(to_rat(w)));


    if (total >= 3) {
      if (val >= 1) acc = F.mul(acc, F.powi(ep, val - 1));
      else acc = F.mul(acc, F.inv(ep));
      for (auto& L : twist) {
        V u = F.twistw(dot(L.value_at[p], spec), L.scaling);
        if (val >= 1) acc = F.mul(acc, F.powi(u, val - 1));
        else acc = F.mul(acc, F.inv(u));
      }
      int budget_total = total - 3;
      // Q(x) = Π_g P_g(x)^{c_g}: per-mark generating polynomial in the
      // ψ-budget with stable weighting coef·loc/a!.
      std::vector<V> Q(budget_total + 1, F.from_rat(Rational(0)));
      Q[0] = F.one();
      for (int g = 0; g < ng; ++g) {
        int c = t.counts[v][g];
        if (c == 0) continue;
        std::vector<V> P(budget_total + 1, F.from_rat(Rational(0)));
        bool any = false;
        for (size_t ti = 0; ti < ins.groups[g].terms.size(); ++ti) {
          auto& term = ins.groups[g].terms[ti];
          if (term.psi > budget_total) continue;
          V piece = F.mul(locs[g][ti][p],
                          F.from_rat(Rational(1) / factorial(term.psi)));
          P[term.psi] = F.add(P[term.psi], piece);
          any = true;
        }
        {
          bool all_zero = true;
          for (auto& x : P) all_zero = all_zero && x.exact_zero();
          if (all_zero) return F.zero();
        }
        if (!any) return F.from_rat(Rational(0));
        for (int copy = 0; copy < c; ++copy) {
          std::vector<V> next(budget_total + 1, F.from_rat(Rational(0)));
          for (int aq = 0; aq <= budget_total; ++aq)
            for (int ap = 0; ap + aq <= budget_total; ++ap)
              next[aq + ap] = F.add(next[aq + ap], F.mul(Q[aq], P[ap]));
          Q = std::move(next);
        }
      }
      Rational fact = factorial(total - 3);
      if (val == 0) {
        acc = F.mul(acc, F.mul(Q[budget_total], F.from_rat(fact)));
      } else {
        std::vector<V> winv;
        for (auto& w : flag_w) winv.push_back(F.inv(weight_of(w)));
        // flagsum(B) = Σ_{Σc_F = B} Π (1/c_F!) ŵ_F^{-1-c_F}
        std::vector<V> flagsum(budget_total + 1, F.from_rat(Rational(0)));
        std::vector<int> cf(val, 0);
        std::function<void(int, int, V)> recf = [&](int fi, int used, V accf) {
          if (fi == val) {
            flagsum[used] = F.add(flagsum[used], accf);
            return;
          }
          V base = winv[fi];
          V powed = base;
          for (int c = 0; used + c <= budget_total; ++c) {
            if (c > 0) powed = F.mul(powed, base);
            recf(fi + 1, used + c,
                 F.mul(accf, F.mul(powed, F.from_rat(Rational(1) / factorial(c)))));
          }
        };
        recf(0, 0, F.one());
        V vertex_sum = F.from_rat(Rational(0));
        for (int A = 0; A <= budget_total; ++A)
          vertex_sum = F.add(vertex_sum, F.mul(Q[A], flagsum[budget_total - A]));
        acc = F.mul(acc, F.mul(vertex_sum, F.from_rat(fact)));
      }
    } else if (val == 2 && marks == 0) {
      acc = F.mul(acc, ep);
      for (auto& L : twist)
        acc = F.mul(acc, F.twistw(dot(L.value_at[p], spec), L.scaling));
      acc = F.mul(acc, F.inv(F.add(weight_of(flag_w[0]), weight_of(flag_w[1]))));
    } else if (val == 1 && marks == 0) {
      acc = F.mul(acc, weight_of(flag_w[0]));
    } else if (val == 1 && marks == 1) {
      int g_found = -1;
      for (int g = 0; g < ng; ++g)
        if (t.counts[v][g] == 1) g_found = g;
      V end = F.zero();
      V neg_w = F.neg(weight_of(flag_w[0]));
      for (size_t ti = 0; ti < ins.groups[g_found].terms.size(); ++ti)
        end = F.add(end, F.mul(locs[g_found][ti][p],
                               F.powi(neg_w, ins.groups[g_found].terms[ti].psi)));
      acc = F.mul(acc, end);
    } else {
      throw std::logic_error("GKM: impossible unstable vertex");
    }
  }
  return acc;
}

}  // namespace

LaurentScalar oracle_invariant(const GKMData& gkm, const std::vector<long>& beta,
                               const std::vector<OracleInsertion>& insertions,
                               const std::optional<TwistSpec>& twist,
                               int spec_offset) {
  if (static_cast<int>(beta.size()) != gkm.curve_rank)
    throw std::invalid_argument("oracle_invariant: curve class rank mismatch");
  auto ins = group_insertions(insertions);

  if (!twist) {
    long vdim = gkm.dim - 3 + ins.total;
    for (int i = 0; i < gkm.curve_rank; ++i) vdim += gkm.anticanonical[i] * beta[i];
    long got = 0;
    for (auto& i : insertions) got += i.psi + i.cls.degree(gkm);
    if (got != vdim) return LaurentScalar();
  }

  auto ample = default_ample(gkm);
  auto trees = enumerate_otrees(gkm, beta, ins, ample);
  if (trees.empty()) return LaurentScalar();

  LaurentScalar values[2];
  int have = 0, attempt = spec_offset;
  while (have < 2) {
    if (attempt > 12 + spec_offset)
      throw std::runtime_error("oracle_invariant: repeated degenerate specializations");
    auto spec = make_spec(gkm, attempt++);
    try {
      values[have] = eval_sum(gkm, trees, ins, twist, spec);
      ++have;
    } catch (const RespecializeError&) {
      continue;
    }
  }
  if (values[0] != values[1])
    throw std::runtime_error("oracle_invariant: weight specializations disagree (" +
                             values[0].str() + " vs " + values[1].str() + ")");
  return values[0];
}


LaurentScalar oracle_series_invariant(const GKMData& gkm,
                                      const std::vector<long>& beta,
                                      const std::vector<OracleSeriesInsertion>& ins,
                                      const TwistSpec& twist, int spec_offset) {
  if (static_cast<int>(beta.size()) != gkm.curve_rank)
    throw std::invalid_argument("oracle_series_invariant: curve class rank");
  auto groups = group_series(ins);
  std::vector<int> counts;
  for (auto& g : groups.groups) counts.push_back(g.count);
  auto ample = default_ample(gkm);
  auto trees = enumerate_otrees_counts(gkm, beta, counts, groups.total, ample);
  if (trees.empty()) return LaurentScalar();

  int max_window = 2;
  std::vector<int> windows;
  for (auto& t : trees) {
    windows.push_back(tree_eps_window_series(gkm, groups, t));
    max_window = std::max(max_window, windows.back());
  }
  auto eval = [&](const std::vector<long>& spec) {
    std::map<int, LaurentScalar> eps_coeffs;
    int trusted_hi = 1000000;
    EpsField Fmax(max_window);
    EdgeFactorCache edge_cache;
    LocTable locs = build_loc_table(Fmax, gkm, groups, spec);
    for (size_t gi = 0; gi < trees.size(); ++gi) {
      auto& t = trees[gi];
      EpsField F(windows[gi]);
      EpsSeries s =
          eval_tree_series(F, gkm, groups, t, twist, spec, edge_cache, locs, Fmax);
      if (s.off + static_cast<int>(s.c.size()) <= 0 && getenv("PBGW_DEBUG_WINDOW")) {
        std::ostringstream os;
        os << "window shortfall: off=" << s.off << " len=" << s.c.size()
           << " window=" << F.window << " tree: pts";
        for (int x : t.pt) os << " " << x;
        os << " edges";
        for (auto& e : t.edges) os << " (" << e.u << "," << e.v << ",k" << e.k << ")";
        os << " counts";
        for (auto& row : t.counts) { os << " ["; for (int c : row) os << c << ","; os << "]"; }
        throw std::logic_error(os.str());
      }
      trusted_hi = std::min(trusted_hi, s.off + static_cast<int>(s.c.size()));
      for (int i = 0; i < static_cast<int>(s.c.size()); ++i)
        if (!s.c[i].is_zero()) eps_coeffs[s.off + i] += s.c[i];
    }
    if (trusted_hi <= 0)
      throw std::logic_error("GKM: ε-window did not reach the constant term");
    for (auto& [e, c] : eps_coeffs)
      if (e < 0 && !c.is_zero())
        throw std::logic_error("GKM: series sum left a residual ε-pole");
    auto it = eps_coeffs.find(0);
    return it == eps_coeffs.end() ? LaurentScalar() : it->second;
  };

  LaurentScalar values[2];
  int have = 0, attempt = spec_offset;
  while (have < 2) {
    if (attempt > 12 + spec_offset)
      throw std::runtime_error("oracle_series_invariant: degenerate specializations");
    auto spec = make_spec(gkm, attempt++);
    try {
      values[have] = eval(spec);
      ++have;
    } catch (const RespecializeError&) {
      continue;
    }
  }
  if (values[0] != values[1])
    throw std::runtime_error("oracle_series_invariant: specializations disagree (" +
                             values[0].str() + " vs " + values[1].str() + ")");
  return values[0];
}

Rational gkm_integral(const GKMData& gkm, const OracleClass& cls) {
  Rational out;
  for (int which = 0; which < 2; ++which) {
    auto spec = make_spec(gkm, which);
    Rational sum(0);
    for (int p = 0; p < gkm.points(); ++p) {
      Rational num(0);
      for (auto& t : cls.terms) {
        Rational m = t.coef;
        for (size_t d = 0; d < t.divisor_power.size(); ++d)
          for (int e = 0; e < t.divisor_power[d]; ++e)
            m *= dot(gkm.divisors[d].value_at[p], spec);
        num += m;
      }
      Rational den(1);
      for (auto& w : gkm.tangent[p]) den *= dot(to_rat(w), spec);
      sum += num / den;
    }
    if (which == 0) out = sum;
    else if (out != sum)
      throw std::runtime_error("gkm_integral: specializations disagree");
  }
  return out;
}

Rational wdvv_plane_numbers(int d) {
  if (d < 1) throw std::invalid_argument("wdvv_plane_numbers: d >= 1 required");
  static std::vector<Rational> memo{Rational(0), Rational(1)};
  for (int n = static_cast<int>(memo.size()); n <= d; ++n) {
    Rational nd(0);
    for (int a = 1; a < n; ++a) {
      int b = n - a;
      Rational term = memo[a] * memo[b] * Rational(a) * Rational(a) * Rational(b);
      term *= Rational(b) * binomial(3 * n - 4, 3 * a - 2) -
              Rational(a) * binomial(3 * n - 4, 3 * a - 1);
      nd += term;
    }
    memo.push_back(nd);
  }
  return memo[d];
}

// ---------------------------------------------------------------------------
// Built-in moment graphs.

GKMData gkm_projective_space(int n) {
  GKMData g;
  g.name = "P" + std::to_string(n);
  g.lattice_rank = n + 1;
  g.dim = n;
  g.curve_rank = 1;
  for (int i = 0; i <= n; ++i) {
    g.point_names.push_back("p" + std::to_string(i));
    std::vector<std::vector<long>> tg;
    for (int j = 0; j <= n; ++j) {
      if (j == i) continue;
      std::vector<long> w(n + 1, 0);
      w[j] = 1;
      w[i] = -1;
      tg.push_back(w);
    }
    g.tangent.push_back(tg);
  }
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      GKMData::Edge e;
      e.p = i;
      e.q = j;
      e.curve_class = {1};
      GKMData::Direction along;
      along.w_p.assign(n + 1, 0);
      along.w_p[j] = 1;
      along.w_p[i] = -1;
      along.w_q = along.w_p;
      for (auto& x : along.w_q) x = -x;
      along.degree = 2;
      e.dirs.push_back(along);
      for (int l = 0; l <= n; ++l) {
        if (l == i || l == j) continue;
        GKMData::Direction d;
        d.w_p.assign(n + 1, 0);
        d.w_p[l] = 1;
        d.w_p[i] = -1;
        d.w_q.assign(n + 1, 0);
        d.w_q[l] = 1;
        d.w_q[j] = -1;
        d.degree = 1;
        e.dirs.push_back(d);
      }
      g.edges.push_back(e);
    }
  GKMData::Divisor h;
  h.name = "H";
  for (int i = 0; i <= n; ++i) {
    std::vector<Rational> v(n + 1, Rational(0));
    v[i] = Rational(-1);
    h.value_at.push_back(v);
  }
  h.curve_pairing = {1};
  g.divisors.push_back(h);
  g.anticanonical = {n + 1};
  g.validate();
  return g;
}

GKMData gkm_split_over_p1(const std::vector<long>& twists) {
  int r = static_cast<int>(twists.size());
  if (r < 2) throw std::invalid_argument("gkm_split_over_p1: rank >= 2 required");
  GKMData g;
  {
    std::ostringstream nm;
    nm << "P(O(" << twists[0] << ")";
    for (int j = 1; j < r; ++j) nm << "+O(" << twists[j] << ")";
    nm << ")/P1";
    g.name = nm.str();
  }
  // Lattice (ν; ε_1..ε_r): base P¹ tangent ν at b₀, -ν at b₁; summand
  // O(t_j) has equivariant values ε_j at b₀ and ε_j - t_j ν at b₁.
  g.lattice_rank = 1 + r;
  g.dim = r;
  g.curve_rank = 2;  // coordinates: (pairing with H, degree over the base)
  auto fiber_dir = [&](int jfrom, int jto, int i) {
    std::vector<long> w(g.lattice_rank, 0);
    w[1 + jto] += 1;
    w[1 + jfrom] -= 1;
    if (i == 1) w[0] += twists[jfrom] - twists[jto];
    return w;
  };
  auto base_dir = [&](int i) {
    std::vector<long> w(g.lattice_rank, 0);
    w[0] = (i == 0) ? 1 : -1;
    return w;
  };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < r; ++j) {
      g.point_names.push_back("b" + std::to_string(i) + "L" + std::to_string(j));
      std::vector<std::vector<long>> tg;
      tg.push_back(base_dir(i));
      for (int j2 = 0; j2 < r; ++j2)
        if (j2 != j) tg.push_back(fiber_dir(j, j2, i));
      g.tangent.push_back(tg);
    }
  auto pid = [&](int i, int j) { return i * r + j; };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < r; ++j)
      for (int j2 = j + 1; j2 < r; ++j2) {
        GKMData::Edge e;
        e.p = pid(i, j);
        e.q = pid(i, j2);
        e.curve_class = {1, 0};
        GKMData::Direction along;
        along.w_p = fiber_dir(j, j2, i);
        along.w_q = fiber_dir(j2, j, i);
        along.degree = 2;
        e.dirs.push_back(along);
        GKMData::Direction bd;
        bd.w_p = base_dir(i);
        bd.w_q = base_dir(i);
        bd.degree = 0;
        e.dirs.push_back(bd);
        for (int l = 0; l < r; ++l) {
          if (l == j || l == j2) continue;
          GKMData::Direction d;
          d.w_p = fiber_dir(j, l, i);
          d.w_q = fiber_dir(j2, l, i);
          d.degree = 1;
          e.dirs.push_back(d);
        }
        g.edges.push_back(e);
      }
  for (int j = 0; j < r; ++j) {
    GKMData::Edge e;
    e.p = pid(0, j);
    e.q = pid(1, j);
    e.curve_class = {-twists[j], 1};
    GKMData::Direction along;
    along.w_p = base_dir(0);
    along.w_q = base_dir(1);
    along.degree = 2;
    e.dirs.push_back(along);
    for (int l = 0; l < r; ++l) {
      if (l == j) continue;
      GKMData::Direction d;
      d.w_p = fiber_dir(j, l, 0);
      d.w_q = fiber_dir(j, l, 1);
      // Hom(L_j, L_l) restricted to the summand-j section is O(t_l - t_j).
      d.degree = twists[l] - twists[j];
      e.dirs.push_back(d);
    }
    g.edges.push_back(e);
  }
  GKMData::Divisor H, Fd;
  H.name = "H";
  Fd.name = "F";
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < r; ++j) {
      std::vector<Rational> v(g.lattice_rank, Rational(0));
      v[1 + j] = Rational(-1);
      if (i == 1) v[0] = Rational(twists[j]);
      H.value_at.push_back(v);
      std::vector<Rational> f(g.lattice_rank, Rational(0));
      if (i == 0) f[0] = Rational(1);
      Fd.value_at.push_back(f);
    }
  H.curve_pairing = {1, 0};
  Fd.curve_pairing = {0, 1};
  g.divisors.push_back(H);
  g.divisors.push_back(Fd);
  long tsum = 0;
  for (long t : twists) tsum += t;
  g.anticanonical = {r, tsum + 2};
  g.validate();
  return g;
}

GKMData gkm_hirzebruch(int a) { return gkm_split_over_p1({0, a}); }

GKMData gkm_product_p1xp1() {
  auto g = gkm_split_over_p1({0, 0});
  g.name = "P1xP1";
  return g;
}

GKMData gkm_builtin(const std::string& name) {
  if (name == "P1xP1" || name == "F0") return gkm_product_p1xp1();
  if (name.size() == 2 && name[0] == 'F' && isdigit(static_cast<unsigned char>(name[1])))
    return gkm_hirzebruch(name[1] - '0');
  if (!name.empty() && name[0] == 'P') {
    bool digits = name.size() > 1;
    for (size_t i = 1; i < name.size(); ++i)
      if (!isdigit(static_cast<unsigned char>(name[i]))) digits = false;
    if (digits) return gkm_projective_space(std::stoi(name.substr(1)));
  }
  throw std::invalid_argument("unknown builtin moment graph: " + name);
}

// ---------------------------------------------------------------------------
// JSON

std::string GKMData::to_json() const {
  json j;
  j["name"] = name;
  j["lattice_rank"] = lattice_rank;
  j["dim"] = dim;
  j["curve_rank"] = curve_rank;
  j["points"] = point_names;
  j["tangent"] = tangent;
  j["edges"] = json::array();
  for (auto& e : edges) {
    json je;
    je["p"] = e.p;
    je["q"] = e.q;
    je["class"] = e.curve_class;
    je["dirs"] = json::array();
    for (auto& d : e.dirs)
      je["dirs"].push_back({{"wp", d.w_p}, {"wq", d.w_q}, {"deg", d.degree}});
    j["edges"].push_back(je);
  }
  j["divisors"] = json::array();
  for (auto& d : divisors) {
    json jd;
    jd["name"] = d.name;
    jd["values"] = json::array();
    for (auto& v : d.value_at) {
      json row = json::array();
      for (auto& x : v) row.push_back(x.str());
      jd["values"].push_back(row);
    }
    jd["pairing"] = d.curve_pairing;
    j["divisors"].push_back(jd);
  }
  j["anticanonical"] = anticanonical;
  return j.dump(2);
}

GKMData GKMData::from_json(const std::string& text) {
  try {
    return from_json_checked(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("GKM JSON: ") + e.what());
  }
}

GKMData GKMData::from_json_checked(const std::string& text) {
  json j = json::parse(text);
  GKMData g;
  g.name = j.value("name", std::string("custom"));
  g.lattice_rank = j.at("lattice_rank").get<int>();
  g.dim = j.at("dim").get<int>();
  g.curve_rank = j.at("curve_rank").get<int>();
  g.point_names = j.at("points").get<std::vector<std::string>>();
  g.tangent = j.at("tangent").get<std::vector<std::vector<std::vector<long>>>>();
  for (auto& je : j.at("edges")) {
    Edge e;
    e.p = je.at("p").get<int>();
    e.q = je.at("q").get<int>();
    e.curve_class = je.at("class").get<std::vector<long>>();
    for (auto& jd : je.at("dirs")) {
      Direction d;
      d.w_p = jd.at("wp").get<std::vector<long>>();
      d.w_q = jd.at("wq").get<std::vector<long>>();
      d.degree = jd.at("deg").get<long>();
      e.dirs.push_back(d);
    }
    g.edges.push_back(e);
  }
  for (auto& jd : j.at("divisors")) {
    Divisor d;
    d.name = jd.at("name").get<std::string>();
    for (auto& row : jd.at("values")) {
      std::vector<Rational> v;
      for (auto& x : row) v.push_back(Rational::from_string(x.get<std::string>()));
      d.value_at.push_back(v);
    }
    d.curve_pairing = jd.at("pairing").get<std::vector<long>>();
    g.divisors.push_back(d);
  }
  g.anticanonical = j.at("anticanonical").get<std::vector<long>>();
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Verification drivers for the equal-Chern pair over P¹.

namespace {

std::vector<std::pair<std::string, std::vector<int>>> surface_basis(const GKMData& g) {
  int hi = g.divisor_index("H");
  int fi = g.divisor_index("F");
  int nd = static_cast<int>(g.divisors.size());
  std::vector<int> one(nd, 0), h(nd, 0), f(nd, 0), hf(nd, 0);
  h[hi] = 1;
  f[fi] = 1;
  hf[hi] = 1;
  hf[fi] = 1;
  return {{"1", one}, {"H", h}, {"F", f}, {"H*F", hf}};
}

}  // namespace

VerificationReport verify_theorem_A(int max_acdeg, int max_marks) {
  VerificationReport rep;
  auto g1 = gkm_split_over_p1({0, 2});  // F2 presented by V1 = O + O(2)
  auto g2 = gkm_split_over_p1({1, 1});  // F0 presented by V2 = O(1) + O(1)
  auto basis1 = surface_basis(g1);
  auto basis2 = surface_basis(g2);

  for (long b = 0; b <= 2; ++b)
    for (long k = -2 * b; k <= 3; ++k) {
      if (b == 0 && k <= 0) continue;
      long acdeg = g1.anticanonical[0] * k + g1.anticanonical[1] * b;
      if (acdeg < 0 || acdeg > max_acdeg) continue;
      std::vector<long> beta{k, b};
      for (int n = 1; n <= max_marks; ++n) {
        long need = 2 - 3 + acdeg + n;
        std::vector<std::pair<int, int>> choice(n);
        std::function<void(int, int, long)> rec = [&](int i, int minc, long left) {
          if (i == n) {
            if (left != 0) return;
            std::vector<OracleInsertion> ins1, ins2;
            std::ostringstream label;
            label << "beta=(" << k << "," << b << ") <";
            for (int m = 0; m < n; ++m) {
              auto [pw, bi] = choice[m];
              OracleInsertion a;
              a.psi = pw;
              a.cls.terms.push_back({Rational(1), basis1[bi].second});
              ins1.push_back(a);
              OracleInsertion c;
              c.psi = pw;
              c.cls.terms.push_back({Rational(1), basis2[bi].second});
              ins2.push_back(c);
              if (m) label << ", ";
              if (pw) label << "psi^" << pw << " ";
              label << basis1[bi].first;
            }
            label << ">";
            LaurentScalar lhs = oracle_invariant(g1, beta, ins1);
            LaurentScalar rhs = oracle_invariant(g2, beta, ins2);
            rep.lines.push_back({label.str(), lhs == rhs, lhs.str(), rhs.str()});
            return;
          }
          for (int c = minc; c < 4 * 8; ++c) {
            int bi = c % 4;
            int pw = c / 4;
            int deg = bi == 0 ? 0 : bi == 3 ? 2 : 1;
            long d = pw + deg;
            if (d > left) continue;
            choice[i] = {pw, bi};
            rec(i + 1, c, left - d);
          }
        };
        rec(0, 0, need);
      }
    }
  return rep;
}

VerificationReport verify_lemma_tw(int max_degree, int max_marks) {
  VerificationReport rep;
  auto p1 = gkm_projective_space(1);
  auto twist_for = [&](const std::vector<long>& twists) {
    TwistSpec spec;
    for (long t : twists) {
      TwistSummand s;
      for (int p = 0; p < 2; ++p) {
        // O(t) lifted as t·H with H|_{p_i} = -μ_i.
        std::vector<Rational> v(p1.lattice_rank, Rational(0));
        v[p] = Rational(-t);
        s.value_at.push_back(v);
      }
      s.scaling = +1;
      spec.push_back(s);
    }
    return spec;
  };
  TwistSpec tw1 = twist_for({0, 2});
  TwistSpec tw2 = twist_for({1, 1});

  int hidx = p1.divisor_index("H");
  for (long d = 0; d <= max_degree; ++d) {
    int n_lo = d == 0 ? 3 : 0;
    for (int n = n_lo; n <= std::max(n_lo, max_marks); ++n) {
      long cap = 1 - 3 + 2 * d + n;  // virtual dimension of the moduli space
      if (cap < 0) continue;
      std::vector<std::pair<int, int>> choice(n);
      std::function<void(int, int, long)> rec = [&](int i, int minc, long left) {
        if (i == n) {
          std::vector<OracleInsertion> ins;
          std::ostringstream label;
          label << "tw d=" << d << " <";
          for (int m = 0; m < n; ++m) {
            auto [pw, e] = choice[m];
            OracleInsertion a;
            a.psi = pw;
            a.cls = OracleClass::divisor_monomial(
                hidx, static_cast<int>(p1.divisors.size()), e);
            ins.push_back(a);
            if (m) label << ", ";
            if (pw) label << "psi^" << pw << " ";
            label << (e ? "pt" : "1");
          }
          label << ">";
          std::vector<long> beta{d};
          LaurentScalar lhs = oracle_invariant(p1, beta, ins, tw1);
          LaurentScalar rhs = oracle_invariant(p1, beta, ins, tw2);
          rep.lines.push_back({label.str(), lhs == rhs, lhs.str(), rhs.str()});
          return;
        }
        for (int c = minc; c < 2 * 4; ++c) {
          int e = c % 2;
          int pw = c / 2;
          long deg = pw + e;
          if (deg > left) continue;
          choice[i] = {pw, e};
          rec(i + 1, c, left - deg);
        }
      };
      rec(0, 0, cap);
    }
  }
  return rep;
}

}  // namespace pbgw
