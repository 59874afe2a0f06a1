#include "pbgw/base_ring.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace pbgw {

using nlohmann::json;

BaseRing::BaseRing(std::string name,
                   std::vector<std::string> basis_names,
                   std::vector<int> degrees,
                   std::vector<std::vector<std::vector<SparseTerm>>> table,
                   std::vector<Rational> integral,
                   int curve_rank,
                   std::vector<std::vector<long>> curve_pairing,
                   std::vector<Rational> canonical)
    : name_(std::move(name)),
      names_(std::move(basis_names)),
      degs_(std::move(degrees)),
      table_(std::move(table)),
      integral_(std::move(integral)),
      curve_rank_(curve_rank),
      curve_pairing_(std::move(curve_pairing)),
      canonical_(std::move(canonical)) {
  top_ = 0;
  for (int d : degs_) top_ = std::max(top_, d);
  for (int i = 0; i < size(); ++i)
    if (degs_[i] == 2) deg2_.push_back(i);
  validate();
  compute_duals();
}

int BaseRing::index_of(const std::string& nm) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == nm) return i;
  return -1;
}

long BaseRing::pair_divisor(int i, const std::vector<long>& beta) const {
  auto it = std::find(deg2_.begin(), deg2_.end(), i);
  if (it == deg2_.end())
    throw std::invalid_argument("pair_divisor: basis class is not degree 2");
  int slot = static_cast<int>(it - deg2_.begin());
  if (static_cast<int>(beta.size()) != curve_rank_)
    throw std::invalid_argument("pair_divisor: curve class has wrong rank");
  long s = 0;
  for (int j = 0; j < curve_rank_; ++j) s += curve_pairing_[slot][j] * beta[j];
  return s;
}

bool BaseRing::effective(const std::vector<long>& beta) const {
  // All built-in bases (pt, P1, P2, P1xP1) have NE(S) equal to the
  // nonnegative orthant in the chosen lattice coordinates.
  if (static_cast<int>(beta.size()) != curve_rank_)
    throw std::invalid_argument("effective: curve class has wrong rank");
  for (long b : beta)
    if (b < 0) return false;
  return true;
}

BaseVec BaseRing::unit() const {
  BaseVec v(size());
  v[0] = LaurentScalar(1);
  return v;
}

BaseVec BaseRing::basis_class(int i) const {
  BaseVec v(size());
  v[i] = LaurentScalar(1);
  return v;
}

BaseVec BaseRing::from_rationals(const std::vector<Rational>& coords) const {
  if (static_cast<int>(coords.size()) != size())
    throw std::invalid_argument("from_rationals: wrong length");
  BaseVec v(size());
  for (int i = 0; i < size(); ++i) v[i] = LaurentScalar(coords[i]);
  return v;
}

bool BaseRing::is_zero(const BaseVec& a) {
  for (auto& c : a)
    if (!c.is_zero()) return false;
  return true;
}

BaseVec BaseRing::add(const BaseVec& a, const BaseVec& b) const {
  BaseVec r(size());
  for (int i = 0; i < size(); ++i) r[i] = a[i] + b[i];
  return r;
}

BaseVec BaseRing::sub(const BaseVec& a, const BaseVec& b) const {
  BaseVec r(size());
  for (int i = 0; i < size(); ++i) r[i] = a[i] - b[i];
  return r;
}

BaseVec BaseRing::mul(const BaseVec& a, const BaseVec& b) const {
  BaseVec r(size());
  for (int i = 0; i < size(); ++i) {
    if (a[i].is_zero()) continue;
    for (int j = 0; j < size(); ++j) {
      if (b[j].is_zero()) continue;
      LaurentScalar prod = a[i] * b[j];
      for (auto& t : table_[i][j]) r[t.k] += prod.scaled(t.coef);
    }
  }
  return r;
}

BaseVec BaseRing::scale(const BaseVec& a, const LaurentScalar& s) const {
  BaseVec r(size());
  for (int i = 0; i < size(); ++i) r[i] = a[i] * s;
  return r;
}

LaurentScalar BaseRing::integral(const BaseVec& a) const {
  LaurentScalar s;
  for (int i = 0; i < size(); ++i) s += a[i].scaled(integral_[i]);
  return s;
}

void BaseRing::validate() const {
  int n = size();
  if (n == 0) throw std::invalid_argument("BaseRing: empty basis");
  if (static_cast<int>(degs_.size()) != n ||
      static_cast<int>(integral_.size()) != n ||
      static_cast<int>(table_.size()) != n)
    throw std::invalid_argument("BaseRing: inconsistent sizes");
  if (degs_[0] != 0) throw std::invalid_argument("BaseRing: basis[0] must be the unit");
  for (int d : degs_)
    if (d < 0 || d % 2 != 0)
      throw std::invalid_argument("BaseRing: degrees must be even and nonnegative");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(table_[i].size()) != n)
      throw std::invalid_argument("BaseRing: table row size");
    for (int j = 0; j < n; ++j) {
      for (auto& t : table_[i][j]) {
        if (t.k < 0 || t.k >= n) throw std::invalid_argument("BaseRing: table index");
        // Degree additivity: products only populate matching degrees.
        if (degs_[t.k] != degs_[i] + degs_[j])
          throw std::invalid_argument("BaseRing: degree additivity violated at (" +
                                      names_[i] + "," + names_[j] + ")");
      }
    }
  }
  // Commutativity (even degrees only) and unit row.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::map<int, Rational> lhs, rhs;
      for (auto& t : table_[i][j]) lhs[t.k] = t.coef;
      for (auto& t : table_[j][i]) rhs[t.k] = t.coef;
      if (lhs != rhs) throw std::invalid_argument("BaseRing: table not commutative");
    }
  for (int j = 0; j < n; ++j) {
    if (table_[0][j].size() != 1 || table_[0][j][0].k != j ||
        table_[0][j][0].coef != Rational(1))
      throw std::invalid_argument("BaseRing: basis[0] does not act as unit");
  }
  // Integration supported in top degree only.
  for (int i = 0; i < n; ++i)
    if (!integral_[i].is_zero() && degs_[i] != top_)
      throw std::invalid_argument("BaseRing: integral supported below top degree");
  if (static_cast<int>(curve_pairing_.size()) != static_cast<int>(deg2_.size()))
    throw std::invalid_argument("BaseRing: curve pairing rows != #degree-2 classes");
  for (auto& row : curve_pairing_)
    if (static_cast<int>(row.size()) != curve_rank_)
      throw std::invalid_argument("BaseRing: curve pairing row length");
  if (!canonical_.empty() && static_cast<int>(canonical_.size()) != n)
    throw std::invalid_argument("BaseRing: canonical class length");
}

void BaseRing::compute_duals() {
  int n = size();
  // Pairing matrix P[i][j] = ∫ T_i T_j.
  std::vector<std::vector<Rational>> p(n, std::vector<Rational>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Rational s(0);
      for (auto& t : table_[i][j]) s += t.coef * integral_[t.k];
      p[i][j] = s;
    }
  // Invert by Gaussian elimination; failure means the presentation has no
  // Poincaré-dual basis and is rejected.
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n));
  for (int i = 0; i < n; ++i) inv[i][i] = Rational(1);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (!p[r][col].is_zero()) { piv = r; break; }
    if (piv < 0) throw std::invalid_argument("BaseRing: Poincaré pairing degenerate");
    std::swap(p[piv], p[col]);
    std::swap(inv[piv], inv[col]);
    Rational d = p[col][col];
    for (int j = 0; j < n; ++j) { p[col][j] /= d; inv[col][j] /= d; }
    for (int r = 0; r < n; ++r) {
      if (r == col || p[r][col].is_zero()) continue;
      Rational f = p[r][col];
      for (int j = 0; j < n; ++j) {
        p[r][j] -= f * p[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  // T^i = Σ_j (P⁻¹)_{ij} T_j satisfies ∫ T_i T^j = δ_ij.
  dual_.assign(n, std::vector<Rational>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dual_[i][j] = inv[i][j];
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

using Terms = std::vector<BaseRing::SparseTerm>;

std::vector<std::vector<Terms>> empty_table(int n) {
  return std::vector<std::vector<Terms>>(n, std::vector<Terms>(n));
}

void set_prod(std::vector<std::vector<Terms>>& t, int i, int j, Terms v) {
  t[i][j] = v;
  t[j][i] = std::move(v);
}

void fill_unit_row(std::vector<std::vector<Terms>>& t) {
  int n = static_cast<int>(t.size());
  for (int j = 0; j < n; ++j) {
    t[0][j] = {{j, Rational(1)}};
    t[j][0] = {{j, Rational(1)}};
  }
}

}  // namespace

std::shared_ptr<const BaseRing> BaseRing::point() {
  static std::shared_ptr<const BaseRing> r = [] {
    auto t = empty_table(1);
    fill_unit_row(t);
    return std::make_shared<const BaseRing>(
        "pt", std::vector<std::string>{"1"}, std::vector<int>{0}, t,
        std::vector<Rational>{Rational(1)}, 0,
        std::vector<std::vector<long>>{}, std::vector<Rational>{Rational(0)});
  }();
  return r;
}

std::shared_ptr<const BaseRing> BaseRing::p1() {
  static std::shared_ptr<const BaseRing> r = [] {
    auto t = empty_table(2);
    fill_unit_row(t);
    set_prod(t, 1, 1, {});  // F² = 0
    return std::make_shared<const BaseRing>(
        "P1", std::vector<std::string>{"1", "F"}, std::vector<int>{0, 2}, t,
        std::vector<Rational>{Rational(0), Rational(1)}, 1,
        std::vector<std::vector<long>>{{1}},
        std::vector<Rational>{Rational(0), Rational(-2)});  // K = -2F
  }();
  return r;
}

std::shared_ptr<const BaseRing> BaseRing::p2() {
  static std::shared_ptr<const BaseRing> r = [] {
    auto t = empty_table(3);
    fill_unit_row(t);
    set_prod(t, 1, 1, {{2, Rational(1)}});  // L·L = pt
    set_prod(t, 1, 2, {});
    set_prod(t, 2, 2, {});
    return std::make_shared<const BaseRing>(
        "P2", std::vector<std::string>{"1", "L", "pt"}, std::vector<int>{0, 2, 4},
        t, std::vector<Rational>{Rational(0), Rational(0), Rational(1)}, 1,
        std::vector<std::vector<long>>{{1}},
        std::vector<Rational>{Rational(0), Rational(-3), Rational(0)});  // K = -3L
  }();
  return r;
}

std::shared_ptr<const BaseRing> BaseRing::p1xp1() {
  static std::shared_ptr<const BaseRing> r = [] {
    auto t = empty_table(4);
    fill_unit_row(t);
    set_prod(t, 1, 1, {});                   // A² = 0
    set_prod(t, 2, 2, {});                   // B² = 0
    set_prod(t, 1, 2, {{3, Rational(1)}});   // A·B = pt
    set_prod(t, 1, 3, {});
    set_prod(t, 2, 3, {});
    set_prod(t, 3, 3, {});
    // Curve lattice basis: c1 pairs (A,B) = (0,1); c2 pairs (1,0).
    return std::make_shared<const BaseRing>(
        "P1xP1", std::vector<std::string>{"1", "A", "B", "pt"},
        std::vector<int>{0, 2, 2, 4}, t,
        std::vector<Rational>{Rational(0), Rational(0), Rational(0), Rational(1)},
        2, std::vector<std::vector<long>>{{0, 1}, {1, 0}},
        std::vector<Rational>{Rational(0), Rational(-2), Rational(-2), Rational(0)});
  }();
  return r;
}

std::shared_ptr<const BaseRing> BaseRing::builtin(const std::string& name) {
  if (name == "pt" || name == "point") return point();
  if (name == "P1") return p1();
  if (name == "P2") return p2();
  if (name == "P1xP1") return p1xp1();
  throw std::invalid_argument("unknown builtin base ring: " + name);
}

// ---------------------------------------------------------------------------
// JSON interchange: {"basis":[{"name":"1","deg":0},...],
//                    "mult":[[[i,j],[{"k":..,"coef":"p/q"},...]],...],
//                    "integral":["p/q",...], ...}

std::string BaseRing::to_json() const {
  json j;
  j["name"] = name_;
  for (int i = 0; i < size(); ++i)
    j["basis"].push_back({{"name", names_[i]}, {"deg", degs_[i]}});
  j["mult"] = json::array();
  for (int i = 0; i < size(); ++i)
    for (int k = i; k < size(); ++k) {
      if (table_[i][k].empty()) continue;
      json terms = json::array();
      for (auto& t : table_[i][k])
        terms.push_back({{"k", t.k}, {"coef", t.coef.str()}});
      j["mult"].push_back(json::array({json::array({i, k}), terms}));
    }
  j["integral"] = json::array();
  for (auto& c : integral_) j["integral"].push_back(c.str());
  j["curve_rank"] = curve_rank_;
  j["curve_pairing"] = curve_pairing_;
  if (!canonical_.empty()) {
    j["K_S"] = json::array();
    for (auto& c : canonical_) j["K_S"].push_back(c.str());
  }
  return j.dump(2);
}

std::shared_ptr<const BaseRing> BaseRing::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("base ring JSON: ") + e.what());
  }
  if (!j.contains("basis") || !j.contains("mult") || !j.contains("integral"))
    throw std::invalid_argument("base ring JSON: missing basis/mult/integral");
  std::vector<std::string> names;
  std::vector<int> degs;
  for (auto& b : j["basis"]) {
    names.push_back(b.at("name").get<std::string>());
    degs.push_back(b.at("deg").get<int>());
  }
  int n = static_cast<int>(names.size());
  auto table = empty_table(n);
  for (auto& entry : j["mult"]) {
    int i = entry.at(0).at(0).get<int>();
    int k = entry.at(0).at(1).get<int>();
    if (i < 0 || i >= n || k < 0 || k >= n)
      throw std::invalid_argument("base ring JSON: mult index out of range");
    Terms terms;
    for (auto& t : entry.at(1))
      terms.push_back({t.at("k").get<int>(),
                       Rational::from_string(t.at("coef").get<std::string>())});
    table[i][k] = terms;
    table[k][i] = terms;
  }
  fill_unit_row(table);
  std::vector<Rational> integral;
  for (auto& c : j["integral"])
    integral.push_back(Rational::from_string(c.get<std::string>()));
  int curve_rank = j.value("curve_rank", 0);
  std::vector<std::vector<long>> pairing;
  if (j.contains("curve_pairing"))
    pairing = j["curve_pairing"].get<std::vector<std::vector<long>>>();
  std::vector<Rational> canonical;
  if (j.contains("K_S"))
    for (auto& c : j["K_S"])
      canonical.push_back(Rational::from_string(c.get<std::string>()));
  return std::make_shared<const BaseRing>(
      j.value("name", std::string("custom")), names, degs, table, integral,
      curve_rank, pairing, canonical);
}

}  // namespace pbgw
