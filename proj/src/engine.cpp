#include "pbgw/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pbgw/gkm.hpp"

namespace pbgw {

using nlohmann::json;

std::string InvariantKey::str() const {
  std::ostringstream os;
  os << target << "|g0|b" << beta.str() << "|";
  for (auto& [p, c] : insertions) os << "(" << p << ";" << c << ")";
  os << "|";
  switch (twist) {
    case TwistTag::Untwisted: os << "untw"; break;
    case TwistTag::TwO1: os << "twO1"; break;
    case TwistTag::TwV: os << "twV"; break;
  }
  return os.str();
}

void InvariantCache::store(const InvariantKey& key, const LaurentScalar& value) {
  std::lock_guard<std::mutex> lock(mu_);
  auto k = key.str();
  auto it = map_.find(k);
  if (it != map_.end()) {
    if (it->second.second != value)
      throw std::runtime_error("cache conflict for key " + k + ": " +
                               it->second.second.str() + " vs " + value.str());
    return;
  }
  map_[k] = {key, value};
}

std::optional<LaurentScalar> InvariantCache::load(const InvariantKey& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key.str());
  if (it == map_.end()) return std::nullopt;
  return it->second.second;
}

size_t InvariantCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

namespace {

json laurent_to_json(const LaurentScalar& v) {
  if (v.lambda_free()) return v.constant_part().str();
  json m = json::object();
  for (auto& [e, c] : v.terms()) m[std::to_string(e)] = c.str();
  return json{{"laurent", m}};
}

LaurentScalar laurent_from_json(const json& j) {
  if (j.is_string()) return LaurentScalar(Rational::from_string(j.get<std::string>()));
  LaurentScalar v;
  for (auto& [e, c] : j.at("laurent").items())
    v += LaurentScalar::monomial(Rational::from_string(c.get<std::string>()),
                                 std::stoi(e));
  return v;
}

}  // namespace

void InvariantCache::save_file(const std::string& path) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cache: cannot write " + path);
  for (auto& [k, rec] : map_) {
    auto& [key, value] = rec;
    json j;
    j["target"] = key.target;
    j["beta"] = key.beta.str();
    j["insertions"] = json::array();
    for (auto& [p, c] : key.insertions) j["insertions"].push_back({p, c});
    switch (key.twist) {
      case TwistTag::Untwisted: j["twist"] = "untwisted"; break;
      case TwistTag::TwO1: j["twist"] = "tw-O(1)"; break;
      case TwistTag::TwV: j["twist"] = "tw-V"; break;
    }
    j["value"] = laurent_to_json(value);
    out << j.dump() << "\n";
  }
}

void InvariantCache::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cache: cannot read " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("cache: malformed line " + std::to_string(lineno) +
                               ": " + e.what());
    }
    InvariantKey key;
    try {
      key.target = j.at("target").get<std::string>();
      std::string bs = j.at("beta").get<std::string>();
      auto semi = bs.find(';');
      key.beta.fiber = std::stol(bs.substr(0, semi));
      if (semi != std::string::npos) {
        std::istringstream rest(bs.substr(semi + 1));
        std::string tok;
        while (std::getline(rest, tok, ',')) key.beta.base.push_back(std::stol(tok));
      }
      for (auto& i : j.at("insertions"))
        key.insertions.push_back({i.at(0).get<int>(), i.at(1).get<std::string>()});
      auto tw = j.at("twist").get<std::string>();
      key.twist = tw == "untwisted" ? TwistTag::Untwisted
                  : tw == "tw-O(1)" ? TwistTag::TwO1
                                    : TwistTag::TwV;
      store(key, laurent_from_json(j.at("value")));
    } catch (const json::exception& e) {
      throw std::runtime_error("cache: malformed record at line " +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::vector<std::pair<std::string, LaurentScalar>> InvariantCache::records() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::pair<std::string, LaurentScalar>> out;
  for (auto& [k, rec] : map_) out.push_back({k, rec.second});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct OracleState {
  std::optional<GKMData> pn;
  TwistSpec o1_twist;
};

std::string class_text(const EqClass& c) { return c.str(); }

}  // namespace

Engine::Engine(TargetPtr target) : target_(std::move(target)) {}

void Engine::ensure_oracle() {
  if (oracle_state_) return;
  auto state = std::make_shared<OracleState>();
  int n = target_->rank() - 1;
  state->pn = gkm_projective_space(n);
  TwistSummand s;
  s.scaling = -1;
  for (int p = 0; p <= n; ++p) {
    std::vector<Rational> v(state->pn->lattice_rank, Rational(0));
    v[p] = Rational(-1);  // H-lift values
    s.value_at.push_back(v);
  }
  state->o1_twist = {s};
  oracle_state_ = state;
}

LaurentScalar Engine::twisted_series_bracket(const CurveClass& beta,
                                             const std::vector<PsiSeries>& legs,
                                             const CurveClass& ambient) {
  if (!target_->curve_less(beta, ambient) && !beta.is_zero())
    throw std::logic_error(
        "twisted_lookup: dependency is not strictly below the ambient class");
  if (table_only_ || target_->base()->size() != 1)
    throw UnresolvedDependency(
        "no provider for twisted invariant of " + target_->id() + " at class " +
        beta.str());
  // Content key; legs are unordered by permutation symmetry.
  std::vector<std::string> leg_keys;
  for (auto& leg : legs) {
    std::ostringstream os;
    for (int j = 0; j <= leg.truncation(); ++j)
      if (!leg.coeff(j).is_zero()) os << j << ":" << leg.coeff(j).str() << ";";
    leg_keys.push_back(os.str());
  }
  std::sort(leg_keys.begin(), leg_keys.end());
  std::string key = beta.str() + "#";
  for (auto& k : leg_keys) key += k + "@";
  if (auto it = series_bracket_memo_.find(key); it != series_bracket_memo_.end())
    return it->second;

  ensure_oracle();
  auto state = std::static_pointer_cast<OracleState>(oracle_state_);
  std::vector<OracleSeriesInsertion> sins;
  for (auto& leg : legs) {
    OracleSeriesInsertion si;
    for (int j = 0; j <= leg.truncation(); ++j) {
      const EqClass& c = leg.coeff(j);
      if (c.is_zero()) continue;
      for (int e = 0; e <= c.max_t_degree(); ++e) {
        if (c.coeff(e)[0].is_zero()) continue;
        OracleSeriesTerm term;
        term.psi = j;
        term.cls = OracleClass::divisor_monomial(0, 1, e);
        term.coef = c.coeff(e)[0];
        si.terms.push_back(std::move(term));
      }
    }
    sins.push_back(std::move(si));
  }
  LaurentScalar value = oracle_series_invariant(*state->pn, {beta.fiber}, sins,
                                                state->o1_twist);
  series_bracket_memo_[key] = value;
  return value;
}

bool Engine::dimension_gate(const CurveClass& beta,
                            const std::vector<Insertion>& ins) const {
  if (beta.fiber <= -1 + 1 - 1) return false;  // (β, O(1)) > -1 at genus 0
  long total = 0;
  for (auto& i : ins) total += i.psi + i.cls.homogeneous_degree() / 2;
  return total == target_->virtual_dim(static_cast<int>(ins.size()), beta) &&
         beta.fiber > -1;
}

int Engine::leading_rho(const CurveClass& beta) const {
  return static_cast<int>(1 + beta.fiber);  // 1 - g + (β, O(1)) at g = 0
}

InvariantKey Engine::make_key(const CurveClass& beta,
                              const std::vector<Insertion>& ins,
                              TwistTag tag) const {
  InvariantKey key;
  key.target = target_->id();
  key.beta = beta;
  for (auto& i : ins) key.insertions.push_back({i.psi, class_text(i.cls)});
  key.twist = tag;
  key.canonicalize();
  return key;
}

LaurentScalar Engine::twisted_lookup(const CurveClass& beta,
                                     const std::vector<BracketInsertion>& ins,
                                     const CurveClass& ambient) {
  if (!target_->curve_less(beta, ambient) && !beta.is_zero())
    throw std::logic_error(
        "twisted_lookup: dependency is not strictly below the ambient class");
  // Fast path: flat-encoded sorted key.
  std::vector<long> fast;
  fast.push_back(beta.fiber);
  for (long b : beta.base) fast.push_back(b);
  fast.push_back(-1);
  {
    std::vector<std::tuple<int, int, int>> sorted;
    for (auto& i : ins) sorted.push_back({i.psi, i.h_exp, i.base_idx});
    std::sort(sorted.begin(), sorted.end());
    for (auto& [p, e, b] : sorted) {
      fast.push_back(p);
      fast.push_back(e);
      fast.push_back(b);
    }
  }
  if (auto it = fast_twisted_.find(fast); it != fast_twisted_.end())
    return it->second;

  InvariantKey key;
  key.target = target_->id();
  key.beta = beta;
  for (auto& i : ins)
    key.insertions.push_back(
        {i.psi, "H^" + std::to_string(i.h_exp) + "*b" + std::to_string(i.base_idx)});
  key.twist = TwistTag::TwO1;
  key.canonicalize();
  if (auto hit = cache_.load(key)) {
    fast_twisted_[fast] = *hit;
    return *hit;
  }

  if (table_only_ || target_->base()->size() != 1) {
    std::string need = key.str();
    throw UnresolvedDependency(
        "no provider for twisted invariant; needed keys: " + need);
  }

  // Built-in provider: the moment-graph oracle on P^n with the O(1)-twist
  // of scaling character -1.
  ensure_oracle();
  auto state = std::static_pointer_cast<OracleState>(oracle_state_);
  std::vector<OracleInsertion> oins;
  for (auto& i : ins) {
    OracleInsertion o;
    o.psi = i.psi;
    o.cls = OracleClass::divisor_monomial(0, 1, i.h_exp);
    oins.push_back(o);
  }
  LaurentScalar value =
      oracle_invariant(*state->pn, {beta.fiber}, oins, state->o1_twist);
  cache_.store(key, value);
  fast_twisted_[fast] = value;
  return value;
}

Rational Engine::compute_invariant(const CurveClass& beta,
                                   const std::vector<Insertion>& ins) {
  if (!target_->effective(beta) || beta.is_zero())
    throw std::domain_error("compute_invariant: class must be effective nonzero");
  if (!dimension_gate(beta, ins))
    throw std::domain_error(
        "compute_invariant: insertions do not match the virtual dimension");

  auto key = make_key(beta, ins, TwistTag::Untwisted);
  if (auto hit = cache_.load(key)) {
    if (!hit->lambda_free())
      throw std::runtime_error("cached untwisted value is not λ-free");
    return hit->constant_part();
  }

  auto graphs = enumerate_graphs(*target_, beta, static_cast<int>(ins.size()));
  InfinityBracketFn provider = [&](const TargetModel&, const CurveClass& b,
                                   const std::vector<PsiSeries>& legs) {
    return twisted_series_bracket(b, legs, beta);
  };

  breakdown_.clear();
  LaurentScalar graph_sum;
  for (auto& g : graphs) {
    if (g.is_gamma0()) continue;
    LaurentScalar v = evaluate_graph(*target_, g, ins, provider);
    breakdown_.push_back({g.dump_line(), v});
    graph_sum += v;
  }

  // 0 = U·(-λ)^{-ρ} + Σ_{Γ≠Γ₀}, hence U = -(-λ)^ρ · Σ.
  int rho = leading_rho(beta);
  LaurentScalar factor =
      LaurentScalar::monomial(Rational(rho % 2 == 0 ? -1 : 1), rho);
  LaurentScalar solved = graph_sum * factor;
  if (!solved.lambda_free()) {
    std::ostringstream os;
    os << "compute_invariant: solved value has a λ-residue: " << solved.str()
       << "\nper-graph breakdown:\n";
    for (auto& b : breakdown_) os << "  " << b.graph << " -> " << b.value.str() << "\n";
    throw std::runtime_error(os.str());
  }
  cache_.store(key, solved);
  return solved.constant_part();
}

}  // namespace pbgw
