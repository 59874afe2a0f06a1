#include "pbgw/eq_class.hpp"

#include <sstream>
#include <stdexcept>

namespace pbgw {

bool RingContext::same_as(const RingContext& o) const {
  if (this == &o) return true;
  if (kind != o.kind || relation_degree != o.relation_degree) return false;
  if (base.get() != o.base.get()) return false;
  for (int j = 0; j < relation_degree; ++j)
    if (relation[j] != o.relation[j]) return false;
  return true;
}

namespace {

void require_same(const RingCtxPtr& a, const RingCtxPtr& b) {
  if (!a || !b) throw std::invalid_argument("EqClass: missing ring context");
  if (a.get() == b.get()) return;
  if (!a->same_as(*b))
    throw std::invalid_argument("EqClass: operands live in different rings");
}

}  // namespace

EqClass::EqClass(RingCtxPtr ctx) : ctx_(std::move(ctx)) {
  c_.assign(ctx_->relation_degree, ctx_->base->zero());
}

EqClass::EqClass(RingCtxPtr ctx, std::vector<BaseVec> coeffs)
    : ctx_(std::move(ctx)), c_(std::move(coeffs)) {
  reduce();
}

EqClass EqClass::unit(RingCtxPtr ctx) {
  EqClass e(ctx);
  e.c_[0] = ctx->base->unit();
  return e;
}

EqClass EqClass::scalar(RingCtxPtr ctx, const LaurentScalar& s) {
  EqClass e(ctx);
  e.c_[0] = ctx->base->scale(ctx->base->unit(), s);
  return e;
}

EqClass EqClass::generator(RingCtxPtr ctx) {
  std::vector<BaseVec> c(std::max(2, ctx->relation_degree), ctx->base->zero());
  c[1] = ctx->base->unit();
  return EqClass(ctx, std::move(c));
}

EqClass EqClass::base_element(RingCtxPtr ctx, const BaseVec& v) {
  EqClass e(ctx);
  e.c_[0] = v;
  return e;
}

EqClass EqClass::lambda(RingCtxPtr ctx, int exp) {
  return scalar(ctx, LaurentScalar::lambda(exp));
}

bool EqClass::is_zero() const {
  for (auto& v : c_)
    if (!BaseRing::is_zero(v)) return false;
  return true;
}

bool EqClass::lambda_free() const {
  for (auto& v : c_)
    for (auto& s : v)
      if (!s.lambda_free()) return false;
  return true;
}

int EqClass::max_t_degree() const {
  for (int j = static_cast<int>(c_.size()) - 1; j >= 0; --j)
    if (!BaseRing::is_zero(c_[j])) return j;
  return -1;
}

LaurentScalar EqClass::as_scalar() const {
  for (int j = 1; j < static_cast<int>(c_.size()); ++j)
    if (!BaseRing::is_zero(c_[j]))
      throw std::domain_error("EqClass: not a scalar (positive t-degree)");
  auto& v = c_[0];
  for (size_t i = 1; i < v.size(); ++i)
    if (!v[i].is_zero())
      throw std::domain_error("EqClass: not a scalar (base part)");
  return v[0];
}

int EqClass::homogeneous_degree() const {
  int deg = -1;
  for (int j = 0; j < static_cast<int>(c_.size()); ++j)
    for (int i = 0; i < ctx_->base->size(); ++i) {
      if (c_[j][i].is_zero()) continue;
      int d = 2 * j + ctx_->base->degree(i);
      if (deg == -1) deg = d;
      else if (deg != d)
        throw std::domain_error("EqClass: not homogeneous");
    }
  return deg < 0 ? 0 : deg;
}

EqClass EqClass::operator-() const {
  EqClass r(*this);
  for (auto& v : r.c_)
    for (auto& s : v) s = -s;
  return r;
}

EqClass operator+(const EqClass& a, const EqClass& b) {
  require_same(a.ctx_, b.ctx_);
  EqClass r(a.ctx_);
  for (size_t j = 0; j < r.c_.size(); ++j)
    r.c_[j] = a.ctx_->base->add(a.c_[j], b.c_[j]);
  return r;
}

EqClass operator-(const EqClass& a, const EqClass& b) {
  require_same(a.ctx_, b.ctx_);
  EqClass r(a.ctx_);
  for (size_t j = 0; j < r.c_.size(); ++j)
    r.c_[j] = a.ctx_->base->sub(a.c_[j], b.c_[j]);
  return r;
}

EqClass operator*(const EqClass& a, const EqClass& b) {
  require_same(a.ctx_, b.ctx_);
  int d = a.ctx_->relation_degree;
  std::vector<BaseVec> prod(2 * d - 1, a.ctx_->base->zero());
  for (int i = 0; i < d; ++i) {
    if (BaseRing::is_zero(a.c_[i])) continue;
    for (int j = 0; j < d; ++j) {
      if (BaseRing::is_zero(b.c_[j])) continue;
      prod[i + j] = a.ctx_->base->add(prod[i + j],
                                      a.ctx_->base->mul(a.c_[i], b.c_[j]));
    }
  }
  return EqClass(a.ctx_, std::move(prod));
}

EqClass EqClass::scaled(const LaurentScalar& s) const {
  EqClass r(*this);
  for (auto& v : r.c_) v = ctx_->base->scale(v, s);
  return r;
}

EqClass EqClass::pow(unsigned e) const {
  EqClass r = unit(ctx_), b = *this;
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return r;
}

bool operator==(const EqClass& a, const EqClass& b) {
  require_same(a.ctx_, b.ctx_);
  for (size_t j = 0; j < a.c_.size(); ++j)
    if (a.c_[j] != b.c_[j]) return false;
  return true;
}

// Long division by the stored monic relation; idempotent on reduced input.
void EqClass::reduce() {
  int d = ctx_->relation_degree;
  if (static_cast<int>(c_.size()) < d) c_.resize(d, ctx_->base->zero());
  for (int j = static_cast<int>(c_.size()) - 1; j >= d; --j) {
    if (BaseRing::is_zero(c_[j])) continue;
    BaseVec lead = c_[j];
    c_[j] = ctx_->base->zero();
    // t^j = t^{j-d} · t^d = -t^{j-d} Σ rel[i] t^i
    for (int i = 0; i < d; ++i) {
      if (BaseRing::is_zero(ctx_->relation[i])) continue;
      BaseVec term = ctx_->base->mul(lead, ctx_->relation[i]);
      c_[j - d + i] = ctx_->base->sub(c_[j - d + i], term);
    }
  }
  c_.resize(d);
}

EqClass EqClass::invert() const {
  // Split a = u·(1 + n) with u the λ-monomial degree-0 part; n is nilpotent
  // exactly when positive-degree classes are (λ-free relation rings).
  LaurentScalar u = c_[0].empty() ? LaurentScalar() : c_[0][0];
  if (u.is_zero())
    throw std::domain_error("EqClass: degree-0 part vanishes, not invertible");
  if (!u.is_monomial())
    throw std::domain_error("EqClass: degree-0 part is not a λ-monomial");
  LaurentScalar u_inv = u.invert_monomial();
  EqClass n = scaled(u_inv) - unit(ctx_);
  EqClass sum = unit(ctx_);
  EqClass power = unit(ctx_);
  int bound = ctx_->nilpotency_bound();
  for (int i = 1; i <= bound; ++i) {
    power *= n;
    if (power.is_zero()) break;
    if (i == bound)
      throw std::domain_error(
          "EqClass: geometric series does not terminate, not invertible");
    sum = (i % 2 == 1) ? sum - power : sum + power;
  }
  return sum.scaled(u_inv);
}

std::string EqClass::str() const {
  std::ostringstream os;
  bool any = false;
  for (int j = 0; j < static_cast<int>(c_.size()); ++j) {
    for (int i = 0; i < ctx_->base->size(); ++i) {
      if (c_[j][i].is_zero()) continue;
      if (any) os << " + ";
      any = true;
      os << "(" << c_[j][i].str() << ")";
      if (i != 0) os << "*" << ctx_->base->basis_name(i);
      if (j == 1) os << "*" << ctx_->var;
      else if (j > 1) os << "*" << ctx_->var << "^" << j;
    }
  }
  if (!any) return "0";
  return os.str();
}

// ---------------------------------------------------------------------------
// Context factories

RingCtxPtr make_base_ctx(std::shared_ptr<const BaseRing> base) {
  auto ctx = std::make_shared<RingContext>();
  ctx->base = std::move(base);
  ctx->kind = RingContext::Kind::Base;
  ctx->relation_degree = 1;
  ctx->relation = {ctx->base->zero()};
  ctx->lambda_free_relation = true;
  ctx->var = "t";
  return ctx;
}

namespace {

std::vector<BaseVec> chern_to_vecs(const BaseRing& base, int rank,
                                   const std::vector<std::vector<Rational>>& chern) {
  if (static_cast<int>(chern.size()) != rank)
    throw std::invalid_argument("chern classes: expected one vector per c_i");
  std::vector<BaseVec> out;
  for (auto& c : chern) out.push_back(base.from_rationals(c));
  return out;
}

}  // namespace

RingCtxPtr make_fiber_ctx(std::shared_ptr<const BaseRing> base, int rank,
                          const std::vector<std::vector<Rational>>& chern) {
  auto cs = chern_to_vecs(*base, rank, chern);
  auto ctx = std::make_shared<RingContext>();
  ctx->base = std::move(base);
  ctx->kind = RingContext::Kind::Fiber;
  ctx->relation_degree = rank;
  // H^r + c1 H^{r-1} + ... + cr = 0, stored low to high.
  ctx->relation.assign(rank, ctx->base->zero());
  for (int i = 1; i <= rank; ++i) ctx->relation[rank - i] = cs[i - 1];
  ctx->lambda_free_relation = true;
  ctx->var = "H";
  return ctx;
}

RingCtxPtr make_master_ctx(std::shared_ptr<const BaseRing> base, int rank,
                           const std::vector<std::vector<Rational>>& chern) {
  auto cs = chern_to_vecs(*base, rank, chern);
  auto ctx = std::make_shared<RingContext>();
  ctx->base = std::move(base);
  ctx->kind = RingContext::Kind::Master;
  ctx->relation_degree = rank + 1;
  // (h^r + c1 h^{r-1} + ... + cr)(h - λ) = 0. Expand:
  // h^{r+1} + Σ_{i=1}^{r} (c_i - λ c_{i-1}) h^{r+1-i} - λ c_r, with c_0 = 1.
  auto& B = *ctx->base;
  LaurentScalar neg_lambda = LaurentScalar::monomial(Rational(-1), 1);
  std::vector<BaseVec> rel(rank + 1, B.zero());
  std::vector<BaseVec> c_full;  // c_0 .. c_r
  c_full.push_back(B.unit());
  for (auto& c : cs) c_full.push_back(c);
  for (int i = 1; i <= rank; ++i) {
    BaseVec v = B.add(c_full[i], B.scale(c_full[i - 1], neg_lambda));
    rel[rank + 1 - i] = v;
  }
  rel[0] = B.scale(c_full[rank], neg_lambda);
  ctx->relation = std::move(rel);
  ctx->lambda_free_relation = false;
  ctx->var = "h";
  return ctx;
}

EqClass chern_poly_eval(int rank, const std::vector<std::vector<Rational>>& chern,
                        const EqClass& x) {
  auto& ctx = x.ctx();
  auto cs = chern_to_vecs(*ctx->base, rank, chern);
  EqClass acc = x.pow(static_cast<unsigned>(rank));
  for (int i = 1; i <= rank; ++i) {
    EqClass term = EqClass::base_element(ctx, cs[i - 1]);
    if (rank - i > 0) term *= x.pow(static_cast<unsigned>(rank - i));
    acc += term;
  }
  return acc;
}

EqClass restrict_zero(const EqClass& a, const RingCtxPtr& base_ctx) {
  if (a.ctx()->kind != RingContext::Kind::Master)
    throw std::invalid_argument("restrict_zero: expected a master-ring class");
  EqClass out(base_ctx);
  for (int j = 0; j <= a.max_t_degree(); ++j) {
    EqClass term = EqClass::base_element(base_ctx, a.coeff(j));
    out += term.scaled(LaurentScalar::lambda(j));
  }
  return out;
}

EqClass restrict_infinity(const EqClass& a, const RingCtxPtr& fiber_ctx) {
  if (a.ctx()->kind != RingContext::Kind::Master)
    throw std::invalid_argument("restrict_infinity: expected a master-ring class");
  EqClass h = EqClass::generator(fiber_ctx);
  EqClass out(fiber_ctx);
  for (int j = 0; j <= a.max_t_degree(); ++j) {
    EqClass term = EqClass::base_element(fiber_ctx, a.coeff(j));
    if (j > 0) term *= h.pow(static_cast<unsigned>(j));
    out += term;
  }
  return out;
}

BaseVec fiber_integrate(const EqClass& a) {
  auto& ctx = a.ctx();
  if (ctx->kind != RingContext::Kind::Fiber)
    throw std::invalid_argument("fiber_integrate: expected a fiber-ring class");
  // Relation-reduced representatives make π_* coefficient extraction at
  // H^{r-1}; this agrees with the Segre-class formula.
  return a.coeff(ctx->relation_degree - 1);
}

LaurentScalar integrate_total(const EqClass& a) {
  auto& ctx = a.ctx();
  if (ctx->kind == RingContext::Kind::Fiber)
    return ctx->base->integral(fiber_integrate(a));
  if (ctx->kind == RingContext::Kind::Base)
    return ctx->base->integral(a.coeff(0));
  throw std::invalid_argument("integrate_total: master-ring classes not supported");
}

}  // namespace pbgw
