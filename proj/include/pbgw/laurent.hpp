#pragma once

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pbgw/rational.hpp"

namespace pbgw {

/// Finitely supported Laurent polynomial in the equivariant parameter λ,
/// with exact rational coefficients. Zero coefficients are never stored.
class LaurentScalar {
public:
  LaurentScalar() = default;
  LaurentScalar(const Rational& c) { if (!c.is_zero()) c_[0] = c; }
  LaurentScalar(long n) : LaurentScalar(Rational(n)) {}

  static LaurentScalar monomial(const Rational& c, int exp) {
    LaurentScalar s;
    if (!c.is_zero()) s.c_[exp] = c;
    return s;
  }
  static LaurentScalar lambda(int exp = 1) { return monomial(Rational(1), exp); }

  bool is_zero() const { return c_.empty(); }
  bool lambda_free() const {
    return c_.empty() || (c_.size() == 1 && c_.begin()->first == 0);
  }
  bool is_monomial() const { return c_.size() == 1; }

  // Coefficient of λ^exp (zero if absent).
  Rational coeff(int exp) const {
    auto it = c_.find(exp);
    return it == c_.end() ? Rational(0) : it->second;
  }
  Rational constant_part() const { return coeff(0); }

  int min_exp() const { require_nonzero(); return c_.begin()->first; }
  int max_exp() const { require_nonzero(); return c_.rbegin()->first; }

  const std::map<int, Rational>& terms() const { return c_; }

  LaurentScalar operator-() const {
    LaurentScalar r;
    for (auto& [e, c] : c_) r.c_[e] = -c;
    return r;
  }
  LaurentScalar& operator+=(const LaurentScalar& o) {
    for (auto& [e, c] : o.c_) add_term(e, c);
    return *this;
  }
  LaurentScalar& operator-=(const LaurentScalar& o) {
    for (auto& [e, c] : o.c_) add_term(e, -c);
    return *this;
  }
  friend LaurentScalar operator+(LaurentScalar a, const LaurentScalar& b) { return a += b; }
  friend LaurentScalar operator-(LaurentScalar a, const LaurentScalar& b) { return a -= b; }
  friend LaurentScalar operator*(const LaurentScalar& a, const LaurentScalar& b) {
    LaurentScalar r;
    for (auto& [ea, ca] : a.c_)
      for (auto& [eb, cb] : b.c_) r.add_term(ea + eb, ca * cb);
    return r;
  }
  LaurentScalar& operator*=(const LaurentScalar& o) { return *this = *this * o; }

  LaurentScalar scaled(const Rational& k) const {
    LaurentScalar r;
    if (k.is_zero()) return r;
    for (auto& [e, c] : c_) r.c_[e] = c * k;
    return r;
  }

  LaurentScalar pow(unsigned e) const {
    LaurentScalar r(1), b = *this;
    while (e) {
      if (e & 1u) r *= b;
      b *= b;
      e >>= 1u;
    }
    return r;
  }

  // Inverse of a single-term Laurent monomial.
  LaurentScalar invert_monomial() const {
    if (c_.size() != 1)
      throw std::domain_error("LaurentScalar: not a monomial, cannot invert");
    auto& [e, c] = *c_.begin();
    return monomial(Rational(1) / c, -e);
  }

  friend bool operator==(const LaurentScalar& a, const LaurentScalar& b) {
    return a.c_ == b.c_;
  }
  friend bool operator!=(const LaurentScalar& a, const LaurentScalar& b) {
    return !(a == b);
  }

  // Terms sorted by ascending exponent, e.g. "-2λ^-2 + 3 + λ^2".
  std::string str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [e, c] : c_) {
      if (!first) {
        os << (c.sign() < 0 ? " - " : " + ");
        Rational a = c.sign() < 0 ? -c : c;
        print_term(os, a, e);
      } else {
        if (c.sign() < 0) {
          os << "-";
          print_term(os, -c, e);
        } else {
          print_term(os, c, e);
        }
        first = false;
      }
    }
    return os.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const LaurentScalar& s) {
    return os << s.str();
  }

private:
  static void print_term(std::ostream& os, const Rational& c, int e) {
    if (e == 0) { os << c.str(); return; }
    if (c != Rational(1)) os << c.str() << "*";
    os << "λ";
    if (e != 1) os << "^" << e;
  }
  void require_nonzero() const {
    if (c_.empty()) throw std::domain_error("LaurentScalar: zero has no support");
  }
  void add_term(int e, const Rational& c) {
    auto it = c_.find(e);
    if (it == c_.end()) {
      if (!c.is_zero()) c_[e] = c;
    } else {
      it->second += c;
      if (it->second.is_zero()) c_.erase(it);
    }
  }

  std::map<int, Rational> c_;
};

}  // namespace pbgw
