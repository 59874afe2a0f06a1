#include "pbgw/insertions.hpp"

#include <cctype>
#include <sstream>

namespace pbgw {

namespace {

struct Lexer {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool eat_word(const std::string& w) {
    skip_ws();
    if (s.compare(pos, w.size(), w) == 0) {
      pos += w.size();
      return true;
    }
    return false;
  }
  int integer() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw ParseError("expected an integer", start);
    return std::stoi(s.substr(start, pos - start));
  }
  std::string name() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && s[pos] != ']') ++pos;
    if (pos == s.size()) throw ParseError("unterminated basis name", start);
    return s.substr(start, pos - start);
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
};

EqClass parse_atom(const TargetModel& t, Lexer& lx) {
  lx.skip_ws();
  size_t here = lx.pos;
  if (lx.eat('1')) return EqClass::unit(t.fiber_ctx());
  if (lx.eat_word("H")) {
    int e = 1;
    if (lx.eat('^')) e = lx.integer();
    return EqClass::generator(t.fiber_ctx()).pow(static_cast<unsigned>(e));
  }
  if (lx.eat('[')) {
    std::string nm = lx.name();
    if (!lx.eat(']')) throw ParseError("expected ']'", lx.pos);
    int idx = t.base()->index_of(nm);
    if (idx < 0) throw ParseError("unknown basis name \"" + nm + "\"", here);
    EqClass cls =
        EqClass::base_element(t.fiber_ctx(), t.base()->basis_class(idx));
    if (lx.eat('^')) {
      int e = lx.integer();
      cls = cls.pow(static_cast<unsigned>(e));
    }
    return cls;
  }
  throw ParseError("expected an atom (H, [name] or 1)", here);
}

}  // namespace

std::vector<Insertion> parse_insertions(const TargetModel& t,
                                        const std::string& text) {
  Lexer lx{text};
  std::vector<Insertion> out;
  if (lx.done()) return out;
  while (true) {
    Insertion ins;
    if (lx.eat_word("psi")) {
      if (!lx.eat('^')) throw ParseError("expected '^' after psi", lx.pos);
      ins.psi = lx.integer();
    }
    EqClass cls = parse_atom(t, lx);
    while (lx.eat('*')) cls *= parse_atom(t, lx);
    ins.cls = cls;
    out.push_back(std::move(ins));
    if (lx.eat(',')) continue;
    if (lx.done()) break;
    throw ParseError("unexpected trailing input", lx.pos);
  }
  return out;
}

std::string print_insertions(const TargetModel& t,
                             const std::vector<Insertion>& ins) {
  std::ostringstream os;
  for (size_t i = 0; i < ins.size(); ++i) {
    if (i) os << ", ";
    if (ins[i].psi > 0) os << "psi^" << ins[i].psi << " ";
    // Print the class monomially when possible.
    const EqClass& c = ins[i].cls;
    bool emitted = false;
    for (int j = 0; j <= c.max_t_degree(); ++j)
      for (int b = 0; b < t.base()->size(); ++b) {
        if (c.coeff(j)[b].is_zero()) continue;
        if (emitted)
          throw std::invalid_argument("print_insertions: class is not a monomial");
        LaurentScalar coef = c.coeff(j)[b];
        if (coef != LaurentScalar(1))
          throw std::invalid_argument("print_insertions: non-unit coefficient");
        if (j == 0 && b == 0) {
          os << "1";
        } else {
          bool star = false;
          if (j > 0) {
            os << "H";
            if (j > 1) os << "^" << j;
            star = true;
          }
          if (b > 0) {
            if (star) os << "*";
            os << "[" << t.base()->basis_name(b) << "]";
          }
        }
        emitted = true;
      }
    if (!emitted) os << "1";
  }
  return os.str();
}

}  // namespace pbgw
