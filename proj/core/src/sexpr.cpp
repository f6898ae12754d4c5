#include "peq/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace peq {

namespace {

void emit_lin(std::ostringstream& out, const LinExpr& lin) {
  std::vector<std::pair<VarInstance, Int>> terms;
  terms.reserve(lin.terms.size());
  for (const auto& [v, c] : lin.terms)
    terms.push_back({var_info(v), c});
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  out << '(';
  for (const auto& [inst, c] : terms) {
    if (inst.copy != CopyKind::Plain)
      throw Error(Error::Kind::Validation,
                  "only plain variable copies serialize");
    out << '(' << c << ' ' << inst.base << ' ' << inst.side << ") ";
  }
  out << lin.k << ')';
}

void emit(std::ostringstream& out, const Fml& f) {
  switch (f.kind()) {
  case FKind::True:
    out << "true";
    return;
  case FKind::False:
    out << "false";
    return;
  case FKind::Atom:
    out << '(' << (f.rel() == Rel::Le ? "<=" : f.rel() == Rel::Eq ? "=" : "!=")
        << ' ';
    emit_lin(out, f.lin());
    out << ')';
    return;
  case FKind::And:
  case FKind::Or:
    out << (f.kind() == FKind::And ? "(and" : "(or");
    for (const Fml& kid : f.kids()) {
      out << ' ';
      emit(out, kid);
    }
    out << ')';
    return;
  }
  throw Error(Error::Kind::Internal, "bad formula kind");
}

struct Scanner {
  const std::string& src;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Error::Kind::Parse,
                "sexpr offset " + std::to_string(pos) + ": " + what);
  }

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos == src.size();
  }

  char peek() {
    skip_ws();
    if (pos == src.size())
      fail("unexpected end of input");
    return src[pos];
  }

  void expect(char c) {
    if (peek() != c)
      fail(std::string("expected '") + c + "'");
    ++pos;
  }

  std::string word() {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
           src[pos] != '(' && src[pos] != ')')
      ++pos;
    if (pos == start)
      fail("expected a word");
    return src.substr(start, pos - start);
  }

  Int integer() {
    std::string w = word();
    size_t i = 0;
    bool neg = false;
    if (i < w.size() && (w[i] == '-' || w[i] == '+')) {
      neg = w[i] == '-';
      ++i;
    }
    if (i == w.size())
      fail("expected an integer");
    Int v = 0;
    for (; i < w.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(w[i])))
        fail("expected an integer, got '" + w + "'");
      v = v * 10 + (w[i] - '0');
    }
    return neg ? Int(-v) : v;
  }

  LinExpr lin() {
    expect('(');
    LinExpr e;
    for (;;) {
      if (peek() == '(') {
        ++pos;
        Int c = integer();
        std::string base = word();
        if (base.empty() || std::isdigit(static_cast<unsigned char>(base[0])))
          fail("variable names must not start with a digit");
        Int side_i = integer();
        if (side_i < -1 || side_i > 1000)
          fail("variable side out of range");
        expect(')');
        VarId v = intern_var(base, static_cast<int>(side_i), CopyKind::Plain);
        Int& slot = e.terms[v];
        slot += c;
        if (slot == 0)
          e.terms.erase(v);
        continue;
      }
      e.k = integer();
      expect(')');
      return e;
    }
  }

  Fml formula() {
    if (peek() != '(') {
      std::string w = word();
      if (w == "true")
        return f_true();
      if (w == "false")
        return f_false();
      fail("expected a formula, got '" + w + "'");
    }
    ++pos;
    std::string head = word();
    if (head == "and" || head == "or") {
      FmlVec kids;
      while (peek() != ')')
        kids.push_back(formula());
      ++pos;
      return head == "and" ? f_and(std::move(kids)) : f_or(std::move(kids));
    }
    if (head == "not") {
      Fml inner = formula();
      expect(')');
      return f_not(inner);
    }
    Rel rel;
    if (head == "<=")
      rel = Rel::Le;
    else if (head == "=")
      rel = Rel::Eq;
    else if (head == "!=")
      rel = Rel::Ne;
    else
      fail("unknown operator '" + head + "'");
    LinExpr e = lin();
    expect(')');
    return f_atom(rel, std::move(e));
  }
};

} // namespace

std::string to_sexpr(const Fml& f) {
  std::ostringstream out;
  emit(out, f);
  return out.str();
}

Fml parse_sexpr(const std::string& text) {
  Scanner s{text};
  Fml f = s.formula();
  if (!s.at_end())
    s.fail("trailing input after formula");
  return f;
}

} // namespace peq
