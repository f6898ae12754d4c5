#include "peq/logic.hpp"

#include <boost/functional/hash.hpp>

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

namespace peq {

namespace {

struct Interner {
  std::mutex mu;
  std::map<VarInstance, VarId> ids;
  std::vector<VarInstance> insts;
};

Interner& interner() {
  static Interner in;
  return in;
}

void hash_mix(size_t& h, size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
}

size_t hash_int(const Int& x) {
  return boost::hash<Int>{}(x);
}

} // namespace

VarId intern_var(const VarInstance& inst) {
  Interner& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  auto it = in.ids.find(inst);
  if (it != in.ids.end())
    return it->second;
  VarId id = static_cast<VarId>(in.insts.size());
  in.insts.push_back(inst);
  in.ids.emplace(inst, id);
  return id;
}

VarId intern_var(const std::string& base, int side, CopyKind copy,
                 const std::string& path_key) {
  return intern_var(VarInstance{base, side, copy, path_key});
}

const VarInstance& var_info(VarId id) {
  Interner& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  if (id >= in.insts.size())
    throw Error(Error::Kind::Internal, "unknown variable id");
  return in.insts[id];
}

std::string var_display(VarId id) {
  const VarInstance& v = var_info(id);
  std::string s = v.base;
  if (v.copy == CopyKind::Primed)
    s += "'";
  if (v.side >= 0)
    s += "@" + std::to_string(v.side);
  if (v.copy == CopyKind::Path)
    s += "[" + v.path_key + "]";
  return s;
}

LinExpr LinExpr::constant(Int c) {
  LinExpr e;
  e.k = std::move(c);
  return e;
}

LinExpr LinExpr::var(VarId v, Int coeff) {
  LinExpr e;
  if (coeff != 0)
    e.terms.emplace(v, std::move(coeff));
  return e;
}

LinExpr& LinExpr::add(const LinExpr& other, const Int& scale) {
  if (scale == 0)
    return *this;
  for (const auto& [v, c] : other.terms) {
    Int& slot = terms[v];
    slot += c * scale;
    if (slot == 0)
      terms.erase(v);
  }
  k += other.k * scale;
  return *this;
}

LinExpr LinExpr::negated() const {
  LinExpr e;
  for (const auto& [v, c] : terms)
    e.terms.emplace(v, -c);
  e.k = -k;
  return e;
}

Int LinExpr::eval(const std::map<VarId, Int>& store) const {
  Int acc = k;
  for (const auto& [v, c] : terms) {
    auto it = store.find(v);
    if (it == store.end())
      throw Error(Error::Kind::Eval, "no value for " + var_display(v));
    acc += c * it->second;
  }
  return acc;
}

LinExpr operator+(LinExpr a, const LinExpr& b) {
  a.add(b);
  return a;
}

LinExpr operator-(LinExpr a, const LinExpr& b) {
  a.add(b, -1);
  return a;
}

LinExpr operator*(const Int& c, LinExpr a) {
  if (c == 0)
    return LinExpr{};
  LinExpr e;
  for (auto& [v, coeff] : a.terms)
    e.terms.emplace(v, coeff * c);
  e.k = a.k * c;
  return e;
}

namespace {

std::strong_ordering cmp_int(const Int& a, const Int& b) {
  if (a < b)
    return std::strong_ordering::less;
  if (b < a)
    return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::strong_ordering cmp_lin(const LinExpr& a, const LinExpr& b) {
  auto ia = a.terms.begin();
  auto ib = b.terms.begin();
  for (; ia != a.terms.end() && ib != b.terms.end(); ++ia, ++ib) {
    if (ia->first != ib->first)
      return ia->first < ib->first ? std::strong_ordering::less
                                   : std::strong_ordering::greater;
    if (auto c = cmp_int(ia->second, ib->second); c != 0)
      return c;
  }
  if (ia != a.terms.end())
    return std::strong_ordering::greater;
  if (ib != b.terms.end())
    return std::strong_ordering::less;
  return cmp_int(a.k, b.k);
}

Fml make_bool(bool b);

size_t node_hash(const FNode& n) {
  size_t h = static_cast<size_t>(n.kind) * 0x811c9dc5u;
  if (n.kind == FKind::Atom) {
    hash_mix(h, static_cast<size_t>(n.rel));
    for (const auto& [v, c] : n.lin.terms) {
      hash_mix(h, v);
      hash_mix(h, hash_int(c));
    }
    hash_mix(h, hash_int(n.lin.k));
  } else {
    for (const Fml& kid : n.kids)
      hash_mix(h, kid.hash());
  }
  return h;
}

std::vector<VarId> merge_vocab(const FmlVec& kids) {
  std::set<VarId> all;
  for (const Fml& kid : kids)
    all.insert(kid.vocab().begin(), kid.vocab().end());
  return std::vector<VarId>(all.begin(), all.end());
}

Fml finish_node(FNode n) {
  n.hash = node_hash(n);
  return Fml(std::make_shared<const FNode>(std::move(n)));
}

// Gcd of the absolute coefficient values; e.terms must be nonempty.
Int coeff_gcd(const LinExpr& e) {
  Int g = 0;
  for (const auto& [v, c] : e.terms) {
    (void)v;
    g = boost::multiprecision::gcd(g, abs(c));
    if (g == 1)
      break;
  }
  return g;
}

Fml junction(FKind kind, FmlVec kids) {
  const bool is_and = kind == FKind::And;
  FmlVec flat;
  for (Fml& kid : kids) {
    if (kid.kind() == FKind::True) {
      if (!is_and)
        return f_true();
      continue;
    }
    if (kid.kind() == FKind::False) {
      if (is_and)
        return f_false();
      continue;
    }
    if (kid.kind() == kind) {
      flat.insert(flat.end(), kid.kids().begin(), kid.kids().end());
    } else {
      flat.push_back(std::move(kid));
    }
  }
  std::sort(flat.begin(), flat.end(), fml_less);
  flat.erase(std::unique(flat.begin(), flat.end(),
                         [](const Fml& a, const Fml& b) { return fml_eq(a, b); }),
             flat.end());
  if (flat.empty())
    return make_bool(is_and);
  if (flat.size() == 1)
    return flat[0];
  FNode n;
  n.kind = kind;
  n.vocab = merge_vocab(flat);
  n.kids = std::move(flat);
  return finish_node(std::move(n));
}

Fml make_bool(bool b) {
  static const Fml t = [] {
    FNode n;
    n.kind = FKind::True;
    return finish_node(std::move(n));
  }();
  static const Fml f = [] {
    FNode n;
    n.kind = FKind::False;
    return finish_node(std::move(n));
  }();
  return b ? t : f;
}

} // namespace

Fml::Fml() : m_node(f_true().m_node) {}

Fml f_true() { return make_bool(true); }
Fml f_false() { return make_bool(false); }
Fml f_bool(bool b) { return make_bool(b); }

Fml f_atom(Rel rel, LinExpr e) {
  for (auto it = e.terms.begin(); it != e.terms.end();) {
    if (it->second == 0)
      it = e.terms.erase(it);
    else
      ++it;
  }
  if (e.terms.empty()) {
    switch (rel) {
    case Rel::Le: return make_bool(e.k <= 0);
    case Rel::Eq: return make_bool(e.k == 0);
    case Rel::Ne: return make_bool(e.k != 0);
    }
  }
  Int g = coeff_gcd(e);
  if (g > 1) {
    switch (rel) {
    case Rel::Le:
      // sum c/g * x <= floor(-k/g) once coefficients are integral
      for (auto& [v, c] : e.terms) {
        (void)v;
        c /= g;
      }
      e.k = ceil_div(e.k, g);
      break;
    case Rel::Eq:
      if (e.k % g != 0)
        return f_false();
      for (auto& [v, c] : e.terms) {
        (void)v;
        c /= g;
      }
      e.k /= g;
      break;
    case Rel::Ne:
      if (e.k % g != 0)
        return f_true();
      for (auto& [v, c] : e.terms) {
        (void)v;
        c /= g;
      }
      e.k /= g;
      break;
    }
  }
  if (rel != Rel::Le && e.terms.begin()->second < 0)
    e = e.negated();
  FNode n;
  n.kind = FKind::Atom;
  n.rel = rel;
  n.vocab.reserve(e.terms.size());
  for (const auto& [v, c] : e.terms) {
    (void)c;
    n.vocab.push_back(v);
  }
  n.lin = std::move(e);
  return finish_node(std::move(n));
}

Fml f_and(FmlVec kids) { return junction(FKind::And, std::move(kids)); }
Fml f_or(FmlVec kids) { return junction(FKind::Or, std::move(kids)); }

Fml f_and(const Fml& a, const Fml& b) { return f_and(FmlVec{a, b}); }
Fml f_or(const Fml& a, const Fml& b) { return f_or(FmlVec{a, b}); }

Fml f_not(const Fml& f) {
  switch (f.kind()) {
  case FKind::True:
    return f_false();
  case FKind::False:
    return f_true();
  case FKind::Atom:
    switch (f.rel()) {
    case Rel::Le: {
      // not (e <= 0) is e >= 1, i.e. -e + 1 <= 0
      LinExpr e = f.lin().negated();
      e.k += 1;
      return f_atom(Rel::Le, std::move(e));
    }
    case Rel::Eq:
      return f_atom(Rel::Ne, f.lin());
    case Rel::Ne:
      return f_atom(Rel::Eq, f.lin());
    }
    break;
  case FKind::And:
  case FKind::Or: {
    FmlVec flipped;
    flipped.reserve(f.kids().size());
    for (const Fml& kid : f.kids())
      flipped.push_back(f_not(kid));
    return f.kind() == FKind::And ? f_or(std::move(flipped))
                                  : f_and(std::move(flipped));
  }
  }
  throw Error(Error::Kind::Internal, "bad formula kind");
}

Fml f_eq_var(VarId a, VarId b) {
  return f_atom(Rel::Eq, LinExpr::var(a) - LinExpr::var(b));
}

Fml vec_eq(const std::vector<VarId>& as, const std::vector<VarId>& bs) {
  if (as.size() != bs.size())
    throw Error(Error::Kind::LengthMismatch,
                "variable vectors of size " + std::to_string(as.size()) +
                    " and " + std::to_string(bs.size()));
  FmlVec eqs;
  eqs.reserve(as.size());
  for (size_t i = 0; i < as.size(); ++i)
    eqs.push_back(f_eq_var(as[i], bs[i]));
  return f_and(std::move(eqs));
}

std::strong_ordering fml_cmp(const Fml& a, const Fml& b) {
  if (a.node() == b.node())
    return std::strong_ordering::equal;
  if (a.kind() != b.kind())
    return static_cast<int>(a.kind()) < static_cast<int>(b.kind())
               ? std::strong_ordering::less
               : std::strong_ordering::greater;
  switch (a.kind()) {
  case FKind::True:
  case FKind::False:
    return std::strong_ordering::equal;
  case FKind::Atom:
    if (a.rel() != b.rel())
      return static_cast<int>(a.rel()) < static_cast<int>(b.rel())
                 ? std::strong_ordering::less
                 : std::strong_ordering::greater;
    return cmp_lin(a.lin(), b.lin());
  case FKind::And:
  case FKind::Or: {
    const FmlVec& ka = a.kids();
    const FmlVec& kb = b.kids();
    if (ka.size() != kb.size())
      return ka.size() < kb.size() ? std::strong_ordering::less
                                   : std::strong_ordering::greater;
    for (size_t i = 0; i < ka.size(); ++i)
      if (auto c = fml_cmp(ka[i], kb[i]); c != 0)
        return c;
    return std::strong_ordering::equal;
  }
  }
  throw Error(Error::Kind::Internal, "bad formula kind");
}

bool fml_eq(const Fml& a, const Fml& b) {
  if (a.node() == b.node())
    return true;
  if (a.hash() != b.hash())
    return false;
  return fml_cmp(a, b) == 0;
}

bool fml_less(const Fml& a, const Fml& b) {
  return fml_cmp(a, b) < 0;
}

Fml rename(const Fml& f,
           const std::function<std::optional<VarId>(VarId)>& fn) {
  std::map<VarId, VarId> applied;
  std::set<VarId> targets;
  for (VarId v : f.vocab()) {
    VarId t = fn(v).value_or(v);
    applied.emplace(v, t);
    if (!targets.insert(t).second)
      throw Error(Error::Kind::NonInjectiveRename,
                  "two variables map to " + var_display(t));
  }
  std::function<Fml(const Fml&)> rec = [&](const Fml& g) -> Fml {
    switch (g.kind()) {
    case FKind::True:
    case FKind::False:
      return g;
    case FKind::Atom: {
      LinExpr e;
      e.k = g.lin().k;
      for (const auto& [v, c] : g.lin().terms)
        e.terms.emplace(applied.at(v), c);
      return f_atom(g.rel(), std::move(e));
    }
    case FKind::And:
    case FKind::Or: {
      FmlVec kids;
      kids.reserve(g.kids().size());
      for (const Fml& kid : g.kids())
        kids.push_back(rec(kid));
      return g.kind() == FKind::And ? f_and(std::move(kids))
                                    : f_or(std::move(kids));
    }
    }
    throw Error(Error::Kind::Internal, "bad formula kind");
  };
  return rec(f);
}

namespace {

bool eval_rec(const Fml& f, const std::map<VarId, Int>& store) {
  switch (f.kind()) {
  case FKind::True:
    return true;
  case FKind::False:
    return false;
  case FKind::Atom: {
    Int v = f.lin().eval(store);
    switch (f.rel()) {
    case Rel::Le: return v <= 0;
    case Rel::Eq: return v == 0;
    case Rel::Ne: return v != 0;
    }
    break;
  }
  case FKind::And:
    for (const Fml& kid : f.kids())
      if (!eval_rec(kid, store))
        return false;
    return true;
  case FKind::Or:
    for (const Fml& kid : f.kids())
      if (eval_rec(kid, store))
        return true;
    return false;
  }
  throw Error(Error::Kind::Internal, "bad formula kind");
}

} // namespace

bool eval(const Fml& f, const std::map<VarId, Int>& store) {
  for (VarId v : f.vocab())
    if (!store.count(v))
      throw Error(Error::Kind::Eval, "no value for " + var_display(v));
  return eval_rec(f, store);
}

std::string to_string(const LinExpr& e) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [v, c] : e.terms) {
    if (!first)
      out << " + ";
    first = false;
    if (c == 1)
      out << var_display(v);
    else if (c == -1)
      out << "-" << var_display(v);
    else
      out << c << "*" << var_display(v);
  }
  if (first) {
    out << e.k;
  } else if (e.k != 0) {
    out << " + " << e.k;
  }
  return out.str();
}

std::string to_string(const Fml& f) {
  switch (f.kind()) {
  case FKind::True:
    return "true";
  case FKind::False:
    return "false";
  case FKind::Atom: {
    const char* op = f.rel() == Rel::Le ? "<=" : f.rel() == Rel::Eq ? "==" : "!=";
    return "(" + to_string(f.lin()) + " " + op + " 0)";
  }
  case FKind::And:
  case FKind::Or: {
    std::string s = f.kind() == FKind::And ? "(and" : "(or";
    for (const Fml& kid : f.kids())
      s += " " + to_string(kid);
    return s + ")";
  }
  }
  throw Error(Error::Kind::Internal, "bad formula kind");
}

} // namespace peq
