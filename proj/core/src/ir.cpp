#include "peq/ir.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace peq {

namespace {

ExprPtr make_expr(Expr e) {
  return std::make_shared<const Expr>(std::move(e));
}

} // namespace

ExprPtr Expr::constant(Int v) {
  Expr e;
  e.kind = Kind::Const;
  e.value = std::move(v);
  return make_expr(std::move(e));
}

ExprPtr Expr::variable(std::string name) {
  Expr e;
  e.kind = Kind::Var;
  e.var = std::move(name);
  return make_expr(std::move(e));
}

ExprPtr Expr::add(ExprPtr l, ExprPtr r) {
  Expr e;
  e.kind = Kind::Add;
  e.lhs = std::move(l);
  e.rhs = std::move(r);
  return make_expr(std::move(e));
}

ExprPtr Expr::sub(ExprPtr l, ExprPtr r) {
  Expr e;
  e.kind = Kind::Sub;
  e.lhs = std::move(l);
  e.rhs = std::move(r);
  return make_expr(std::move(e));
}

ExprPtr Expr::mul(Int coeff, ExprPtr sub) {
  Expr e;
  e.kind = Kind::Mul;
  e.value = std::move(coeff);
  e.lhs = std::move(sub);
  return make_expr(std::move(e));
}

ExprPtr Expr::div(ExprPtr sub, Int divisor) {
  Expr e;
  e.kind = Kind::Div;
  e.value = std::move(divisor);
  e.lhs = std::move(sub);
  return make_expr(std::move(e));
}

ExprPtr Expr::mod(ExprPtr sub, Int divisor) {
  Expr e;
  e.kind = Kind::Mod;
  e.value = std::move(divisor);
  e.lhs = std::move(sub);
  return make_expr(std::move(e));
}

Int eval_expr(const Expr& e, const std::map<std::string, Int>& store) {
  switch (e.kind) {
  case Expr::Kind::Const:
    return e.value;
  case Expr::Kind::Var: {
    auto it = store.find(e.var);
    if (it == store.end())
      throw Error(Error::Kind::Eval, "no value for variable " + e.var);
    return it->second;
  }
  case Expr::Kind::Add:
    return eval_expr(*e.lhs, store) + eval_expr(*e.rhs, store);
  case Expr::Kind::Sub:
    return eval_expr(*e.lhs, store) - eval_expr(*e.rhs, store);
  case Expr::Kind::Mul:
    return e.value * eval_expr(*e.lhs, store);
  case Expr::Kind::Div:
    return floor_div(eval_expr(*e.lhs, store), e.value);
  case Expr::Kind::Mod:
    return floor_mod(eval_expr(*e.lhs, store), e.value);
  }
  throw Error(Error::Kind::Internal, "bad expression kind");
}

void expr_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
  case Expr::Kind::Const:
    return;
  case Expr::Kind::Var:
    out.insert(e.var);
    return;
  case Expr::Kind::Add:
  case Expr::Kind::Sub:
    expr_vars(*e.lhs, out);
    expr_vars(*e.rhs, out);
    return;
  case Expr::Kind::Mul:
  case Expr::Kind::Div:
  case Expr::Kind::Mod:
    expr_vars(*e.lhs, out);
    return;
  }
}

std::string to_string(const Expr& e) {
  std::ostringstream out;
  switch (e.kind) {
  case Expr::Kind::Const:
    out << e.value;
    break;
  case Expr::Kind::Var:
    out << e.var;
    break;
  case Expr::Kind::Add:
    out << to_string(*e.lhs) << " + " << to_string(*e.rhs);
    break;
  case Expr::Kind::Sub:
    out << to_string(*e.lhs) << " - (" << to_string(*e.rhs) << ")";
    break;
  case Expr::Kind::Mul:
    out << e.value << "*(" << to_string(*e.lhs) << ")";
    break;
  case Expr::Kind::Div:
    out << "(" << to_string(*e.lhs) << " / " << e.value << ")";
    break;
  case Expr::Kind::Mod:
    out << "(" << to_string(*e.lhs) << " % " << e.value << ")";
    break;
  }
  return out.str();
}

Instr Instr::assume(ExprPtr e, Rel rel) {
  Instr i;
  i.kind = Kind::Assume;
  i.expr = std::move(e);
  i.rel = rel;
  return i;
}

Instr Instr::assign(std::string target, ExprPtr e) {
  Instr i;
  i.kind = Kind::Assign;
  i.target = std::move(target);
  i.expr = std::move(e);
  return i;
}

Instr Instr::skip() {
  return Instr{};
}

std::string to_string(const Instr& instr) {
  switch (instr.kind) {
  case Instr::Kind::Skip:
    return "skip";
  case Instr::Kind::Assign:
    return instr.target + " := " + to_string(*instr.expr);
  case Instr::Kind::Assume: {
    const char* op = instr.rel == Rel::Le ? "<=" : instr.rel == Rel::Eq ? "==" : "!=";
    return "assume " + to_string(*instr.expr) + " " + op + " 0";
  }
  }
  throw Error(Error::Kind::Internal, "bad instruction kind");
}

uint32_t Program::loc_index(const std::string& name) const {
  auto it = std::lower_bound(loc_names.begin(), loc_names.end(), name);
  if (it == loc_names.end() || *it != name)
    throw Error(Error::Kind::Validation, "unknown location " + name);
  return static_cast<uint32_t>(it - loc_names.begin());
}

std::optional<uint32_t> Program::edge_between(uint32_t src, uint32_t dst) const {
  auto it = m_edge_index.find({src, dst});
  if (it == m_edge_index.end())
    return std::nullopt;
  return it->second;
}

namespace {

void check_divisors(const Expr& e, const std::string& prog) {
  switch (e.kind) {
  case Expr::Kind::Div:
  case Expr::Kind::Mod:
    if (e.value <= 0)
      throw Error(Error::Kind::Validation,
                  prog + ": division literal must be positive");
    check_divisors(*e.lhs, prog);
    return;
  case Expr::Kind::Add:
  case Expr::Kind::Sub:
    check_divisors(*e.lhs, prog);
    check_divisors(*e.rhs, prog);
    return;
  case Expr::Kind::Mul:
    check_divisors(*e.lhs, prog);
    return;
  case Expr::Kind::Const:
  case Expr::Kind::Var:
    return;
  }
}

} // namespace

Program build_program(ProgramDraft draft) {
  Program p;
  p.name = draft.name;
  p.params = draft.params;
  p.locals = draft.locals;
  p.ret = draft.ret;

  if (p.ret.empty())
    throw Error(Error::Kind::Validation, p.name + ": missing return variable");

  std::set<std::string> vars;
  for (const std::string& v : p.params)
    if (!vars.insert(v).second)
      throw Error(Error::Kind::Validation, p.name + ": duplicate variable " + v);
  for (const std::string& v : p.locals)
    if (!vars.insert(v).second)
      throw Error(Error::Kind::Validation, p.name + ": duplicate variable " + v);
  for (const std::string& v : p.params)
    if (v == p.ret)
      throw Error(Error::Kind::Validation,
                  p.name + ": return variable " + v + " is a parameter");
  p.m_vars = p.params;
  p.m_vars.insert(p.m_vars.end(), p.locals.begin(), p.locals.end());
  if (!vars.count(p.ret)) {
    vars.insert(p.ret);
    p.m_vars.push_back(p.ret);
  }

  std::set<std::string> names{draft.init_name, draft.final_name};
  for (const auto& e : draft.edges) {
    names.insert(e.src);
    names.insert(e.dst);
  }
  if (draft.init_name.empty() || draft.final_name.empty())
    throw Error(Error::Kind::Validation,
                p.name + ": missing init or final location");
  p.loc_names.assign(names.begin(), names.end());
  p.init_loc = p.loc_index(draft.init_name);
  p.final_loc = p.loc_index(draft.final_name);

  p.out_edges.assign(p.loc_names.size(), {});
  for (const auto& de : draft.edges) {
    Edge e;
    e.src = p.loc_index(de.src);
    e.dst = p.loc_index(de.dst);
    e.instr = de.instr;
    if (e.instr.expr) {
      check_divisors(*e.instr.expr, p.name);
      std::set<std::string> used;
      expr_vars(*e.instr.expr, used);
      for (const std::string& v : used)
        if (!vars.count(v))
          throw Error(Error::Kind::Validation,
                      p.name + ": unknown variable " + v + " in " +
                          to_string(e.instr));
    }
    if (e.instr.kind == Instr::Kind::Assign && !vars.count(e.instr.target))
      throw Error(Error::Kind::Validation,
                  p.name + ": unknown assignment target " + e.instr.target);
    uint32_t idx = static_cast<uint32_t>(p.edges.size());
    if (!p.m_edge_index.emplace(std::make_pair(e.src, e.dst), idx).second)
      throw Error(Error::Kind::Validation,
                  p.name + ": duplicate edge " + de.src + " -> " + de.dst);
    p.edges.push_back(std::move(e));
    p.out_edges[p.edges.back().src].push_back(idx);
  }
  for (auto& outs : p.out_edges)
    std::sort(outs.begin(), outs.end(), [&](uint32_t a, uint32_t b) {
      return p.edges[a].dst < p.edges[b].dst;
    });

  if (!p.out_edges[p.final_loc].empty())
    throw Error(Error::Kind::Validation,
                p.name + ": final location has outgoing edges");

  // forward reachability from init
  std::vector<bool> reach(p.loc_names.size(), false);
  std::deque<uint32_t> queue{p.init_loc};
  reach[p.init_loc] = true;
  while (!queue.empty()) {
    uint32_t at = queue.front();
    queue.pop_front();
    for (uint32_t e : p.out_edges[at])
      if (!reach[p.edges[e].dst]) {
        reach[p.edges[e].dst] = true;
        queue.push_back(p.edges[e].dst);
      }
  }
  // backward reachability from final
  std::vector<bool> covers(p.loc_names.size(), false);
  covers[p.final_loc] = true;
  queue.push_back(p.final_loc);
  while (!queue.empty()) {
    uint32_t at = queue.front();
    queue.pop_front();
    for (size_t e = 0; e < p.edges.size(); ++e)
      if (p.edges[e].dst == at && !covers[p.edges[e].src]) {
        covers[p.edges[e].src] = true;
        queue.push_back(p.edges[e].src);
      }
  }
  for (uint32_t l = 0; l < p.loc_names.size(); ++l) {
    if (!reach[l])
      continue;
    if (l != p.final_loc && p.out_edges[l].empty())
      throw Error(Error::Kind::Validation,
                  p.name + ": location " + p.loc_names[l] + " has no outgoing edge");
    if (!covers[l])
      throw Error(Error::Kind::Validation,
                  p.name + ": location " + p.loc_names[l] +
                      " cannot reach the final location");
  }
  return p;
}

bool path_eq(const Path& a, const Path& b) {
  return a.locs == b.locs;
}

bool path_less(const Path& a, const Path& b) {
  if (a.locs.size() != b.locs.size())
    return a.locs.size() < b.locs.size();
  return a.locs < b.locs;
}

std::vector<Path> ext(const Path& p) {
  std::vector<Path> out;
  for (uint32_t e : p.prog->out_edges[p.tail()]) {
    Path q = p;
    q.locs.push_back(p.prog->edges[e].dst);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Path> prefixes(const Path& p) {
  std::vector<Path> out;
  for (size_t len = 1; len <= p.locs.size(); ++len) {
    Path q;
    q.prog = p.prog;
    q.locs.assign(p.locs.begin(), p.locs.begin() + len);
    out.push_back(std::move(q));
  }
  return out;
}

Path cmpl(const Path& p) {
  const Program& prog = *p.prog;
  uint32_t from = p.tail();
  if (from == prog.final_loc)
    return p;
  std::vector<int64_t> parent(prog.loc_names.size(), -1);
  std::deque<uint32_t> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    uint32_t at = queue.front();
    queue.pop_front();
    if (at == prog.final_loc)
      break;
    for (uint32_t e : prog.out_edges[at]) {
      uint32_t to = prog.edges[e].dst;
      if (parent[to] < 0) {
        parent[to] = at;
        queue.push_back(to);
      }
    }
  }
  if (parent[prog.final_loc] < 0)
    throw Error(Error::Kind::Internal,
                prog.name + ": no completion to the final location");
  std::vector<uint32_t> suffix;
  for (uint32_t at = prog.final_loc; at != from;
       at = static_cast<uint32_t>(parent[at]))
    suffix.push_back(at);
  Path out = p;
  out.locs.insert(out.locs.end(), suffix.rbegin(), suffix.rend());
  return out;
}

std::string path_names(const Path& p) {
  std::string s;
  for (size_t i = 0; i < p.locs.size(); ++i) {
    if (i)
      s += ".";
    s += p.prog->loc_name(p.locs[i]);
  }
  return s;
}

std::string path_key(int side, const Path& p) {
  return std::to_string(side) + ":" + path_names(p);
}

} // namespace peq
