#include "peq/encode.hpp"

#include <algorithm>

namespace peq {

namespace {

struct Lowering {
  const Program& prog;
  int side;
  std::string edge_tag;
  uint32_t next_aux = 0;
  FmlVec constraints;

  VarId plain(const std::string& base) const {
    return intern_var(base, side, CopyKind::Plain);
  }

  VarId primed(const std::string& base) const {
    return intern_var(base, side, CopyKind::Primed);
  }

  // linear view of e over plain copies, pushing division constraints
  LinExpr lower(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Const:
      return LinExpr::constant(e.value);
    case Expr::Kind::Var:
      return LinExpr::var(plain(e.var));
    case Expr::Kind::Add:
      return lower(*e.lhs) + lower(*e.rhs);
    case Expr::Kind::Sub:
      return lower(*e.lhs) - lower(*e.rhs);
    case Expr::Kind::Mul:
      return e.value * lower(*e.lhs);
    case Expr::Kind::Div:
    case Expr::Kind::Mod: {
      LinExpr u = lower(*e.lhs);
      std::string tag = edge_tag + "_" + std::to_string(next_aux++);
      VarId q = primed("$q" + tag);
      VarId r = primed("$r" + tag);
      // u = d*q + r with 0 <= r <= d - 1
      LinExpr defining = u - e.value * LinExpr::var(q) - LinExpr::var(r);
      constraints.push_back(f_atom(Rel::Eq, std::move(defining)));
      constraints.push_back(f_atom(Rel::Le, LinExpr::var(r, -1)));
      LinExpr upper = LinExpr::var(r);
      upper.k = 1 - e.value;
      constraints.push_back(f_atom(Rel::Le, std::move(upper)));
      return e.kind == Expr::Kind::Div ? LinExpr::var(q) : LinExpr::var(r);
    }
    }
    throw Error(Error::Kind::Internal, "bad expression kind");
  }
};

std::optional<VarId> map_step_var(VarId v, int side, const std::string& pre,
                                  const std::string& post) {
  const VarInstance& inst = var_info(v);
  if (inst.copy == CopyKind::Plain)
    return intern_var(inst.base, inst.side, CopyKind::Path, pre);
  if (inst.copy == CopyKind::Primed)
    return intern_var(inst.base, inst.side, CopyKind::Path, post);
  (void)side;
  throw Error(Error::Kind::Internal, "step relations hold plain and primed only");
}

} // namespace

std::string path_state_key(int side, const Path& p, size_t prefix_len) {
  if (prefix_len < 1 || prefix_len > p.size())
    throw Error(Error::Kind::Internal, "prefix length out of range");
  Path prefix{p.prog,
              {p.locs.begin(), p.locs.begin() + static_cast<long>(prefix_len)}};
  return path_key(side, prefix);
}

Fml step_relation(const Program& prog, const Edge& edge, int side) {
  Lowering lo{prog, side,
              prog.loc_name(edge.src) + "." + prog.loc_name(edge.dst), 0, {}};
  FmlVec parts;
  const Instr& instr = edge.instr;
  const std::string* assigned = nullptr;
  switch (instr.kind) {
  case Instr::Kind::Assume:
    parts.push_back(f_atom(instr.rel, lo.lower(*instr.expr)));
    break;
  case Instr::Kind::Assign: {
    LinExpr rhs = lo.lower(*instr.expr);
    rhs.add(LinExpr::var(lo.primed(instr.target)), -1);
    parts.push_back(f_atom(Rel::Eq, std::move(rhs)));
    assigned = &instr.target;
    break;
  }
  case Instr::Kind::Skip:
    break;
  }
  for (const std::string& v : prog.all_vars()) {
    if (assigned && v == *assigned)
      continue;
    parts.push_back(f_eq_var(lo.primed(v), lo.plain(v)));
  }
  for (Fml& c : lo.constraints)
    parts.push_back(std::move(c));
  return f_and(std::move(parts));
}

Fml step_at(const Path& p, int side, size_t pos) {
  if (pos < 1 || pos + 1 > p.size())
    throw Error(Error::Kind::Internal, "step position out of range");
  auto idx = p.prog->edge_between(p.locs[pos - 1], p.locs[pos]);
  if (!idx)
    throw Error(Error::Kind::Internal, "path uses a missing edge");
  Fml step = step_relation(*p.prog, p.prog->edges[*idx], side);
  std::string pre = path_state_key(side, p, pos);
  std::string post = path_state_key(side, p, pos + 1);
  return rename(step, [&](VarId v) { return map_step_var(v, side, pre, post); });
}

Fml steps_from(const Path& p, int side, size_t from_pos) {
  FmlVec parts;
  for (size_t pos = std::max<size_t>(from_pos, 1); pos < p.size(); ++pos)
    parts.push_back(step_at(p, side, pos));
  return f_and(std::move(parts));
}

Fml path_formula(const Path& p, int side) { return steps_from(p, side, 1); }

Fml params_eq_plain(const Program& p0, const Program& p1) {
  std::vector<VarId> a, b;
  for (const std::string& v : p0.params)
    a.push_back(intern_var(v, 0, CopyKind::Plain));
  for (const std::string& v : p1.params)
    b.push_back(intern_var(v, 1, CopyKind::Plain));
  return vec_eq(a, b);
}

Fml ret_eq_plain(const Program& p0, const Program& p1) {
  return f_eq_var(intern_var(p0.ret, 0, CopyKind::Plain),
                  intern_var(p1.ret, 1, CopyKind::Plain));
}

Fml ret_ne_plain(const Program& p0, const Program& p1) {
  return f_not(ret_eq_plain(p0, p1));
}

namespace {

Fml locals_zero(const Program& prog, int side, CopyKind copy,
                const std::string& key) {
  FmlVec parts;
  for (const std::string& v : prog.all_vars()) {
    if (std::find(prog.params.begin(), prog.params.end(), v) !=
        prog.params.end())
      continue;
    parts.push_back(f_atom(Rel::Eq, LinExpr::var(intern_var(v, side, copy, key))));
  }
  return f_and(std::move(parts));
}

} // namespace

Fml locals_zero_at(const Program& prog, int side, const std::string& key) {
  return locals_zero(prog, side, CopyKind::Path, key);
}

Fml locals_zero_plain(const Program& prog, int side) {
  return locals_zero(prog, side, CopyKind::Plain, "");
}

Fml plain_to_paths(const Fml& f, const std::string& key0,
                   const std::string& key1) {
  return rename(f, [&](VarId v) -> std::optional<VarId> {
    const VarInstance& inst = var_info(v);
    if (inst.copy != CopyKind::Plain || (inst.side != 0 && inst.side != 1))
      throw Error(Error::Kind::Internal,
                  "expected a formula over sided plain variables");
    return intern_var(inst.base, inst.side, CopyKind::Path,
                      inst.side == 0 ? key0 : key1);
  });
}

Fml paths_to_plain(const Fml& f, const std::string& key0,
                   const std::string& key1) {
  return rename(f, [&](VarId v) -> std::optional<VarId> {
    const VarInstance& inst = var_info(v);
    if (inst.copy != CopyKind::Path ||
        (inst.side == 0 ? inst.path_key != key0 : inst.path_key != key1) ||
        (inst.side != 0 && inst.side != 1))
      throw Error(Error::Kind::Internal,
                  "expected a formula over the two end copies");
    return intern_var(inst.base, inst.side, CopyKind::Plain);
  });
}

Fml plain_to_primed(const Fml& f, int side) {
  return rename(f, [&](VarId v) -> std::optional<VarId> {
    const VarInstance& inst = var_info(v);
    if (inst.copy != CopyKind::Plain)
      throw Error(Error::Kind::Internal,
                  "expected a formula over plain variables");
    if (inst.side != side)
      return std::nullopt;
    return intern_var(inst.base, inst.side, CopyKind::Primed);
  });
}

} // namespace peq
