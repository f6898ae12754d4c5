#include "peq/solver.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

namespace peq {

namespace {

// ---------------------------------------------------------------------
// provenance-tracking rows for equality elimination

struct WorkRow {
  LinExpr lin;
  Rel rel = Rel::Le;
  std::map<uint32_t, Rat> prov; // origin atom index -> multiplier
  FarkasPtr cut_origin;         // set on rounding-cut rows; prov unused
};

struct Elimination {
  VarId var;
  LinExpr rest; // var := rest, integral because pivots have coefficient 1
};

// Turns a provenance combination into leaf terms. mult scales the whole
// combination; equality origins decompose by sign, inequality origins
// must come out nonnegative.
void expand_prov(const std::vector<ConjAtom>& atoms,
                 const std::map<uint32_t, Rat>& prov, const Rat& mult,
                 std::map<std::pair<uint32_t, int>, Rat>& out) {
  for (const auto& [idx, lam] : prov) {
    Rat c = lam * mult;
    if (c == 0)
      continue;
    if (atoms[idx].rel == Rel::Le) {
      if (c < 0)
        throw Error(Error::Kind::Internal,
                    "negative multiplier on an inequality row");
      out[{idx, 0}] += c;
    } else if (c > 0) {
      out[{idx, +1}] += c;
    } else {
      out[{idx, -1}] += -c;
    }
  }
}

using CutTerms = std::map<FarkasPtr, Rat>;

std::shared_ptr<FarkasCert>
leaf_from_terms(std::map<std::pair<uint32_t, int>, Rat> atom_terms,
                std::vector<FarkasTerm> branch_terms = {},
                CutTerms cut_terms = {}) {
  auto leaf = std::make_shared<FarkasCert>();
  for (auto& [key, coeff] : atom_terms) {
    if (coeff == 0)
      continue;
    FarkasTerm t;
    t.from_branch = false;
    t.index = key.first;
    t.dir = key.second;
    t.coeff = std::move(coeff);
    leaf->mults.push_back(std::move(t));
  }
  for (FarkasTerm& t : branch_terms)
    if (t.coeff != 0)
      leaf->mults.push_back(std::move(t));
  for (auto& [cut, coeff] : cut_terms) {
    if (coeff == 0)
      continue;
    FarkasTerm t;
    t.coeff = std::move(coeff);
    t.cut = cut;
    leaf->mults.push_back(std::move(t));
  }
  return leaf;
}

struct PresolveOut {
  bool unsat = false;
  FarkasPtr cert;
  std::vector<WorkRow> rows;
  std::vector<Elimination> elims;
};

// Checks a row that lost all its variables; returns a certificate when
// the constant contradicts the relation, nullopt when the row is
// simply satisfied and can be dropped.
std::optional<FarkasPtr> fold_constant_row(const std::vector<ConjAtom>& atoms,
                                           const WorkRow& row) {
  bool violated = row.rel == Rel::Le ? row.lin.k > 0 : row.lin.k != 0;
  if (!violated)
    return std::nullopt;
  std::map<std::pair<uint32_t, int>, Rat> terms;
  // orient the combination so the constant comes out positive
  Rat mult = row.lin.k > 0 ? 1 : -1;
  expand_prov(atoms, row.prov, mult, terms);
  return leaf_from_terms(std::move(terms));
}

// Divides coefficients (and provenance) by their gcd. When an
// equality row's constant resists the division no integer point can
// satisfy it; the row's own combination is the refutation.
std::optional<FarkasPtr> normalize_row(const std::vector<ConjAtom>& atoms,
                                       WorkRow& row) {
  if (row.lin.terms.empty())
    return std::nullopt;
  Int g = 0;
  for (const auto& [v, c] : row.lin.terms) {
    (void)v;
    g = boost::multiprecision::gcd(g, c < 0 ? Int(-c) : c);
  }
  if (g <= 1)
    return std::nullopt;
  if (row.lin.k % g != 0) {
    if (row.rel != Rel::Eq)
      return std::nullopt;
    auto leaf = std::make_shared<FarkasCert>();
    leaf->kind = FarkasCert::Kind::Divides;
    std::map<std::pair<uint32_t, int>, Rat> terms;
    expand_prov(atoms, row.prov, 1, terms);
    for (auto& [key, coeff] : terms) {
      if (coeff == 0)
        continue;
      leaf->mults.push_back(
          FarkasTerm{false, key.first, key.second, std::move(coeff), nullptr});
    }
    return FarkasPtr(leaf);
  }
  for (auto& [v, c] : row.lin.terms) {
    (void)v;
    c /= g;
  }
  row.lin.k /= g;
  Rat inv = Rat(1) / Rat(g);
  for (auto& [idx, lam] : row.prov) {
    (void)idx;
    lam *= inv;
  }
  return std::nullopt;
}

PresolveOut presolve(const std::vector<ConjAtom>& atoms, uint32_t begin,
                     uint32_t end) {
  PresolveOut out;
  for (uint32_t i = begin; i < end; ++i) {
    WorkRow row;
    row.lin = atoms[i].lin;
    row.rel = atoms[i].rel;
    row.prov[i] = 1;
    if (row.lin.terms.empty()) {
      if (auto cert = fold_constant_row(atoms, row)) {
        out.unsat = true;
        out.cert = *cert;
        return out;
      }
      continue;
    }
    if (auto cert = normalize_row(atoms, row)) {
      out.unsat = true;
      out.cert = *cert;
      return out;
    }
    out.rows.push_back(std::move(row));
  }
  for (;;) {
    // first equality row with a unit coefficient, smallest variable
    size_t pick_row = out.rows.size();
    VarId pick_var = 0;
    Int pick_coeff;
    for (size_t r = 0; r < out.rows.size() && pick_row == out.rows.size(); ++r) {
      if (out.rows[r].rel != Rel::Eq)
        continue;
      for (const auto& [v, c] : out.rows[r].lin.terms) {
        if (c == 1 || c == -1) {
          pick_row = r;
          pick_var = v;
          pick_coeff = c;
          break;
        }
      }
    }
    if (pick_row == out.rows.size())
      break;
    WorkRow eq = std::move(out.rows[pick_row]);
    out.rows.erase(out.rows.begin() + pick_row);
    // c*x + rest = 0 becomes x := -c * rest
    LinExpr rest = eq.lin;
    rest.terms.erase(pick_var);
    Elimination elim;
    elim.var = pick_var;
    elim.rest = (-pick_coeff) * rest;
    out.elims.push_back(std::move(elim));
    for (size_t r = 0; r < out.rows.size();) {
      WorkRow& row = out.rows[r];
      auto it = row.lin.terms.find(pick_var);
      if (it == row.lin.terms.end()) {
        ++r;
        continue;
      }
      // row -= (d / c) * eq, with 1/c equal to c for unit coefficients
      Int scale = -(it->second * pick_coeff);
      row.lin.add(eq.lin, scale);
      for (const auto& [idx, lam] : eq.prov) {
        Rat& slot = row.prov[idx];
        slot += lam * Rat(scale);
        if (slot == 0)
          row.prov.erase(idx);
      }
      if (row.lin.terms.empty()) {
        if (auto cert = fold_constant_row(atoms, row)) {
          out.unsat = true;
          out.cert = *cert;
          return out;
        }
        out.rows.erase(out.rows.begin() + r);
        continue;
      }
      if (auto cert = normalize_row(atoms, row)) {
        out.unsat = true;
        out.cert = *cert;
        return out;
      }
      ++r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// bounded simplex over exact rationals

Int rat_floor(const Rat& v) {
  return floor_div(numerator(v), denominator(v));
}

Int rat_ceil(const Rat& v) { return -rat_floor(-v); }

struct VarBound {
  Rat value;
  bool from_branch = false;
  uint32_t index = 0; // row ordinal or branch level
  int dir = 0;        // rows: +1 upper form, -1 lower form; branch: +1 lo, -1 hi
};

struct Simplex {
  // locals 0..nstruct-1 are structural variables in ascending VarId
  // order; locals nstruct.. are one slack per row
  std::vector<VarId> struct_vars;
  size_t nstruct = 0;
  size_t obj_base = 0;
  size_t nvars = 0;
  std::vector<std::optional<VarBound>> lo, hi;
  std::vector<Rat> beta;
  std::vector<bool> basic;
  std::map<uint32_t, std::map<uint32_t, Rat>> tableau; // basic -> nonbasic combo
  std::vector<std::map<uint32_t, Rat>> row_prov;       // per slack ordinal
  std::vector<FarkasPtr> row_cut;                      // per slack ordinal
  std::vector<LinExpr> objectives;                     // bound-free probe rows

  std::optional<FarkasPtr> conflict; // set when check fails

  // Objectives become extra basic variables with no bounds of their
  // own: never violated, never blocking, but drivable to an extremum
  // like any basic variable, which is what rounding cuts over a
  // compound form need.
  void init(const std::vector<WorkRow>& rows, std::vector<LinExpr> objs = {}) {
    objectives = std::move(objs);
    std::set<VarId> vars;
    for (const WorkRow& r : rows)
      for (const auto& [v, c] : r.lin.terms) {
        (void)c;
        vars.insert(v);
      }
    for (const LinExpr& o : objectives)
      for (const auto& [v, c] : o.terms) {
        (void)c;
        vars.insert(v);
      }
    struct_vars.assign(vars.begin(), vars.end());
    nstruct = struct_vars.size();
    obj_base = nstruct + rows.size();
    nvars = obj_base + objectives.size();
    lo.assign(nvars, std::nullopt);
    hi.assign(nvars, std::nullopt);
    beta.assign(nvars, Rat(0));
    basic.assign(nvars, false);
    row_prov.resize(rows.size());
    row_cut.resize(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      uint32_t s = static_cast<uint32_t>(nstruct + r);
      basic[s] = true;
      std::map<uint32_t, Rat> combo;
      for (const auto& [v, c] : rows[r].lin.terms)
        combo[local_of(v)] = Rat(c);
      tableau[s] = std::move(combo);
      row_prov[r] = rows[r].prov;
      row_cut[r] = rows[r].cut_origin;
      Rat limit = Rat(-rows[r].lin.k);
      hi[s] = VarBound{limit, false, static_cast<uint32_t>(r), +1};
      if (rows[r].rel == Rel::Eq)
        lo[s] = VarBound{limit, false, static_cast<uint32_t>(r), -1};
    }
    for (size_t o = 0; o < objectives.size(); ++o) {
      uint32_t s = static_cast<uint32_t>(obj_base + o);
      basic[s] = true;
      std::map<uint32_t, Rat> combo;
      for (const auto& [v, c] : objectives[o].terms)
        combo[local_of(v)] = Rat(c);
      tableau[s] = std::move(combo);
    }
  }

  uint32_t local_of(VarId v) const {
    auto it = std::lower_bound(struct_vars.begin(), struct_vars.end(), v);
    return static_cast<uint32_t>(it - struct_vars.begin());
  }

  // expands one bound reference into leaf terms
  void expand_bound(const std::vector<ConjAtom>& atoms, const VarBound& b,
                    const Rat& coeff,
                    std::map<std::pair<uint32_t, int>, Rat>& atom_terms,
                    std::vector<FarkasTerm>& branch_terms,
                    CutTerms& cut_terms) const {
    if (b.from_branch) {
      FarkasTerm t;
      t.from_branch = true;
      t.index = b.index;
      t.dir = b.dir;
      t.coeff = coeff;
      branch_terms.push_back(std::move(t));
      return;
    }
    if (row_cut[b.index]) {
      // cut rows are pure upper bounds, so only the +1 reading occurs
      cut_terms[row_cut[b.index]] += coeff;
      return;
    }
    // +1 reads the row as lin <= 0, -1 as -lin <= 0
    expand_prov(atoms, row_prov[b.index], b.dir > 0 ? coeff : -coeff,
                atom_terms);
  }

  void set_conflict_bounds(const std::vector<ConjAtom>& atoms,
                           const std::vector<std::pair<VarBound, Rat>>& parts) {
    std::map<std::pair<uint32_t, int>, Rat> atom_terms;
    std::vector<FarkasTerm> branch_terms;
    CutTerms cut_terms;
    for (const auto& [b, coeff] : parts)
      expand_bound(atoms, b, coeff, atom_terms, branch_terms, cut_terms);
    conflict = leaf_from_terms(std::move(atom_terms), std::move(branch_terms),
                               std::move(cut_terms));
  }

  void update_nonbasic(uint32_t n, const Rat& v) {
    Rat delta = v - beta[n];
    if (delta == 0)
      return;
    for (auto& [b, combo] : tableau) {
      auto it = combo.find(n);
      if (it != combo.end())
        beta[b] += it->second * delta;
    }
    beta[n] = v;
  }

  void pivot(uint32_t b, uint32_t n, const Rat& target) {
    auto row = tableau.at(b);
    Rat a = row.at(n);
    Rat theta = (target - beta[b]) / a;
    beta[b] = target;
    beta[n] += theta;
    for (auto& [m, combo] : tableau) {
      if (m == b)
        continue;
      auto it = combo.find(n);
      if (it != combo.end())
        beta[m] += it->second * theta;
    }
    // rewrite: n = (b - sum of others) / a
    std::map<uint32_t, Rat> nrow;
    nrow[b] = Rat(1) / a;
    for (const auto& [j, c] : row)
      if (j != n)
        nrow[j] = -c / a;
    tableau.erase(b);
    for (auto& [m, combo] : tableau) {
      auto it = combo.find(n);
      if (it == combo.end())
        continue;
      Rat cn = it->second;
      combo.erase(it);
      for (const auto& [j, c] : nrow) {
        Rat& slot = combo[j];
        slot += cn * c;
        if (slot == 0)
          combo.erase(j);
      }
    }
    tableau[n] = std::move(nrow);
    basic[b] = false;
    basic[n] = true;
  }

  // Dutertre and de Moura style check with Bland's rule; fills
  // conflict and returns false on unsatisfiable bound systems.
  bool check(const std::vector<ConjAtom>& atoms) {
    for (;;) {
      uint32_t viol = static_cast<uint32_t>(nvars);
      bool needs_up = false;
      for (uint32_t v = 0; v < nvars; ++v) {
        if (!basic[v])
          continue;
        if (lo[v] && beta[v] < lo[v]->value) {
          viol = v;
          needs_up = true;
          break;
        }
        if (hi[v] && beta[v] > hi[v]->value) {
          viol = v;
          needs_up = false;
          break;
        }
      }
      if (viol == nvars)
        return true;
      const auto& row = tableau.at(viol);
      uint32_t enter = static_cast<uint32_t>(nvars);
      for (const auto& [j, c] : row) {
        bool ok = needs_up ? (c > 0 && (!hi[j] || beta[j] < hi[j]->value)) ||
                                 (c < 0 && (!lo[j] || beta[j] > lo[j]->value))
                           : (c < 0 && (!hi[j] || beta[j] < hi[j]->value)) ||
                                 (c > 0 && (!lo[j] || beta[j] > lo[j]->value));
        if (ok) {
          enter = j;
          break;
        }
      }
      if (enter == nvars) {
        // every nonbasic variable is pinned against us: combine the
        // violated bound of viol with the pinning bound of each column
        std::vector<std::pair<VarBound, Rat>> parts;
        parts.push_back({needs_up ? *lo[viol] : *hi[viol], Rat(1)});
        for (const auto& [j, c] : row) {
          bool use_hi = needs_up ? c > 0 : c < 0;
          parts.push_back({use_hi ? *hi[j] : *lo[j], c > 0 ? c : -c});
        }
        set_conflict_bounds(atoms, parts);
        return false;
      }
      pivot(viol, enter, needs_up ? lo[viol]->value : hi[viol]->value);
    }
  }

  // asserts a new bound on a structural variable (branch and bound);
  // returns false on an immediate bound clash
  bool assert_bound(const std::vector<ConjAtom>& atoms, uint32_t v, bool upper,
                    VarBound nb) {
    if (upper) {
      if (hi[v] && hi[v]->value <= nb.value)
        return true;
      if (lo[v] && nb.value < lo[v]->value) {
        set_conflict_bounds(atoms, {{nb, Rat(1)}, {*lo[v], Rat(1)}});
        return false;
      }
      hi[v] = nb;
      if (!basic[v] && beta[v] > nb.value)
        update_nonbasic(v, nb.value);
    } else {
      if (lo[v] && lo[v]->value >= nb.value)
        return true;
      if (hi[v] && nb.value > hi[v]->value) {
        set_conflict_bounds(atoms, {{nb, Rat(1)}, {*hi[v], Rat(1)}});
        return false;
      }
      lo[v] = nb;
      if (!basic[v] && beta[v] < nb.value)
        update_nonbasic(v, nb.value);
    }
    return true;
  }

  // Drives one structural variable to its rational extremum while
  // staying feasible; returns the extremum, or nullopt when the
  // variable is unbounded in that direction or the pivot cap trips.
  // Requires a feasible tableau.
  std::optional<Rat> optimize(uint32_t t, bool maximize) {
    if (!basic[t]) {
      uint32_t host = static_cast<uint32_t>(nvars);
      for (const auto& [b, combo] : tableau)
        if (combo.count(t) && combo.at(t) != 0) {
          host = b;
          break;
        }
      if (host == nvars)
        return std::nullopt; // no row constrains it at all
      pivot(host, t, beta[host]); // zero-length step, pure basis change
    }
    for (uint32_t steps = 0; steps < 4096; ++steps) {
      // entering candidate: smallest-index nonbasic whose movement
      // improves the objective (Bland's rule)
      uint32_t enter = static_cast<uint32_t>(nvars);
      int move = 0;
      for (const auto& [j, c] : tableau.at(t)) {
        if (c == 0)
          continue;
        bool up = maximize ? c > 0 : c < 0;
        if (up ? (!hi[j] || beta[j] < hi[j]->value)
               : (!lo[j] || beta[j] > lo[j]->value)) {
          enter = j;
          move = up ? +1 : -1;
          break;
        }
      }
      if (enter == nvars)
        return beta[t]; // optimal
      // ratio test over the entering variable's own opposite bound and
      // every basic variable it drags along
      std::optional<Rat> theta;
      uint32_t blocker = enter;
      Rat target;
      auto consider = [&](uint32_t who, const Rat& step, const Rat& at) {
        if (!theta || step < *theta) {
          theta = step;
          blocker = who;
          target = at;
        }
      };
      if (move > 0 && hi[enter])
        consider(enter, hi[enter]->value - beta[enter], hi[enter]->value);
      if (move < 0 && lo[enter])
        consider(enter, beta[enter] - lo[enter]->value, lo[enter]->value);
      for (const auto& [b, combo] : tableau) {
        auto it = combo.find(enter);
        if (it == combo.end() || it->second == 0)
          continue;
        Rat rate = it->second * move;
        if (rate > 0 && hi[b])
          consider(b, (hi[b]->value - beta[b]) / rate, hi[b]->value);
        else if (rate < 0 && lo[b])
          consider(b, (beta[b] - lo[b]->value) / -rate, lo[b]->value);
      }
      if (!theta)
        return std::nullopt; // unbounded direction
      if (blocker == enter) {
        update_nonbasic(enter, target);
        continue;
      }
      pivot(blocker, enter, target);
      if (blocker == t)
        return beta[t]; // clipped by the objective's own bound
    }
    return std::nullopt;
  }

  // Builds the rounding-cut certificate at t's optimum: the active
  // bounds along t's tableau row combine into t's rational extremum,
  // and integrality rounds it. Returns null off the happy path (t
  // nonbasic, a bound missing, or a branch bound in the combination).
  FarkasPtr bound_cut(const std::vector<ConjAtom>& atoms, uint32_t t,
                      bool maximize) const {
    if (!basic[t] || (t >= nstruct && t < obj_base))
      return nullptr;
    std::map<std::pair<uint32_t, int>, Rat> atom_terms;
    std::vector<FarkasTerm> branch_terms;
    CutTerms cut_terms;
    for (const auto& [j, c] : tableau.at(t)) {
      if (c == 0)
        continue;
      bool use_hi = maximize ? c > 0 : c < 0;
      const std::optional<VarBound>& vb = use_hi ? hi[j] : lo[j];
      if (!vb)
        return nullptr;
      expand_bound(atoms, *vb, c > 0 ? c : -c, atom_terms, branch_terms,
                   cut_terms);
    }
    if (!branch_terms.empty())
      return nullptr; // cuts are derived at the root only
    auto node =
        leaf_from_terms(std::move(atom_terms), {}, std::move(cut_terms));
    node->kind = FarkasCert::Kind::Cut;
    LinExpr row;
    if (t >= obj_base) {
      for (const auto& [v, c] : objectives[t - obj_base].terms)
        row.terms[v] = maximize ? c : -c;
    } else {
      row.terms[struct_vars[t]] = maximize ? 1 : -1;
    }
    row.k = maximize ? -rat_floor(beta[t]) : rat_ceil(beta[t]);
    node->cut_row = std::move(row);
    return node;
  }
};

struct BnbState {
  uint32_t splits_used = 0;
  uint32_t next_level = 0;
  SolverLimits limits;
  const std::vector<WorkRow>* rows = nullptr;
};

struct BnbResult {
  SatKind kind = SatKind::Unknown;
  std::map<VarId, Int> model;
  FarkasPtr cert;
};

// Rounds the rational point to nearby integers and tests it against
// the surviving rows; branch bounds are search artifacts and do not
// constrain global satisfiability, so they are ignored here.
std::optional<std::map<VarId, Int>> probe_rounding(const Simplex& st,
                                                   const BnbState& ctx) {
  for (int mode = 0; mode < 2; ++mode) {
    std::map<VarId, Int> cand;
    for (uint32_t v = 0; v < st.nstruct; ++v) {
      Int fl = rat_floor(st.beta[v]);
      if (mode == 1 && st.beta[v] - Rat(fl) >= Rat(1, 2))
        fl += 1;
      cand[st.struct_vars[v]] = fl;
    }
    bool ok = true;
    for (const WorkRow& row : *ctx.rows) {
      Int s = row.lin.eval(cand);
      if (row.rel == Rel::Eq ? s != 0 : s > 0) {
        ok = false;
        break;
      }
    }
    if (ok)
      return cand;
  }
  return std::nullopt;
}

BnbResult branch_and_bound(Simplex st, const std::vector<ConjAtom>& atoms,
                           BnbState& ctx) {
  BnbResult res;
  if (!st.check(atoms)) {
    res.kind = SatKind::Unsat;
    res.cert = *st.conflict;
    return res;
  }
  uint32_t frac = static_cast<uint32_t>(st.nstruct);
  for (uint32_t v = 0; v < st.nstruct; ++v)
    if (denominator(st.beta[v]) != 1) {
      frac = v;
      break;
    }
  if (frac == st.nstruct) {
    res.kind = SatKind::Sat;
    for (uint32_t v = 0; v < st.nstruct; ++v)
      res.model[st.struct_vars[v]] = numerator(st.beta[v]);
    return res;
  }
  if (auto rounded = probe_rounding(st, ctx)) {
    res.kind = SatKind::Sat;
    res.model = std::move(*rounded);
    return res;
  }
  if (ctx.splits_used >= ctx.limits.max_splits)
    return res; // Unknown
  ++ctx.splits_used;
  uint32_t level = ctx.next_level++;
  VarId split_var = st.struct_vars[frac];
  Int bound = rat_floor(st.beta[frac]);
  bool lo_first = st.beta[frac] - Rat(bound) < Rat(1, 2);

  auto run_side = [&](Simplex state, bool upper) -> BnbResult {
    VarBound vb = upper ? VarBound{Rat(bound), true, level, +1}
                        : VarBound{Rat(bound + 1), true, level, -1};
    BnbResult side;
    if (!state.assert_bound(atoms, frac, upper, vb)) {
      side.kind = SatKind::Unsat;
      side.cert = *state.conflict;
      return side;
    }
    return branch_and_bound(std::move(state), atoms, ctx);
  };

  BnbResult first = run_side(st, lo_first);
  if (first.kind == SatKind::Sat)
    return first;
  BnbResult second = run_side(std::move(st), !lo_first);
  if (second.kind == SatKind::Sat)
    return second;
  if (first.kind == SatKind::Unsat && second.kind == SatKind::Unsat) {
    auto split = std::make_shared<FarkasCert>();
    split->kind = FarkasCert::Kind::Split;
    split->split_var = split_var;
    split->split_bound = bound;
    split->split_level = level;
    split->lo = lo_first ? first.cert : second.cert;
    split->hi = lo_first ? second.cert : first.cert;
    res.kind = SatKind::Unsat;
    res.cert = std::move(split);
    return res;
  }
  return res; // Unknown
}

// Which side of an interpolation boundary a cut's combination cites:
// +1 all below, -1 all at or above, 0 mixed.
int cut_rows_side(const FarkasPtr& cut, size_t boundary) {
  bool a = false, b = false;
  for (const FarkasTerm& t : cut->mults) {
    if (t.cut) {
      int s = cut_rows_side(t.cut, boundary);
      if (s == 0)
        return 0;
      (s > 0 ? a : b) = true;
    } else if (t.from_branch) {
      return 0;
    } else {
      (t.index < boundary ? a : b) = true;
    }
  }
  if (a && b)
    return 0;
  return b ? -1 : +1;
}

// Two variables carrying the same non-unit coefficient magnitude are
// quotient-shaped; division uniqueness lives on their difference (or
// sum, for opposite signs), which no bound on either variable alone
// can pin. These forms get probed as bound-free objective rows.
std::vector<LinExpr> pair_objectives(const std::vector<WorkRow>& rows) {
  std::set<std::pair<VarId, Int>> seen;
  std::vector<std::pair<VarId, Int>> cands;
  for (const WorkRow& r : rows)
    for (const auto& [v, c] : r.lin.terms)
      if (c != 1 && c != -1 && seen.insert({v, c}).second)
        cands.push_back({v, c});
  std::vector<LinExpr> objs;
  std::set<std::map<VarId, Int>> dedup;
  for (size_t i = 0; i < cands.size() && objs.size() < 48; ++i)
    for (size_t j = i + 1; j < cands.size() && objs.size() < 48; ++j) {
      const auto& [u, cu] = cands[i];
      const auto& [w, cw] = cands[j];
      if (u == w || (cu != cw && cu != -cw))
        continue;
      LinExpr o;
      o.terms[u] = 1;
      o.terms[w] += cu == cw ? -1 : 1;
      if (o.terms.size() == 2 && dedup.insert(o.terms).second)
        objs.push_back(std::move(o));
    }
  return objs;
}

// Bound-tightening rounds over one row system: pin variables (and
// quotient pair forms) whose rational extremum is fractional by
// appending the rounded bound as a certified cut row. With a boundary
// set, cuts whose combination spans it are discarded so later
// interpolation can attribute every cut to one side. Returns a
// conflict when the system is already infeasible.
std::optional<FarkasPtr> tighten_rounds(std::vector<WorkRow>& rows,
                                        const std::vector<ConjAtom>& atoms,
                                        std::optional<size_t> boundary,
                                        int max_rounds) {
  for (int round = 0; round < max_rounds; ++round) {
    if (rows.empty())
      return std::nullopt;
    Simplex st;
    st.init(rows, pair_objectives(rows));
    if (!st.check(atoms))
      return *st.conflict;
    bool added = false;
    auto probe = [&](uint32_t t) {
      for (bool maximize : {false, true}) {
        auto extremum = st.optimize(t, maximize);
        if (!extremum || denominator(*extremum) == 1)
          continue;
        FarkasPtr cut = st.bound_cut(atoms, t, maximize);
        if (!cut)
          continue;
        if (boundary && cut_rows_side(cut, *boundary) == 0)
          continue;
        bool fresh = true;
        for (const WorkRow& r : rows)
          if (r.rel == Rel::Le && r.lin.k == cut->cut_row.k &&
              r.lin.terms == cut->cut_row.terms) {
            fresh = false;
            break;
          }
        if (!fresh)
          continue;
        WorkRow wr;
        wr.lin = cut->cut_row;
        wr.cut_origin = cut;
        rows.push_back(std::move(wr));
        added = true;
      }
    };
    for (uint32_t v = 0; v < st.nstruct; ++v) {
      if (denominator(st.beta[v]) == 1)
        continue;
      probe(v);
    }
    for (size_t o = 0; o < st.objectives.size(); ++o)
      probe(static_cast<uint32_t>(st.obj_base + o));
    if (!added)
      return std::nullopt;
  }
  return std::nullopt;
}

} // namespace

ConjResult solve_conj(const std::vector<ConjAtom>& atoms,
                      const SolverLimits& limits) {
  ConjResult res;
  uint32_t n = static_cast<uint32_t>(atoms.size());
  PresolveOut pre = presolve(atoms, 0, n);
  if (pre.unsat) {
    res.kind = SatKind::Unsat;
    res.cert = pre.cert;
    return res;
  }
  // With an interpolation boundary, tighten each side on its own rows
  // first: those cuts are one-sided by construction, and single-variable
  // cut rows survive whatever the joint presolve eliminated.
  if (limits.cut_boundary && *limits.cut_boundary > 0 &&
      *limits.cut_boundary < n) {
    uint32_t split = *limits.cut_boundary;
    uint32_t bounds[2][2] = {{0, split}, {split, n}};
    for (auto [lo, hi] : bounds) {
      PresolveOut side = presolve(atoms, lo, hi);
      if (side.unsat) {
        res.kind = SatKind::Unsat;
        res.cert = side.cert;
        return res;
      }
      if (auto conflict = tighten_rounds(side.rows, atoms, std::nullopt, 6)) {
        res.kind = SatKind::Unsat;
        res.cert = *conflict;
        return res;
      }
      for (WorkRow& row : side.rows)
        if (row.cut_origin)
          pre.rows.push_back(std::move(row));
    }
  }
  if (auto conflict =
          tighten_rounds(pre.rows, atoms, limits.cut_boundary, 8)) {
    res.kind = SatKind::Unsat;
    res.cert = *conflict;
    return res;
  }
  BnbResult inner;
  if (pre.rows.empty()) {
    inner.kind = SatKind::Sat;
  } else {
    Simplex st;
    st.init(pre.rows);
    BnbState ctx;
    ctx.limits = limits;
    ctx.rows = &pre.rows;
    inner = branch_and_bound(std::move(st), atoms, ctx);
  }
  if (inner.kind != SatKind::Sat) {
    res.kind = inner.kind;
    res.cert = inner.cert;
    return res;
  }
  res.kind = SatKind::Sat;
  res.model = std::move(inner.model);
  // eliminated variables, most recent definition first
  for (auto it = pre.elims.rbegin(); it != pre.elims.rend(); ++it) {
    Int value = it->rest.k;
    for (const auto& [v, c] : it->rest.terms) {
      auto found = res.model.find(v);
      if (found == res.model.end())
        found = res.model.emplace(v, 0).first;
      value += c * found->second;
    }
    res.model[it->var] = value;
  }
  // anything never constrained defaults to zero
  for (const ConjAtom& a : atoms)
    for (const auto& [v, c] : a.lin.terms) {
      (void)c;
      res.model.emplace(v, 0);
    }
  return res;
}

bool farkas_valid(const std::vector<ConjAtom>& atoms, const FarkasPtr& cert) {
  if (!cert)
    return false;
  // level -> (var, bound, side): side +1 below lo, -1 below hi
  std::map<uint32_t, std::tuple<VarId, Int, int>> scope;
  std::function<bool(const FarkasPtr&)> walk = [&](const FarkasPtr& c) -> bool {
    if (!c)
      return false;
    if (c->kind == FarkasCert::Kind::Split) {
      if (scope.count(c->split_level))
        return false;
      scope[c->split_level] = {c->split_var, c->split_bound, +1};
      bool lo_ok = walk(c->lo);
      std::get<2>(scope[c->split_level]) = -1;
      bool hi_ok = lo_ok && walk(c->hi);
      scope.erase(c->split_level);
      return hi_ok;
    }
    if (c->kind == FarkasCert::Kind::Cut) {
      // nonnegative combination of rows with an integral variable part;
      // the claimed row may tighten the constant up to its ceiling
      std::map<VarId, Rat> sum;
      Rat constant = 0;
      for (const FarkasTerm& t : c->mults) {
        if (t.from_branch || t.coeff < 0)
          return false;
        if (t.cut) {
          if (!walk(t.cut))
            return false;
          for (const auto& [v, coeff] : t.cut->cut_row.terms)
            sum[v] += t.coeff * Rat(coeff);
          constant += t.coeff * Rat(t.cut->cut_row.k);
          continue;
        }
        if (t.index >= atoms.size())
          return false;
        const ConjAtom& a = atoms[t.index];
        Rat mult = t.coeff;
        if (a.rel == Rel::Le) {
          if (t.dir != 0)
            return false;
        } else {
          if (t.dir == 0)
            return false;
          if (t.dir < 0)
            mult = -mult;
        }
        for (const auto& [v, coeff] : a.lin.terms)
          sum[v] += mult * Rat(coeff);
        constant += mult * Rat(a.lin.k);
      }
      for (const auto& [v, coeff] : sum) {
        if (coeff == 0)
          continue;
        auto it = c->cut_row.terms.find(v);
        if (it == c->cut_row.terms.end() || Rat(it->second) != coeff)
          return false;
      }
      for (const auto& [v, coeff] : c->cut_row.terms)
        if (coeff != 0 && (!sum.count(v) || sum.at(v) != Rat(coeff)))
          return false;
      return c->cut_row.k <= rat_ceil(constant);
    }
    if (c->kind == FarkasCert::Kind::Divides) {
      // signed combination of equality rows; scaled to integers, the
      // variable gcd must not divide the constant
      std::map<VarId, Rat> sum;
      Rat constant = 0;
      for (const FarkasTerm& t : c->mults) {
        if (t.from_branch || t.index >= atoms.size() || t.coeff < 0 || t.cut)
          return false;
        const ConjAtom& a = atoms[t.index];
        if (a.rel != Rel::Eq || (t.dir != 1 && t.dir != -1))
          return false;
        Rat mult = t.dir > 0 ? t.coeff : -t.coeff;
        for (const auto& [v, coeff] : a.lin.terms)
          sum[v] += mult * Rat(coeff);
        constant += mult * Rat(a.lin.k);
      }
      Int scale = 1;
      auto fold_den = [&](const Rat& q) {
        Int d = denominator(q);
        scale = scale / boost::multiprecision::gcd(scale, d) * d;
      };
      for (const auto& [v, q] : sum) {
        (void)v;
        fold_den(q);
      }
      fold_den(constant);
      Int g = 0;
      for (const auto& [v, q] : sum) {
        (void)v;
        if (q == 0)
          continue;
        Int n = numerator(q * Rat(scale));
        g = boost::multiprecision::gcd(g, n < 0 ? Int(-n) : n);
      }
      Int rhs = numerator(constant * Rat(scale));
      if (g == 0)
        return rhs != 0;
      return rhs % g != 0;
    }
    std::map<VarId, Rat> sum;
    Rat constant = 0;
    for (const FarkasTerm& t : c->mults) {
      if (t.coeff < 0)
        return false;
      if (t.coeff == 0)
        continue;
      if (t.cut) {
        if (!walk(t.cut))
          return false;
        for (const auto& [v, coeff] : t.cut->cut_row.terms)
          sum[v] += t.coeff * Rat(coeff);
        constant += t.coeff * Rat(t.cut->cut_row.k);
        continue;
      }
      if (t.from_branch) {
        auto it = scope.find(t.index);
        if (it == scope.end())
          return false;
        auto [var, bound, side] = it->second;
        if (t.dir != side)
          return false;
        if (t.dir > 0) {
          // var - bound <= 0
          sum[var] += t.coeff;
          constant += t.coeff * Rat(-bound);
        } else {
          // bound + 1 - var <= 0
          sum[var] -= t.coeff;
          constant += t.coeff * Rat(bound + 1);
        }
        continue;
      }
      if (t.index >= atoms.size())
        return false;
      const ConjAtom& a = atoms[t.index];
      Rat mult = t.coeff;
      if (a.rel == Rel::Le) {
        if (t.dir != 0)
          return false;
      } else {
        if (t.dir == 0)
          return false;
        if (t.dir < 0)
          mult = -mult;
      }
      for (const auto& [v, coeff] : a.lin.terms)
        sum[v] += mult * Rat(coeff);
      constant += mult * Rat(a.lin.k);
    }
    for (const auto& [v, coeff] : sum)
      if (coeff != 0)
        return false;
    return constant > 0;
  };
  return walk(cert);
}

namespace {

// interval per canonical term vector, for eager branch pruning
struct TermInterval {
  std::optional<Int> lo, hi;
  bool contradictory() const { return lo && hi && *lo > *hi; }
};

struct BranchWalker {
  std::vector<ConjAtom> acc;
  std::map<std::map<VarId, Int>, TermInterval> intervals;

  struct Undo {
    bool pushed_atom = false;
    bool touched = false;
    std::map<VarId, Int> key;
    TermInterval before;
  };

  // constrain the canonical linear part to [lo, hi] per the atom
  Undo push(const ConjAtom& atom, bool& contradiction) {
    Undo undo;
    contradiction = false;
    std::map<VarId, Int> key = atom.lin.terms;
    bool flip = !key.empty() && key.begin()->second < 0;
    if (flip)
      for (auto& [v, c] : key) {
        (void)v;
        c = -c;
      }
    TermInterval& slot = intervals[key];
    undo.touched = true;
    undo.key = key;
    undo.before = slot;
    if (atom.rel == Rel::Eq) {
      Int point = flip ? atom.lin.k : -atom.lin.k;
      if (!slot.lo || *slot.lo < point)
        slot.lo = point;
      if (!slot.hi || *slot.hi > point)
        slot.hi = point;
    } else if (!flip) {
      Int cap = -atom.lin.k; // terms <= -k
      if (!slot.hi || *slot.hi > cap)
        slot.hi = cap;
    } else {
      Int floor_val = atom.lin.k; // -terms + k <= 0, terms >= k
      if (!slot.lo || *slot.lo < floor_val)
        slot.lo = floor_val;
    }
    if (slot.contradictory()) {
      contradiction = true;
      return undo;
    }
    bool redundant = slot.lo == undo.before.lo && slot.hi == undo.before.hi;
    if (!redundant) {
      acc.push_back(atom);
      undo.pushed_atom = true;
    }
    return undo;
  }

  void pop(const Undo& undo) {
    if (undo.pushed_atom)
      acc.pop_back();
    if (undo.touched)
      intervals[undo.key] = undo.before;
  }
};

bool walk_dnf(const Fml& f, BranchWalker& w,
              const std::function<bool()>& emit) {
  switch (f.kind()) {
  case FKind::True:
    return emit();
  case FKind::False:
    return true;
  case FKind::Atom: {
    if (f.rel() == Rel::Ne) {
      // e <= -1 or e >= 1
      LinExpr low = f.lin();
      low.k += 1;
      LinExpr high = f.lin().negated();
      high.k += 1;
      for (const LinExpr* side : {&low, &high}) {
        bool contradiction = false;
        auto undo = w.push(ConjAtom{*side, Rel::Le}, contradiction);
        bool keep_going = contradiction || emit();
        w.pop(undo);
        if (!keep_going)
          return false;
      }
      return true;
    }
    bool contradiction = false;
    auto undo = w.push(ConjAtom{f.lin(), f.rel()}, contradiction);
    bool keep_going = contradiction || emit();
    w.pop(undo);
    return keep_going;
  }
  case FKind::Or:
    for (const Fml& kid : f.kids())
      if (!walk_dnf(kid, w, emit))
        return false;
    return true;
  case FKind::And: {
    std::function<bool(size_t)> conj = [&](size_t at) -> bool {
      if (at == f.kids().size())
        return emit();
      return walk_dnf(f.kids()[at], w, [&] { return conj(at + 1); });
    };
    return conj(0);
  }
  }
  throw Error(Error::Kind::Internal, "bad formula kind");
}

} // namespace

bool for_each_dnf_branch(
    const Fml& f,
    const std::function<bool(const std::vector<ConjAtom>&)>& visit) {
  BranchWalker w;
  return walk_dnf(f, w, [&] { return visit(w.acc); });
}

SatResult is_sat(const Fml& f, const SolverLimits& limits) {
  SatResult res;
  bool saw_unknown = false;
  bool completed = for_each_dnf_branch(f, [&](const std::vector<ConjAtom>& br) {
    ConjResult cr = solve_conj(br, limits);
    if (cr.kind == SatKind::Sat) {
      res.kind = SatKind::Sat;
      res.model = std::move(cr.model);
      return false;
    }
    if (cr.kind == SatKind::Unknown)
      saw_unknown = true;
    return true;
  });
  if (completed)
    res.kind = saw_unknown ? SatKind::Unknown : SatKind::Unsat;
  if (res.kind == SatKind::Sat)
    for (VarId v : f.vocab())
      res.model.emplace(v, 0);
  return res;
}

Tri entails(const Fml& a, const Fml& b, const SolverLimits& limits) {
  SatResult r = is_sat(f_and(a, f_not(b)), limits);
  switch (r.kind) {
  case SatKind::Unsat: return Tri::Yes;
  case SatKind::Sat: return Tri::No;
  case SatKind::Unknown: return Tri::Unknown;
  }
  return Tri::Unknown;
}

namespace {

constexpr size_t max_prune_kids = 8;

} // namespace

Fml simplify_bounded(const Fml& f, const SolverLimits& limits) {
  switch (f.kind()) {
  case FKind::True:
  case FKind::False:
  case FKind::Atom:
    return f;
  case FKind::And:
  case FKind::Or:
    break;
  }
  FmlVec kids;
  kids.reserve(f.kids().size());
  for (const Fml& kid : f.kids())
    kids.push_back(simplify_bounded(kid, limits));
  bool conj = f.kind() == FKind::And;
  Fml rebuilt = conj ? f_and(kids) : f_or(kids);
  if (rebuilt.kind() != f.kind() || rebuilt.kids().size() > max_prune_kids)
    return rebuilt;
  // drop members that the rest of the junction already decides
  FmlVec pruned(rebuilt.kids().begin(), rebuilt.kids().end());
  for (size_t i = 0; i < pruned.size() && pruned.size() > 1;) {
    FmlVec rest;
    for (size_t j = 0; j < pruned.size(); ++j)
      if (j != i)
        rest.push_back(pruned[j]);
    Fml others = conj ? f_and(rest) : f_or(rest);
    Tri covered = conj ? entails(others, pruned[i], limits)
                       : entails(pruned[i], others, limits);
    if (covered == Tri::Yes) {
      pruned.erase(pruned.begin() + i);
    } else {
      ++i;
    }
  }
  return conj ? f_and(pruned) : f_or(pruned);
}

} // namespace peq
