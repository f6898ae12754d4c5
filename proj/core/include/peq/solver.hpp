#pragma once

// Decision procedure for linear integer arithmetic over exact
// rationals: disjunctive branch enumeration at the formula level, then
// a bounded simplex with branch and bound per conjunction of atoms.
//
// Unsatisfiable conjunctions come back with a refutation certificate:
// a tree whose split nodes case a variable on var <= b / var >= b + 1
// and whose leaves give nonnegative multipliers that combine the input
// rows (and in-scope branch bounds) into an impossible 0 < c. These
// certificates are exact and drive interpolation.
//
// Before branching, fractional variables are pinned by rounding cuts:
// the rational extremum of a variable over the relaxation comes with
// dual multipliers, and when the extremum is fractional the rounded
// bound is added as a derived row carrying those multipliers. Leaves
// may cite such rows; verification recombines and rechecks the
// rounding.
//
// The procedure is sound but bounded: each conjunction may spend at
// most max_splits branch-and-bound splits before giving up, so results
// can be Unknown. Equality rows are gcd-normalized during presolve, so
// parity-style gaps refute immediately; what remains incomplete are
// systems whose refutation needs rounding over combinations that the
// bound-tightening rounds and the split budget never reach.

#include "peq/logic.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace peq {

enum class SatKind { Sat, Unsat, Unknown };
enum class Tri { Yes, No, Unknown };

// One conjunct for the conjunction solver: lin rel 0 with rel in
// {Le, Eq}; disequalities are split away during branch enumeration.
struct ConjAtom {
  LinExpr lin;
  Rel rel = Rel::Le;
};

struct FarkasCert;
using FarkasPtr = std::shared_ptr<const FarkasCert>;

// One summand of a leaf combination. Atom rows are referenced by their
// index in the input; branch bounds by the level of their split node.
// For atoms, dir 0 reads a Le row as lin <= 0 and dir +1/-1 read an Eq
// row as lin <= 0 / -lin <= 0. For branch bounds, dir +1 is the lower
// split side (var - bound <= 0) and dir -1 the upper (bound + 1 - var
// <= 0). When cut is set the term cites that cut's derived row
// (cut_row <= 0) instead and index and dir are meaningless.
struct FarkasTerm {
  bool from_branch = false;
  uint32_t index = 0;
  int dir = 0;
  Rat coeff; // nonnegative
  FarkasPtr cut;
};

// Leaf: nonnegative multipliers summing to an impossible 0 < c.
// Divides: signed multipliers over equality rows only, summing to a
// row e + k = 0 whose variable part has integer coefficients with a
// gcd that does not divide k, so no integer point satisfies it.
// Split: cases an integer variable on var <= b / var >= b + 1.
// Cut: multipliers combining atom rows (and earlier cuts) into a row
// whose variable part has integer coefficients; because every model is
// integral the fractional constant rounds up, and cut_row records the
// tightened result.
struct FarkasCert {
  enum class Kind { Leaf, Divides, Split, Cut };
  Kind kind = Kind::Leaf;
  // leaf, divides, and cut payload
  std::vector<FarkasTerm> mults;
  // split payload
  VarId split_var = 0;
  Int split_bound;
  uint32_t split_level = 0;
  FarkasPtr lo, hi;
  // cut payload
  LinExpr cut_row;
};

struct SolverLimits {
  uint32_t max_splits = 64;
  // Interpolation queries set this to the split point of the joint
  // conjunction; rounding cuts are then derived per side and cuts whose
  // combination would span the boundary are discarded.
  std::optional<size_t> cut_boundary;
};

struct ConjResult {
  SatKind kind = SatKind::Unknown;
  std::map<VarId, Int> model; // Sat: covers every variable in the atoms
  FarkasPtr cert;             // Unsat
};

ConjResult solve_conj(const std::vector<ConjAtom>& atoms,
                      const SolverLimits& limits = {});

// Replays a certificate against the rows it claims to refute: every
// leaf must combine in-scope rows with nonnegative multipliers into a
// contradiction with all variables canceled, and every split must be
// referenced only on the side where its bound holds.
bool farkas_valid(const std::vector<ConjAtom>& atoms, const FarkasPtr& cert);

// Enumerates conjunctions whose disjunction is equivalent to f,
// invoking visit for each one; stops early when visit returns false
// (and then itself returns false). Disequalities arrive split into
// their two integer sides. Branches with syntactically contradictory
// atom sets are dropped eagerly.
bool for_each_dnf_branch(
    const Fml& f,
    const std::function<bool(const std::vector<ConjAtom>&)>& visit);

struct SatResult {
  SatKind kind = SatKind::Unknown;
  std::map<VarId, Int> model; // Sat: covers the formula's vocabulary
};

SatResult is_sat(const Fml& f, const SolverLimits& limits = {});

// a entails b iff a and not b is unsatisfiable.
Tri entails(const Fml& a, const Fml& b, const SolverLimits& limits = {});

// Semantic cleanup used to keep stored invariants small: deduplicates
// and drops disjuncts/conjuncts that other siblings subsume, with a
// bounded number of entailment queries.
Fml simplify_bounded(const Fml& f, const SolverLimits& limits = {});

} // namespace peq
