#pragma once

// Craig interpolation for linear integer formulas, driven by the
// refutation certificates of the conjunction solver.
//
// For a jointly unsatisfiable pair (a, b) the interpolant i satisfies
//   a |= i,   i and b unsatisfiable,   vocab(i) within vocab(a)*vocab(b)
// and is built branchwise: each (branch of a, branch of b) pair is
// refuted separately, the certificate's leaves contribute the a-side
// partial combination as one inequality, splits combine their sides
// with or/and depending on which vocabulary owns the split variable,
// and the pairwise results assemble as an or-of-ands.

#include "peq/logic.hpp"
#include "peq/solver.hpp"

#include <optional>

namespace peq {

// Returns the interpolant, or nullopt when some subquery exhausts its
// budget or a refutation rests on a divisibility argument that the
// formula language cannot express. Throws Error::Kind::NotJointlyUnsat
// when a branch pair turns out satisfiable.
std::optional<Fml> interpolate(const Fml& a, const Fml& b,
                               const SolverLimits& limits = {});

// Verifies the three interpolant conditions; entailment budgets make
// this Yes-biased, so a true result is a proof and false only a
// failure to prove.
bool check_interpolant(const Fml& a, const Fml& i, const Fml& b,
                       const SolverLimits& limits = {});

} // namespace peq
