#pragma once

// Symbolic encoding of program steps and paths.
//
// Variable copies: the plain copy is a program state, the primed copy
// the state after one step, and path copies pin states to positions
// along a concrete path ("0:2.6.7" is the state of side 0 after
// traversing locations 2, 6, 7). A step relation constrains plain
// against primed for one side and frames every unassigned variable.
//
// Floor division and remainder desugar per occurrence into fresh
// primed auxiliaries q, r with u = d*q + r and 0 <= r < d; their bases
// start with '$', which no source variable can contain, and embed the
// edge and occurrence so each step's auxiliaries stay distinct after
// path renaming.
//
// Path formulas leave entry-state locals unconstrained; callers that
// need the interpreter's all-zero entry add the pin separately.

#include "peq/ir.hpp"
#include "peq/logic.hpp"

namespace peq {

// State copy at a prefix of p (prefix_len locations, at least 1).
std::string path_state_key(int side, const Path& p, size_t prefix_len);

Fml step_relation(const Program& prog, const Edge& edge, int side);

// The step between prefix lengths pos and pos+1 of p, over the
// matching path copies; pos ranges over [1, p.size() - 1].
Fml step_at(const Path& p, int side, size_t pos);

// Conjunction of step_at for every pos >= from_pos.
Fml steps_from(const Path& p, int side, size_t from_pos);

// steps_from(p, side, 1): the whole path.
Fml path_formula(const Path& p, int side);

// Positional parameter equality over the two sides' plain copies;
// arities must match.
Fml params_eq_plain(const Program& p0, const Program& p1);

Fml ret_eq_plain(const Program& p0, const Program& p1);
Fml ret_ne_plain(const Program& p0, const Program& p1);

// Everything the interpreter zeroes at entry: all variables except
// the parameters, pinned at the given path copy (or the plain copy).
Fml locals_zero_at(const Program& prog, int side, const std::string& key);
Fml locals_zero_plain(const Program& prog, int side);

// Renames side-0 plain variables to the key0 path copy and side-1 to
// key1 (and back); variables of other copies are rejected.
Fml plain_to_paths(const Fml& f, const std::string& key0,
                   const std::string& key1);
Fml paths_to_plain(const Fml& f, const std::string& key0,
                   const std::string& key1);

// Renames the given side's plain variables to primed, leaving the
// other side alone (consecution checks).
Fml plain_to_primed(const Fml& f, int side);

} // namespace peq
