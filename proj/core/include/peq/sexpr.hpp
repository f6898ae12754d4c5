#pragma once

// Textual formula format used by proof files and relation files:
//
//   f   := true | false
//        | (and f ...) | (or f ...) | (not f)
//        | (<= lin) | (= lin) | (!= lin)
//   lin := ((coeff name side) ... k)        sum of terms plus k, REL 0
//
// Variables are written as (coefficient, base name, side index)
// triples over the plain program-variable copies; side -1 marks a
// sideless variable. Terms are emitted sorted by (name, side) so equal
// formulas always serialize identically. The serializer never emits
// (not ...); the parser accepts it and rewrites eagerly.

#include "peq/logic.hpp"

#include <string>

namespace peq {

std::string to_sexpr(const Fml& f);

// Throws Error::Kind::Parse with an offset on malformed input and
// Error::Kind::Validation when a formula holds non-plain variables.
Fml parse_sexpr(const std::string& text);

} // namespace peq
