#pragma once

// Text format for programs and for pair manifests.
//
// A program file is a sequence of ';'-terminated statements:
//
//   prog climbStairs0;
//   param n;
//   var i, sum, cur;
//   return result;
//   init 2;
//   final FINAL;
//   2 -> 5: assume n <= 1;
//   5 -> FINAL: result := 1;
//   ...
//
// Location names are words over [A-Za-z0-9_]; variable names must not
// start with a digit. Instructions are 'skip', 'x := expr', or
// 'assume expr OP expr' with OP one of <=, <, >=, >, ==, !=.
// Expressions are linear combinations of variables and literals plus
// parenthesized floor division and remainder by a positive literal,
// e.g. 10*rev + (x % 10). Comments run from '//' or '#' to end of line.
//
// A pair manifest names the two programs of a verification task and
// optionally replaces the input and output relations:
//
//   p0 = climbStairs0.peq
//   p1 = climbStairs1.peq
//   pre = custom_pre.sx      (optional)
//   post = custom_post.sx    (optional)
//
// Paths are resolved relative to the manifest's directory.

#include "peq/ir.hpp"

#include <string>

namespace peq {

Program parse_program(const std::string& text, const std::string& source_name);
Program load_program(const std::string& file_path);

struct PairManifest {
  std::string p0_path;
  std::string p1_path;
  std::string pre_path;  // empty when defaulted
  std::string post_path; // empty when defaulted
};

PairManifest parse_pair_manifest(const std::string& text,
                                 const std::string& source_name);
PairManifest load_pair_manifest(const std::string& file_path);

std::string read_file(const std::string& file_path);

} // namespace peq
