#pragma once

// Control-flow-graph programs over integer variables.
//
// A program is a set of named locations with one instruction per edge:
// an assume over a linear condition, an assignment, or a skip. A run
// starts at the initial location with locals at zero and terminates
// when it reaches the final location; the value of the return variable
// at that point is the result of the run.
//
// Expressions are integer linear combinations of variables, extended
// with floor division and remainder by a positive literal. For d > 0,
// (e / d) rounds toward negative infinity and (e % d) is in [0, d).
//
// Locations are stored sorted by name, so location indices follow
// lexicographic name order. Everything downstream (the interpreter's
// edge choice, path orderings, worklists) leans on that determinism.

#include "peq/diag.hpp"
#include "peq/logic.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace peq {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind : uint8_t { Const, Var, Add, Sub, Mul, Div, Mod };

  Kind kind = Kind::Const;
  Int value;       // Const value, Mul coefficient, Div/Mod divisor
  std::string var; // Var only
  ExprPtr lhs, rhs;

  static ExprPtr constant(Int v);
  static ExprPtr variable(std::string name);
  static ExprPtr add(ExprPtr l, ExprPtr r);
  static ExprPtr sub(ExprPtr l, ExprPtr r);
  static ExprPtr mul(Int coeff, ExprPtr e);
  static ExprPtr div(ExprPtr e, Int divisor);
  static ExprPtr mod(ExprPtr e, Int divisor);
};

Int eval_expr(const Expr& e, const std::map<std::string, Int>& store);
void expr_vars(const Expr& e, std::set<std::string>& out);
std::string to_string(const Expr& e);

struct Instr {
  enum class Kind : uint8_t { Assume, Assign, Skip };

  Kind kind = Kind::Skip;
  ExprPtr expr;       // assume: condition as expr rel 0; assign: right side
  Rel rel = Rel::Le;  // assume only
  std::string target; // assign only

  static Instr assume(ExprPtr e, Rel rel);
  static Instr assign(std::string target, ExprPtr e);
  static Instr skip();
};

std::string to_string(const Instr& instr);

struct Edge {
  uint32_t src = 0;
  uint32_t dst = 0;
  Instr instr;
};

struct ProgramDraft {
  struct DraftEdge {
    std::string src;
    std::string dst;
    Instr instr;
  };

  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> locals;
  std::string ret;
  std::string init_name;
  std::string final_name;
  std::vector<DraftEdge> edges;
};

class Program {
public:
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> locals; // return variable excluded
  std::string ret;
  std::vector<std::string> loc_names; // sorted lexicographically
  std::vector<Edge> edges;
  std::vector<std::vector<uint32_t>> out_edges; // per location, dst-sorted
  uint32_t init_loc = 0;
  uint32_t final_loc = 0;

  uint32_t loc_index(const std::string& name) const;
  const std::string& loc_name(uint32_t idx) const { return loc_names.at(idx); }
  // params, then locals, then the return variable
  const std::vector<std::string>& all_vars() const { return m_vars; }
  std::optional<uint32_t> edge_between(uint32_t src, uint32_t dst) const;

  friend Program build_program(ProgramDraft draft);

private:
  std::vector<std::string> m_vars;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> m_edge_index;
};

// Resolves names, sorts locations, and validates the draft: distinct
// variable names, known variables in every instruction, positive
// division literals, no duplicate (src, dst) edge, a final location
// without successors, and for every location reachable from the start
// both an outgoing edge (unless final) and a syntactic way to reach
// the final location.
Program build_program(ProgramDraft draft);

// A nonempty sequence of locations connected by edges, starting
// anywhere. Paths never outlive the program they point into.
struct Path {
  const Program* prog = nullptr;
  std::vector<uint32_t> locs;

  uint32_t tail() const { return locs.back(); }
  bool tail_is_final() const { return tail() == prog->final_loc; }
  size_t size() const { return locs.size(); }
};

bool path_eq(const Path& a, const Path& b);
bool path_less(const Path& a, const Path& b); // length, then index lex

// One-step extensions of p, in destination order.
std::vector<Path> ext(const Path& p);

// All nonempty prefixes of p, shortest first.
std::vector<Path> prefixes(const Path& p);

// Shortest completion of p to the final location; ties resolved toward
// lexicographically smaller location names (breadth-first search that
// discovers successors in name order, first parent wins).
Path cmpl(const Path& p);

std::string path_names(const Path& p);               // "2.6.7"
std::string path_key(int side, const Path& p);       // "0:2.6.7"

} // namespace peq
