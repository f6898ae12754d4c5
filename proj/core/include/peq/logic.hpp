#pragma once

// Variable instances, integer linear expressions, and negation-free
// formulas in linear integer arithmetic.
//
// A variable instance names one copy of a program variable: the plain
// copy (current value), the primed copy (value after one step), or a
// path copy (value at the end of a given path prefix). Instances are
// interned process-wide; formulas refer to variables by VarId only.
//
// Formulas are built from atoms e <= 0, e == 0, e != 0 over integer
// linear expressions, closed under conjunction and disjunction.
// Negation is pushed into atoms at construction time, so every formula
// is negation-free. Atoms are normalized: zero coefficients dropped,
// constant atoms folded, coefficients divided by their gcd (with floor
// tightening for <=), and equalities/disequalities sign-canonicalized.

#include "peq/diag.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace peq {

enum class CopyKind : uint8_t { Plain, Primed, Path };

struct VarInstance {
  std::string base;
  int side = -1; // 0 or 1 for product-program copies, -1 for unsided
  CopyKind copy = CopyKind::Plain;
  std::string path_key; // used only when copy == CopyKind::Path

  auto operator<=>(const VarInstance&) const = default;
};

using VarId = uint32_t;

VarId intern_var(const VarInstance& inst);
VarId intern_var(const std::string& base, int side = -1,
                 CopyKind copy = CopyKind::Plain,
                 const std::string& path_key = "");
const VarInstance& var_info(VarId id);
std::string var_display(VarId id);

// Sum of coeff * var plus a constant. Terms hold no zero coefficients.
struct LinExpr {
  std::map<VarId, Int> terms;
  Int k = 0;

  static LinExpr constant(Int c);
  static LinExpr var(VarId v, Int coeff = 1);

  LinExpr& add(const LinExpr& other, const Int& scale = 1);
  LinExpr negated() const;
  Int eval(const std::map<VarId, Int>& store) const;

  bool operator==(const LinExpr&) const = default;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(const Int& c, LinExpr a);

enum class Rel : uint8_t { Le, Eq, Ne }; // e <= 0, e == 0, e != 0
enum class FKind : uint8_t { True, False, Atom, And, Or };

class Fml;
using FmlVec = std::vector<Fml>;

struct FNode {
  FKind kind;
  Rel rel = Rel::Le;   // atoms only
  LinExpr lin;         // atoms only
  FmlVec kids;         // and/or only, flattened, sorted, deduplicated
  size_t hash = 0;
  std::vector<VarId> vocab; // sorted, unique
};

class Fml {
public:
  Fml(); // default-constructs true
  explicit Fml(std::shared_ptr<const FNode> node) : m_node(std::move(node)) {}

  FKind kind() const { return m_node->kind; }
  Rel rel() const { return m_node->rel; }
  const LinExpr& lin() const { return m_node->lin; }
  const FmlVec& kids() const { return m_node->kids; }
  size_t hash() const { return m_node->hash; }
  const std::vector<VarId>& vocab() const { return m_node->vocab; }

  bool is_true() const { return kind() == FKind::True; }
  bool is_false() const { return kind() == FKind::False; }

  const FNode* node() const { return m_node.get(); }

private:
  std::shared_ptr<const FNode> m_node;
};

Fml f_true();
Fml f_false();
Fml f_bool(bool b);
Fml f_atom(Rel rel, LinExpr e);
Fml f_and(FmlVec kids);
Fml f_or(FmlVec kids);
Fml f_and(const Fml& a, const Fml& b);
Fml f_or(const Fml& a, const Fml& b);
Fml f_not(const Fml& f);

// a - b == 0 for each position; throws LengthMismatch on unequal sizes.
Fml f_eq_var(VarId a, VarId b);
Fml vec_eq(const std::vector<VarId>& as, const std::vector<VarId>& bs);

// Total structural order; fml_eq is its equality. Deterministic within
// a process (it compares interned ids and coefficients, not hashes).
std::strong_ordering fml_cmp(const Fml& a, const Fml& b);
bool fml_eq(const Fml& a, const Fml& b);
bool fml_less(const Fml& a, const Fml& b);

// Applies fn to every variable; nullopt keeps the variable unchanged.
// The induced map must be injective on the formula's vocabulary.
Fml rename(const Fml& f, const std::function<std::optional<VarId>(VarId)>& fn);

// Strict evaluation: every variable in f's vocabulary must be present
// in the store, otherwise Error(Eval) is thrown before evaluation.
bool eval(const Fml& f, const std::map<VarId, Int>& store);

std::string to_string(const Fml& f);
std::string to_string(const LinExpr& e);

} // namespace peq
