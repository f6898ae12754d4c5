#include <doctest.h>

#include "peq/logic.hpp"

#include <random>

using namespace peq;

namespace {

VarId plain(const std::string& base, int side = -1) {
  return intern_var(base, side, CopyKind::Plain);
}

Fml le(LinExpr e) { return f_atom(Rel::Le, std::move(e)); }
Fml eq(LinExpr e) { return f_atom(Rel::Eq, std::move(e)); }
Fml ne(LinExpr e) { return f_atom(Rel::Ne, std::move(e)); }

} // namespace

TEST_CASE("floor division helpers") {
  CHECK(floor_div(7, 2) == 3);
  CHECK(floor_div(-7, 2) == -4);
  CHECK(floor_div(6, 3) == 2);
  CHECK(floor_div(-6, 3) == -2);
  CHECK(floor_mod(7, 2) == 1);
  CHECK(floor_mod(-7, 2) == 1);
  CHECK(floor_mod(-6, 3) == 0);
  CHECK(ceil_div(7, 2) == 4);
  CHECK(ceil_div(-7, 2) == -3);
  CHECK(ceil_div(-3, 2) == -1);
  CHECK_THROWS_AS(floor_div(1, 0), Error);
  // remainder stays in [0, d) for positive divisors
  for (int a = -20; a <= 20; ++a) {
    for (int d = 1; d <= 7; ++d) {
      Int q = floor_div(a, d);
      Int r = floor_mod(a, d);
      CHECK(q * d + r == a);
      CHECK(r >= 0);
      CHECK(r < d);
    }
  }
}

TEST_CASE("interner returns stable ids") {
  VarId a = plain("n", 0);
  VarId b = plain("n", 0);
  VarId c = plain("n", 1);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(var_info(a).base == "n");
  CHECK(var_display(c) == "n@1");
  VarId primed = intern_var("i", 0, CopyKind::Primed);
  CHECK(var_display(primed) == "i'@0");
  VarId pathed = intern_var("i", 0, CopyKind::Path, "0:2.6");
  CHECK(var_display(pathed) == "i@0[0:2.6]");
}

TEST_CASE("atom normalization divides by the gcd") {
  VarId x = plain("x");
  // 2x - 4 <= 0 becomes x - 2 <= 0
  Fml a = le(Int(2) * LinExpr::var(x) + LinExpr::constant(-4));
  Fml b = le(LinExpr::var(x) + LinExpr::constant(-2));
  CHECK(fml_eq(a, b));
  // 2x - 3 <= 0 tightens to x - 1 <= 0
  Fml c = le(Int(2) * LinExpr::var(x) + LinExpr::constant(-3));
  Fml d = le(LinExpr::var(x) + LinExpr::constant(-1));
  CHECK(fml_eq(c, d));
  // 2x - 3 == 0 has no integer solution
  CHECK(eq(Int(2) * LinExpr::var(x) + LinExpr::constant(-3)).is_false());
  // 2x - 3 != 0 always holds
  CHECK(ne(Int(2) * LinExpr::var(x) + LinExpr::constant(-3)).is_true());
  // 2x - 4 == 0 becomes x - 2 == 0
  Fml e = eq(Int(2) * LinExpr::var(x) + LinExpr::constant(-4));
  Fml f = eq(LinExpr::var(x) + LinExpr::constant(-2));
  CHECK(fml_eq(e, f));
}

TEST_CASE("equalities are sign canonical") {
  VarId x = plain("x");
  VarId y = plain("y");
  Fml a = eq(LinExpr::var(x) - LinExpr::var(y));
  Fml b = eq(LinExpr::var(y) - LinExpr::var(x));
  CHECK(fml_eq(a, b));
  Fml c = ne(Int(-3) * LinExpr::var(x) + LinExpr::constant(6));
  Fml d = ne(LinExpr::var(x) + LinExpr::constant(-2));
  CHECK(fml_eq(c, d));
}

TEST_CASE("constant atoms fold") {
  CHECK(le(LinExpr::constant(0)).is_true());
  CHECK(le(LinExpr::constant(-5)).is_true());
  CHECK(le(LinExpr::constant(5)).is_false());
  CHECK(eq(LinExpr::constant(0)).is_true());
  CHECK(eq(LinExpr::constant(1)).is_false());
  CHECK(ne(LinExpr::constant(0)).is_false());
  CHECK(ne(LinExpr::constant(2)).is_true());
  // zero coefficients drop out before folding
  VarId x = plain("x");
  Fml a = le(Int(0) * LinExpr::var(x) + LinExpr::constant(1));
  CHECK(a.is_false());
}

TEST_CASE("junctions flatten, deduplicate, and sort") {
  VarId x = plain("x");
  VarId y = plain("y");
  Fml ax = le(LinExpr::var(x));
  Fml ay = le(LinExpr::var(y));
  Fml left = f_and(ax, f_and(ay, ax));
  Fml right = f_and(ay, ax);
  CHECK(fml_eq(left, right));
  CHECK(left.kids().size() == 2);
  CHECK(f_and(ax, f_false()).is_false());
  CHECK(f_or(ax, f_true()).is_true());
  CHECK(f_and(FmlVec{}).is_true());
  CHECK(f_or(FmlVec{}).is_false());
  CHECK(fml_eq(f_and(ax, f_true()), ax));
  CHECK(fml_eq(f_or(ax, f_false()), ax));
}

TEST_CASE("negation stays negation free and complements evaluation") {
  VarId x = plain("x");
  VarId y = plain("y");
  Fml nx = f_not(le(LinExpr::var(x) + LinExpr::constant(-3)));
  // not (x - 3 <= 0) is -x + 4 <= 0
  CHECK(fml_eq(nx, le(LinExpr::var(x).negated() + LinExpr::constant(4))));

  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> coeff(-3, 3);
  std::uniform_int_distribution<int> val(-5, 5);
  std::uniform_int_distribution<int> relpick(0, 2);
  auto random_atom = [&] {
    LinExpr e = coeff(rng) * LinExpr::var(x) + coeff(rng) * LinExpr::var(y) +
                LinExpr::constant(coeff(rng));
    Rel rels[] = {Rel::Le, Rel::Eq, Rel::Ne};
    return f_atom(rels[relpick(rng)], std::move(e));
  };
  for (int round = 0; round < 200; ++round) {
    Fml f = f_or(f_and(random_atom(), random_atom()),
                 f_and(random_atom(), random_atom()));
    std::map<VarId, Int> store{{x, val(rng)}, {y, val(rng)}};
    bool direct = f.vocab().empty() ? eval(f, {}) : eval(f, store);
    CHECK(eval(f_not(f), store) == !direct);
  }
}

TEST_CASE("vec_eq builds pointwise equalities") {
  VarId a0 = plain("a", 0);
  VarId b0 = plain("b", 0);
  VarId a1 = plain("a", 1);
  VarId b1 = plain("b", 1);
  Fml f = vec_eq({a0, b0}, {a1, b1});
  std::map<VarId, Int> store{{a0, 3}, {b0, 7}, {a1, 3}, {b1, 7}};
  CHECK(eval(f, store));
  store[b1] = 8;
  CHECK(!eval(f, store));
  CHECK_THROWS_AS(vec_eq({a0}, {a1, b1}), Error);
}

TEST_CASE("rename requires injectivity and rebuilds atoms") {
  VarId x = plain("x");
  VarId y = plain("y");
  VarId z = plain("z");
  Fml f = f_and(le(LinExpr::var(x) - LinExpr::var(y)),
                eq(LinExpr::var(y) + LinExpr::constant(-1)));
  Fml g = rename(f, [&](VarId v) -> std::optional<VarId> {
    if (v == x)
      return z;
    return std::nullopt;
  });
  Fml expect = f_and(le(LinExpr::var(z) - LinExpr::var(y)),
                     eq(LinExpr::var(y) + LinExpr::constant(-1)));
  CHECK(fml_eq(g, expect));
  CHECK_THROWS_AS(rename(f,
                         [&](VarId) -> std::optional<VarId> { return z; }),
                  Error);
}

TEST_CASE("eval is strict about missing variables") {
  VarId x = plain("x");
  VarId y = plain("y");
  Fml f = f_or(le(LinExpr::var(y).negated()), le(LinExpr::var(x)));
  std::map<VarId, Int> store{{y, -1}};
  CHECK_THROWS_AS(eval(f, store), Error);
  store[x] = 0;
  CHECK(eval(f, store));
}
