#include <doctest.h>

#include "peq/sexpr.hpp"

#include <random>

using namespace peq;

namespace {

VarId sided(const std::string& base, int side) {
  return intern_var(base, side, CopyKind::Plain);
}

} // namespace

TEST_CASE("formulas print in a stable sorted shape") {
  // interning order deliberately disagrees with name order
  VarId zz = sided("zz", 0);
  VarId aa = sided("aa", 0);
  VarId aa1 = sided("aa", 1);
  LinExpr e;
  e.terms[zz] = 2;
  e.terms[aa] = -3;
  e.terms[aa1] = 1;
  e.k = 7;
  Fml f = f_atom(Rel::Le, e);
  CHECK(to_sexpr(f) == "(<= ((-3 aa 0) (1 aa 1) (2 zz 0) 7))");

  Fml t = f_true();
  CHECK(to_sexpr(t) == "true");
  CHECK(to_sexpr(f_false()) == "false");

  Fml junction = f_or(f, f_and(f_true(), f));
  // and(true, f) collapses to f, so the or deduplicates to f itself
  CHECK(to_sexpr(junction) == to_sexpr(f));
}

TEST_CASE("parse inverts print") {
  VarId x = sided("x", 0);
  VarId y = sided("y", 1);
  LinExpr e1, e2;
  e1.terms[x] = 1;
  e1.terms[y] = -1;
  e2.terms[x] = 3;
  e2.k = -5;
  Fml f = f_or(f_and(f_atom(Rel::Eq, e1), f_atom(Rel::Le, e2)),
               f_atom(Rel::Ne, e1));
  Fml back = parse_sexpr(to_sexpr(f));
  CHECK(fml_eq(back, f));
}

TEST_CASE("random formulas round-trip") {
  std::mt19937 rng(31337);
  std::uniform_int_distribution<int> coeff_d(-4, 4), const_d(-9, 9);
  std::uniform_int_distribution<int> rel_d(0, 2), shape_d(0, 9), side_d(0, 1);
  const char* bases[] = {"n", "i", "sum", "cur", "result"};
  std::uniform_int_distribution<int> base_d(0, 4);

  std::function<Fml(int)> gen = [&](int depth) -> Fml {
    if (depth == 0 || shape_d(rng) < 4) {
      LinExpr e;
      for (int t = 0; t < 3; ++t) {
        int c = coeff_d(rng);
        if (c != 0)
          e.terms[sided(bases[base_d(rng)], side_d(rng))] = c;
      }
      e.k = const_d(rng);
      return f_atom(static_cast<Rel>(rel_d(rng)), std::move(e));
    }
    Fml a = gen(depth - 1), b = gen(depth - 1);
    return shape_d(rng) < 5 ? f_and(a, b) : f_or(a, b);
  };

  for (int round = 0; round < 200; ++round) {
    Fml f = gen(3);
    std::string text = to_sexpr(f);
    Fml back = parse_sexpr(text);
    CHECK(fml_eq(back, f));
    CHECK(to_sexpr(back) == text);
  }
}

TEST_CASE("parser accepts forms the printer avoids") {
  // negation is rewritten eagerly
  Fml f = parse_sexpr("(not (<= ((1 x 0) 0)))");
  CHECK(fml_eq(f, parse_sexpr("(<= ((-1 x 0) 1))")));

  // empty junctions read as their neutral elements
  CHECK(parse_sexpr("(and)").is_true());
  CHECK(parse_sexpr("(or)").is_false());

  // duplicate variables accumulate
  Fml g = parse_sexpr("(<= ((1 x 0) (2 x 0) -3))");
  CHECK(fml_eq(g, parse_sexpr("(<= ((3 x 0) -3))")));

  // integers with leading zeros stay decimal
  Fml h = parse_sexpr("(<= ((1 x 0) 021))");
  CHECK(fml_eq(h, parse_sexpr("(<= ((1 x 0) 21))")));

  // whitespace is free-form
  Fml i = parse_sexpr("  (and\n\t(<= ((1 x 0) 0))\n true )  ");
  CHECK(fml_eq(i, parse_sexpr("(<= ((1 x 0) 0))")));
}

TEST_CASE("parse failures carry offsets") {
  auto fails = [](const std::string& text) {
    try {
      (void)parse_sexpr(text);
      return false;
    } catch (const Error& e) {
      return e.kind() == Error::Kind::Parse &&
             std::string(e.what()).find("offset") != std::string::npos;
    }
  };
  CHECK(fails(""));
  CHECK(fails("(<= ((1 x 0) 0)"));      // unbalanced
  CHECK(fails("(<= ((1 x 0) 0)) junk")); // trailing input
  CHECK(fails("(>= ((1 x 0) 0))"));      // unknown operator
  CHECK(fails("(<= ((1 2x 0) 0))"));     // name starts with a digit
  CHECK(fails("(<= ((1 x zero) 0))"));   // side must be an integer
  CHECK(fails("(<= ((1 x 0) 1.5))"));    // constants are integers
  CHECK(fails("maybe"));
}
