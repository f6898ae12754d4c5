#include <doctest.h>

#include "peq/interpret.hpp"
#include "peq/parse.hpp"

#include <algorithm>

using namespace peq;

namespace {

Program corpus_program(const std::string& name) {
  return load_program(std::string(PEQ_CORPUS_DIR) + "/" + name + ".peq");
}

Int run_ret(const Program& p, const std::vector<Int>& args) {
  RunResult r = run_program(p, args);
  REQUIRE(r.status == RunResult::Status::Complete);
  return r.ret;
}

// staircase counts via the additive recurrence, independent of the
// loop structure under test
std::vector<Int> stair_counts(int up_to) {
  std::vector<Int> w{1, 1};
  for (int i = 2; i <= up_to; ++i)
    w.push_back(w[i - 1] + w[i - 2]);
  return w;
}

// factorial trailing zero count as the sum of floor(n / 5^k)
Int zeros_oracle(Int n) {
  Int total = 0;
  for (Int p = 5; n >= p; p *= 5)
    total += floor_div(n, p);
  return total;
}

// decimal digit reversal through string manipulation; leading zeros
// must go, or the Int constructor reads the string as octal
Int reverse_oracle(Int n) {
  std::string s = n.str();
  std::reverse(s.begin(), s.end());
  size_t first = s.find_first_not_of('0');
  s = first == std::string::npos ? "0" : s.substr(first);
  return Int(s);
}

// repeated digit sum collapses to 1 + (n - 1) mod 9 for positive n
Int digit_root_oracle(Int n) {
  if (n <= 9)
    return n;
  return 1 + floor_mod(n - 1, 9);
}

} // namespace

TEST_CASE("staircase programs match the recurrence") {
  Program p0 = corpus_program("climbStairs0");
  Program p1 = corpus_program("climbStairs1");
  std::vector<Int> w = stair_counts(8);
  std::vector<Int> frozen{1, 1, 2, 3, 5, 8, 13, 21, 34};
  CHECK(w == frozen);
  for (int n = 0; n <= 8; ++n) {
    CHECK(run_ret(p0, {n}) == w[n]);
    CHECK(run_ret(p1, {n}) == w[n]);
  }
  CHECK(run_ret(p0, {-3}) == 1);
  CHECK(run_ret(p1, {-3}) == 1);
}

TEST_CASE("trailing zero programs match the closed form") {
  Program p0 = corpus_program("trailingZeroes0");
  Program p1 = corpus_program("trailingZeroes1");
  for (Int n : std::vector<Int>{0, 1, 4, 5, 9, 24, 25, 26, 30, 100, 124, 125, 3125}) {
    Int expect = zeros_oracle(n);
    CHECK(run_ret(p0, {n}) == expect);
    CHECK(run_ret(p1, {n}) == expect);
  }
  CHECK(zeros_oracle(30) == 7);
  CHECK(run_ret(p0, {-1}) == 0);
  CHECK(run_ret(p1, {-1}) == 0);
  CHECK(run_ret(p0, {-7}) == 0);
  CHECK(run_ret(p1, {-7}) == 0);
}

TEST_CASE("digit reversal programs agree with string reversal") {
  Program p0 = corpus_program("reverse0");
  Program p1 = corpus_program("reverse1");
  for (Int n : std::vector<Int>{0, 1, 5, 10, 100, 120, 123, 4321, 900001}) {
    Int expect = reverse_oracle(n);
    CHECK(run_ret(p0, {n}) == expect);
    CHECK(run_ret(p1, {n}) == expect);
  }
  // negative inputs end one side immediately and starve the other
  RunResult r0 = run_program(p0, {-7});
  CHECK(r0.status == RunResult::Status::Complete);
  CHECK(r0.ret == 0);
  RunResult r1 = run_program(p1, {-7}, 1000);
  CHECK(r1.status == RunResult::Status::Diverged);
}

TEST_CASE("digit root programs match the modular formula") {
  Program p0 = corpus_program("addDigits0");
  Program p1 = corpus_program("addDigits1");
  for (int n = -5; n <= 200; ++n) {
    Int expect = digit_root_oracle(n);
    CHECK(run_ret(p0, {n}) == expect);
    CHECK(run_ret(p1, {n}) == expect);
  }
  CHECK(run_ret(p0, {99999}) == 9);
  CHECK(run_ret(p1, {99999}) == 9);
}

TEST_CASE("mutants differ from their originals on short runs") {
  struct Case {
    const char* original;
    const char* mutant;
    Int arg;
  };
  for (const Case& c : {Case{"climbStairs1", "climbStairs1_mut", 0},
                        Case{"trailingZeroes1", "trailingZeroes1_mut", 0},
                        Case{"reverse1", "reverse1_mut", 0},
                        Case{"addDigits1", "addDigits1_mut", 0}}) {
    Program orig = corpus_program(c.original);
    Program mut = load_program(std::string(PEQ_CORPUS_DIR) + "/mutants/" +
                               c.mutant + ".peq");
    CHECK(run_ret(orig, {c.arg}) != run_ret(mut, {c.arg}));
  }
}

TEST_CASE("interpreter picks edges in destination name order") {
  Program p = corpus_program("climbStairs0");
  RunResult r = run_program(p, {2});
  std::vector<std::string> names;
  for (uint32_t l : r.path)
    names.push_back(p.loc_name(l));
  // the loop guard toward 10 is inspected before the exit toward 9,
  // and fails immediately for n = 2
  CHECK(names == std::vector<std::string>{"2", "6", "7", "8", "13", "9", "15",
                                          "FINAL"});
  CHECK(r.stores.size() == r.path.size());
  CHECK(r.stores.back().at("result") == 2);
  CHECK(r.stores.front().at("i") == 0);
}

TEST_CASE("runs can get stuck when no guard is enabled") {
  Program p = parse_program("prog t; param x; return r;\n"
                            "init a; final Z;\n"
                            "a -> b: assume x >= 1;\n"
                            "b -> Z: r := x;\n",
                            "t");
  RunResult r = run_program(p, {0});
  CHECK(r.status == RunResult::Status::Stuck);
  CHECK(r.path.size() == 1);
}

TEST_CASE("division lowers through the interpreter with floor semantics") {
  Program p = parse_program("prog t; param num; return result;\n"
                            "init a; final Z;\n"
                            "a -> Z: result := num - 9*((num - 1) / 9);\n",
                            "t");
  CHECK(run_ret(p, {10}) == 1);
  CHECK(run_ret(p, {19}) == 1);
  CHECK(run_ret(p, {9}) == 9);
  CHECK(run_ret(p, {1}) == 1);
  // floor division keeps the remainder nonnegative below zero too
  CHECK(run_ret(p, {0}) == 9);
}

TEST_CASE("paths extend, prefix, and complete deterministically") {
  Program p = corpus_program("climbStairs0");
  Path entry{&p, {p.init_loc}};

  std::vector<Path> exts = ext(entry);
  REQUIRE(exts.size() == 2);
  CHECK(p.loc_name(exts[0].tail()) == "5");
  CHECK(p.loc_name(exts[1].tail()) == "6");

  Path done = cmpl(entry);
  CHECK(path_names(done) == "2.5.FINAL");
  CHECK(path_key(0, done) == "0:2.5.FINAL");

  Path six = exts[1];
  CHECK(path_names(cmpl(six)) == "2.6.7.8.13.9.15.FINAL");

  std::vector<Path> pre = prefixes(six);
  REQUIRE(pre.size() == 2);
  CHECK(path_names(pre[0]) == "2");
  CHECK(path_names(pre[1]) == "2.6");

  CHECK(ext(cmpl(entry)).empty()); // nothing extends past final
  CHECK(path_eq(cmpl(done), done));

  Path head13{&p, {p.init_loc, p.loc_index("6"), p.loc_index("7"),
                   p.loc_index("8"), p.loc_index("13")}};
  CHECK(path_names(cmpl(head13)) == "2.6.7.8.13.9.15.FINAL");
}

TEST_CASE("program validation rejects malformed drafts") {
  // duplicate edge
  CHECK_THROWS_AS(parse_program("prog t; return r; init a; final Z;\n"
                                "a -> Z: skip;\na -> Z: r := 1;\n",
                                "t"),
                  Error);
  // unknown variable
  CHECK_THROWS_AS(parse_program("prog t; return r; init a; final Z;\n"
                                "a -> Z: r := bogus + 1;\n",
                                "t"),
                  Error);
  // zero divisor
  CHECK_THROWS_AS(parse_program("prog t; param x; return r; init a; final Z;\n"
                                "a -> Z: r := (x / 0);\n",
                                "t"),
                  Error);
  // reachable location with no way out
  CHECK_THROWS_AS(parse_program("prog t; param x; return r; init a; final Z;\n"
                                "a -> b: skip;\na -> Z: skip;\n",
                                "t"),
                  Error);
  // reachable location that cannot reach final
  CHECK_THROWS_AS(parse_program("prog t; param x; return r; init a; final Z;\n"
                                "a -> b: skip;\nb -> b: skip;\na -> Z: skip;\n",
                                "t"),
                  Error);
  // final with outgoing edges
  CHECK_THROWS_AS(parse_program("prog t; return r; init a; final Z;\n"
                                "a -> Z: skip;\nZ -> a: skip;\n",
                                "t"),
                  Error);
  // return variable clashing with a parameter
  CHECK_THROWS_AS(parse_program("prog t; param r; return r; init a; final Z;\n"
                                "a -> Z: skip;\n",
                                "t"),
                  Error);
  // duplicate declarations
  CHECK_THROWS_AS(parse_program("prog t; param x; var x; return r;"
                                " init a; final Z;\na -> Z: skip;\n",
                                "t"),
                  Error);
  // an unreachable location may dangle
  CHECK_NOTHROW(parse_program("prog t; return r; init a; final Z;\n"
                              "a -> Z: skip;\nq -> Z: skip;\n",
                              "t"));
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_program("prog t; return r; init a; final Z;\na -> Z: r := @;\n", "t");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::Parse);
    CHECK(std::string(e.what()).find("t:2") != std::string::npos);
  }
}

TEST_CASE("pair manifests resolve and validate") {
  PairManifest m = parse_pair_manifest("p0 = a.peq\np1 = b.peq\n# note\n"
                                       "pre = p.sx\n",
                                       "m");
  CHECK(m.p0_path == "a.peq");
  CHECK(m.p1_path == "b.peq");
  CHECK(m.pre_path == "p.sx");
  CHECK(m.post_path.empty());
  CHECK_THROWS_AS(parse_pair_manifest("p0 = a.peq\n", "m"), Error);
  CHECK_THROWS_AS(parse_pair_manifest("p0 = a.peq\np1 = b.peq\nzz = 1\n", "m"),
                  Error);
  PairManifest loaded =
      load_pair_manifest(std::string(PEQ_CORPUS_DIR) + "/pairs/climbStairs.pair");
  Program p0 = load_program(loaded.p0_path);
  Program p1 = load_program(loaded.p1_path);
  CHECK(p0.name == "climbStairs0");
  CHECK(p1.name == "climbStairs1");
}
