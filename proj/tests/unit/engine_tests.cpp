#include <doctest.h>

#include "peq/encode.hpp"
#include "peq/engine.hpp"
#include "peq/parse.hpp"

#include <set>

using namespace peq;

namespace {

Program id_prog(const char* name) {
  std::string text = std::string("prog ") + name +
                     ";\nparam n;\nreturn result;\ninit I;\nfinal F;\n"
                     "I -> F: result := n;\n";
  return parse_program(text, name);
}

Program inc_prog() {
  return parse_program("prog inc;\nparam n;\nreturn result;\n"
                       "init I;\nfinal F;\nI -> F: result := n + 1;\n",
                       "inc");
}

// two-sided branch on the sign of the input
Program abs_prog(const char* name) {
  std::string text = std::string("prog ") + name + ";\n" +
                     "param n;\nreturn result;\ninit A;\nfinal F;\n"
                     "A -> N: assume n <= -1;\n"
                     "N -> F: result := 0 - n;\n"
                     "A -> P: assume n >= 0;\n"
                     "P -> F: result := n;\n";
  return parse_program(text, name);
}

// counts up to n and returns the counter
Program count_prog(const char* name) {
  std::string text = std::string("prog ") + name + ";\n" +
                     "param n;\nvar i;\nreturn result;\ninit A;\nfinal F;\n"
                     "A -> H: i := 0;\n"
                     "H -> B: assume i < n;\n"
                     "B -> H: i := i + 1;\n"
                     "H -> E: assume i >= n;\n"
                     "E -> F: result := i;\n";
  return parse_program(text, name);
}

Path mk_path(const Program& prog, const std::vector<std::string>& names) {
  Path p{&prog, {}};
  for (const std::string& name : names)
    p.locs.push_back(prog.loc_index(name));
  return p;
}

Fml plain_eq(const char* a, int sa, const char* b, int sb) {
  LinExpr e = LinExpr::var(intern_var(a, sa, CopyKind::Plain));
  e.add(LinExpr::var(intern_var(b, sb, CopyKind::Plain)), -1);
  return f_atom(Rel::Eq, e);
}

Fml plain_ge(const char* a, int side, Int k) {
  LinExpr e = LinExpr::var(intern_var(a, side, CopyKind::Plain), -1);
  e.k = k;
  return f_atom(Rel::Le, e);
}

bool pair_mentions(const ChkIndResult& r, const std::string& loc) {
  for (const Path* p : {&r.cex0, &r.cex1})
    for (uint32_t l : p->locs)
      if (p->prog->loc_name(l) == loc)
        return true;
  return false;
}

} // namespace

TEST_CASE("invariant synthesis covers every prefix pair of an agreeing run") {
  Program p0 = id_prog("left");
  Program p1 = id_prog("right");
  Path c0 = mk_path(p0, {"I", "F"});
  Path c1 = mk_path(p1, {"I", "F"});

  PathInvsResult r = path_invs(p0, p1, c0, c1);
  REQUIRE(r.kind == PathInvsResult::Kind::Invs);
  CHECK(r.invs.size() == 4);

  // the complete-pair entry forces equal results
  Fml full = r.invs.at({c0, c1});
  CHECK(entails(full, ret_eq_plain(p0, p1)) == Tri::Yes);

  // and the whole map passes the independent step-closure check
  CheckResult ck = check_path_pair_invariants(p0, p1, r.invs);
  CHECK(ck.status == CheckStatus::Valid);

  SUBCASE("corrupting one entry is caught by the checker") {
    PathPairMap broken = r.invs;
    broken[{c0, c1}] = plain_eq("result", 0, "n", 1);
    broken[{mk_path(p0, {"I"}), mk_path(p1, {"I"})}] = f_true();
    CheckResult bad = check_path_pair_invariants(p0, p1, broken);
    CHECK(bad.status == CheckStatus::Invalid);
    CHECK_FALSE(bad.detail.empty());
  }
}

TEST_CASE("invariant synthesis reports disagreements with a replayable model") {
  Program p0 = id_prog("id");
  Program p1 = inc_prog();
  Path c0 = mk_path(p0, {"I", "F"});
  Path c1 = mk_path(p1, {"I", "F"});

  PathInvsResult r = path_invs(p0, p1, c0, c1);
  REQUIRE(r.kind == PathInvsResult::Kind::NonEq);
  REQUIRE(r.cex.args0.size() == 1);
  CHECK(r.cex.args0 == r.cex.args1);

  ReplayResult replay = replay_counterexample(p0, p1, r.cex);
  CHECK(replay.confirmed);
  CHECK(replay.ret1 - replay.ret0 == 1);
}

TEST_CASE("merging maps unions domains and conjoins overlaps") {
  Program p0 = id_prog("left");
  Program p1 = id_prog("right");
  Path e0 = mk_path(p0, {"I"});
  Path e1 = mk_path(p1, {"I"});
  Path f0 = mk_path(p0, {"I", "F"});

  PathPairMap a, b;
  a[{e0, e1}] = plain_ge("n", 0, 0);
  b[{e0, e1}] = f_atom(Rel::Le, LinExpr::var(intern_var("n", 0)));
  b[{f0, e1}] = plain_eq("n", 0, "n", 1);

  CHECK(mrg({}, b).size() == b.size());
  CHECK(mrg(b, {}).size() == b.size());

  PathPairMap m = mrg(a, b);
  CHECK(m.size() == 2);
  // n >= 0 and n <= 0 collapse to n == 0
  Fml zero = f_atom(Rel::Eq, LinExpr::var(intern_var("n", 0)));
  CHECK(entails(m.at({e0, e1}), zero) == Tri::Yes);
  CHECK(entails(zero, m.at({e0, e1})) == Tri::Yes);
  CHECK(fml_eq(m.at({f0, e1}), b.at({f0, e1})));
}

TEST_CASE("discharge needs an already-covered pair the invariant entails") {
  Program p0 = count_prog("c0");
  Program p1 = count_prog("c1");
  Path short0 = mk_path(p0, {"A", "H"});
  Path short1 = mk_path(p1, {"A", "H"});
  Path long0 = mk_path(p0, {"A", "H", "B", "H"});
  Path long1 = mk_path(p1, {"A", "H", "B", "H"});

  PathPairMap invs;
  invs[{short0, short1}] = plain_ge("i", 0, 0);           // weaker
  invs[{long0, long1}] = plain_ge("i", 0, 1);             // stronger

  PathPairSet covered;
  CHECK_FALSE(is_dis(invs, long0, long1, covered));

  covered.insert({short0, short1});
  CHECK(is_dis(invs, long0, long1, covered));             // i>=1 entails i>=0
  PathPairSet only_long;
  only_long.insert({long0, long1});
  CHECK_FALSE(is_dis(invs, short0, short1, only_long));   // not the other way
  CHECK(is_dis(invs, short0, short1,
               PathPairSet{{short0, short1}}));           // itself counts

  SUBCASE("different tails never discharge") {
    PathPairMap m2 = invs;
    Path other1 = mk_path(p1, {"A", "H", "B"});
    m2[{long0, other1}] = plain_ge("i", 0, 1);
    PathPairSet cov2;
    cov2.insert({short0, short1});
    CHECK_FALSE(is_dis(m2, long0, other1, cov2));
  }
}

TEST_CASE("the inductiveness search reports the first uncovered pair") {
  Program p0 = load_program(std::string(PEQ_CORPUS_DIR) + "/climbStairs0.peq");
  Program p1 = load_program(std::string(PEQ_CORPUS_DIR) + "/climbStairs1.peq");

  ChkIndResult r = chk_ind(p0, p1, {});
  REQUIRE(r.kind == ChkIndResult::Kind::CexPair);
  // completions of the entry pair: the lexicographically first shortest
  // walk to FINAL goes through the small-input branch
  CHECK(path_names(r.cex0) == "2.5.FINAL");
  CHECK(path_names(r.cex1) == "2.5.FINAL");
}

TEST_CASE("a map from one agreeing run is not yet inductive") {
  Program p0 = load_program(std::string(PEQ_CORPUS_DIR) + "/climbStairs0.peq");
  Program p1 = load_program(std::string(PEQ_CORPUS_DIR) + "/climbStairs1.peq");
  Path c0 = mk_path(p0, {"2", "6", "7", "8", "13", "10", "11", "12", "13",
                         "9", "15", "FINAL"});
  Path c1 = mk_path(p1, {"2", "6", "7", "8", "13", "10", "11", "12", "13",
                         "10", "11", "12", "13", "9", "15", "FINAL"});

  PathInvsResult pi = path_invs(p0, p1, c0, c1);
  REQUIRE(pi.kind == PathInvsResult::Kind::Invs);
  CHECK(pi.invs.size() == c0.size() * c1.size());

  // paths through the small-input branch are not covered yet, so the
  // next counterexample pair must visit location 5
  ChkIndResult r = chk_ind(p0, p1, pi.invs);
  REQUIRE(r.kind == ChkIndResult::Kind::CexPair);
  CHECK(pair_mentions(r, "5"));
}

TEST_CASE("location collapse disjoins entries that share tails") {
  Program p0 = count_prog("c0");
  Program p1 = count_prog("c1");
  CHECK(locrels_of({}).entries.empty());

  PathPairMap r;
  r[{mk_path(p0, {"A", "H"}), mk_path(p1, {"A", "H"})}] =
      plain_ge("i", 0, 0);
  r[{mk_path(p0, {"A", "H", "B", "H"}), mk_path(p1, {"A", "H", "B", "H"})}] =
      plain_ge("i", 0, 5);
  r[{mk_path(p0, {"A"}), mk_path(p1, {"A"})}] = plain_eq("n", 0, "n", 1);

  LocationPairMap m = locrels_of(r);
  CHECK(m.entries.size() == 2);
  Fml at_h = m.at("H", "H");
  // i>=5 is swallowed by i>=0 during simplification
  CHECK(fml_eq(at_h, plain_ge("i", 0, 0)));
  CHECK(fml_eq(m.at("A", "A"), plain_eq("n", 0, "n", 1)));
}

TEST_CASE("end-to-end verdicts on small pairs") {
  SUBCASE("identical straight-line programs are equivalent") {
    Program p0 = id_prog("left");
    Program p1 = id_prog("right");
    VerifyOutcome v = pequod(p0, p1);
    REQUIRE(v.kind == VerifyOutcome::Kind::Equivalent);
    CHECK(check_location_invariants(p0, p1, v.certificate).status ==
          CheckStatus::Valid);
    CHECK(v.certificate.digest0 == program_digest(p0));
  }
  SUBCASE("an off-by-one result is refuted with a confirmed witness") {
    Program p0 = id_prog("id");
    Program p1 = inc_prog();
    VerifyOutcome v = pequod(p0, p1);
    REQUIRE(v.kind == VerifyOutcome::Kind::NotEquivalent);
    CHECK(v.replay.confirmed);
    CHECK(v.replay.ret0 != v.replay.ret1);
  }
  SUBCASE("branching programs need invariants for both branch pairs") {
    Program p0 = abs_prog("abs0");
    Program p1 = abs_prog("abs1");
    VerifyOutcome v = pequod(p0, p1);
    REQUIRE(v.kind == VerifyOutcome::Kind::Equivalent);
    CHECK(check_location_invariants(p0, p1, v.certificate).status ==
          CheckStatus::Valid);
  }
  SUBCASE("looping programs converge through discharge") {
    Program p0 = count_prog("c0");
    Program p1 = count_prog("c1");
    VerifyOutcome v = pequod(p0, p1);
    REQUIRE(v.kind == VerifyOutcome::Kind::Equivalent);
    CHECK(check_location_invariants(p0, p1, v.certificate).status ==
          CheckStatus::Valid);
  }
  SUBCASE("a loop bound off by one is refuted") {
    Program p0 = count_prog("c0");
    Program p1 = parse_program(
        "prog c2;\nparam n;\nvar i;\nreturn result;\ninit A;\nfinal F;\n"
        "A -> H: i := 0;\n"
        "H -> B: assume i < n - 1;\n"
        "B -> H: i := i + 1;\n"
        "H -> E: assume i >= n - 1;\n"
        "E -> F: result := i;\n",
        "c2");
    VerifyOutcome v = pequod(p0, p1);
    REQUIRE(v.kind == VerifyOutcome::Kind::NotEquivalent);
    CHECK(v.replay.confirmed);
  }
}

TEST_CASE("memoization does not change verdicts") {
  Program p0 = abs_prog("abs0");
  Program p1 = abs_prog("abs1");
  EngineOptions with;
  EngineOptions without;
  without.memoize = false;
  VerifyOutcome a = pequod(p0, p1, with);
  VerifyOutcome b = pequod(p0, p1, without);
  CHECK(a.kind == b.kind);
  CHECK(a.iterations == b.iterations);

  Program q0 = count_prog("c0");
  Program q1 = count_prog("c1");
  VerifyOutcome c = pequod(q0, q1, with);
  VerifyOutcome d = pequod(q0, q1, without);
  CHECK(c.kind == d.kind);
  CHECK(c.iterations == d.iterations);
}

TEST_CASE("exhausted searches surface as unknown") {
  Program p0 = count_prog("c0");
  Program p1 = count_prog("c1");
  EngineOptions opts;
  opts.max_iterations = 1;
  VerifyOutcome v = pequod(p0, p1, opts);
  CHECK(v.kind == VerifyOutcome::Kind::Unknown);
  CHECK_FALSE(v.reason.empty());
}
