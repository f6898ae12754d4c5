#include <doctest.h>

#include "peq/cert.hpp"
#include "peq/parse.hpp"

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

Fml vars_eq(const char* a, int sa, const char* b, int sb) {
  LinExpr e = LinExpr::var(intern_var(a, sa, CopyKind::Plain));
  e.add(LinExpr::var(intern_var(b, sb, CopyKind::Plain)), -1);
  return f_atom(Rel::Eq, e);
}

Path full_path(const Program& prog) {
  return Path{&prog, {prog.init_loc, prog.final_loc}};
}

} // namespace

TEST_CASE("location pair maps default to false and disjoin entries") {
  LocationPairMap m;
  CHECK(m.at("a", "b").is_false());
  m.set("a", "b", vars_eq("n", 0, "n", 1));
  CHECK(m.at("a", "b").kind() == FKind::Atom);
  m.disjoin("a", "b", f_true());
  CHECK(m.at("a", "b").is_true());
  m.set("a", "b", f_false());
  CHECK(m.entries.empty());
}

TEST_CASE("canonical text and digests identify programs") {
  Program a = id_prog("id");
  Program b = id_prog("id");
  Program c = inc_prog();
  std::string text = canonical_program_text(a);
  CHECK(text.find("prog id;") != std::string::npos);
  CHECK(text.find("I -> F: result := n;") != std::string::npos);
  CHECK(program_digest(a) == program_digest(b));
  CHECK(program_digest(a) != program_digest(c));
  CHECK(program_digest(a).size() == 64);

  ProofCertificate cert;
  cert.digest0 = program_digest(a);
  cert.digest1 = program_digest(c);
  CHECK(digests_match(cert, a, c));
  CHECK_FALSE(digests_match(cert, c, a));
}

TEST_CASE("a hand-built identity certificate validates") {
  Program p0 = id_prog("left");
  Program p1 = id_prog("right");

  ProofCertificate cert;
  cert.i0.set("I", "I", vars_eq("n", 0, "n", 1));
  cert.i1.set("F", "I", vars_eq("result", 0, "n", 1));
  cert.i1.set("F", "F", vars_eq("result", 0, "result", 1));
  CHECK(check_location_invariants(p0, p1, cert).status == CheckStatus::Valid);

  SUBCASE("weakening the entry invariant breaks step closure") {
    cert.i0.set("I", "I", f_true());
    CheckResult r = check_location_invariants(p0, p1, cert);
    CHECK(r.status == CheckStatus::Invalid);
    CHECK(r.detail.find("step closure") != std::string::npos);
  }
  SUBCASE("weakening the final entry breaks result agreement") {
    cert.i1.set("F", "F", f_true());
    CheckResult r = check_location_invariants(p0, p1, cert);
    CHECK(r.status == CheckStatus::Invalid);
    CHECK(r.detail.find("result agreement") != std::string::npos);
  }
  SUBCASE("all-false maps fail entry coverage") {
    ProofCertificate empty;
    CheckResult r = check_location_invariants(p0, p1, empty);
    CHECK(r.status == CheckStatus::Invalid);
    CHECK(r.detail.find("entry coverage") != std::string::npos);
  }
  SUBCASE("unknown locations and variables are rejected") {
    ProofCertificate bad = cert;
    bad.i0.set("I", "Z", f_true());
    CHECK(check_location_invariants(p0, p1, bad).status ==
          CheckStatus::Invalid);
    bad = cert;
    bad.i0.set("I", "I", vars_eq("ghost", 0, "n", 1));
    CheckResult r = check_location_invariants(p0, p1, bad);
    CHECK(r.status == CheckStatus::Invalid);
    CHECK(r.detail.find("ghost") != std::string::npos);
  }
}

TEST_CASE("a certificate that never schedules one side is rejected") {
  // these maps satisfy entry coverage, both step closures, and result
  // agreement (vacuously) for any program pair; only the handover rule
  // notices that side 1 never has to move, so nothing forces the
  // product to reach the final pair
  Program p0 = id_prog("left");
  Program p1 = inc_prog();
  ProofCertificate fake;
  fake.i0.set("I", "I", f_true());
  fake.i0.set("F", "I", f_true());
  CheckResult r = check_location_invariants(p0, p1, fake);
  CHECK(r.status == CheckStatus::Invalid);
  CHECK(r.detail.find("handover") != std::string::npos);
}

TEST_CASE("replay confirms genuine disagreements and rejects fabrications") {
  Program p0 = id_prog("id");
  Program p1 = inc_prog();

  Counterexample cex;
  cex.args0 = {Int(0)};
  cex.args1 = {Int(0)};
  cex.path0 = full_path(p0);
  cex.path1 = full_path(p1);

  ReplayResult r = replay_counterexample(p0, p1, cex);
  CHECK(r.confirmed);
  CHECK(r.ret0 == 0);
  CHECK(r.ret1 == 1);

  SUBCASE("agreeing programs refute the claim") {
    Program same = id_prog("same");
    Counterexample c2 = cex;
    c2.path1 = full_path(same);
    ReplayResult r2 = replay_counterexample(p0, same, c2);
    CHECK_FALSE(r2.confirmed);
    CHECK(r2.reason.find("output relation") != std::string::npos);
  }
  SUBCASE("a model that contradicts the run is reported") {
    Counterexample c2 = cex;
    c2.model[intern_var("result", 0, CopyKind::Path,
                        path_key(0, c2.path0))] = 7;
    ReplayResult r2 = replay_counterexample(p0, p1, c2);
    CHECK_FALSE(r2.confirmed);
    CHECK(r2.reason.find("store differs") != std::string::npos);
  }
  SUBCASE("a different executed path is reported") {
    Counterexample c2 = cex;
    c2.path0 = Path{&p0, {p0.init_loc}};
    ReplayResult r2 = replay_counterexample(p0, p1, c2);
    CHECK_FALSE(r2.confirmed);
    CHECK(r2.reason.find("different path") != std::string::npos);
  }
}

TEST_CASE("certificates round-trip through json") {
  Program p0 = id_prog("left");
  Program p1 = id_prog("right");
  ProofCertificate cert;
  cert.name0 = p0.name;
  cert.name1 = p1.name;
  cert.digest0 = program_digest(p0);
  cert.digest1 = program_digest(p1);
  cert.i0.set("I", "I", vars_eq("n", 0, "n", 1));
  cert.i1.set("F", "F", vars_eq("result", 0, "result", 1));
  cert.i1.set("F", "I", f_true());

  std::string text = certificate_to_json(cert);
  ProofCertificate back = certificate_from_json(text);
  CHECK(back.name0 == cert.name0);
  CHECK(back.digest0 == cert.digest0);
  CHECK(back.digest1 == cert.digest1);
  CHECK(back.i0.entries.size() == cert.i0.entries.size());
  CHECK(back.i1.entries.size() == cert.i1.entries.size());
  for (const auto& [key, f] : cert.i0.entries)
    CHECK(fml_eq(back.i0.at(key.first, key.second), f));
  for (const auto& [key, f] : cert.i1.entries)
    CHECK(fml_eq(back.i1.at(key.first, key.second), f));

  CHECK_THROWS_AS((void)certificate_from_json("not json"), Error);
  CHECK_THROWS_AS((void)certificate_from_json("{\"i0\": 3}"), Error);
  CHECK_THROWS_AS(
      (void)certificate_from_json(
          "{\"programs\":{\"p0\":{\"name\":\"a\",\"sha256\":\"x\"},"
          "\"p1\":{\"name\":\"b\",\"sha256\":\"y\"}},"
          "\"i0\":[{\"loc0\":\"I\"}],\"i1\":[]}"),
      Error);
}

TEST_CASE("counterexample json carries inputs, paths, and returns") {
  Program p0 = id_prog("id");
  Program p1 = inc_prog();
  Counterexample cex;
  cex.args0 = {Int(-3)};
  cex.args1 = {Int(-3)};
  cex.path0 = full_path(p0);
  cex.path1 = full_path(p1);
  ReplayResult r = replay_counterexample(p0, p1, cex);
  std::string text = counterexample_to_json(p0, p1, cex, r);
  CHECK(text.find("\"n\": \"-3\"") != std::string::npos);
  CHECK(text.find("\"confirmed\": true") != std::string::npos);
  CHECK(text.find("\"-3\"") != std::string::npos);
  CHECK(text.find("\"-2\"") != std::string::npos);
  CHECK(text.find("I.F") != std::string::npos);
}
