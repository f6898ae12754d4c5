#include "peq/cert.hpp"

#include "peq/encode.hpp"
#include "peq/sexpr.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <sstream>

namespace peq {

namespace {

using nlohmann::json;

std::string rel_text(Rel rel) {
  switch (rel) {
  case Rel::Le:
    return "<=";
  case Rel::Eq:
    return "==";
  case Rel::Ne:
    return "!=";
  }
  return "?";
}

void print_expr(std::ostringstream& out, const Expr& e) {
  switch (e.kind) {
  case Expr::Kind::Const:
    out << e.value;
    return;
  case Expr::Kind::Var:
    out << e.var;
    return;
  case Expr::Kind::Add:
  case Expr::Kind::Sub:
    out << '(';
    print_expr(out, *e.lhs);
    out << (e.kind == Expr::Kind::Add ? " + " : " - ");
    print_expr(out, *e.rhs);
    out << ')';
    return;
  case Expr::Kind::Mul:
    out << '(' << e.value << " * ";
    print_expr(out, *e.lhs);
    out << ')';
    return;
  case Expr::Kind::Div:
  case Expr::Kind::Mod:
    out << '(';
    print_expr(out, *e.lhs);
    out << (e.kind == Expr::Kind::Div ? " / " : " % ") << e.value << ')';
    return;
  }
}

std::string instr_text(const Instr& instr) {
  std::ostringstream out;
  switch (instr.kind) {
  case Instr::Kind::Skip:
    out << "skip";
    break;
  case Instr::Kind::Assume:
    out << "assume ";
    print_expr(out, *instr.expr);
    out << ' ' << rel_text(instr.rel) << " 0";
    break;
  case Instr::Kind::Assign:
    out << instr.target << " := ";
    print_expr(out, *instr.expr);
    break;
  }
  return out.str();
}

std::string hex(const unsigned char* data, size_t len) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (size_t i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

// Entailment that reports which condition went undecided.
struct CondChecker {
  const SolverLimits& limits;
  std::optional<std::string> first_unknown;

  bool holds(const Fml& a, const Fml& b, const std::string& what) {
    Tri r = entails(a, b, limits);
    if (r == Tri::Yes)
      return true;
    if (r == Tri::Unknown) {
      if (!first_unknown)
        first_unknown = what;
      return true; // only a definite "no" is a violation
    }
    return false;
  }
};

std::string pair_text(const std::string& l0, const std::string& l1) {
  return "(" + l0 + ", " + l1 + ")";
}

std::string pair_text(const Path& p0, const Path& p1) {
  return "(" + path_names(p0) + ", " + path_names(p1) + ")";
}

// Formulas inside certificates must speak only about the two sides'
// program variables.
std::optional<std::string> vocab_violation(const Fml& f, const Program& p0,
                                           const Program& p1) {
  for (VarId v : f.vocab()) {
    const VarInstance& inst = var_info(v);
    const Program* prog =
        inst.side == 0 ? &p0 : inst.side == 1 ? &p1 : nullptr;
    if (prog == nullptr || inst.copy != CopyKind::Plain)
      return "variable " + var_display(v) + " is not a sided program variable";
    const std::vector<std::string>& vars = prog->all_vars();
    if (std::find(vars.begin(), vars.end(), inst.base) == vars.end())
      return "variable " + var_display(v) + " is not declared by " +
             prog->name;
  }
  return std::nullopt;
}

bool known_loc(const Program& prog, const std::string& name) {
  return std::binary_search(prog.loc_names.begin(), prog.loc_names.end(),
                            name);
}

json cert_map_to_json(const LocationPairMap& m) {
  json arr = json::array();
  for (const auto& [key, f] : m.entries) {
    if (f.is_false())
      continue;
    arr.push_back(
        {{"loc0", key.first}, {"loc1", key.second}, {"formula", to_sexpr(f)}});
  }
  return arr;
}

LocationPairMap cert_map_from_json(const json& arr) {
  if (!arr.is_array())
    throw Error(Error::Kind::Parse, "certificate: expected an array of entries");
  LocationPairMap m;
  for (const json& item : arr) {
    if (!item.is_object() || !item.contains("loc0") || !item.contains("loc1") ||
        !item.contains("formula") || !item["loc0"].is_string() ||
        !item["loc1"].is_string() || !item["formula"].is_string())
      throw Error(Error::Kind::Parse,
                  "certificate: entry needs loc0, loc1 and formula strings");
    m.disjoin(item["loc0"].get<std::string>(), item["loc1"].get<std::string>(),
              parse_sexpr(item["formula"].get<std::string>()));
  }
  return m;
}

} // namespace

Fml LocationPairMap::at(const std::string& l0, const std::string& l1) const {
  auto it = entries.find({l0, l1});
  return it == entries.end() ? f_false() : it->second;
}

void LocationPairMap::set(const std::string& l0, const std::string& l1,
                          Fml f) {
  if (f.is_false())
    entries.erase({l0, l1});
  else
    entries[{l0, l1}] = std::move(f);
}

void LocationPairMap::disjoin(const std::string& l0, const std::string& l1,
                              const Fml& f) {
  set(l0, l1, f_or(at(l0, l1), f));
}

Fml pre_relation(const Program& p0, const Program& p1, const RelSpec& rels) {
  return rels.pre ? *rels.pre : params_eq_plain(p0, p1);
}

Fml post_relation(const Program& p0, const Program& p1, const RelSpec& rels) {
  return rels.post ? *rels.post : ret_eq_plain(p0, p1);
}

std::string canonical_program_text(const Program& prog) {
  std::ostringstream out;
  out << "prog " << prog.name << ";\n";
  for (const std::string& p : prog.params)
    out << "param " << p << ";\n";
  std::vector<std::string> locals = prog.locals;
  std::sort(locals.begin(), locals.end());
  for (const std::string& v : locals)
    out << "var " << v << ";\n";
  out << "return " << prog.ret << ";\n";
  out << "init " << prog.loc_name(prog.init_loc) << ";\n";
  out << "final " << prog.loc_name(prog.final_loc) << ";\n";
  std::vector<const Edge*> edges;
  for (const Edge& e : prog.edges)
    edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [&](const Edge* a, const Edge* b) {
    return std::pair(prog.loc_name(a->src), prog.loc_name(a->dst)) <
           std::pair(prog.loc_name(b->src), prog.loc_name(b->dst));
  });
  for (const Edge* e : edges)
    out << prog.loc_name(e->src) << " -> " << prog.loc_name(e->dst) << ": "
        << instr_text(e->instr) << ";\n";
  return out.str();
}

std::string program_digest(const Program& prog) {
  std::string text = canonical_program_text(prog);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) !=
      1)
    throw Error(Error::Kind::Internal, "sha-256 digest failed");
  return hex(md, len);
}

bool digests_match(const ProofCertificate& cert, const Program& p0,
                   const Program& p1) {
  return cert.digest0 == program_digest(p0) &&
         cert.digest1 == program_digest(p1);
}

CheckResult check_location_invariants(const Program& p0, const Program& p1,
                                      const ProofCertificate& cert,
                                      const RelSpec& rels,
                                      const SolverLimits& limits) {
  const std::string f0 = p0.loc_name(p0.final_loc);
  const std::string f1 = p1.loc_name(p1.final_loc);
  const LocationPairMap* maps[2] = {&cert.i0, &cert.i1};

  for (int side = 0; side < 2; ++side) {
    for (const auto& [key, f] : maps[side]->entries) {
      if (f.is_false())
        continue;
      if (!known_loc(p0, key.first) || !known_loc(p1, key.second))
        return {CheckStatus::Invalid, "entry at unknown location pair " +
                                          pair_text(key.first, key.second)};
      if (auto bad = vocab_violation(f, p0, p1))
        return {CheckStatus::Invalid,
                "entry at " + pair_text(key.first, key.second) + ": " + *bad};
    }
  }

  CondChecker ck{limits, std::nullopt};
  auto both_at = [&](const std::string& l0, const std::string& l1) {
    return f_or(cert.i0.at(l0, l1), cert.i1.at(l0, l1));
  };

  // entry coverage: equal inputs with zeroed locals start inside the maps
  Fml pre = f_and({pre_relation(p0, p1, rels), locals_zero_plain(p0, 0),
                   locals_zero_plain(p1, 1)});
  std::string entry_pair =
      pair_text(p0.loc_name(p0.init_loc), p1.loc_name(p1.init_loc));
  if (!ck.holds(pre,
                both_at(p0.loc_name(p0.init_loc), p1.loc_name(p1.init_loc)),
                "entry coverage at " + entry_pair))
    return {CheckStatus::Invalid, "entry coverage fails at " + entry_pair};

  // step closure: each map absorbs its own side's transitions
  for (int side = 0; side < 2; ++side) {
    const Program& stepping = side == 0 ? p0 : p1;
    for (const auto& [key, f] : maps[side]->entries) {
      if (f.is_false())
        continue;
      const std::string& own = side == 0 ? key.first : key.second;
      const std::string& other = side == 0 ? key.second : key.first;
      uint32_t src = stepping.loc_index(own);
      for (uint32_t ei : stepping.out_edges.at(src)) {
        const Edge& edge = stepping.edges.at(ei);
        const std::string& dst = stepping.loc_name(edge.dst);
        Fml target = side == 0 ? both_at(dst, other) : both_at(other, dst);
        std::string what = "side-" + std::to_string(side) + " step " + own +
                           " -> " + dst + " from " +
                           pair_text(key.first, key.second);
        if (!ck.holds(f_and(f, step_relation(stepping, edge, side)),
                      plain_to_primed(target, side), what))
          return {CheckStatus::Invalid, "step closure fails on " + what};
      }
    }
  }

  // result agreement at the final pair
  if (!ck.holds(both_at(f0, f1), post_relation(p0, p1, rels),
                "result agreement at " + pair_text(f0, f1)))
    return {CheckStatus::Invalid,
            "result agreement fails at " + pair_text(f0, f1)};

  // handover: once a side has finished, the pair must be covered by
  // the map that still moves the unfinished side
  for (const auto& [key, f] : cert.i0.entries) {
    if (f.is_false() || key.first != f0 || key.second == f1)
      continue;
    std::string what =
        "handover of finished side 0 at " + pair_text(key.first, key.second);
    if (!ck.holds(f, cert.i1.at(key.first, key.second), what))
      return {CheckStatus::Invalid, what + " fails"};
  }
  for (const auto& [key, f] : cert.i1.entries) {
    if (f.is_false() || key.second != f1 || key.first == f0)
      continue;
    std::string what =
        "handover of finished side 1 at " + pair_text(key.first, key.second);
    if (!ck.holds(f, cert.i0.at(key.first, key.second), what))
      return {CheckStatus::Invalid, what + " fails"};
  }

  if (ck.first_unknown)
    return {CheckStatus::Inconclusive, "undecided query: " + *ck.first_unknown};
  return {CheckStatus::Valid, ""};
}

bool PathPairLess::operator()(const std::pair<Path, Path>& a,
                              const std::pair<Path, Path>& b) const {
  if (path_less(a.first, b.first))
    return true;
  if (path_less(b.first, a.first))
    return false;
  return path_less(a.second, b.second);
}

CheckResult check_path_pair_invariants(const Program& p0, const Program& p1,
                                       const PathPairMap& invs,
                                       const RelSpec& rels,
                                       const SolverLimits& limits) {
  for (const auto& [key, f] : invs)
    if (auto bad = vocab_violation(f, p0, p1))
      return {CheckStatus::Invalid,
              "entry at " + pair_text(key.first, key.second) + ": " + *bad};

  CondChecker ck{limits, std::nullopt};

  Path entry0{&p0, {p0.init_loc}};
  Path entry1{&p1, {p1.init_loc}};
  auto at_entry = invs.find({entry0, entry1});
  if (at_entry != invs.end()) {
    Fml pre = f_and({pre_relation(p0, p1, rels), locals_zero_plain(p0, 0),
                     locals_zero_plain(p1, 1)});
    if (!ck.holds(pre, at_entry->second,
                  "entry coverage at " + pair_text(entry0, entry1)))
      return {CheckStatus::Invalid,
              "entry coverage fails at " + pair_text(entry0, entry1)};
  }

  for (const auto& [key, f] : invs) {
    const auto& [q0, q1] = key;
    // consecution from the one-step parent on each side
    for (int side = 0; side < 2; ++side) {
      const Path& grown = side == 0 ? q0 : q1;
      if (grown.size() < 2)
        continue;
      Path parent{grown.prog,
                  {grown.locs.begin(), grown.locs.end() - 1}};
      auto pit = side == 0 ? invs.find({parent, q1}) : invs.find({q0, parent});
      if (pit == invs.end())
        continue;
      const Program& stepping = side == 0 ? p0 : p1;
      auto ei = stepping.edge_between(grown.locs[grown.size() - 2],
                                      grown.tail());
      if (!ei)
        throw Error(Error::Kind::Internal, "path without a connecting edge");
      Fml step = step_relation(stepping, stepping.edges.at(*ei), side);
      std::string what = "side-" + std::to_string(side) + " consecution into " +
                         pair_text(q0, q1);
      if (!ck.holds(f_and(pit->second, step), plain_to_primed(f, side), what))
        return {CheckStatus::Invalid, what + " fails"};
    }
    if (q0.tail_is_final() && q1.tail_is_final()) {
      std::string what = "result agreement at " + pair_text(q0, q1);
      if (!ck.holds(f, post_relation(p0, p1, rels), what))
        return {CheckStatus::Invalid, what + " fails"};
    }
  }

  if (ck.first_unknown)
    return {CheckStatus::Inconclusive, "undecided query: " + *ck.first_unknown};
  return {CheckStatus::Valid, ""};
}

ReplayResult replay_counterexample(const Program& p0, const Program& p1,
                                   const Counterexample& cex,
                                   const RelSpec& rels, uint64_t fuel) {
  ReplayResult out;
  RunResult r0 = run_program(p0, cex.args0, fuel);
  RunResult r1 = run_program(p1, cex.args1, fuel);
  out.status0 = r0.status;
  out.status1 = r1.status;
  out.ret0 = r0.ret;
  out.ret1 = r1.ret;
  auto status_text = [](RunResult::Status s) {
    return s == RunResult::Status::Stuck ? "got stuck" : "ran out of fuel";
  };
  if (r0.status != RunResult::Status::Complete) {
    out.reason = "side 0 " + std::string(status_text(r0.status));
    return out;
  }
  if (r1.status != RunResult::Status::Complete) {
    out.reason = "side 1 " + std::string(status_text(r1.status));
    return out;
  }

  // the claimed relation violation must show up concretely
  Fml post = post_relation(p0, p1, rels);
  std::map<VarId, Int> finals;
  for (VarId v : post.vocab()) {
    const VarInstance& inst = var_info(v);
    const auto& store = inst.side == 0 ? r0.stores.back() : r1.stores.back();
    auto it = store.find(inst.base);
    if (it == store.end()) {
      out.reason = "final relation mentions unknown variable " +
                   var_display(v);
      return out;
    }
    finals[v] = it->second;
  }
  if (eval(post, finals)) {
    out.reason = "the final states satisfy the output relation";
    return out;
  }

  // executed traces must match the model the claim came from
  for (int side = 0; side < 2; ++side) {
    const RunResult& run = side == 0 ? r0 : r1;
    const Path& path = side == 0 ? cex.path0 : cex.path1;
    const Program& prog = side == 0 ? p0 : p1;
    if (run.path != path.locs) {
      out.reason =
          "side " + std::to_string(side) + " executed a different path";
      return out;
    }
    for (size_t len = 1; len <= path.locs.size(); ++len) {
      Path prefix{&prog,
                  {path.locs.begin(), path.locs.begin() + (long)len}};
      std::string key = path_key(side, prefix);
      for (const std::string& base : prog.all_vars()) {
        auto mit = cex.model.find(intern_var(base, side, CopyKind::Path, key));
        if (mit == cex.model.end())
          continue; // unconstrained in the model
        const Int& got = run.stores.at(len - 1).at(base);
        if (mit->second != got) {
          out.reason = "side " + std::to_string(side) + " store differs at " +
                       prog.loc_name(path.locs[len - 1]) + ": " + base +
                       " is " + got.str() + ", model says " +
                       mit->second.str();
          return out;
        }
      }
    }
  }

  out.confirmed = true;
  return out;
}

std::string certificate_to_json(const ProofCertificate& cert) {
  json j;
  j["programs"]["p0"] = {{"name", cert.name0}, {"sha256", cert.digest0}};
  j["programs"]["p1"] = {{"name", cert.name1}, {"sha256", cert.digest1}};
  j["i0"] = cert_map_to_json(cert.i0);
  j["i1"] = cert_map_to_json(cert.i1);
  return j.dump(2) + "\n";
}

ProofCertificate certificate_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(Error::Kind::Parse, "certificate: malformed json");
  ProofCertificate cert;
  try {
    cert.name0 = j.at("programs").at("p0").at("name").get<std::string>();
    cert.digest0 = j.at("programs").at("p0").at("sha256").get<std::string>();
    cert.name1 = j.at("programs").at("p1").at("name").get<std::string>();
    cert.digest1 = j.at("programs").at("p1").at("sha256").get<std::string>();
    cert.i0 = cert_map_from_json(j.at("i0"));
    cert.i1 = cert_map_from_json(j.at("i1"));
  } catch (const json::exception& e) {
    throw Error(Error::Kind::Parse,
                std::string("certificate: ") + e.what());
  }
  return cert;
}

std::string counterexample_to_json(const Program& p0, const Program& p1,
                                   const Counterexample& cex,
                                   const ReplayResult& replay) {
  json j;
  auto inputs = [&](const Program& prog, const std::vector<Int>& args) {
    json in = json::object();
    for (size_t i = 0; i < prog.params.size() && i < args.size(); ++i)
      in[prog.params[i]] = args[i].str();
    return in;
  };
  j["inputs"]["p0"] = inputs(p0, cex.args0);
  j["inputs"]["p1"] = inputs(p1, cex.args1);
  j["paths"]["p0"] = path_names(cex.path0);
  j["paths"]["p1"] = path_names(cex.path1);
  j["confirmed"] = replay.confirmed;
  if (!replay.confirmed)
    j["reason"] = replay.reason;
  if (replay.status0 == RunResult::Status::Complete)
    j["returns"]["p0"] = replay.ret0.str();
  if (replay.status1 == RunResult::Status::Complete)
    j["returns"]["p1"] = replay.ret1.str();
  return j.dump(2) + "\n";
}

} // namespace peq
