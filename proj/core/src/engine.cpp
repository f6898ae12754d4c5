#include "peq/engine.hpp"

#include "peq/encode.hpp"
#include "peq/itp.hpp"

#include <algorithm>
#include <string>

namespace peq {

namespace {

bool past_deadline(const EngineOptions& opts) {
  return opts.deadline &&
         std::chrono::steady_clock::now() > *opts.deadline;
}

// worklist order: fewest combined locations first, then location order
// (location indexes follow name order, so ties break lexicographically)
struct ObsLess {
  bool operator()(const std::pair<Path, Path>& a,
                  const std::pair<Path, Path>& b) const {
    size_t la = a.first.size() + a.second.size();
    size_t lb = b.first.size() + b.second.size();
    if (la != lb)
      return la < lb;
    if (a.first.locs != b.first.locs)
      return a.first.locs < b.first.locs;
    return a.second.locs < b.second.locs;
  }
};

using ObsSet = std::set<std::pair<Path, Path>, ObsLess>;

struct RecOut {
  enum class K { HasInd, Cex, Budget };
  K k = K::Budget;
  PathPairMap r0, r1; // pairs extended on each side, with their entries
  Path c0, c1;        // completed uncovered pair
};

struct Search {
  const Program& p0;
  const Program& p1;
  const PathPairMap& invs;
  const EngineOptions& opts;
  uint64_t pops = 0;
  bool out_of_time = false;
  std::optional<std::pair<Path, Path>> best; // smallest uncovered completion
  std::optional<ObsSet> frontier;            // live worklist at exhaustion
  std::map<std::string, RecOut> memo;

  bool exhausted(const ObsSet& obs) {
    if (out_of_time)
      return true;
    if (opts.deadline && (pops & 255) == 0 && past_deadline(opts))
      out_of_time = true;
    if (out_of_time || pops >= opts.state_budget) {
      if (!frontier)
        frontier = obs;
      return true;
    }
    return false;
  }
};

std::string memo_key(const ObsSet& obs, const PathPairSet& cov) {
  std::string key;
  auto put = [&key](const std::pair<Path, Path>& pr) {
    for (uint32_t l : pr.first.locs) {
      key += std::to_string(l);
      key += '.';
    }
    key += ':';
    for (uint32_t l : pr.second.locs) {
      key += std::to_string(l);
      key += '.';
    }
    key += ';';
  };
  for (const auto& pr : obs)
    put(pr);
  key += '#';
  for (const auto& pr : cov)
    put(pr);
  return key;
}

void extend_obs(ObsSet& obs, const std::pair<Path, Path>& pair, int side) {
  const Path& moving = side == 0 ? pair.first : pair.second;
  for (Path& q : ext(moving)) {
    if (side == 0)
      obs.insert({std::move(q), pair.second});
    else
      obs.insert({pair.first, std::move(q)});
  }
}

void note_best(Search& s, const RecOut& r) {
  if (r.k != RecOut::K::Cex)
    return;
  std::pair<Path, Path> cand{r.c0, r.c1};
  if (!s.best || ObsLess{}(cand, *s.best))
    s.best = std::move(cand);
}

RecOut rec(Search& s, ObsSet obs, PathPairSet cov) {
  std::string key;
  if (s.opts.memoize) {
    key = memo_key(obs, cov);
    auto hit = s.memo.find(key);
    if (hit != s.memo.end()) {
      note_best(s, hit->second);
      return hit->second;
    }
  }

  // pairs this frame extended, waiting for a successful suffix
  std::vector<std::pair<std::pair<Path, Path>, int>> pending;
  RecOut out;
  for (;;) {
    if (s.exhausted(obs)) {
      out.k = RecOut::K::Budget;
      break;
    }
    if (obs.empty()) {
      out.k = RecOut::K::HasInd;
      break;
    }
    ++s.pops;
    std::pair<Path, Path> pair = *obs.begin();
    obs.erase(obs.begin());

    auto dit = s.invs.find(pair);
    if (dit == s.invs.end()) {
      out.k = RecOut::K::Cex;
      out.c0 = cmpl(pair.first);
      out.c1 = cmpl(pair.second);
      break;
    }
    if (is_dis(s.invs, pair.first, pair.second, cov, s.opts.limits)) {
      cov.insert(pair);
      continue;
    }
    cov.insert(pair);

    bool fin0 = pair.first.tail_is_final();
    bool fin1 = pair.second.tail_is_final();
    if (fin0 || fin1) {
      // only one side can still move (both finished extends to nothing)
      int side = fin0 ? 1 : 0;
      extend_obs(obs, pair, side);
      pending.push_back({pair, side});
      continue;
    }

    // either side could make the map inductive; try side 0 first and
    // fall back to side 1, keeping the smaller counterexample
    ObsSet obs0 = obs;
    extend_obs(obs0, pair, 0);
    RecOut r0 = rec(s, std::move(obs0), cov);
    if (r0.k == RecOut::K::HasInd) {
      r0.r0.emplace(pair, dit->second);
      out = std::move(r0);
      break;
    }
    if (r0.k == RecOut::K::Budget) {
      out = std::move(r0);
      break;
    }
    ObsSet obs1 = std::move(obs);
    extend_obs(obs1, pair, 1);
    RecOut r1 = rec(s, std::move(obs1), cov);
    if (r1.k == RecOut::K::HasInd) {
      r1.r1.emplace(pair, dit->second);
      out = std::move(r1);
      break;
    }
    if (r1.k == RecOut::K::Budget) {
      out = std::move(r1);
      break;
    }
    out = ObsLess{}({r0.c0, r0.c1}, {r1.c0, r1.c1}) ? std::move(r0)
                                                    : std::move(r1);
    break;
  }

  if (out.k == RecOut::K::HasInd)
    for (auto& [pr, side] : pending) {
      Fml f = s.invs.at(pr);
      (side == 0 ? out.r0 : out.r1).emplace(pr, std::move(f));
    }
  note_best(s, out);
  if (s.opts.memoize && out.k != RecOut::K::Budget)
    s.memo[key] = out;
  return out;
}

} // namespace

PathInvsResult path_invs(const Program& p0, const Program& p1, const Path& c0,
                         const Path& c1, const EngineOptions& opts) {
  if (!c0.tail_is_final() || !c1.tail_is_final())
    throw Error(Error::Kind::Internal,
                "invariant synthesis needs complete paths");
  PathInvsResult out;
  const size_t m = c0.size(), n = c1.size();
  auto key0 = [&](size_t len) { return path_state_key(0, c0, len); };
  auto key1 = [&](size_t len) { return path_state_key(1, c1, len); };

  Fml pre = pre_relation(p0, p1, opts.rels);
  Fml post = post_relation(p0, p1, opts.rels);
  Fml pre_paths = f_and({plain_to_paths(pre, key0(1), key1(1)),
                         locals_zero_at(p0, 0, key0(1)),
                         locals_zero_at(p1, 1, key1(1))});
  Fml post_ne = plain_to_paths(f_not(post), key0(m), key1(n));

  Fml noneq = f_and(
      {path_formula(c0, 0), path_formula(c1, 1), pre_paths, post_ne});
  SatResult sat = is_sat(noneq, opts.limits);
  if (sat.kind == SatKind::Unknown) {
    out.reason = "disagreement check undecided";
    return out;
  }
  if (sat.kind == SatKind::Sat) {
    out.kind = PathInvsResult::Kind::NonEq;
    out.cex.path0 = c0;
    out.cex.path1 = c1;
    out.cex.model = std::move(sat.model);
    for (const std::string& prm : p0.params) {
      auto it = out.cex.model.find(intern_var(prm, 0, CopyKind::Path, key0(1)));
      out.cex.args0.push_back(it == out.cex.model.end() ? Int(0) : it->second);
    }
    for (const std::string& prm : p1.params) {
      auto it = out.cex.model.find(intern_var(prm, 1, CopyKind::Path, key1(1)));
      out.cex.args1.push_back(it == out.cex.model.end() ? Int(0) : it->second);
    }
    return out;
  }

  // the pair disagrees nowhere along these paths; interpolate an
  // invariant for every prefix pair, parents before children
  std::vector<Path> pfx0 = prefixes(c0);
  std::vector<Path> pfx1 = prefixes(c1);
  std::vector<std::vector<Fml>> entry(m + 1,
                                      std::vector<Fml>(n + 1, f_false()));
  for (size_t a = 1; a <= m; ++a) {
    for (size_t b = 1; b <= n; ++b) {
      if (past_deadline(opts)) {
        out.kind = PathInvsResult::Kind::Unknown;
        out.invs.clear();
        out.reason = "timeout";
        return out;
      }
      Fml prec;
      if (a == 1 && b == 1) {
        prec = pre_paths;
      } else {
        FmlVec cases;
        if (a > 1)
          cases.push_back(
              f_and(plain_to_paths(entry[a - 1][b], key0(a - 1), key1(b)),
                    step_at(c0, 0, a - 1)));
        if (b > 1)
          cases.push_back(
              f_and(plain_to_paths(entry[a][b - 1], key0(a), key1(b - 1)),
                    step_at(c1, 1, b - 1)));
        prec = f_or(std::move(cases));
      }
      Fml postc =
          f_and({steps_from(c0, 0, a), steps_from(c1, 1, b), post_ne});
      std::optional<Fml> itp = interpolate(prec, postc, opts.limits);
      if (!itp) {
        out.kind = PathInvsResult::Kind::Unknown;
        out.invs.clear();
        out.reason = "no invariant found for a prefix pair";
        return out;
      }
      entry[a][b] = simplify_bounded(paths_to_plain(*itp, key0(a), key1(b)), opts.limits);
      out.invs.emplace(std::pair(pfx0[a - 1], pfx1[b - 1]), entry[a][b]);
    }
  }
  out.kind = PathInvsResult::Kind::Invs;
  return out;
}

PathPairMap mrg(const PathPairMap& a, const PathPairMap& b,
                const SolverLimits& limits) {
  PathPairMap out = a;
  for (const auto& [key, f] : b) {
    auto [it, fresh] = out.emplace(key, f);
    if (!fresh)
      it->second = simplify_bounded(f_and(it->second, f), limits);
  }
  return out;
}

bool is_dis(const PathPairMap& invs, const Path& p0, const Path& p1,
            const PathPairSet& covered, const SolverLimits& limits) {
  auto it = invs.find({p0, p1});
  if (it == invs.end())
    throw Error(Error::Kind::Internal, "discharge query on an uncovered pair");
  for (const auto& cand : covered) {
    if (cand.first.tail() != p0.tail() || cand.second.tail() != p1.tail())
      continue;
    if (path_eq(cand.first, p0) && path_eq(cand.second, p1))
      return true;
    auto cit = invs.find(cand);
    if (cit == invs.end())
      continue;
    if (entails(it->second, cit->second, limits) == Tri::Yes)
      return true;
  }
  return false;
}

ChkIndResult chk_ind(const Program& p0, const Program& p1,
                     const PathPairMap& invs, const EngineOptions& opts) {
  Search s{p0, p1, invs, opts, 0, false, std::nullopt, std::nullopt, {}};
  ObsSet obs;
  obs.insert({Path{&p0, {p0.init_loc}}, Path{&p1, {p1.init_loc}}});
  RecOut r = rec(s, std::move(obs), {});

  ChkIndResult out;
  switch (r.k) {
  case RecOut::K::HasInd:
    out.kind = ChkIndResult::Kind::HasInd;
    out.r0 = std::move(r.r0);
    out.r1 = std::move(r.r1);
    return out;
  case RecOut::K::Cex:
    out.kind = ChkIndResult::Kind::CexPair;
    out.cex0 = std::move(r.c0);
    out.cex1 = std::move(r.c1);
    return out;
  case RecOut::K::Budget:
    break;
  }
  // ran out of steam; fall back to the smallest uncovered pair seen,
  // or scan the frontier for one not yet popped
  if (!s.best && s.frontier) {
    for (const auto& pr : *s.frontier) {
      if (invs.count(pr))
        continue;
      s.best = {cmpl(pr.first), cmpl(pr.second)};
      break;
    }
  }
  if (s.best) {
    out.kind = ChkIndResult::Kind::CexPair;
    out.cex0 = std::move(s.best->first);
    out.cex1 = std::move(s.best->second);
    return out;
  }
  out.kind = ChkIndResult::Kind::Exhausted;
  out.reason = s.out_of_time ? "timeout" : "state budget exhausted";
  return out;
}

LocationPairMap locrels_of(const PathPairMap& r, const SolverLimits& limits) {
  LocationPairMap out;
  for (const auto& [key, f] : r)
    out.disjoin(key.first.prog->loc_name(key.first.tail()),
                key.second.prog->loc_name(key.second.tail()), f);
  for (auto& [key, f] : out.entries)
    f = simplify_bounded(f, limits);
  return out;
}

VerifyOutcome pequod(const Program& p0, const Program& p1,
                     const EngineOptions& opts) {
  auto start = std::chrono::steady_clock::now();
  EngineOptions run = opts;
  if (!run.deadline)
    run.deadline =
        start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(run.timeout_seconds));

  VerifyOutcome out;
  auto done = [&](VerifyOutcome& o) -> VerifyOutcome& {
    o.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    return o;
  };

  PathPairMap invs;
  for (uint32_t iter = 1; iter <= run.max_iterations; ++iter) {
    out.iterations = iter;
    if (past_deadline(run)) {
      out.reason = "timeout";
      return done(out);
    }
    ChkIndResult ck = chk_ind(p0, p1, invs, run);
    if (ck.kind == ChkIndResult::Kind::HasInd) {
      if (run.on_has_ind)
        run.on_has_ind(ck.r0, ck.r1);
      out.kind = VerifyOutcome::Kind::Equivalent;
      out.certificate.name0 = p0.name;
      out.certificate.name1 = p1.name;
      out.certificate.digest0 = program_digest(p0);
      out.certificate.digest1 = program_digest(p1);
      out.certificate.i0 = locrels_of(ck.r0, run.limits);
      out.certificate.i1 = locrels_of(ck.r1, run.limits);
      return done(out);
    }
    if (ck.kind == ChkIndResult::Kind::Exhausted) {
      out.reason = "search " + ck.reason;
      return done(out);
    }
    PathInvsResult pi = path_invs(p0, p1, ck.cex0, ck.cex1, run);
    if (pi.kind == PathInvsResult::Kind::NonEq) {
      out.kind = VerifyOutcome::Kind::NotEquivalent;
      out.cex = std::move(pi.cex);
      out.replay = replay_counterexample(p0, p1, out.cex, run.rels);
      return done(out);
    }
    if (pi.kind == PathInvsResult::Kind::Unknown) {
      out.reason = pi.reason;
      return done(out);
    }
    invs = mrg(invs, pi.invs, run.limits);
  }
  out.reason = "iteration cap reached";
  return done(out);
}

} // namespace peq
