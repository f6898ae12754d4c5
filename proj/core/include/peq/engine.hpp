#ifndef PEQ_ENGINE_HPP
#define PEQ_ENGINE_HPP

// The equivalence search. A counterexample-guided loop alternates an
// inductiveness check over pairs of path prefixes (chk_ind) with
// invariant synthesis along a candidate pair of complete paths
// (path_invs, via interpolation), growing a path-pair invariant map
// until some restriction of it is inductive or a real disagreement
// between the programs falls out.

#include "peq/cert.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <set>

namespace peq {

struct EngineOptions {
  uint32_t max_iterations = 50;
  double timeout_seconds = 300.0;
  uint64_t state_budget = 100000; // obligation pops per chk_ind call
  bool memoize = true;
  RelSpec rels;
  SolverLimits limits;
  // observes every inductive restriction found, before it is turned
  // into a certificate
  std::function<void(const PathPairMap& r0, const PathPairMap& r1)>
      on_has_ind;
  // set by pequod; direct calls may leave it empty for no deadline
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct PathInvsResult {
  enum class Kind { Invs, NonEq, Unknown };
  Kind kind = Kind::Unknown;
  PathPairMap invs;   // defined on every pair of prefixes
  Counterexample cex; // model of the disagreement formula
  std::string reason;
};

// Synthesizes invariants for all prefix pairs of the two complete
// paths, or reports a disagreement reachable along them.
PathInvsResult path_invs(const Program& p0, const Program& p1, const Path& c0,
                         const Path& c1, const EngineOptions& opts = {});

// Union of the two maps; entries present in both are conjoined.
PathPairMap mrg(const PathPairMap& a, const PathPairMap& b,
                const SolverLimits& limits = {});

using PathPairSet = std::set<std::pair<Path, Path>, PathPairLess>;

// True when some already-covered pair with the same tail locations is
// entailed by this pair's invariant, making the pair redundant.
bool is_dis(const PathPairMap& invs, const Path& p0, const Path& p1,
            const PathPairSet& covered, const SolverLimits& limits = {});

struct ChkIndResult {
  enum class Kind { HasInd, CexPair, Exhausted };
  Kind kind = Kind::Exhausted;
  PathPairMap r0, r1; // inductive restriction, split by stepping side
  Path cex0, cex1;    // completions witnessing the uncovered pair
  std::string reason; // Exhausted only
};

// Searches for an inductive restriction of the invariant map over the
// product of path extensions, or returns a pair of complete paths
// whose prefix pair the map does not cover.
ChkIndResult chk_ind(const Program& p0, const Program& p1,
                     const PathPairMap& invs, const EngineOptions& opts = {});

// Collapses a path-pair map to location pairs: each entry lands at the
// pair of its tails, disjoined with whatever is already there.
LocationPairMap locrels_of(const PathPairMap& r,
                           const SolverLimits& limits = {});

struct VerifyOutcome {
  enum class Kind { Equivalent, NotEquivalent, Unknown };
  Kind kind = Kind::Unknown;
  ProofCertificate certificate; // Equivalent
  Counterexample cex;           // NotEquivalent
  ReplayResult replay;
  std::string reason; // Unknown
  uint32_t iterations = 0;
  double seconds = 0.0;
};

VerifyOutcome pequod(const Program& p0, const Program& p1,
                     const EngineOptions& opts = {});

} // namespace peq

#endif
