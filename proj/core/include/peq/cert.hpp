#ifndef PEQ_CERT_HPP
#define PEQ_CERT_HPP

// Auditable output of a verification run: location-pair invariant
// certificates with an independent validity checker, and concrete
// replay of claimed counterexamples. The checker rebuilds every step
// relation from the program text and discharges each condition with
// the arithmetic solver; it never consults the search that produced
// the certificate.

#include "peq/interpret.hpp"
#include "peq/ir.hpp"
#include "peq/logic.hpp"
#include "peq/solver.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace peq {

// Total map from location-name pairs to relational formulas over the
// two sides' plain variable copies; unlisted pairs are false.
class LocationPairMap {
public:
  std::map<std::pair<std::string, std::string>, Fml> entries;

  Fml at(const std::string& l0, const std::string& l1) const;
  void set(const std::string& l0, const std::string& l1, Fml f);
  void disjoin(const std::string& l0, const std::string& l1, const Fml& f);
};

struct ProofCertificate {
  std::string name0, name1;
  std::string digest0, digest1; // sha-256 over the canonical program text
  LocationPairMap i0;           // pairs whose side-0 moves are covered
  LocationPairMap i1;           // pairs whose side-1 moves are covered
};

// Equality of inputs and of results can be swapped for arbitrary
// relations over the plain copies; empty fields mean positional
// parameter equality and return-value equality.
struct RelSpec {
  std::optional<Fml> pre;
  std::optional<Fml> post;
};

Fml pre_relation(const Program& p0, const Program& p1, const RelSpec& rels);
Fml post_relation(const Program& p0, const Program& p1, const RelSpec& rels);

// Deterministic textual form of a program (sorted locals and edges)
// and its hex-encoded sha-256, used to tie certificates to inputs.
std::string canonical_program_text(const Program& prog);
std::string program_digest(const Program& prog);
bool digests_match(const ProofCertificate& cert, const Program& p0,
                   const Program& p1);

enum class CheckStatus { Valid, Invalid, Inconclusive };

struct CheckResult {
  CheckStatus status = CheckStatus::Valid;
  std::string detail; // condition and witnessing pair on failure
};

// The inductive conditions on a certificate: the input relation lands
// in the maps at the entry pair; each map is closed under its side's
// steps into the union of both maps; at the final pair the union
// implies the output relation; and a pair where one side has finished
// must be covered by the map that still moves the other side.
CheckResult check_location_invariants(const Program& p0, const Program& p1,
                                      const ProofCertificate& cert,
                                      const RelSpec& rels = {},
                                      const SolverLimits& limits = {});

struct PathPairLess {
  bool operator()(const std::pair<Path, Path>& a,
                  const std::pair<Path, Path>& b) const;
};

// Partial map from pairs of path prefixes to relational formulas over
// the plain copies.
using PathPairMap = std::map<std::pair<Path, Path>, Fml, PathPairLess>;

// Step-closure conditions on a path-pair map: entry coverage if the
// initial pair is present, consecution along each side wherever a
// one-step parent is present, and the output relation at every pair
// of complete paths.
CheckResult check_path_pair_invariants(const Program& p0, const Program& p1,
                                       const PathPairMap& invs,
                                       const RelSpec& rels = {},
                                       const SolverLimits& limits = {});

struct Counterexample {
  std::vector<Int> args0, args1; // per-side parameter values
  Path path0, path1;
  std::map<VarId, Int> model; // over the two paths' state copies
};

struct ReplayResult {
  bool confirmed = false;
  std::string reason; // first divergence when not confirmed
  RunResult::Status status0 = RunResult::Status::Stuck;
  RunResult::Status status1 = RunResult::Status::Stuck;
  Int ret0, ret1;
};

// Runs both programs on the counterexample's inputs and confirms the
// claim only if both finish, the output relation is violated, and the
// executed paths and stores match the model.
ReplayResult replay_counterexample(const Program& p0, const Program& p1,
                                   const Counterexample& cex,
                                   const RelSpec& rels = {},
                                   uint64_t fuel = 100000);

// JSON round-trip; formulas are embedded in the s-expression text
// form. Parsing throws Error(Parse) on malformed input.
std::string certificate_to_json(const ProofCertificate& cert);
ProofCertificate certificate_from_json(const std::string& text);

std::string counterexample_to_json(const Program& p0, const Program& p1,
                                   const Counterexample& cex,
                                   const ReplayResult& replay);

} // namespace peq

#endif
