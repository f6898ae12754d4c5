#pragma once

// Concrete execution of a single program.
//
// Runs start at the initial location with parameters bound to the given
// arguments and every other variable at zero. At each location the
// outgoing edges are inspected in destination-name order and the first
// enabled one is taken; assumes are enabled when their condition holds,
// assignments and skips always. A run completes on reaching the final
// location, gets stuck when no edge is enabled, and diverges when it
// runs out of fuel.

#include "peq/ir.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace peq {

struct RunResult {
  enum class Status { Complete, Stuck, Diverged };

  Status status = Status::Diverged;
  Int ret;                     // meaningful only when Complete
  std::vector<uint32_t> path;  // locations visited, in order
  // store after executing each path prefix; stores[i] matches path[0..i]
  std::vector<std::map<std::string, Int>> stores;
};

RunResult run_program(const Program& prog, const std::vector<Int>& args,
                      uint64_t fuel = 100000);

} // namespace peq
