#include "peq/interpret.hpp"

namespace peq {

RunResult run_program(const Program& prog, const std::vector<Int>& args,
                      uint64_t fuel) {
  if (args.size() != prog.params.size())
    throw Error(Error::Kind::LengthMismatch,
                prog.name + " expects " + std::to_string(prog.params.size()) +
                    " arguments, got " + std::to_string(args.size()));
  RunResult r;
  std::map<std::string, Int> store;
  for (const std::string& v : prog.all_vars())
    store[v] = 0;
  for (size_t i = 0; i < args.size(); ++i)
    store[prog.params[i]] = args[i];

  uint32_t at = prog.init_loc;
  r.path.push_back(at);
  r.stores.push_back(store);
  while (fuel-- > 0) {
    if (at == prog.final_loc) {
      r.status = RunResult::Status::Complete;
      r.ret = store.at(prog.ret);
      return r;
    }
    const Edge* taken = nullptr;
    for (uint32_t e : prog.out_edges[at]) {
      const Edge& edge = prog.edges[e];
      if (edge.instr.kind == Instr::Kind::Assume) {
        Int v = eval_expr(*edge.instr.expr, store);
        bool ok = edge.instr.rel == Rel::Le   ? v <= 0
                  : edge.instr.rel == Rel::Eq ? v == 0
                                              : v != 0;
        if (!ok)
          continue;
      }
      taken = &edge;
      break;
    }
    if (!taken) {
      r.status = RunResult::Status::Stuck;
      return r;
    }
    if (taken->instr.kind == Instr::Kind::Assign)
      store[taken->instr.target] = eval_expr(*taken->instr.expr, store);
    at = taken->dst;
    r.path.push_back(at);
    r.stores.push_back(store);
  }
  r.status = RunResult::Status::Diverged;
  return r;
}

} // namespace peq
