#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace softlogic {

// Knobs shared across grounding, search, and chain generation. Defaults are
// the documented ones; tests tighten budgets to provoke the failure paths.
struct SolverConfig {
  std::int64_t node_budget = 10'000'000;   // search nodes before BudgetExceeded
  std::int64_t domain_clamp_lo = -10'000;  // derived numeric domains are clamped
  std::int64_t domain_clamp_hi = 10'000;
  int backward_depth_limit = 64;
  // Explicit domain per numeric ground atom (keyed by its surface text,
  // e.g. "Age(Peter)"). Overrides derivation entirely.
  std::map<std::string, std::vector<std::int64_t>> domain_override;
};

}  // namespace softlogic
