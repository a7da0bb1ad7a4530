#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "softlogic/config.hpp"
#include "softlogic/errors.hpp"
#include "softlogic/ground.hpp"

namespace softlogic {

// Total assignment aligned with a GroundAtomTable: bools[i] for booleans[i],
// nums[j] a value from domains[j].
struct Model {
  std::vector<char> bools;
  std::vector<std::int64_t> nums;
};

struct SatResult {
  bool sat = false;
  Model model;  // meaningful only when sat
};

enum class Entailment { True, False, Unknown };

namespace detail { struct CompiledConstraint; }

// Finite-domain satisfiability over one atom table. Permanent constraints are
// compiled once; per-query extras are passed to each call. Search assigns
// atoms in canonical order (booleans first, then numerics), values ascending
// (false before true, domains in ascending order), pruning on any constraint
// that evaluates false under the partial assignment — so the first model
// found is the canonically least one. Every call counts value-assignment
// nodes against config.node_budget and throws BudgetExceeded past it;
// exhausting the space means Unsat, never a budget error.
class Solver {
 public:
  Solver(const GroundAtomTable& table, const SolverConfig& config);
  ~Solver();
  Solver(Solver&&) noexcept;

  void add(const FormulaPtr& constraint);

  SatResult check(const std::vector<FormulaPtr>& extra = {}) const;

  // Two satisfiability calls; a theory that refutes both q and not-q was
  // unsatisfiable to begin with, which callers must rule out.
  Entailment entail_boolean(const FormulaPtr& q,
                            const std::vector<FormulaPtr>& extra = {}) const;

  // Feasible values of numeric atom `num_index`, ascending.
  std::vector<std::int64_t> solve_numeric(int num_index,
                                          const std::vector<FormulaPtr>& extra = {}) const;

  const GroundAtomTable& table() const { return *table_; }
  const SolverConfig& config() const { return config_; }

 private:
  const GroundAtomTable* table_;
  SolverConfig config_;
  std::vector<std::unique_ptr<detail::CompiledConstraint>> permanent_;
};

// Total truth value of `f` in `model`. Comparisons whose arithmetic is
// undefined (division by zero, overflowing powers) count as false.
// Throws MissingAtom when `f` mentions an atom the table does not have.
bool evaluate(const GroundAtomTable& table, const Model& model, const FormulaPtr& f);

// Building blocks for assignment constraints a = v / a != v on table atoms.
FormulaPtr bool_assign(const GroundAtomTable& table, int bool_index, bool value);
FormulaPtr num_assign(const GroundAtomTable& table, int num_index, std::int64_t value,
                      bool equal = true);

}  // namespace softlogic
