#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"
#include "softlogic/config.hpp"
#include "softlogic/gateway.hpp"
#include "softlogic/soft.hpp"

namespace softlogic {

// One benchmark problem in the normalized schema. `options` keeps file order;
// every answer the harness emits is one of its labels (or none at all).
struct BenchProblem {
  std::string id;
  std::string context;
  std::string question;
  std::vector<std::pair<std::string, std::string>> options;  // label -> display text
  std::string gold_label;
  std::string dataset;  // prontoqa | proofwriter | folio | logicaldeduction | synthetic
  // Synthetic problems carry their intended translation so runs can bypass
  // the model entirely.
  std::optional<nlohmann::ordered_json> gold_envelope;
};

enum class Branch { Symbolic, CoTFallback };

struct EvalRecord {
  std::string id;
  Branch branch = Branch::Symbolic;
  std::string verdict;  // solver verdict text (symbolic branch only)
  std::string label;    // mapped option label; empty = no usable answer
  bool correct = false;
  std::string reason;   // why the run left the symbolic branch
  // Chain generation, recorded when the symbolic branch ran. Outcomes are
  // chain_outcome_text values; the ok flags additionally require the chain to
  // check out and the graded answer to be right.
  std::string forward_outcome, backward_outcome;
  bool forward_ok = false;
  bool backward_ok = false;
  double seconds = 0.0;  // wall clock; kept out of the serialized record
};

struct ContingencyTable {
  std::int64_t symbolic_right = 0, symbolic_wrong = 0;
  std::int64_t cot_right = 0, cot_wrong = 0;
};

struct PerturbSpec {
  int strength = 0;  // -2..+2; + adds pool sentences, - removes or modifies premises
  std::uint64_t seed = 0;
};

// How run_pipeline drives the solve step. `soft` off is classical mode: an
// inconsistent fact set aborts to the fallback branch instead of being
// repaired by weight.
struct PipelineConfig {
  SolverConfig solver;
  bool use_retrieval = true;
  bool soft = true;
};

// Line-delimited normalized records:
//   {"id"?, "dataset"?, "context", "question", "options": {label: text, ...},
//    "answer": label, "gold_envelope"?: {...}}
// `tag` names the dataset for every record; pass "" to take each record's own
// "dataset" field. Blank lines are skipped. Throws SchemaError with the
// 1-based line number.
std::vector<BenchProblem> load_dataset(const std::string& path, const std::string& tag);

// One problem back into its normalized line format.
nlohmann::ordered_json problem_to_json(const BenchProblem& problem);

// Seeded uniform sub-sample without replacement, keeping the original order.
// count >= size returns the input unchanged.
std::vector<BenchProblem> sample_problems(const std::vector<BenchProblem>& problems,
                                          std::size_t count, std::uint64_t seed);

// The fixed 20-sentence distractor pool: display sentence plus the logical
// form spliced into gold envelopes. The forms are deliberately inert — fresh
// predicates and tautologies that cannot interact with a generated problem.
const std::vector<std::pair<std::string, std::string>>& distractor_pool();

// Self-contained generators. "ontology": one membership fact plus a chain of
// universally quantified rules deciding a single attribute, asked true/false.
// "ordering": five objects in a row, constraints pinning a unique
// permutation, one correct option among five. Every problem is solver-checked
// at generation time: its gold envelope must entail its gold label.
std::vector<BenchProblem> generate_synthetic(const std::string& kind, int count,
                                             std::uint64_t seed);

// Strength +k inserts k pool sentences (drawn without replacement) at seeded
// positions; a gold envelope receives the matching inert facts. Strength -k
// picks k premises and deletes or modifies each on a coin flip — a numeric
// binding is rebound to another domain value, anything else is negated. Gold
// labels are recomputed for synthetic problems (kept when the perturbed
// theory no longer determines an answer) and left alone for real datasets.
// Throws TooFewPremises when a negative strength asks for too much.
BenchProblem perturb(const BenchProblem& problem, const PerturbSpec& spec);

// Translate (or reuse the gold envelope) -> sanitize -> ground -> solve ->
// chains. Never throws: every failure downgrades to the chain-of-thought
// fallback branch with the reason recorded.
EvalRecord run_pipeline(const BenchProblem& problem, Gateway* gateway,
                        const PipelineConfig& config);

// Evaluate every problem; `workers` > 1 uses a thread pool. Records come back
// in input order regardless of scheduling.
std::vector<EvalRecord> run_bench(const std::vector<BenchProblem>& problems,
                                  Gateway* gateway, const PipelineConfig& config,
                                  int workers = 1);

// Verdict -> option label. Options are matched by display text ("true"/"yes",
// "false"/"no", text containing "unknown"/"uncertain", a value's digits);
// two-option problems fall back to positional true/false. Returns "" when
// nothing fits, which is scored as incorrect.
std::string map_verdict_label(const Verdict& verdict,
                              const std::vector<std::pair<std::string, std::string>>& options);

// Stable-field-order serialization. Wall-clock stays in memory so result
// files replay byte for byte.
nlohmann::ordered_json record_to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& j);

ContingencyTable contingency(const std::vector<EvalRecord>& records);

// Pearson chi-square of the 2x2 branch-vs-correctness table, no continuity
// correction. Throws DegenerateMarginal when a row or column is empty.
double chi_square(const ContingencyTable& table);

// Aggregate report: accuracy overall and per branch, chain rates, the
// contingency table, and chi-square (null when degenerate).
nlohmann::ordered_json summarize(const std::vector<EvalRecord>& records);

// The same numbers as fixed-width text for terminals. The wall-clock line
// appears only when the records still carry timings.
std::string summary_table(const std::vector<EvalRecord>& records);

}  // namespace softlogic
