#include "softlogic/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "softlogic/chain.hpp"
#include "softlogic/errors.hpp"
#include "softlogic/ground.hpp"
#include "softlogic/parser.hpp"
#include "softlogic/sanitize.hpp"
#include "softlogic/solver.hpp"

namespace softlogic {

namespace {

using nlohmann::ordered_json;

// splitmix64. The standard library's distributions are implementation-defined,
// and result files have to replay byte for byte across toolchains.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  bool coin() { return (next() & 1) != 0; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng r(seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  return r.next();
}

std::string capitalized(std::string word) {
  if (!word.empty()) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  return word;
}

std::string fold_text(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  std::string t = s.substr(b, e - b + 1);
  while (!t.empty() && (t.back() == '.' || t.back() == '!')) t.pop_back();
  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return t;
}

// --- sentence handling -------------------------------------------------

bool sentence_break(const std::string& text, std::size_t i) {
  char c = text[i];
  if (c != '.' && c != '!' && c != '?') return false;
  return i + 1 == text.size() || text[i + 1] == ' ';
}

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    while (start < end && text[start] == ' ') ++start;
    if (start < end) out.push_back(text.substr(start, end - start));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i)
    if (sentence_break(text, i)) flush(i + 1);
  flush(text.size());
  return out;
}

// Byte offsets where a sentence may be spliced in: the very front, and just
// past every sentence terminator.
std::vector<std::size_t> insert_points(const std::string& text) {
  std::vector<std::size_t> out = {0};
  for (std::size_t i = 0; i < text.size(); ++i)
    if (sentence_break(text, i)) out.push_back(i + 1);
  if (out.back() != text.size()) out.push_back(text.size());
  return out;
}

const char* kOrdinals[] = {"first", "second", "third", "fourth", "fifth",
                           "sixth", "seventh", "eighth", "ninth"};

std::string rebind_sentence(const std::string& s, std::int64_t old_v, std::int64_t new_v) {
  if (old_v >= 1 && old_v <= 9 && new_v >= 1 && new_v <= 9) {
    std::string from = kOrdinals[old_v - 1];
    std::size_t pos = s.find(from);
    if (pos != std::string::npos)
      return s.substr(0, pos) + kOrdinals[new_v - 1] + s.substr(pos + from.size());
  }
  std::string from = std::to_string(old_v);
  std::size_t pos = s.find(from);
  if (pos != std::string::npos)
    return s.substr(0, pos) + std::to_string(new_v) + s.substr(pos + from.size());
  return s;
}

std::string negate_sentence(const std::string& s) {
  std::size_t pos = s.find(" is not ");
  if (pos != std::string::npos) return s.substr(0, pos) + " is " + s.substr(pos + 8);
  pos = s.find(" is ");
  if (pos != std::string::npos) return s.substr(0, pos) + " is not " + s.substr(pos + 4);
  return "It is not the case that " + s;
}

// Contrary of a premise, not its logical complement: a rule keeps its shape
// and flips its conclusion, so "every A is B" becomes "every A is not B".
FormulaPtr contrary(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Not:
      return f->kids[0];
    case Formula::Kind::Compare: {
      CompareOp flip;
      switch (f->cmp) {
        case CompareOp::Lt: flip = CompareOp::Ge; break;
        case CompareOp::Gt: flip = CompareOp::Le; break;
        case CompareOp::Le: flip = CompareOp::Gt; break;
        case CompareOp::Ge: flip = CompareOp::Lt; break;
        case CompareOp::Eq: flip = CompareOp::Ne; break;
        case CompareOp::Ne: flip = CompareOp::Eq; break;
        default: flip = CompareOp::Ne; break;
      }
      return Formula::compare(flip, f->lhs, f->rhs);
    }
    case Formula::Kind::Forall:
      return Formula::forall(f->var, contrary(f->kids[0]));
    case Formula::Kind::Exists:
      return Formula::exists(f->var, contrary(f->kids[0]));
    case Formula::Kind::Implies:
      return Formula::implies(f->kids[0], contrary(f->kids[1]));
    default:
      return Formula::negate(f);
  }
}

// --- normalized schema -------------------------------------------------

const std::vector<std::string>& known_tags() {
  static const std::vector<std::string> tags = {"prontoqa", "proofwriter", "folio",
                                                "logicaldeduction", "synthetic"};
  return tags;
}

BenchProblem problem_from_json(const ordered_json& j, std::size_t line, const std::string& tag) {
  if (!j.is_object()) throw SchemaError(line, "record is not a JSON object");
  auto need = [&](const char* key) -> const ordered_json& {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(line, std::string("missing field '") + key + "'");
    return *it;
  };
  const ordered_json& ctx = need("context");
  const ordered_json& qst = need("question");
  const ordered_json& opts = need("options");
  const ordered_json& ans = need("answer");
  if (!ctx.is_string() || !qst.is_string() || !ans.is_string())
    throw SchemaError(line, "context, question, and answer must be strings");
  if (!opts.is_object() || opts.empty())
    throw SchemaError(line, "options must be a non-empty object");

  BenchProblem p;
  p.context = ctx.get<std::string>();
  p.question = qst.get<std::string>();
  for (auto it = opts.begin(); it != opts.end(); ++it) {
    if (!it.value().is_string()) throw SchemaError(line, "option text must be a string");
    p.options.emplace_back(it.key(), it.value().get<std::string>());
  }
  p.gold_label = ans.get<std::string>();
  bool labeled = false;
  for (const auto& [label, text] : p.options) labeled = labeled || label == p.gold_label;
  if (!labeled) throw SchemaError(line, "answer '" + p.gold_label + "' is not an option label");

  p.dataset = tag.empty() ? j.value("dataset", std::string()) : tag;
  if (p.dataset.empty()) throw SchemaError(line, "no dataset tag (argument or record field)");
  if (std::find(known_tags().begin(), known_tags().end(), p.dataset) == known_tags().end())
    throw SchemaError(line, "unknown dataset tag '" + p.dataset + "'");

  if (auto it = j.find("id"); it != j.end()) {
    if (!it->is_string()) throw SchemaError(line, "id must be a string");
    p.id = it->get<std::string>();
  } else {
    p.id = p.dataset + "-" + std::to_string(line);
  }
  if (auto it = j.find("gold_envelope"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(line, "gold_envelope must be an object");
    p.gold_envelope = *it;
  }
  if (p.dataset == "synthetic" && !p.gold_envelope)
    throw SchemaError(line, "synthetic record is missing its gold_envelope");
  return p;
}

// --- gold envelopes ----------------------------------------------------

std::string envelope_sentence(const ordered_json& entry) {
  return entry.is_array() ? entry[0].get<std::string>() : entry.get<std::string>();
}

std::string joined_context(const ordered_json& facts) {
  std::string out;
  for (const auto& entry : facts) {
    if (!out.empty()) out += " ";
    out += envelope_sentence(entry);
  }
  return out;
}

// The label the envelope provably solves to, or nothing when the theory is
// inconsistent, indeterminate, or fails to ground.
std::optional<std::string> determinate_label(
    const ordered_json& envelope,
    const std::vector<std::pair<std::string, std::string>>& options,
    const SolverConfig& config) {
  try {
    Problem problem = parse_problem(envelope);
    SanitizedFactSet sanitized = sanitize(problem);
    if (gate(sanitized) != GateDecision::Proceed) return std::nullopt;
    if (sanitized.placeholder_count > 0) return std::nullopt;
    Grounding grounding = ground(problem, sanitized, config);
    Solver solver(grounding.table, config);
    for (const auto& c : grounding.side) solver.add(c.formula);
    for (const auto& c : grounding.facts) solver.add(c.formula);
    if (!solver.check().sat) return std::nullopt;

    Verdict v;
    switch (problem.query.kind) {
      case QuerySpec::Kind::Boolean: {
        Entailment e = solver.entail_boolean(grounding.query);
        if (e == Entailment::Unknown) return std::nullopt;
        v.kind = e == Entailment::True ? Verdict::Kind::True : Verdict::Kind::False;
        break;
      }
      case QuerySpec::Kind::Candidates: {
        int sat_count = 0;
        for (const auto& [label, f] : grounding.candidates) {
          if (solver.check({f}).sat) {
            ++sat_count;
            v.label = label;
          }
        }
        if (sat_count != 1) return std::nullopt;
        v.kind = Verdict::Kind::Option;
        break;
      }
      case QuerySpec::Kind::FreeNumeric:
        return std::nullopt;
    }
    std::string label = map_verdict_label(v, options);
    if (label.empty()) return std::nullopt;
    return label;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Derived value domains of the unperturbed problem, keyed by atom text.
std::map<std::string, std::vector<std::int64_t>> numeric_domains(const ordered_json& envelope) {
  std::map<std::string, std::vector<std::int64_t>> out;
  try {
    Problem problem = parse_problem(envelope);
    SanitizedFactSet sanitized = sanitize(problem);
    Grounding g = ground(problem, sanitized, SolverConfig{});
    for (std::size_t i = 0; i < g.table.numerics.size(); ++i)
      out[g.table.numerics[i].text()] = g.table.domains[i];
  } catch (const Error&) {
  }
  return out;
}

// --- synthetic generators ----------------------------------------------

const std::vector<std::string>& type_nouns() {
  static const std::vector<std::string> v = {"brimble", "crennet", "dorvex", "fliptor",
                                             "grumkin", "harlep",  "jindle", "krovan",
                                             "lunvir",  "morpet",  "norbex", "quindle"};
  return v;
}

const std::vector<std::string>& adjectives() {
  static const std::vector<std::string> v = {"glossy", "sturdy", "nimble", "vivid", "rusty",
                                             "mellow", "brisk",  "sleek",  "stout", "placid"};
  return v;
}

const std::vector<std::string>& given_names() {
  static const std::vector<std::string> v = {"Mira", "Orin", "Pax", "Quill", "Rook",
                                             "Sage", "Tess", "Wyn", "Ivo",   "Nell"};
  return v;
}

struct NounRow {
  std::string category;
  std::vector<std::string> nouns;
};

const std::vector<NounRow>& noun_rows() {
  static const std::vector<NounRow> v = {
      {"birds", {"finch", "plover", "magpie", "heron", "wren", "crane", "swift"}},
      {"vehicles",
       {"tractor", "limousine", "minivan", "hatchback", "scooter", "convertible", "motorcycle"}},
      {"fruits", {"apple", "pear", "plum", "mango", "melon", "peach", "fig"}},
      {"gemstones", {"opal", "topaz", "garnet", "beryl", "jasper", "onyx", "agate"}},
  };
  return v;
}

// Membership plus a five-hop chain of rules deciding one attribute, padded
// with two decoy rules over types off the chain.
BenchProblem make_ontology(Rng& rng, const std::string& id) {
  std::vector<std::string> types = type_nouns();
  rng.shuffle(types);
  const int hops = 5;
  const std::string name = rng.pick(given_names());
  const std::string adj = rng.pick(adjectives());
  std::string decoy_adj = adj;
  while (decoy_adj == adj) decoy_adj = rng.pick(adjectives());
  const bool attr_positive = rng.coin();
  const bool query_positive = rng.coin();

  struct Fact {
    std::string sentence, form;
  };
  auto type_rule = [&](const std::string& a, const std::string& b) {
    return Fact{"Every " + a + " is a " + b + ".",
                "forall x. " + capitalized(a) + "(x) -> " + capitalized(b) + "(x)"};
  };
  auto adj_rule = [&](const std::string& t, const std::string& a, bool positive) {
    return Fact{"Every " + t + " is " + (positive ? "" : "not ") + a + ".",
                "forall x. " + capitalized(t) + "(x) -> " + (positive ? "" : "not ") +
                    capitalized(a) + "(x)"};
  };

  std::vector<Fact> rules;
  for (int i = 1; i <= hops; ++i) rules.push_back(type_rule(types[i - 1], types[i]));
  rules.push_back(adj_rule(types[hops], adj, attr_positive));
  rules.push_back(type_rule(types[hops + 1], types[hops + 2]));
  rules.push_back(adj_rule(types[hops + 3], decoy_adj, true));
  rng.shuffle(rules);
  rules.push_back({name + " is a " + types[0] + ".", capitalized(types[0]) + "(" + name + ")"});

  BenchProblem p;
  p.id = id;
  p.dataset = "synthetic";
  p.options = {{"A", "True"}, {"B", "False"}};
  p.gold_label = attr_positive == query_positive ? "A" : "B";
  p.question = "Is the following statement true or false? " + name + " is " +
               (query_positive ? "" : "not ") + adj + ".";

  ordered_json facts = ordered_json::array();
  for (const Fact& f : rules) facts.push_back(ordered_json::array({f.sentence, f.form}));
  ordered_json envelope;
  envelope["objects"] = ordered_json::array({name});
  envelope["facts"] = facts;
  envelope["query"] = (query_positive ? "" : "not ") + capitalized(adj) + "(" + name + ")";
  p.context = joined_context(facts);
  p.gold_envelope = envelope;
  return p;
}

// Five objects in a row; random true constraints are kept while they narrow
// the set of consistent permutations, so every kept fact is load-bearing.
BenchProblem make_ordering(Rng& rng, const std::string& id) {
  const NounRow& row = rng.pick(noun_rows());
  std::vector<std::string> nouns = row.nouns;
  rng.shuffle(nouns);
  nouns.resize(5);
  const int n = 5;

  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 1);
  rng.shuffle(pos);

  struct Cand {
    bool anchor;
    int i, j, v;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < n; ++i) cands.push_back({true, i, 0, pos[i]});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && pos[i] < pos[j]) cands.push_back({false, i, j, 0});
  rng.shuffle(cands);

  auto model_count = [&](const std::vector<Cand>& chosen) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 1);
    int count = 0;
    do {
      bool ok = true;
      for (const Cand& c : chosen)
        if (c.anchor ? v[c.i] != c.v : v[c.i] >= v[c.j]) {
          ok = false;
          break;
        }
      count += ok;
    } while (std::next_permutation(v.begin(), v.end()));
    return count;
  };

  std::vector<Cand> chosen;
  int live = model_count(chosen);
  for (const Cand& c : cands) {
    if (live == 1) break;
    chosen.push_back(c);
    int now = model_count(chosen);
    if (now == live)
      chosen.pop_back();  // redundant under what is already picked
    else
      live = now;
  }

  ordered_json facts = ordered_json::array();
  for (const Cand& c : chosen) {
    if (c.anchor)
      facts.push_back(ordered_json::array(
          {"The " + nouns[c.i] + " is the " + kOrdinals[c.v - 1] + " from the left.",
           "Pos(" + nouns[c.i] + ") = " + std::to_string(c.v)}));
    else
      facts.push_back(
          ordered_json::array({"The " + nouns[c.i] + " is to the left of the " + nouns[c.j] + ".",
                               "Pos(" + nouns[c.i] + ") < Pos(" + nouns[c.j] + ")"}));
  }

  const int slot = static_cast<int>(rng.below(n)) + 1;
  BenchProblem p;
  p.id = id;
  p.dataset = "synthetic";
  ordered_json query(ordered_json::value_t::object);
  std::string option_lines;
  for (int i = 0; i < n; ++i) {
    std::string label(1, static_cast<char>('A' + i));
    std::string claim =
        "The " + nouns[i] + " is the " + std::string(kOrdinals[slot - 1]) + " from the left.";
    p.options.emplace_back(label, claim);
    query[label] = "Pos(" + nouns[i] + ") = " + std::to_string(slot);
    if (pos[i] == slot) p.gold_label = label;
    option_lines += " " + label + ") " + claim;
  }
  p.question = "There are five " + row.category + " in a row: the " + nouns[0] + ", the " +
               nouns[1] + ", the " + nouns[2] + ", the " + nouns[3] + ", and the " + nouns[4] +
               ". Which of the following statements is correct?" + option_lines;

  ordered_json objects = ordered_json::array();
  for (const std::string& noun : nouns) objects.push_back(noun);
  ordered_json envelope;
  envelope["objects"] = objects;
  envelope["facts"] = facts;
  envelope["query"] = query;
  envelope["larger_direction"] = "right";
  p.context = joined_context(facts);
  p.gold_envelope = envelope;
  return p;
}

// --- pipeline ----------------------------------------------------------

PromptKind prompt_kind_for(const BenchProblem& p) {
  if (p.dataset == "logicaldeduction") return PromptKind::Ordering;
  if (p.gold_envelope && p.gold_envelope->contains("larger_direction")) return PromptKind::Ordering;
  return PromptKind::Deduction;
}

EvalRecord cot_branch(EvalRecord rec, const BenchProblem& problem, Gateway* gateway,
                      std::string reason) {
  rec.branch = Branch::CoTFallback;
  rec.reason = std::move(reason);
  rec.verdict.clear();
  rec.label.clear();
  rec.forward_outcome.clear();
  rec.backward_outcome.clear();
  rec.forward_ok = rec.backward_ok = false;
  if (gateway) {
    try {
      std::optional<std::string> answer =
          gateway->cot_fallback(problem.context, problem.question, problem.options);
      if (answer)
        for (const auto& [label, text] : problem.options)
          if (label == *answer) rec.label = label;
    } catch (const std::exception& e) {
      rec.reason += std::string("; fallback failed: ") + e.what();
    }
  }
  rec.correct = !rec.label.empty() && rec.label == problem.gold_label;
  return rec;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& distractor_pool() {
  static const std::vector<std::pair<std::string, std::string>> pool = {
      {"This sentence is included for completeness but does not affect the problem.",
       "Completeness_filler()"},
      {"The following text contains multiple independent statements.",
       "Independent_statements()"},
      {"Logical reasoning tasks may vary in difficulty.", "Difficulty_varies()"},
      {"Please note that not all sentences are equally important.", "Uneven_importance()"},
      {"Water boils at 100 degrees Celsius at sea level.", "Boiling_point(water) = 100"},
      {"The Earth completes one full rotation every 24 hours.", "Rotation_hours(earth) = 24"},
      {"A standard chessboard has 64 squares.", "Squares(chessboard) = 64"},
      {"Most modern buildings are made of concrete or steel.",
       "forall x. (Modern(x) and Building(x)) -> (Made_of_concrete(x) or Made_of_steel(x))"},
      {"It was raining lightly outside the room.", "Raining_lightly(outside)"},
      {"The room was quiet except for the sound of a ticking clock.", "Quiet(room)"},
      {"After a long day, the reader might feel slightly tired.", "Slightly_tired(reader)"},
      {"The experiment was conducted late in the afternoon.", "Conducted_late(experiment)"},
      {"The meeting lasted for 45 minutes.", "Minutes(meeting) = 45"},
      {"There are seven continents on Earth.", "Continents(earth) = 7"},
      {"The building has three elevators and twelve floors.",
       "Elevators(building) = 3 and Floors(building) = 12"},
      {"A triangle has exactly three sides.", "Sides(triangle) = 3"},
      {"If today is Monday, then tomorrow is Tuesday.", "Monday(today) -> Tuesday(tomorrow)"},
      {"All squares are rectangles, but not all rectangles are squares.",
       "forall x. Square(x) -> Rectangle(x)"},
      {"If A implies B, the reverse does not necessarily hold.", "Converse_caution()"},
      {"Either the statement is true, or it is false.",
       "Is_true(statement) or not Is_true(statement)"},
  };
  return pool;
}

std::vector<BenchProblem> load_dataset(const std::string& path, const std::string& tag) {
  std::ifstream in(path);
  if (!in) throw SchemaError(0, "cannot open " + path);
  std::vector<BenchProblem> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError(line, "invalid JSON");
    out.push_back(problem_from_json(j, line, tag));
  }
  return out;
}

nlohmann::ordered_json problem_to_json(const BenchProblem& problem) {
  ordered_json j;
  j["id"] = problem.id;
  j["dataset"] = problem.dataset;
  j["context"] = problem.context;
  j["question"] = problem.question;
  ordered_json opts(ordered_json::value_t::object);
  for (const auto& [label, text] : problem.options) opts[label] = text;
  j["options"] = opts;
  j["answer"] = problem.gold_label;
  if (problem.gold_envelope) j["gold_envelope"] = *problem.gold_envelope;
  return j;
}

std::vector<BenchProblem> sample_problems(const std::vector<BenchProblem>& problems,
                                          std::size_t count, std::uint64_t seed) {
  if (count >= problems.size()) return problems;
  std::vector<std::size_t> idx(problems.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(seed, 0x5a3d7e));
  for (std::size_t i = 0; i < count; ++i)
    std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<BenchProblem> out;
  out.reserve(count);
  for (std::size_t i : idx) out.push_back(problems[i]);
  return out;
}

std::vector<BenchProblem> generate_synthetic(const std::string& kind, int count,
                                             std::uint64_t seed) {
  if (count < 1) throw Error("synthetic count must be at least 1");
  if (kind != "ontology" && kind != "ordering")
    throw Error("unknown synthetic kind '" + kind + "'");
  std::vector<BenchProblem> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i) + 1));
    std::string id = "synthetic-" + kind + "-" + std::to_string(seed) + "-" + std::to_string(i);
    BenchProblem p = kind == "ontology" ? make_ontology(rng, id) : make_ordering(rng, id);
    std::optional<std::string> label = determinate_label(*p.gold_envelope, p.options, {});
    if (!label || *label != p.gold_label)
      throw InvariantViolation("generated problem " + id + " does not solve to its gold label");
    out.push_back(std::move(p));
  }
  return out;
}

BenchProblem perturb(const BenchProblem& problem, const PerturbSpec& spec) {
  if (spec.strength == 0) return problem;
  BenchProblem out = problem;
  Rng rng(mix_seed(spec.seed, 0xd15c0));

  if (spec.strength > 0) {
    const std::size_t k = static_cast<std::size_t>(spec.strength);
    const auto& pool = distractor_pool();
    std::vector<std::size_t> pick(pool.size());
    std::iota(pick.begin(), pick.end(), 0);
    for (std::size_t i = 0; i < k; ++i)
      std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);
    pick.resize(k);

    if (out.gold_envelope) {
      ordered_json facts = (*out.gold_envelope)["facts"];
      for (std::size_t pi : pick) {
        std::size_t slot = rng.below(facts.size() + 1);
        facts.insert(facts.begin() + slot,
                     ordered_json::array({pool[pi].first, pool[pi].second}));
      }
      (*out.gold_envelope)["facts"] = facts;
      out.context = joined_context(facts);
    } else {
      struct Insert {
        std::size_t at;
        std::size_t rank;
        const std::string* text;
      };
      std::vector<std::size_t> points = insert_points(out.context);
      std::vector<Insert> inserts;
      for (std::size_t i = 0; i < k; ++i)
        inserts.push_back({points[rng.below(points.size())], i, &pool[pick[i]].first});
      std::stable_sort(inserts.begin(), inserts.end(), [](const Insert& a, const Insert& b) {
        return a.at != b.at ? a.at < b.at : a.rank < b.rank;
      });
      for (auto it = inserts.rbegin(); it != inserts.rend(); ++it) {
        if (it->at == 0)
          out.context.insert(0, *it->text + " ");
        else
          out.context.insert(it->at, " " + *it->text);
      }
    }
  } else {
    const std::size_t k = static_cast<std::size_t>(-spec.strength);

    if (out.gold_envelope) {
      ordered_json facts = (*out.gold_envelope)["facts"];
      if (facts.size() <= k) throw TooFewPremises(facts.size(), k);
      std::map<std::string, std::vector<std::int64_t>> domains =
          numeric_domains(*out.gold_envelope);

      std::vector<std::size_t> pick(facts.size());
      std::iota(pick.begin(), pick.end(), 0);
      for (std::size_t i = 0; i < k; ++i)
        std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);
      pick.resize(k);

      std::vector<std::size_t> doomed;
      for (std::size_t index : pick) {
        if (rng.coin()) {
          doomed.push_back(index);
          continue;
        }
        ordered_json& entry = facts[index];
        std::string sentence = envelope_sentence(entry);
        std::string form = entry.is_array() ? entry[1].get<std::string>() : entry.get<std::string>();
        FormulaPtr f;
        try {
          f = parse_formula_text(form);
        } catch (const ParseError&) {
        }
        bool rebound = false;
        if (f && f->kind == Formula::Kind::Compare && f->cmp == CompareOp::Eq &&
            f->lhs->kind == NumExpr::Kind::Atom && f->rhs->kind == NumExpr::Kind::Const) {
          std::vector<std::int64_t> others;
          if (auto it = domains.find(f->lhs->atom.text()); it != domains.end())
            for (std::int64_t v : it->second)
              if (v != f->rhs->value) others.push_back(v);
          if (!others.empty()) {
            std::int64_t nv = others[rng.below(others.size())];
            entry = ordered_json::array(
                {rebind_sentence(sentence, f->rhs->value, nv),
                 to_text(Formula::compare(CompareOp::Eq, f->lhs, NumExpr::constant(nv)))});
            rebound = true;
          }
        }
        if (!rebound)
          entry = ordered_json::array(
              {negate_sentence(sentence), f ? to_text(contrary(f)) : form});
      }
      std::sort(doomed.rbegin(), doomed.rend());
      for (std::size_t index : doomed) facts.erase(index);
      (*out.gold_envelope)["facts"] = facts;
      out.context = joined_context(facts);
    } else {
      std::vector<std::string> sentences = split_sentences(out.context);
      if (sentences.size() <= k) throw TooFewPremises(sentences.size(), k);
      std::vector<std::size_t> pick(sentences.size());
      std::iota(pick.begin(), pick.end(), 0);
      for (std::size_t i = 0; i < k; ++i)
        std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);
      pick.resize(k);

      std::vector<std::size_t> doomed;
      for (std::size_t index : pick) {
        if (rng.coin())
          doomed.push_back(index);
        else
          sentences[index] = "It is not the case that " + sentences[index];
      }
      std::sort(doomed.rbegin(), doomed.rend());
      for (std::size_t index : doomed) sentences.erase(sentences.begin() + index);
      std::string rebuilt;
      for (const std::string& s : sentences) {
        if (!rebuilt.empty()) rebuilt += " ";
        rebuilt += s;
      }
      out.context = rebuilt;
    }
  }

  // Synthetic gold labels track the perturbed theory while it still has a
  // provable answer; real datasets keep theirs (degradation is measured
  // against the original label).
  if (out.gold_envelope) {
    std::optional<std::string> label = determinate_label(*out.gold_envelope, out.options, {});
    if (label) out.gold_label = *label;
  }
  return out;
}

std::string map_verdict_label(
    const Verdict& verdict, const std::vector<std::pair<std::string, std::string>>& options) {
  auto by_text = [&](std::initializer_list<const char*> names) -> std::string {
    for (const auto& [label, text] : options) {
      std::string folded = fold_text(text);
      for (const char* name : names)
        if (folded == name) return label;
    }
    return "";
  };
  switch (verdict.kind) {
    case Verdict::Kind::True: {
      std::string hit = by_text({"true", "yes"});
      if (!hit.empty()) return hit;
      return options.size() == 2 ? options[0].first : "";
    }
    case Verdict::Kind::False: {
      std::string hit = by_text({"false", "no"});
      if (!hit.empty()) return hit;
      return options.size() == 2 ? options[1].first : "";
    }
    case Verdict::Kind::Unknown:
      for (const auto& [label, text] : options) {
        std::string folded = fold_text(text);
        if (folded.find("unknown") != std::string::npos ||
            folded.find("uncertain") != std::string::npos)
          return label;
      }
      return "";
    case Verdict::Kind::Option:
      for (const auto& [label, text] : options)
        if (label == verdict.label) return label;
      return "";
    case Verdict::Kind::ValueSet: {
      if (verdict.values.size() != 1) return "";
      std::string want = std::to_string(verdict.values[0]);
      for (const auto& [label, text] : options)
        if (fold_text(text) == want) return label;
      return "";
    }
    case Verdict::Kind::Fallback:
      return "";
  }
  return "";
}

EvalRecord run_pipeline(const BenchProblem& problem, Gateway* gateway,
                        const PipelineConfig& config) {
  EvalRecord rec;
  rec.id = problem.id;
  auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](EvalRecord r) {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };

  try {
    Problem parsed;
    std::vector<TokenTrace> traces;
    if (problem.gold_envelope) {
      parsed = parse_problem(*problem.gold_envelope);
    } else {
      if (!gateway) throw GatewayError("no gateway configured for translation");
      TranslationResult tr =
          gateway->translate(problem.context, problem.question, prompt_kind_for(problem));
      parsed = parse_problem(tr.envelope);
      traces = std::move(tr.traces);
    }

    SanitizedFactSet sanitized = sanitize(parsed);
    if (gate(sanitized) != GateDecision::Proceed)
      return finish(cot_branch(rec, problem, gateway, "translation too damaged to solve"));
    if (!traces.empty()) apply_trace_weights(sanitized, traces);
    Grounding grounding = ground(parsed, sanitized, config.solver);

    if (!config.soft) {
      Solver hard(grounding.table, config.solver);
      for (const auto& c : grounding.side) hard.add(c.formula);
      std::vector<FormulaPtr> all;
      for (const auto& c : grounding.facts) all.push_back(c.formula);
      if (!hard.check(all).sat)
        return finish(cot_branch(rec, problem, gateway, "inconsistent premises"));
    }

    RetrievalContext rctx;
    if (config.use_retrieval && gateway)
      rctx = RetrievalContext{problem.context, problem.question, gateway};
    SoftOutcome outcome = soft_solve(parsed, sanitized, grounding, config.solver, rctx);
    if (outcome.verdict.kind == Verdict::Kind::Fallback)
      return finish(cot_branch(rec, problem, gateway, "solver: " + outcome.verdict.reason));

    rec.branch = Branch::Symbolic;
    rec.verdict = outcome.verdict.text();
    rec.label = map_verdict_label(outcome.verdict, problem.options);
    rec.correct = !rec.label.empty() && rec.label == problem.gold_label;

    ChainSet chains = generate_chains(parsed, grounding, outcome, config.solver);
    rec.forward_outcome = chain_outcome_text(chains.forward.outcome);
    rec.backward_outcome = chain_outcome_text(chains.backward.outcome);
    // A chain passes when it is found, checks out, and the graded answer is
    // right; an undetermined query is served by clean termination instead.
    const bool unknown_verdict = outcome.verdict.kind == Verdict::Kind::Unknown;
    auto graded = [&](const ChainResult& r, ChainOutcome idle_ok) {
      if (r.outcome == ChainOutcome::Found) {
        ChainCheck check = verify_chain(*r.chain, chains.theory, grounding.table, grounding.side,
                                        chains.plan.extra_given, chains.target, config.solver);
        return check.pass && rec.correct;
      }
      return unknown_verdict && rec.correct && r.outcome == idle_ok;
    };
    rec.forward_ok = graded(chains.forward, ChainOutcome::Fixpoint);
    rec.backward_ok = graded(chains.backward, ChainOutcome::DeadEnd);
    return finish(rec);
  } catch (const std::exception& e) {
    return finish(cot_branch(rec, problem, gateway, e.what()));
  }
}

std::vector<EvalRecord> run_bench(const std::vector<BenchProblem>& problems, Gateway* gateway,
                                  const PipelineConfig& config, int workers) {
  std::vector<EvalRecord> records(problems.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < problems.size(); ++i)
      records[i] = run_pipeline(problems[i], gateway, config);
    return records;
  }
  std::atomic<std::size_t> cursor{0};
  auto drain = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= problems.size()) return;
      records[i] = run_pipeline(problems[i], gateway, config);
    }
  };
  std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(workers), problems.size());
  std::vector<std::thread> threads;
  threads.reserve(width);
  for (std::size_t i = 0; i < width; ++i) threads.emplace_back(drain);
  for (std::thread& t : threads) t.join();
  return records;
}

nlohmann::ordered_json record_to_json(const EvalRecord& record) {
  ordered_json j;
  j["id"] = record.id;
  j["branch"] = record.branch == Branch::Symbolic ? "symbolic" : "cot-fallback";
  j["verdict"] = record.verdict.empty() ? ordered_json() : ordered_json(record.verdict);
  j["label"] = record.label.empty() ? ordered_json() : ordered_json(record.label);
  j["correct"] = record.correct;
  j["reason"] = record.reason.empty() ? ordered_json() : ordered_json(record.reason);
  if (record.branch == Branch::Symbolic) {
    ordered_json chains;
    chains["forward"] = {{"outcome", record.forward_outcome}, {"pass", record.forward_ok}};
    chains["backward"] = {{"outcome", record.backward_outcome}, {"pass", record.backward_ok}};
    j["chains"] = chains;
  } else {
    j["chains"] = ordered_json();
  }
  return j;
}

EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  auto text = [&](const char* key) {
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
  };
  r.id = text("id");
  r.branch = text("branch") == "cot-fallback" ? Branch::CoTFallback : Branch::Symbolic;
  r.verdict = text("verdict");
  r.label = text("label");
  r.correct = j.value("correct", false);
  r.reason = text("reason");
  if (auto it = j.find("chains"); it != j.end() && it->is_object()) {
    if (auto f = it->find("forward"); f != it->end() && f->is_object()) {
      r.forward_outcome = f->value("outcome", std::string());
      r.forward_ok = f->value("pass", false);
    }
    if (auto b = it->find("backward"); b != it->end() && b->is_object()) {
      r.backward_outcome = b->value("outcome", std::string());
      r.backward_ok = b->value("pass", false);
    }
  }
  return r;
}

ContingencyTable contingency(const std::vector<EvalRecord>& records) {
  ContingencyTable t;
  for (const EvalRecord& r : records) {
    if (r.branch == Branch::Symbolic)
      ++(r.correct ? t.symbolic_right : t.symbolic_wrong);
    else
      ++(r.correct ? t.cot_right : t.cot_wrong);
  }
  return t;
}

double chi_square(const ContingencyTable& table) {
  const double a = static_cast<double>(table.symbolic_right);
  const double b = static_cast<double>(table.symbolic_wrong);
  const double c = static_cast<double>(table.cot_right);
  const double d = static_cast<double>(table.cot_wrong);
  const double row1 = a + b, row2 = c + d, col1 = a + c, col2 = b + d;
  if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0) throw DegenerateMarginal();
  const double n = a + b + c + d;
  const double diff = a * d - b * c;
  return n * diff * diff / (row1 * row2 * col1 * col2);
}

nlohmann::ordered_json summarize(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw InvariantViolation("cannot summarize zero records");
  const std::size_t n = records.size();
  std::size_t correct = 0;
  std::size_t sym = 0, sym_right = 0, cot = 0, cot_right = 0;
  std::size_t fwd_found = 0, fwd_pass = 0, bwd_found = 0, bwd_pass = 0;
  for (const EvalRecord& r : records) {
    correct += r.correct;
    if (r.branch == Branch::Symbolic) {
      ++sym;
      sym_right += r.correct;
      fwd_found += r.forward_outcome == "found";
      fwd_pass += r.forward_ok;
      bwd_found += r.backward_outcome == "found";
      bwd_pass += r.backward_ok;
    } else {
      ++cot;
      cot_right += r.correct;
    }
  }
  auto rate = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };

  ordered_json j;
  j["problems"] = n;
  j["correct"] = correct;
  j["accuracy"] = rate(correct, n);
  ordered_json branches;
  branches["symbolic"] = {{"count", sym}, {"correct", sym_right}, {"accuracy", rate(sym_right, sym)}};
  branches["cot_fallback"] = {{"count", cot}, {"correct", cot_right}, {"accuracy", rate(cot_right, cot)}};
  j["branches"] = branches;
  j["chains"] = {{"attempted", sym},
                 {"forward_found", fwd_found},
                 {"forward_passed", fwd_pass},
                 {"backward_found", bwd_found},
                 {"backward_passed", bwd_pass}};
  ContingencyTable t = contingency(records);
  j["contingency"] = {{"symbolic_right", t.symbolic_right},
                      {"symbolic_wrong", t.symbolic_wrong},
                      {"cot_right", t.cot_right},
                      {"cot_wrong", t.cot_wrong}};
  try {
    j["chi_square"] = chi_square(t);
  } catch (const DegenerateMarginal&) {
    j["chi_square"] = ordered_json();
  }
  return j;
}

std::string summary_table(const std::vector<EvalRecord>& records) {
  ordered_json j = summarize(records);
  char line[160];
  std::string out;
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(line, sizeof line, fmt, args...);
    out += line;
    out += "\n";
  };
  add("problems         %zu", j["problems"].get<std::size_t>());
  add("accuracy         %.4f (%zu/%zu)", j["accuracy"].get<double>(),
      j["correct"].get<std::size_t>(), j["problems"].get<std::size_t>());
  const auto& sym = j["branches"]["symbolic"];
  const auto& cot = j["branches"]["cot_fallback"];
  add("symbolic         %zu problems, %zu correct (%.4f)", sym["count"].get<std::size_t>(),
      sym["correct"].get<std::size_t>(), sym["accuracy"].get<double>());
  add("cot fallback     %zu problems, %zu correct (%.4f)", cot["count"].get<std::size_t>(),
      cot["correct"].get<std::size_t>(), cot["accuracy"].get<double>());
  const auto& ch = j["chains"];
  add("forward chains   found %zu/%zu, passed %zu", ch["forward_found"].get<std::size_t>(),
      ch["attempted"].get<std::size_t>(), ch["forward_passed"].get<std::size_t>());
  add("backward chains  found %zu/%zu, passed %zu", ch["backward_found"].get<std::size_t>(),
      ch["attempted"].get<std::size_t>(), ch["backward_passed"].get<std::size_t>());
  const auto& ct = j["contingency"];
  add("contingency      symbolic %lld/%lld, cot %lld/%lld (right/wrong)",
      ct["symbolic_right"].get<long long>(), ct["symbolic_wrong"].get<long long>(),
      ct["cot_right"].get<long long>(), ct["cot_wrong"].get<long long>());
  if (j["chi_square"].is_null())
    out += "chi-square       n/a (degenerate marginal)\n";
  else
    add("chi-square       %.2f", j["chi_square"].get<double>());
  double seconds = 0.0;
  for (const EvalRecord& r : records) seconds += r.seconds;
  if (seconds > 0.0) add("wall clock       %.1f s", seconds);
  return out;
}

}  // namespace softlogic
