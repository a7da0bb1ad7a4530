#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "softlogic/chain.hpp"

namespace softlogic {
namespace {

using PropKey = std::tuple<int, int, int, std::int64_t>;

PropKey key_of(const Property& p) {
  int sign = p.is_boolean ? (p.truth ? 1 : 0) : (p.equal ? 1 : 0);
  return {p.is_boolean ? 0 : 1, p.atom, sign, p.is_boolean ? 0 : p.value};
}

const char* via_text(ChainStep::Via via) {
  switch (via) {
    case ChainStep::Via::Given: return "given";
    case ChainStep::Via::Rule: return "rule";
    case ChainStep::Via::Elimination: return "elimination";
  }
  return "rule";
}

std::string join_with(const std::vector<std::string>& items, const std::string& last_sep) {
  if (items.empty()) return "";
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " " + last_sep + " " + items[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) out += items[i] + ", ";
  return out + last_sep + " " + items.back();
}

std::string spaced(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::string lowered(const std::string& name) {
  std::string out = spaced(name);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string capitalized(std::string s) {
  for (char& c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    }
  }
  return s;
}

std::vector<std::string> split_name(const std::string& name) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : name) {
    if (c == '_') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

// Peel folded argument objects off the end of a predicate name:
// "Likes_squirrel" against {..., "squirrel"} gives verb "Likes" and one
// restored argument. Longest object match first; names that restore nothing
// stay whole ("Made_of_concrete").
struct SurfaceAtom {
  std::string verb;
  std::vector<std::string> folded;
};

SurfaceAtom split_folded(const std::string& name, const std::vector<std::string>& objects) {
  SurfaceAtom out;
  std::vector<std::string> parts = split_name(name);
  bool peeled = true;
  while (peeled && parts.size() > 1) {
    peeled = false;
    for (std::size_t cut = 1; cut < parts.size(); ++cut) {
      std::string tail = parts[cut];
      for (std::size_t i = cut + 1; i < parts.size(); ++i) tail += "_" + parts[i];
      if (std::find(objects.begin(), objects.end(), tail) == objects.end()) continue;
      out.folded.insert(out.folded.begin(), tail);
      parts.resize(cut);
      peeled = true;
      break;
    }
  }
  out.verb = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out.verb += "_" + parts[i];
  return out;
}

bool wants_article(const std::string& pred_words) {
  return pred_words.size() >= 2 && pred_words.compare(pred_words.size() - 2, 2, "us") == 0;
}

// "likes" -> "like" for the does-not form.
std::string uninflected(const std::string& verb_words) {
  std::string out = verb_words;
  std::size_t first_end = out.find(' ');
  std::size_t end = first_end == std::string::npos ? out.size() : first_end;
  if (end > 1 && out[end - 1] == 's') out.erase(end - 1, 1);
  return out;
}

// Noun phrase for one numeric atom: "the raven" for positions, "the age of
// Peter" otherwise.
std::string numeric_noun(const GroundAtom& atom) {
  if (atom.name == "Pos") return "the " + spaced(atom.arg);
  if (atom.arg.empty()) return "the " + lowered(atom.name);
  return "the " + lowered(atom.name) + " of " + spaced(atom.arg);
}

std::string boolean_phrase(const GroundAtom& atom, bool positive, const Problem& problem) {
  SurfaceAtom sf = split_folded(atom.name, problem.objects);
  if (atom.arg.empty()) {
    std::string words = lowered(atom.name);
    return positive ? words : "not " + words;
  }
  std::string subject = spaced(atom.arg);
  if (!sf.folded.empty()) {
    std::string verb = lowered(sf.verb);
    std::vector<std::string> args;
    for (const auto& o : sf.folded) args.push_back(spaced(o));
    if (positive) return subject + " " + verb + " " + join_with(args, "and");
    return subject + " does not " + uninflected(verb) + " " + join_with(args, "and");
  }
  std::string words = lowered(atom.name);
  std::string article;
  if (wants_article(words))
    article = std::string("aeiou").find(words[0]) != std::string::npos ? "an " : "a ";
  return subject + " is " + (positive ? "" : "not ") + article + words;
}

std::string property_phrase(const Property& p, const GroundAtomTable& table,
                            const Problem& problem) {
  if (p.is_boolean) return boolean_phrase(table.booleans[p.atom], p.truth, problem);
  const GroundAtom& atom = table.numerics[p.atom];
  std::string verb = p.equal ? "is" : "is not";
  if (atom.name == "Pos")
    return numeric_noun(atom) + " " + verb + " in position " + std::to_string(p.value);
  return numeric_noun(atom) + " " + verb + " " + std::to_string(p.value);
}

// Ordering comparisons read through larger_direction; everything else falls
// back to the logical syntax.
std::string constraint_phrase(const FormulaPtr& f, const GroundAtomTable& table,
                              const Problem& problem) {
  if (f->kind != Formula::Kind::Compare) return to_text(f);
  if (f->lhs->kind != NumExpr::Kind::Atom || f->rhs->kind != NumExpr::Kind::Atom)
    return to_text(f);
  auto ground_of = [](const PredicateAtom& p) {
    return GroundAtom{p.name, p.args.empty() ? "" : p.args[0]};
  };
  int li = table.numeric_index(ground_of(f->lhs->atom));
  int ri = table.numeric_index(ground_of(f->rhs->atom));
  if (li < 0 || ri < 0) return to_text(f);
  std::string a = numeric_noun(table.numerics[li]);
  std::string b = numeric_noun(table.numerics[ri]);
  bool positional = table.numerics[li].name == "Pos" && table.numerics[ri].name == "Pos" &&
                    problem.larger_direction.has_value();
  switch (f->cmp) {
    case CompareOp::Gt:
    case CompareOp::Lt: {
      bool lhs_larger = f->cmp == CompareOp::Gt;
      if (positional) {
        bool right = (*problem.larger_direction == "left") != lhs_larger;
        return a + " is to the " + (right ? "right" : "left") + " of " + b;
      }
      return a + " is " + (lhs_larger ? "greater" : "less") + " than " + b;
    }
    case CompareOp::Ge:
      return a + " is at least " + b;
    case CompareOp::Le:
      return a + " is at most " + b;
    case CompareOp::Eq:
      return a + " equals " + b;
    case CompareOp::Ne:
      return a + " is not equal to " + b;
  }
  return to_text(f);
}

std::vector<std::string> support_phrases(const ChainStep& step, const GroundAtomTable& table,
                                         const NormalizedTheory& theory,
                                         const Problem& problem) {
  std::vector<std::string> out;
  for (const auto& s : step.supports)
    out.push_back(property_phrase(s, table, problem));
  for (int r : step.residual_supports)
    out.push_back(constraint_phrase(theory.residual[static_cast<std::size_t>(r)].formula,
                                    table, problem));
  return out;
}

std::vector<std::string> support_texts(const ChainStep& step, const GroundAtomTable& table,
                                       const NormalizedTheory& theory) {
  std::vector<std::string> out;
  for (const auto& s : step.supports) out.push_back(s.text(table));
  for (int r : step.residual_supports)
    out.push_back(to_text(theory.residual[static_cast<std::size_t>(r)].formula));
  return out;
}

std::string step_sentences(const ChainStep& step, const GroundAtomTable& table,
                           const NormalizedTheory& theory, const Problem& problem) {
  std::string derived = property_phrase(step.derived, table, problem);
  switch (step.via) {
    case ChainStep::Via::Given:
      return "It is given that " + derived + ".";
    case ChainStep::Via::Rule: {
      auto supports = support_phrases(step, table, theory, problem);
      if (supports.empty()) return capitalized(derived) + ".";
      return "Since " + join_with(supports, "and") + ", " + derived + ".";
    }
    case ChainStep::Via::Elimination: {
      const GroundAtom& atom = table.numerics[step.derived.atom];
      std::vector<std::string> values;
      for (const auto& e : step.excluded) values.push_back(std::to_string(e.value));
      std::string lead = numeric_noun(atom) + " cannot be " +
                         (atom.name == "Pos" ? "in position " : "") +
                         join_with(values, "or") + ".";
      auto supports = support_phrases(step, table, theory, problem);
      std::string body = supports.empty()
                             ? capitalized(derived) + "."
                             : "Since " + join_with(supports, "and") + ", " + derived + ".";
      return capitalized(lead) + " " + body;
    }
  }
  return capitalized(derived) + ".";
}

}  // namespace

std::string pattern_signature(const Chain& chain) {
  int given = 0, rule = 0, elimination = 0;
  for (const auto& s : chain.steps) {
    switch (s.via) {
      case ChainStep::Via::Given: ++given; break;
      case ChainStep::Via::Rule: ++rule; break;
      case ChainStep::Via::Elimination: ++elimination; break;
    }
  }
  std::vector<std::string> parts;
  if (given) parts.push_back("given:" + std::to_string(given));
  if (rule) parts.push_back("rule-application:" + std::to_string(rule));
  if (elimination) parts.push_back("elimination:" + std::to_string(elimination));
  if (parts.empty()) return "empty";
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += "," + parts[i];
  return out;
}

nlohmann::ordered_json chain_to_json(const ChainResult& result, const GroundAtomTable& table,
                                     const NormalizedTheory& theory) {
  nlohmann::ordered_json out;
  if (!result.chain) {
    out["direction"] = nullptr;
    out["outcome"] = chain_outcome_text(result.outcome);
    out["steps"] = nlohmann::ordered_json::array();
    return out;
  }
  const Chain& chain = *result.chain;
  out["direction"] = chain.direction == Chain::Direction::Forward ? "forward" : "backward";
  out["outcome"] = chain_outcome_text(result.outcome);
  auto steps = nlohmann::ordered_json::array();
  for (const auto& step : chain.steps) {
    nlohmann::ordered_json s;
    s["derived"] = step.derived.text(table);
    s["via"] = via_text(step.via);
    if (step.via == ChainStep::Via::Rule)
      s["rule"] = theory.rules[static_cast<std::size_t>(step.rule)].text(table);
    s["supports"] = support_texts(step, table, theory);
    if (step.via == ChainStep::Via::Elimination) {
      auto excluded = nlohmann::ordered_json::array();
      for (const auto& e : step.excluded) excluded.push_back(e.text(table));
      s["excluded"] = std::move(excluded);
    }
    steps.push_back(std::move(s));
  }
  out["steps"] = std::move(steps);
  nlohmann::ordered_json conclusion;
  conclusion["statement"] = to_text(chain.target);
  conclusion["holds"] = chain.target_value;
  out["conclusion"] = std::move(conclusion);
  out["pattern"] = pattern_signature(chain);

  // The support DAG re-rooted as a tree; shared sub-derivations repeat.
  std::map<PropKey, std::size_t> by_prop;
  for (std::size_t i = 0; i < chain.steps.size(); ++i)
    by_prop[key_of(chain.steps[i].derived)] = i;
  auto node_for = [&](const Property& prop, auto&& self) -> nlohmann::ordered_json {
    nlohmann::ordered_json node;
    node["property"] = prop.text(table);
    auto it = by_prop.find(key_of(prop));
    if (it == by_prop.end()) {
      node["via"] = "given";
      return node;
    }
    const ChainStep& step = chain.steps[it->second];
    node["via"] = via_text(step.via);
    if (step.via == ChainStep::Via::Rule)
      node["rule"] = theory.rules[static_cast<std::size_t>(step.rule)].text(table);
    auto children = nlohmann::ordered_json::array();
    for (const auto& s : step.supports) children.push_back(self(s, self));
    for (int r : step.residual_supports) {
      nlohmann::ordered_json leaf;
      leaf["constraint"] = to_text(theory.residual[static_cast<std::size_t>(r)].formula);
      children.push_back(std::move(leaf));
    }
    if (!children.empty()) node["children"] = std::move(children);
    return node;
  };
  nlohmann::ordered_json root;
  root["statement"] = to_text(chain.target);
  root["holds"] = chain.target_value;
  auto children = nlohmann::ordered_json::array();
  for (const auto& b : chain.basis) children.push_back(node_for(b, node_for));
  root["children"] = std::move(children);
  out["tree"] = std::move(root);
  return out;
}

std::string render_chain_symbolic(const Chain& chain, const GroundAtomTable& table,
                                  const NormalizedTheory& theory) {
  std::string out;
  bool backward = chain.direction == Chain::Direction::Backward;
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const ChainStep& step = chain.steps[i];
    std::string line = std::to_string(i + 1) + ". ";
    std::string derived = step.derived.text(table);
    auto supports = support_texts(step, table, theory);
    std::string joined;
    for (std::size_t j = 0; j < supports.size(); ++j)
      joined += (j ? " and " : "") + supports[j];
    if (step.via == ChainStep::Via::Given) {
      line += derived + " (given)";
    } else {
      if (backward) line += derived + " <- " + joined;
      else line += joined + " -> " + derived;
      if (step.via == ChainStep::Via::Elimination) {
        std::string values;
        for (std::size_t j = 0; j < step.excluded.size(); ++j)
          values += (j ? ", " : "") + std::to_string(step.excluded[j].value);
        line += " (excluding " + values + ")";
      }
    }
    out += line;
    if (i + 1 < chain.steps.size()) out += "\n";
  }
  return out;
}

std::string render_chain_text(const Chain& chain, const GroundAtomTable& table,
                              const NormalizedTheory& theory, const Problem& problem) {
  std::vector<const ChainStep*> ordered;
  for (const auto& s : chain.steps) ordered.push_back(&s);
  if (chain.direction == Chain::Direction::Backward)
    std::reverse(ordered.begin(), ordered.end());
  std::string out;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    out += std::to_string(i + 1) + ". " + step_sentences(*ordered[i], table, theory, problem);
    if (i + 1 < ordered.size()) out += "\n";
  }
  return out;
}

}  // namespace softlogic
