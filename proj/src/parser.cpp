#include "softlogic/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace softlogic {

namespace {

// --- lexer --------------------------------------------------------------

enum class Tok {
  End, Ident, Int,
  LParen, RParen, Comma, Dot,
  Arrow, DArrow,                      // ->  <->
  Lt, Gt, Le, Ge, Eq, Ne,
  Plus, Minus, Star, DStar, Slash, DSlash,
};

struct Token {
  Tok kind;
  std::string text;     // Ident
  std::int64_t value;   // Int
  std::size_t column;   // 1-based start position
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t col) { out.push_back({k, "", 0, col}); };
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { ++i; continue; }
    std::size_t col = i + 1;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), 0, col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::int64_t v = 0;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
        v = v * 10 + (s[j] - '0');
        if (v > 1000000000000LL) throw ParseError(col, "integer literal too large");
        ++j;
      }
      out.push_back({Tok::Int, "", v, col});
      i = j;
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < s.size() && s[i + 1] == b;
    };
    if (two('<', '-') && i + 2 < s.size() && s[i + 2] == '>') { push(Tok::DArrow, col); i += 3; continue; }
    if (two('-', '>')) { push(Tok::Arrow, col); i += 2; continue; }
    if (two('<', '=')) { push(Tok::Le, col); i += 2; continue; }
    if (two('>', '=')) { push(Tok::Ge, col); i += 2; continue; }
    if (two('!', '=')) { push(Tok::Ne, col); i += 2; continue; }
    if (two('*', '*')) { push(Tok::DStar, col); i += 2; continue; }
    if (two('/', '/')) { push(Tok::DSlash, col); i += 2; continue; }
    switch (c) {
      case '(': push(Tok::LParen, col); ++i; continue;
      case ')': push(Tok::RParen, col); ++i; continue;
      case ',': push(Tok::Comma, col); ++i; continue;
      case '.': push(Tok::Dot, col); ++i; continue;
      case '<': push(Tok::Lt, col); ++i; continue;
      case '>': push(Tok::Gt, col); ++i; continue;
      case '=': push(Tok::Eq, col); ++i; continue;
      case '+': push(Tok::Plus, col); ++i; continue;
      case '-': push(Tok::Minus, col); ++i; continue;
      case '*': push(Tok::Star, col); ++i; continue;
      case '/': push(Tok::Slash, col); ++i; continue;
      default:
        throw ParseError(col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", 0, s.size() + 1});
  return out;
}

bool is_keyword(const std::string& ident, const char* kw) { return lower(ident) == kw; }

bool is_reserved(const std::string& ident) {
  static const std::set<std::string> kws = {"not",    "and",  "or",   "forall", "exist",
                                            "exists", "boolval", "true", "false"};
  return kws.count(lower(ident)) != 0;
}

// --- parser ---------------------------------------------------------------
//
// Binding strength, loose to tight:
//   quantifier < <-> < -> < or < and < not < comparison
// and inside comparisons:  + -  <  * // /  <  **  <  unary minus.
// -> and <-> associate to the right; comparisons do not chain.
//
// The only ambiguity is at the primary level, where '(' may open either a
// boolean group or a numeric group and a predicate application may be either
// sort. We first attempt "NumExpr cmp NumExpr" with backtracking; once the
// comparison operator has been consumed the attempt is committed and later
// errors are real. If no comparison materializes we re-parse as a boolean
// primary.

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;
  std::vector<std::string> bound;  // quantified variables in scope (size <= 1)

  const Token& peek() const { return toks[pos]; }
  const Token& get() { return toks[pos++]; }
  bool at(Tok k) const { return toks[pos].kind == k; }
  bool accept(Tok k) {
    if (at(k)) { ++pos; return true; }
    return false;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(peek().column, std::string("expected ") + what);
  }
  bool at_keyword(const char* kw) const {
    return at(Tok::Ident) && is_keyword(peek().text, kw);
  }

  bool is_bound(const std::string& name) const {
    return std::find(bound.begin(), bound.end(), name) != bound.end();
  }

  FormulaPtr parse_quantified() {
    if (at_keyword("forall") || at_keyword("exist") || at_keyword("exists")) {
      bool universal = is_keyword(peek().text, "forall");
      std::size_t col = get().column;
      if (!bound.empty())
        throw ParseError(col, "nested quantifiers are not supported");
      if (!at(Tok::Ident) || is_reserved(peek().text))
        throw ParseError(peek().column, "expected quantified variable name");
      std::string var = get().text;
      expect(Tok::Dot, "'.' after quantified variable");
      bound.push_back(var);
      FormulaPtr body = parse_quantified();  // body extends maximally right
      bound.pop_back();
      return universal ? Formula::forall(var, body) : Formula::exists(var, body);
    }
    return parse_iff();
  }

  FormulaPtr parse_iff() {
    FormulaPtr l = parse_implies();
    if (accept(Tok::DArrow)) return Formula::iff(l, parse_iff());
    return l;
  }

  FormulaPtr parse_implies() {
    FormulaPtr l = parse_or();
    if (accept(Tok::Arrow)) return Formula::implies(l, parse_implies());
    return l;
  }

  FormulaPtr parse_or() {
    FormulaList parts{parse_and()};
    while (at_keyword("or")) { get(); parts.push_back(parse_and()); }
    return Formula::disj(std::move(parts));
  }

  FormulaPtr parse_and() {
    FormulaList parts{parse_not()};
    while (at_keyword("and")) { get(); parts.push_back(parse_not()); }
    return Formula::conj(std::move(parts));
  }

  FormulaPtr parse_not() {
    if (at_keyword("not")) { get(); return Formula::negate(parse_not()); }
    return parse_primary();
  }

  static bool comparison_tok(Tok k) {
    return k == Tok::Lt || k == Tok::Gt || k == Tok::Le || k == Tok::Ge ||
           k == Tok::Eq || k == Tok::Ne;
  }

  static CompareOp to_compare(Tok k) {
    switch (k) {
      case Tok::Lt: return CompareOp::Lt;
      case Tok::Gt: return CompareOp::Gt;
      case Tok::Le: return CompareOp::Le;
      case Tok::Ge: return CompareOp::Ge;
      case Tok::Eq: return CompareOp::Eq;
      default: return CompareOp::Ne;
    }
  }

  FormulaPtr parse_primary() {
    // attempt: comparison
    std::size_t save = pos;
    bool committed = false;
    try {
      NumExprPtr l = parse_numexpr();
      if (!comparison_tok(peek().kind))
        throw ParseError(peek().column, "expected comparison operator");
      CompareOp op = to_compare(get().kind);
      committed = true;
      NumExprPtr r = parse_numexpr();
      if (comparison_tok(peek().kind))
        throw ParseError(peek().column, "comparisons do not chain");
      return Formula::compare(op, l, r);
    } catch (const ParseError&) {
      if (committed) throw;
      pos = save;
    }
    // boolean primary
    if (accept(Tok::LParen)) {
      FormulaPtr f = parse_quantified();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_keyword("boolval")) {
      get();
      expect(Tok::LParen, "'(' after BoolVal");
      if (!at(Tok::Ident) ||
          (!is_keyword(peek().text, "true") && !is_keyword(peek().text, "false")))
        throw ParseError(peek().column, "expected True or False");
      bool v = is_keyword(get().text, "true");
      expect(Tok::RParen, "')'");
      return Formula::bool_lit(v);
    }
    if (at(Tok::Ident)) {
      if (is_reserved(peek().text))
        throw ParseError(peek().column, "unexpected keyword '" + peek().text + "'");
      return Formula::make_atom(parse_atom(Sort::Boolean));
    }
    throw ParseError(peek().column, "expected formula");
  }

  PredicateAtom parse_atom(Sort usage) {
    PredicateAtom a;
    a.name = get().text;
    a.sort = usage;
    expect(Tok::LParen, "'(' after predicate name");
    if (!at(Tok::RParen)) {
      for (;;) {
        if (!at(Tok::Ident) || is_reserved(peek().text))
          throw ParseError(peek().column, "expected object name");
        // Trailing arguments get folded into the name, so a quantified
        // variable is only meaningful in the first slot.
        if (!a.args.empty() && is_bound(peek().text))
          throw ParseError(peek().column,
                           "quantified variable must be the first argument");
        a.args.push_back(get().text);
        if (!accept(Tok::Comma)) break;
      }
    }
    expect(Tok::RParen, "')'");
    a = canonicalize_atom(a);
    a.arg_is_var = !a.args.empty() && is_bound(a.args.front());
    return a;
  }

  NumExprPtr parse_numexpr() { return parse_add(); }

  NumExprPtr parse_add() {
    NumExprPtr l = parse_mul();
    for (;;) {
      if (accept(Tok::Plus)) l = NumExpr::arith(ArithOp::Add, l, parse_mul());
      else if (accept(Tok::Minus)) l = NumExpr::arith(ArithOp::Sub, l, parse_mul());
      else return l;
    }
  }

  NumExprPtr parse_mul() {
    NumExprPtr l = parse_pow();
    for (;;) {
      ArithOp op;
      if (accept(Tok::Star)) op = ArithOp::Mul;
      else if (accept(Tok::DSlash)) op = ArithOp::FloorDiv;
      else if (at(Tok::Slash)) { get(); op = ArithOp::Div; }
      else return l;
      std::size_t col = peek().column;
      NumExprPtr r = parse_pow();
      if ((op == ArithOp::Div || op == ArithOp::FloorDiv) &&
          r->kind == NumExpr::Kind::Const && r->value == 0)
        throw ParseError(col, "division by zero");
      l = NumExpr::arith(op, l, r);
    }
  }

  NumExprPtr parse_pow() {
    NumExprPtr l = parse_num_unary();
    if (accept(Tok::DStar)) return NumExpr::arith(ArithOp::Pow, l, parse_pow());
    return l;
  }

  NumExprPtr parse_num_unary() {
    if (accept(Tok::Minus)) {
      NumExprPtr e = parse_num_unary();
      if (e->kind == NumExpr::Kind::Const) return NumExpr::constant(-e->value);
      return NumExpr::arith(ArithOp::Sub, NumExpr::constant(0), e);
    }
    return parse_num_primary();
  }

  NumExprPtr parse_num_primary() {
    if (at(Tok::Int)) return NumExpr::constant(get().value);
    if (accept(Tok::LParen)) {
      NumExprPtr e = parse_numexpr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::Ident) && !is_reserved(peek().text))
      return NumExpr::make_atom(parse_atom(Sort::Numeric));
    throw ParseError(peek().column, "expected numeric expression");
  }
};

// --- sort usage ----------------------------------------------------------

struct SortUsage {
  std::set<std::string> boolean_names;
  std::set<std::string> numeric_names;

  void scan_num(const NumExprPtr& e) {
    if (!e) return;
    switch (e->kind) {
      case NumExpr::Kind::Atom: numeric_names.insert(e->atom.name); break;
      case NumExpr::Kind::Arith: scan_num(e->lhs); scan_num(e->rhs); break;
      default: break;
    }
  }

  void scan(const FormulaPtr& f) {
    if (!f) return;
    switch (f->kind) {
      case Formula::Kind::Atom: boolean_names.insert(f->atom.name); break;
      case Formula::Kind::Compare: scan_num(f->lhs); scan_num(f->rhs); break;
      default:
        for (auto& k : f->kids) scan(k);
        break;
    }
  }
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

FormulaPtr parse_formula_text(const std::string& text) {
  Parser p;
  p.toks = lex(text);
  FormulaPtr f = p.parse_quantified();
  if (!p.at(Tok::End))
    throw ParseError(p.peek().column, "unexpected trailing input");
  return f;
}

Problem parse_problem(const nlohmann::json& env) {
  if (!env.is_object())
    throw MalformedEnvelope("envelope is not a JSON object", env.dump());
  Problem prob;

  if (!env.contains("objects") || !env["objects"].is_array())
    throw MalformedEnvelope("missing or non-array 'objects'", env.dump());
  for (const auto& o : env["objects"]) {
    if (!o.is_string())
      throw MalformedEnvelope("object entry is not a string", env.dump());
    std::string name = trim(o.get<std::string>());
    if (name.empty()) continue;
    if (std::find(prob.objects.begin(), prob.objects.end(), name) == prob.objects.end())
      prob.objects.push_back(name);
  }

  if (!env.contains("facts") || !env["facts"].is_array())
    throw MalformedEnvelope("missing or non-array 'facts'", env.dump());
  for (const auto& entry : env["facts"]) {
    FactEntry fact;
    if (entry.is_string()) {
      fact.raw_form = entry.get<std::string>();
      fact.sentence = fact.raw_form;
    } else if (entry.is_array() && entry.size() == 2 && entry[0].is_string() &&
               entry[1].is_string()) {
      fact.sentence = entry[0].get<std::string>();
      fact.raw_form = entry[1].get<std::string>();
    } else {
      throw MalformedEnvelope("fact entry is neither a string nor a [sentence, form] pair",
                              env.dump());
    }
    try {
      fact.formula = parse_formula_text(fact.raw_form);
    } catch (const ParseError& e) {
      fact.issue = ParseIssue{e.column, e.what()};
    }
    prob.facts.push_back(std::move(fact));
  }

  if (!env.contains("query"))
    throw MalformedEnvelope("missing 'query'", env.dump());
  const auto& q = env["query"];
  SortUsage usage;
  for (const auto& f : prob.facts) usage.scan(f.formula);

  // The query arrives in one of three shapes: a bare form, a label->form
  // object, or the translator's raw list (a singleton is a plain query, a
  // longer list becomes options labeled A, B, ... in order).
  std::vector<std::pair<std::string, std::string>> labeled;
  std::string single;
  bool is_single = false;
  if (q.is_string()) {
    single = q.get<std::string>();
    is_single = true;
  } else if (q.is_object()) {
    std::vector<std::string> labels;
    for (auto it = q.begin(); it != q.end(); ++it) labels.push_back(it.key());
    std::sort(labels.begin(), labels.end());
    for (const auto& label : labels) {
      if (!q[label].is_string())
        throw MalformedEnvelope("query option '" + label + "' is not a string", env.dump());
      labeled.emplace_back(label, q[label].get<std::string>());
    }
  } else if (q.is_array()) {
    if (q.empty())
      throw MalformedEnvelope("'query' list is empty", env.dump());
    for (const auto& e : q)
      if (!e.is_string())
        throw MalformedEnvelope("query list entry is not a string", env.dump());
    if (q.size() == 1) {
      single = q[0].get<std::string>();
      is_single = true;
    } else {
      if (q.size() > 26)
        throw MalformedEnvelope("too many query options", env.dump());
      for (std::size_t i = 0; i < q.size(); ++i)
        labeled.emplace_back(std::string(1, static_cast<char>('A' + i)),
                             q[i].get<std::string>());
    }
  } else {
    throw MalformedEnvelope("'query' is not a string, object, or list", env.dump());
  }

  if (is_single) {
    prob.query.raw_text = single;
    try {
      FormulaPtr f = parse_formula_text(prob.query.raw_text);
      if (f->kind == Formula::Kind::Atom &&
          usage.numeric_names.count(f->atom.name) != 0) {
        // a numeric atom on its own asks for its feasible values, so this
        // mention is a numeric usage, not a boolean one
        prob.query.kind = QuerySpec::Kind::FreeNumeric;
        prob.query.numeric_target = f->atom;
        prob.query.numeric_target.sort = Sort::Numeric;
      } else {
        usage.scan(f);
        prob.query.kind = QuerySpec::Kind::Boolean;
        prob.query.boolean_query = f;
      }
      prob.query.ok = true;
    } catch (const ParseError&) {
      prob.query.ok = false;
    }
  } else {
    prob.query.kind = QuerySpec::Kind::Candidates;
    bool all_ok = labeled.size() >= 2;
    std::string joined;
    for (const auto& [label, form] : labeled) {
      if (!joined.empty()) joined += " | ";
      joined += label + ": " + form;
      try {
        FormulaPtr f = parse_formula_text(form);
        usage.scan(f);
        prob.query.candidates.emplace_back(label, f);
      } catch (const ParseError&) {
        all_ok = false;
      }
    }
    prob.query.raw_text = joined;
    prob.query.ok = all_ok && prob.query.candidates.size() == labeled.size();
  }

  if (env.contains("larger_direction")) {
    if (!env["larger_direction"].is_string())
      throw MalformedEnvelope("'larger_direction' is not a string", env.dump());
    prob.larger_direction = env["larger_direction"].get<std::string>();
  }

  for (const auto& name : usage.numeric_names) prob.sorts[name] = Sort::Numeric;
  for (const auto& name : usage.boolean_names) {
    if (prob.sorts.count(name) == 0) prob.sorts[name] = Sort::Boolean;
    else prob.sort_conflicts.push_back(name);
  }

  bool has_pos = usage.numeric_names.count("Pos") != 0;
  prob.schema = (prob.larger_direction.has_value() || has_pos) ? SchemaKind::Ordering
                                                               : SchemaKind::Deduction;
  return prob;
}

Problem parse_problem_text(const std::string& envelope_json) {
  nlohmann::json env;
  try {
    env = nlohmann::json::parse(envelope_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedEnvelope(e.what(), envelope_json);
  }
  return parse_problem(env);
}

}  // namespace softlogic
