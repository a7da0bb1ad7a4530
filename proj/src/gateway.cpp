#include "softlogic/gateway.hpp"

#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <utility>

#include "httplib.h"
#include "nlohmann/json.hpp"

namespace softlogic {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Prompt templates. `{context}` and `{question}` are substitution slots;
// everything else is sent to the model byte-for-byte (pinned by golden files
// under tests/fixtures/prompts/).
constexpr const char* kDeductionTemplate = R"tmpl(You are a formal-logic translator.
Return ONLY a valid JSON object with exactly these keys: "objects", "facts", "query".
FORMALIZATION RULES:
1. "objects": All names of whose properties are described in the context. Note that group-referrig nouns like "Zumpus" and "Vumpus" are predicates rather than objects. That is to say, words like "Dumpus" and "Rompus" cannot be used after predicates and cannot be added into "objects".
2. "facts": Each element must be a two-element list: ["<ORIGINAL_SENTENCE>", "<LOGICAL_FORM>"]. <LOGICAL_FORM> must be:
- An atomic predicate with exactly one object inside parentheses. All objects must be in the singular form.
- Use a prefix "not " for negation if and only if the natural language explicitly indicates negation. e.g. "not Happy(Anne)".
- Use "->" to represent the logical relationship of "if...then...", for example: ["If Anne is green then Anne is round.", "Green(Anne) -> Round(Anne)"]
- Use "and", "or" for a boolean combination of atomic predicates. e.g. "Have_a_cat(Bob) and Tall(Bob)", "not (Happy(Anne) or Sad(Anne))".
- For universal quantified laws where the object is not specified, use the form: "forall x. <premise> -> <conclusion>". Example: ["Tumpuses are wumpuses", "forall x. Tumpus(x) -> Wumpus(x)"], ["Every tumpus is large", "forall x. Tumpus(x) -> Large(x)"]
3. "query": a single string representing the formula to evaluate. Do NOT include the query in the "facts" list.
4. Permitted logical terms (only): and, or, ->, forall, exist, not, and Predicate(Object)
Translate the following context and question into logical language. For the "facts" section, the "original sentence" must be copied verbatim sentence by sentence in the exact order of the original context without any modifications; the "logical formalization" must be translated rigorously in accordance with the original sentences. Do not omit, add, or alter any conditions.
Context:
{context}
Question:
{question})tmpl";

constexpr const char* kOrderingTemplate = R"tmpl(You are a formal logic translator.
Convert the following ordering puzzle into a JSON structure.
Return ONLY a valid JSON object with exactly these keys: "objects", "larger_direction", "facts", "query".
Requirements:
1. "objects": Copy the names of all the items to be compared directly as "objects". If the name of an object consists of multiple words, connect them with underscores.
2. "facts": Each element must be a two-element list: ["<ORIGINAL_SENTENCE>", "<LOGICAL_FORM>"]. <LOGICAL_FORM> must use only these predicates and syntax: >, <, =, and, or, not, Pos(object). Comparisons: Pos(A) < Pos(B), Pos(A) > Pos(B), Pos(A) = k. Any other symbols and predicates are prohibited.
3. "query": A dictionary in the form: {"A": "<logical form of option A>", "B": "<logical form of option B>", "C": "<logical form of option C>", "D": "<logical form of option D>", "E": "<logical form of option E>"}. Translate each option in the question into the corresponding logical language.
Note:
You must perform sorting comparisons in the following order: left < right, bottom < top, front < back and small < large (e.g., new < old, cheap < expensive).  For example, if there are 5 objects arranged from left to right and "apple is the second from the right", you should translate it as "Pos(apple) = 4" based on the total number of objects. All your comparison criteria must be consistent; additionally, pay attention to the impact of words like "less" and "more" on the translation into logical language.
Context
{context}
Question
{question}
Begin.)tmpl";

constexpr const char* kCotTemplate = R"tmpl(You are a logical reasoning expert. 
Solve the multiple-choice question step by step and explain your reasoning in a simple structured way.
Avoid overly long explanations. Provide clear reasoning followed by the final answer.
At the very end of your response, output the final answer format exactly as: '#### <Letter>'. 
Example: '#### A' or '#### B'.)tmpl";

// Replace the later slot first so the earlier offset stays valid and caller
// text is never rescanned for slots.
std::string fill(const char* tmpl, const std::string& context, const std::string& question) {
  std::string out = tmpl;
  auto q = out.find("{question}");
  out.replace(q, 10, question);
  auto c = out.find("{context}");
  out.replace(c, 9, context);
  return out;
}

// First top-level JSON object in the text, respecting string literals.
std::string extract_object(const std::string& raw) {
  auto start = raw.find('{');
  if (start == std::string::npos) return {};
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    char ch = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (ch == '\\') escaped = true;
      else if (ch == '"') in_string = false;
    } else if (ch == '"') {
      in_string = true;
    } else if (ch == '{') {
      ++depth;
    } else if (ch == '}' && --depth == 0) {
      return raw.substr(start, i - start + 1);
    }
  }
  return {};
}

bool is_yes(const std::string& reply) {
  std::size_t b = 0, e = reply.size();
  while (b < e && std::isspace(static_cast<unsigned char>(reply[b]))) ++b;
  while (e > b && (std::isspace(static_cast<unsigned char>(reply[e - 1])) ||
                   reply[e - 1] == '.' || reply[e - 1] == '!'))
    --e;
  std::string word = reply.substr(b, e - b);
  for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return word == "yes";
}

ordered_json tokens_to_json(const TokenTrace& tokens) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : tokens) {
    ordered_json rec;
    rec["t"] = t.token;
    rec["p"] = t.prob;
    if (t.dist) {
      ordered_json d = ordered_json::array();
      for (const auto& [tok, p] : *t.dist) d.push_back(ordered_json::array({tok, p}));
      rec["dist"] = std::move(d);
    }
    arr.push_back(std::move(rec));
  }
  return arr;
}

TokenTrace tokens_from_json(const json& arr) {
  TokenTrace out;
  if (!arr.is_array()) return out;
  for (const auto& rec : arr) {
    TokenRecord t;
    t.token = rec.value("t", std::string());
    t.prob = rec.value("p", 1.0);
    if (rec.contains("dist") && rec["dist"].is_array()) {
      std::vector<std::pair<std::string, double>> dist;
      for (const auto& entry : rec["dist"])
        dist.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<double>());
      t.dist = std::move(dist);
    }
    out.push_back(std::move(t));
  }
  return out;
}

// What a transport produces for one request. Gateways share all prompt
// building and response parsing; transports only move bytes.
struct Completion {
  std::string text;
  TokenTrace tokens;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual Completion complete(const std::string& kind, const std::string& prompt,
                              bool want_logprobs) = 0;
};

class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(std::string dir) : dir_(std::move(dir)) {}

  Completion complete(const std::string&, const std::string& prompt, bool) override {
    std::string key = fixture_key(prompt);
    std::ifstream in(std::filesystem::path(dir_) / (key + ".json"));
    if (!in) throw FixtureMissing(key);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("response"))
      throw GatewayError("fixture " + key + " is not a recorded exchange");
    Completion c;
    c.text = doc["response"].get<std::string>();
    if (doc.contains("tokens")) c.tokens = tokens_from_json(doc["tokens"]);
    return c;
  }

 private:
  std::string dir_;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(GatewayConfig config) : config_(std::move(config)) {
    auto scheme = config_.endpoint.find("://");
    auto path = config_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    base_ = path == std::string::npos ? config_.endpoint : config_.endpoint.substr(0, path);
    path_ = path == std::string::npos ? "/v1/chat/completions" : config_.endpoint.substr(path);
  }

  Completion complete(const std::string&, const std::string& prompt,
                      bool want_logprobs) override {
    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    body["max_tokens"] = config_.max_tokens;
    body["temperature"] = config_.temperature;
    if (want_logprobs) {
      body["logprobs"] = true;
      body["top_logprobs"] = 5;
    }
    std::string payload = body.dump();
    if (config_.debug_log) std::fprintf(stderr, ">> %s\n", payload.c_str());

    Slot slot(*this);
    httplib::Client client(base_);
    client.set_connection_timeout(30);
    client.set_read_timeout(300);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) throw NetworkError(httplib::to_string(res.error()));
    if (config_.debug_log) std::fprintf(stderr, "<< %s\n", res->body.c_str());
    if (res->status != 200)
      throw NetworkError("status " + std::to_string(res->status) + ": " + res->body);
    return parse_completion(res->body);
  }

 private:
  // RAII in-flight ticket implementing the request cap.
  struct Slot {
    explicit Slot(HttpTransport& t) : owner(t) {
      std::unique_lock<std::mutex> lock(owner.mu_);
      owner.cv_.wait(lock, [&] { return owner.in_flight_ < owner.config_.max_in_flight; });
      ++owner.in_flight_;
    }
    ~Slot() {
      {
        std::lock_guard<std::mutex> lock(owner.mu_);
        --owner.in_flight_;
      }
      owner.cv_.notify_one();
    }
    HttpTransport& owner;
  };

  Completion parse_completion(const std::string& body) const {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty())
      throw NetworkError("response has no choices: " + body);
    const json& choice = doc["choices"][0];
    Completion c;
    c.text = choice.contains("message") ? choice["message"].value("content", std::string())
                                        : choice.value("text", std::string());
    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content")) {
      for (const auto& entry : choice["logprobs"]["content"]) {
        TokenRecord t;
        t.token = entry.value("token", std::string());
        t.prob = std::exp(entry.value("logprob", 0.0));
        if (entry.contains("top_logprobs")) {
          std::vector<std::pair<std::string, double>> dist;
          double sum = 0.0;
          for (const auto& alt : entry["top_logprobs"]) {
            double p = std::exp(alt.value("logprob", 0.0));
            dist.emplace_back(alt.value("token", std::string()), p);
            sum += p;
          }
          // providers expose only the top few alternatives; attach the
          // distribution only when it is actually complete
          if (std::abs(sum - 1.0) <= 1e-6) t.dist = std::move(dist);
        }
        c.tokens.push_back(std::move(t));
      }
    }
    return c;
  }

  GatewayConfig config_;
  std::string base_, path_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

class RecordingTransport : public Transport {
 public:
  RecordingTransport(std::unique_ptr<Transport> inner, std::string dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {}

  Completion complete(const std::string& kind, const std::string& prompt,
                      bool want_logprobs) override {
    Completion c = inner_->complete(kind, prompt, want_logprobs);
    write_fixture(dir_, kind, prompt, c.text, c.tokens);
    return c;
  }

 private:
  std::unique_ptr<Transport> inner_;
  std::string dir_;
};

class TransportGateway : public Gateway {
 public:
  explicit TransportGateway(std::unique_ptr<Transport> transport)
      : transport_(std::move(transport)) {}

  TranslationResult translate(const std::string& context, const std::string& question,
                              PromptKind kind) override {
    std::string prompt = build_translate_prompt(context, question, kind);
    Completion c = transport_->complete("translate", prompt, true);
    return parse_translation(c.text, c.tokens);
  }

  bool verify_premise(const std::string& assignment, const std::string& context,
                      const std::string& question) override {
    std::string prompt = build_verify_prompt(assignment, context, question);
    return is_yes(transport_->complete("verify", prompt, false).text);
  }

  std::optional<std::string> cot_fallback(
      const std::string& context, const std::string& question,
      const std::vector<std::pair<std::string, std::string>>& options) override {
    std::string prompt = build_cot_prompt(context, question, options);
    return parse_cot_answer(transport_->complete("cot", prompt, false).text);
  }

  std::string render_chain(const std::string& chain_text) override {
    return transport_->complete("render", build_render_prompt(chain_text), false).text;
  }

 private:
  std::unique_ptr<Transport> transport_;
};

}  // namespace

std::string build_translate_prompt(const std::string& context, const std::string& question,
                                   PromptKind kind) {
  return fill(kind == PromptKind::Deduction ? kDeductionTemplate : kOrderingTemplate,
              context, question);
}

std::string build_verify_prompt(const std::string& assignment, const std::string& context,
                                const std::string& question) {
  return
      "You are checking one candidate reading of a puzzle.\n"
      "Context:\n" + context + "\n" +
      "Question:\n" + question + "\n" +
      "Candidate reading:\n" + assignment + "\n" +
      "Can the candidate reading be inferred from the context, the question, or common "
      "sense? Answer with exactly one word: yes or no.";
}

std::string build_cot_prompt(const std::string& context, const std::string& question,
                             const std::vector<std::pair<std::string, std::string>>& options) {
  std::string prompt = kCotTemplate;
  prompt += "\nContext:\n" + context + "\nQuestion:\n" + question;
  if (!options.empty()) {
    prompt += "\nOptions:";
    for (const auto& [label, text] : options) prompt += "\n" + label + ") " + text;
  }
  return prompt;
}

std::string build_render_prompt(const std::string& chain_text) {
  return
      "Rewrite the following reasoning steps as fluent connected prose. Keep every step "
      "and its order; do not add, drop, or reorder steps.\n"
      "Steps:\n" + chain_text;
}

std::string fixture_key(const std::string& prompt) {
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a 64
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TranslationResult parse_translation(const std::string& raw, const TokenTrace& tokens) {
  std::string object_text = extract_object(raw);
  if (object_text.empty()) throw MalformedEnvelope("no JSON object in response", raw);
  ordered_json envelope = ordered_json::parse(object_text, nullptr, false);
  if (envelope.is_discarded())
    throw MalformedEnvelope("response is not valid JSON", raw);

  TranslationResult out{std::move(envelope), {}, raw};

  auto facts = out.envelope.find("facts");
  if (facts == out.envelope.end() || !facts->is_array()) return out;
  out.traces.assign(facts->size(), {});
  if (tokens.empty()) return out;

  // Attribute token spans to facts: locate each logical form in the joined
  // token text and collect the records covering it. Facts appear in response
  // order, so the search cursor only moves forward (with one wrap for safety).
  std::string joined;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  spans.reserve(tokens.size());
  for (const auto& t : tokens) {
    spans.emplace_back(joined.size(), joined.size() + t.token.size());
    joined += t.token;
  }
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < facts->size(); ++i) {
    const auto& fact = (*facts)[i];
    std::string form;
    if (fact.is_string()) form = fact.get<std::string>();
    else if (fact.is_array() && fact.size() == 2 && fact[1].is_string())
      form = fact[1].get<std::string>();
    if (form.empty()) continue;
    auto at = joined.find(form, cursor);
    if (at == std::string::npos) at = joined.find(form);
    if (at == std::string::npos) continue;  // no match: fact keeps a uniform weight
    std::size_t end = at + form.size();
    for (std::size_t k = 0; k < tokens.size(); ++k)
      if (spans[k].second > at && spans[k].first < end)
        out.traces[i].push_back(tokens[k]);
    cursor = end;
  }
  return out;
}

std::optional<std::string> parse_cot_answer(const std::string& text) {
  auto at = text.rfind("####");
  if (at == std::string::npos) return std::nullopt;
  std::size_t i = at + 4;
  while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) {
    if (text[i] == '\n') return std::nullopt;  // answer sits on the marker's line
    ++i;
  }
  std::size_t j = i;
  while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
  if (j - i == 1 && std::isupper(static_cast<unsigned char>(text[i])))
    return std::string(1, text[i]);
  return std::nullopt;
}

GatewayConfig gateway_config_from_env() {
  GatewayConfig config;
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  if (std::string mode = get("SOFTLOGIC_GATEWAY_MODE"); !mode.empty()) {
    if (mode == "live") config.mode = GatewayConfig::Mode::Live;
    else if (mode == "record") config.mode = GatewayConfig::Mode::Record;
    else if (mode == "replay") config.mode = GatewayConfig::Mode::Replay;
    else throw GatewayError("unknown SOFTLOGIC_GATEWAY_MODE: " + mode);
  }
  if (std::string v = get("SOFTLOGIC_FIXTURES"); !v.empty()) config.fixture_dir = v;
  if (std::string v = get("SOFTLOGIC_ENDPOINT"); !v.empty()) config.endpoint = v;
  if (std::string v = get("SOFTLOGIC_API_KEY"); !v.empty()) config.api_key = v;
  if (std::string v = get("SOFTLOGIC_MODEL"); !v.empty()) config.model = v;
  return config;
}

void write_fixture(const std::string& fixture_dir, const std::string& kind,
                   const std::string& prompt, const std::string& response,
                   const TokenTrace& tokens) {
  std::filesystem::create_directories(fixture_dir);
  ordered_json doc;
  doc["kind"] = kind;
  doc["prompt"] = prompt;
  doc["response"] = response;
  if (!tokens.empty()) doc["tokens"] = tokens_to_json(tokens);
  std::ofstream out(std::filesystem::path(fixture_dir) / (fixture_key(prompt) + ".json"));
  out << doc.dump(2) << "\n";
}

std::unique_ptr<Gateway> make_replay_gateway(const std::string& fixture_dir) {
  return std::make_unique<TransportGateway>(std::make_unique<ReplayTransport>(fixture_dir));
}

std::unique_ptr<Gateway> make_http_gateway(const GatewayConfig& config) {
  return std::make_unique<TransportGateway>(std::make_unique<HttpTransport>(config));
}

std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config) {
  switch (config.mode) {
    case GatewayConfig::Mode::Replay:
      return make_replay_gateway(config.fixture_dir);
    case GatewayConfig::Mode::Live:
      return make_http_gateway(config);
    case GatewayConfig::Mode::Record:
      return std::make_unique<TransportGateway>(std::make_unique<RecordingTransport>(
          std::make_unique<HttpTransport>(config), config.fixture_dir));
  }
  throw GatewayError("unreachable gateway mode");
}

}  // namespace softlogic
