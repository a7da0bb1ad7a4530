#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "softlogic/errors.hpp"
#include "softlogic/trace.hpp"

namespace softlogic {

enum class PromptKind { Deduction, Ordering };

// What translate() returns: the parsed JSON envelope, one token trace per
// fact (empty trace = no logprobs available for it), and the raw model text.
struct TranslationResult {
  nlohmann::ordered_json envelope;
  std::vector<TokenTrace> traces;
  std::string raw_response;
};

// Every model interaction goes through this contract so runs can be recorded
// once and replayed byte-for-byte.
class Gateway {
 public:
  virtual ~Gateway() = default;

  // Natural language -> translation envelope.
  virtual TranslationResult translate(const std::string& context,
                                      const std::string& question,
                                      PromptKind kind) = 0;

  // "Given this context, is `assignment` a reasonable reading?" Strict
  // yes/no: anything that is not exactly "yes" counts as no.
  virtual bool verify_premise(const std::string& assignment,
                              const std::string& context,
                              const std::string& question) = 0;

  // Chain-of-thought answer; returns the trailing option letter if the
  // response ends with the expected "#### <letter>" marker.
  virtual std::optional<std::string> cot_fallback(
      const std::string& context, const std::string& question,
      const std::vector<std::pair<std::string, std::string>>& options) = 0;

  // Turn a rendered symbolic chain into fluent prose.
  virtual std::string render_chain(const std::string& chain_text) = 0;
};

// Prompt construction is shared by every implementation so recorded fixtures
// key on identical bytes.
std::string build_translate_prompt(const std::string& context, const std::string& question,
                                   PromptKind kind);
std::string build_verify_prompt(const std::string& assignment, const std::string& context,
                                const std::string& question);
std::string build_cot_prompt(const std::string& context, const std::string& question,
                             const std::vector<std::pair<std::string, std::string>>& options);
std::string build_render_prompt(const std::string& chain_text);

// Stable content key for a prompt (FNV-1a 64, hex) used to name fixtures.
std::string fixture_key(const std::string& prompt);

// Parse a raw model completion into an envelope + fact traces. The token
// stream (possibly empty) is used to attribute spans of the output to
// individual facts. Throws MalformedEnvelope.
TranslationResult parse_translation(const std::string& raw, const TokenTrace& tokens);

// Extract the trailing "#### <letter>" answer marker, if any.
std::optional<std::string> parse_cot_answer(const std::string& text);

struct GatewayConfig {
  enum class Mode { Live, Record, Replay };
  Mode mode = Mode::Replay;
  std::string fixture_dir;
  // live transport
  std::string endpoint;  // e.g. "http://host:port/v1/chat/completions"
  std::string api_key;
  std::string model;
  int max_tokens = 1000;
  double temperature = 0.0;
  int max_in_flight = 4;
  bool debug_log = false;  // dump request/response bodies to stderr
};

// Environment overrides: SOFTLOGIC_GATEWAY_MODE (live|record|replay),
// SOFTLOGIC_FIXTURES, SOFTLOGIC_ENDPOINT, SOFTLOGIC_API_KEY, SOFTLOGIC_MODEL.
GatewayConfig gateway_config_from_env();

// Persist one exchange into the fixture directory under its content key.
// Used by the recording mode and by tools that synthesize fixtures from
// scripted responses.
void write_fixture(const std::string& fixture_dir, const std::string& kind,
                   const std::string& prompt, const std::string& response,
                   const TokenTrace& tokens);

// Replay-only gateway over a fixture directory. Throws FixtureMissing for
// requests that were never recorded. Fixture files are keyed by prompt
// content, so re-recording a run never produces duplicate entries.
std::unique_ptr<Gateway> make_replay_gateway(const std::string& fixture_dir);

// Live HTTP gateway (chat-completions shape, logprobs requested).
std::unique_ptr<Gateway> make_http_gateway(const GatewayConfig& config);

// Assemble from config: Replay -> replay, Live -> http, Record -> http with
// every exchange persisted to config.fixture_dir.
std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config);

}  // namespace softlogic
