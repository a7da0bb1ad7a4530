#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace softlogic {

// One generated token. `prob` is the probability of the chosen token; `dist`
// is the model's (possibly truncated) distribution at that step when the
// provider exposes one.
struct TokenRecord {
  std::string token;
  double prob = 1.0;
  std::optional<std::vector<std::pair<std::string, double>>> dist;
};

using TokenTrace = std::vector<TokenRecord>;

}  // namespace softlogic
