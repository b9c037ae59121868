#pragma once

#include <string>
#include <vector>

namespace mangled {

// Collects non-fatal warnings (for example, parameters outside the regime in
// which a closed form was derived). Callers decide where they go.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

}  // namespace mangled
