#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace mixlab {

/// One named pass/fail check with the measured quantity and the threshold it
/// was compared against. `margin` is signed: positive means slack.
struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  std::string detail;
};

struct Report {
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

}  // namespace mixlab
