#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tumor::properties {

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  // largest observed error measure
  double tolerance = 0.0;
  std::string first_failure;
  bool passed() const { return failures == 0 && cases > 0; }
};

struct SuiteOptions {
  int cases = 100;
  std::uint64_t seed = 20240917;
};

/// Randomized invariant checks over small shapes; one result per property.
std::vector<PropertyResult> run_property_suite(const SuiteOptions& opts = {});

}  // namespace tumor::properties
