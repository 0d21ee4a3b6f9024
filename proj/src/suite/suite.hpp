#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "data/jsonl.hpp"

namespace clhoi::suite {

struct Outcome {
  bool pass = true;
  double error = 0;  // worst deviation observed, compared to the tolerance
  std::string detail;
};

struct Property {
  std::string name;  // "<area>.<check>"
  double tolerance = 0;
  std::function<Outcome(std::uint64_t seed)> check;
};

// Every registered property, in report order.
const std::vector<Property>& registered_properties();

// Fails on seeds divisible by 7 after offsetting by 3; negative control for
// the reporting path.
Property injected_failure();

struct SuiteOptions {
  std::string filter;  // comma-separated name substrings; empty runs everything
  std::size_t seed_count = 100;
  std::uint64_t base_seed = 0;
  bool inject_failure = false;
  std::size_t threads = 0;
};

struct PropertyReport {
  std::string name;
  double tolerance = 0;
  std::size_t runs = 0;
  std::size_t passed = 0;
  double worst_error = 0;
  std::optional<std::uint64_t> failing_seed;  // smallest failing seed
  std::string failure_detail;
};

struct SuiteReport {
  std::size_t seed_count = 0;
  std::uint64_t base_seed = 0;
  std::vector<PropertyReport> properties;
  bool passed() const;
};

// Seeds are base_seed .. base_seed + seed_count - 1. An exception inside a
// check counts as a failure of that seed.
SuiteReport run_suite(const SuiteOptions& options);
SuiteReport run_properties(const std::vector<Property>& properties, const SuiteOptions& options);

std::vector<Property> select_properties(const std::string& filter, bool inject_failure);

std::string suite_text(const SuiteReport& report);
Json suite_json(const SuiteReport& report);

}  // namespace clhoi::suite
