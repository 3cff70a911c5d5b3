#pragma once

// The acceptance suite: one pass/fail line per criterion with its margin and timing.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pspin/theory.hpp"

namespace pspin {

enum class AcceptanceLevel { quick, full };

AcceptanceLevel parse_level(const std::string& text);
std::string to_string(AcceptanceLevel level);

struct AcceptanceOptions {
  AcceptanceLevel level = AcceptanceLevel::full;
  std::uint64_t seed = 20240917;
  A2Variant a2_variant = A2Variant::proof;
  int quad_order = kDefaultQuadratureOrder;
  std::vector<int> only;  // criterion ids to run; empty means all
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values and margins
  double seconds = 0.0;
};

/// Runs the selected criteria, printing one line per criterion to `out` as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

/// Number of criteria in the suite.
inline constexpr int kCriterionCount = 13;

}  // namespace pspin
