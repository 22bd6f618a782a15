#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sbsim {

struct CheckResult {
  std::string name;
  std::uint64_t passed = 0;
  std::uint64_t failed = 0;
};

/// Oracle equivalence suites: bit-serial and sparse MACs against native
/// multiplication, sparse golden against dense golden, simulator and event
/// model against the golden model, encoding round trips.
std::vector<CheckResult> run_checks(std::uint64_t seed, int random_layers = 40);

}  // namespace sbsim
