// verify.hpp -- property suites behind the `verify` CLI subcommand.
#pragma once

#include <string>
#include <vector>

namespace nmq {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0;      // measured
  double threshold = 0;  // pass bound (value <= threshold unless informational)
  bool informational = false;
};

std::vector<CheckResult> verify_potential(bool quick = false);
std::vector<CheckResult> verify_spectral(bool quick = false);
std::vector<CheckResult> verify_dynamics(bool quick = false);

/// Prints "PASS|FAIL <name> value=... threshold=..." lines; returns the
/// number of failures.
int report_checks(const std::vector<CheckResult>& checks);

}  // namespace nmq
