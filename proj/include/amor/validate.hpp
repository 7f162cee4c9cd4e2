#pragma once

#include <string>
#include <vector>

#include "amor/config.hpp"

namespace amor {

struct CheckResult {
  std::string name;
  bool passed = false;
  double deviation = 0.0;               // measured deviation, check-specific units
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Oracle suite on a config: integrator vs rotating-wave solution, lock-in
/// calibration tone, Parseval, loss arithmetic, determinism, lock-in roll-off.
/// Never throws; problems become failed entries.
ValidationReport run_validation(const ExperimentConfig& config);

std::string format_validation(const ValidationReport& report);

}  // namespace amor
