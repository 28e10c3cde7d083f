#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reacritic::harness {

/// One oracle comparison. A check passes when measured <= tolerance; counts
/// of violations and exact-match audits use tolerance 0.
struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Finite-difference checks on every critic and actor parameter.
std::vector<CheckResult> grad_suite();
// Attention and layer-norm normalization over 1000 random inputs.
std::vector<CheckResult> norm_suite();
// Closed forms, interference monotonicity, projection feasibility, determinism.
std::vector<CheckResult> env_suite();
// Analytic multiply-accumulate counts against the instrumented tally.
std::vector<CheckResult> flops_suite();

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"grad", "norm", "env", "flops", "all"};
  return names;
}

/// Runs a named suite ("all" runs every suite). Throws ConfigError for an
/// unknown name.
std::vector<CheckResult> run_suite(const std::string& suite);

/// One line per check: PASS/FAIL, suite, name, measured and tolerance.
void print_checks(std::ostream& out, const std::vector<CheckResult>& checks);

bool all_passed(const std::vector<CheckResult>& checks);

}  // namespace reacritic::harness
