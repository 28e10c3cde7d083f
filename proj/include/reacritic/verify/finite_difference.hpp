#pragma once

// Finite-difference oracle for the verification suites. Independent of the tape: it perturbs raw
// tensor values and re-evaluates a caller-supplied scalar function.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "reacritic/autodiff/tensor.hpp"

namespace reacritic::verify {

inline constexpr double kFdStep = 1e-5;

// Denominator floor for relative error: below it the comparison becomes
// absolute, which keeps near-zero gradient entries from dominating.
inline constexpr double kRelErrFloor = 1e-6;

inline double relative_error(double analytic, double numeric, double floor = kRelErrFloor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

/// Central differences of `f` with respect to every value of `t`.
inline std::vector<double> numeric_gradient(ad::Tensor t, const std::function<double()>& f, double h = kFdStep) {
  auto values = t.mutable_data();
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = f();
    values[i] = saved - h;
    const double down = f();
    values[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

/// Compares the tensor's accumulated gradient against central differences of `f`.
inline GradCheck check_gradient(ad::Tensor t, const std::function<double()>& f, double h = kFdStep) {
  const auto numeric = numeric_gradient(t, f, h);
  GradCheck result;
  const auto analytic = t.grad();
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double a = analytic.empty() ? 0.0 : analytic[i];
    const double e = relative_error(a, numeric[i]);
    if (e > result.max_rel_error) {
      result.max_rel_error = e;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace reacritic::verify
