#pragma once

#include <functional>
#include <string>

#include "pico/tape.hpp"

namespace pico {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  int checked = 0;  // number of scalar entries compared
};

// Compares reverse-mode gradients against central finite differences.
//
// `build_loss` must construct the scalar loss for the current parameter
// values on the given session and be deterministic; two evaluation-mode calls
// that disagree raise DeterminismError. Relative error per entry is
// |analytic - numeric| / max(1, |analytic|, |numeric|). Frozen parameters are
// excluded from the report.
GradCheckReport grad_check(const std::function<Value(Session&)>& build_loss, ParameterSet& params,
                           double eps = 1e-5);

}  // namespace pico
