#pragma once

#include <map>
#include <string>

#include "pico/tape.hpp"

namespace pico {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment state is keyed by parameter name, so the
// optimizer survives library growth (new parameters start with zero moments).
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {});

  // Applies one update. Only parameters present in `grads` are touched;
  // frozen parameters are skipped even if a gradient is supplied.
  void step(ParameterSet& params, const std::map<std::string, Tensor>& grads);

  long long steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  long long t_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

// Scales all gradients by max_norm/norm when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm. Raises NumericalError on NaN/Inf.
double clip_global_norm(std::map<std::string, Tensor>& grads, double max_norm);

}  // namespace pico
