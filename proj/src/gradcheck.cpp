#include "pico/gradcheck.hpp"

#include <cmath>

#include "pico/error.hpp"

namespace pico {

namespace {

double eval_loss(const std::function<Value(Session&)>& build_loss, const ParameterSet& params) {
  Tape tape(/*training=*/false);
  Session session(tape, params);
  Value loss = build_loss(session);
  if (loss.tensor().size() != 1) throw ValidationError("grad_check: loss must be scalar");
  return loss.tensor()[0];
}

}  // namespace

GradCheckReport grad_check(const std::function<Value(Session&)>& build_loss, ParameterSet& params,
                           double eps) {
  if (eps <= 0.0) throw ValidationError("grad_check: eps must be positive");

  double f0 = eval_loss(build_loss, params);
  double f1 = eval_loss(build_loss, params);
  if (f0 != f1)
    throw DeterminismError("grad_check: forward is not deterministic (" + std::to_string(f0) +
                           " vs " + std::to_string(f1) + ")");

  Tape tape(/*training=*/true);
  Session session(tape, params);
  Value loss = build_loss(session);
  tape.backward(loss);
  std::map<std::string, Tensor> analytic = session.gradients();

  GradCheckReport report;
  for (auto& [name, grad] : analytic) {
    Tensor& p = params.at(name);
    for (int i = 0; i < p.size(); ++i) {
      double saved = p[i];
      p[i] = saved + eps;
      double fp = eval_loss(build_loss, params);
      p[i] = saved - eps;
      double fm = eval_loss(build_loss, params);
      p[i] = saved;
      double numeric = (fp - fm) / (2.0 * eps);
      double a = grad[i];
      double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace pico
