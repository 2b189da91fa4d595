#include "pico/optim.hpp"

#include <cmath>

#include "pico/error.hpp"

namespace pico {

Adam::Adam(AdamConfig cfg) : cfg_(cfg) {
  if (cfg_.learning_rate < 0.0) throw ValidationError("Adam: learning_rate must be >= 0");
  if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0)
    throw ValidationError("Adam: betas must lie in [0, 1)");
  if (cfg_.eps <= 0.0) throw ValidationError("Adam: eps must be positive");
}

void Adam::step(ParameterSet& params, const std::map<std::string, Tensor>& grads) {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (const auto& [name, g] : grads) {
    if (params.is_frozen(name)) continue;
    Tensor& p = params.at(name);
    if (!p.same_shape(g))
      throw DimensionError("Adam: gradient " + g.shape_str() + " vs parameter " + p.shape_str() +
                           " for '" + name + "'");
    auto mit = m_.find(name);
    if (mit == m_.end()) {
      mit = m_.emplace(name, Tensor(p.shape())).first;
      v_.emplace(name, Tensor(p.shape()));
    }
    Tensor& m = mit->second;
    Tensor& v = v_.at(name);
    for (int i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double clip_global_norm(std::map<std::string, Tensor>& grads, double max_norm) {
  if (max_norm <= 0.0) throw ValidationError("clip_global_norm: max_norm must be positive");
  double sq = 0.0;
  for (const auto& [_, g] : grads)
    for (int i = 0; i < g.size(); ++i) sq += g[i] * g[i];
  double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericalError("clip_global_norm: non-finite gradient norm");
  if (norm > max_norm) {
    double s = max_norm / norm;
    for (auto& [_, g] : grads)
      for (int i = 0; i < g.size(); ++i) g[i] *= s;
  }
  return norm;
}

}  // namespace pico
