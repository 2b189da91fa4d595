#pragma once

#include <span>
#include <vector>

#include "pico/alignment.hpp"
#include "pico/metrics.hpp"
#include "pico/training.hpp"

namespace pico {

struct CtcModelConfig {
  int state_dim = 0;
  int num_labels = 0;
  int encoder_dim = 64;  // matches the metacontroller widths for fairness
  int hidden_dim = 64;
};

// Emission network for the sketch-alignment baseline: affine+ReLU encoder,
// tanh recurrence, and a log-softmax head over the label set.
class CtcModel {
 public:
  CtcModel(CtcModelConfig cfg, Rng& rng);

  const CtcModelConfig& config() const { return cfg_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  // One [K] row of log-probabilities per timestep, on the tape.
  std::vector<Value> emissions_on_tape(Session& session, std::span<const Tensor> states) const;
  // Evaluation-mode emissions.
  EmissionMatrix emissions(std::span<const Tensor> states) const;

 private:
  CtcModelConfig cfg_;
  ParameterSet params_;
};

struct CtcBaseline {
  CtcModel model;
  std::vector<PrimitivePolicy> policies;  // one per label, cloned from decoded segments
  std::vector<Path> decoded_train_paths;  // alignment of the training set after training
};

// Trains the emission network to maximize the sketch log-likelihood of every
// training trajectory, decodes the training set, and behavior-clones one
// policy per label from its decoded timesteps. Labels that decode to no
// timesteps keep their random initialization.
CtcBaseline train_ctc_baseline(std::span<const Demonstration> train, const TrainConfig& cfg,
                               const CtcModelConfig& model_cfg, const MlpConfig& policy_mlp);

// Sketch-informed evaluation: decodes each demonstration against its own
// sketch and predicts actions with the decoded label's policy.
EvaluationReport evaluate_ctc(const CtcBaseline& baseline,
                              std::span<const Demonstration> demos);

}  // namespace pico
