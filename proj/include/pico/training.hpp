#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pico/envsim.hpp"
#include "pico/models.hpp"
#include "pico/optim.hpp"

namespace pico {

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 0;
  bool freeze_library = false;  // freeze pretrained-origin primitives
  int batch = 8;                // trajectories per update (pairs for cloning)

  void validate() const;
};

struct EpochStats {
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_label_accuracy;
};

struct TrainingHistory {
  std::vector<EpochStats> epochs;
};

// Reconstruction loss of already-computed rollouts against the observed
// actions: the mean over every timestep and action dimension of the squared
// blended-vs-observed difference. There is no label term.
double pico_loss(const std::vector<RolloutRecord>& records, const std::vector<Tensor>& actions);
double pico_loss(const std::vector<std::vector<RolloutRecord>>& batch_records,
                 const std::vector<std::vector<Tensor>>& batch_actions);

// End-to-end training of the network on the reconstruction loss with Adam and
// global-norm gradient clipping. Deterministic given (dataset, cfg, seed);
// frozen parameters stay bitwise identical. Raises NumericalError with epoch
// and trajectory diagnostics if the loss goes non-finite.
TrainingHistory train_pico(PicoNetwork& net, std::span<const Demonstration> train,
                           const TrainConfig& cfg,
                           std::span<const Demonstration> validation = {});

// One state-action pair of a demonstration segment.
struct StateAction {
  Tensor state;
  Tensor action;
};

// Behavior-cloning MSE regression of a single primitive on segments carrying
// one ground-truth sub-task. `noise` records how the segments were collected
// (the generators inject it); std = 0 means vanilla behavior cloning.
PrimitivePolicy pretrain_primitive(const std::string& id, std::span<const StateAction> segments,
                                   const NoiseConfig& noise, const TrainConfig& cfg,
                                   const MlpConfig& mlp);

// Appends n randomly initialized gap primitives ("gap0", "gap1", ...) and
// re-dimensions the gate head; existing parameters are untouched.
void add_gap_primitives(PicoNetwork& net, int n, std::uint64_t seed);

// All state-action pairs of `demos` whose ground-truth label equals `label`.
std::vector<StateAction> segments_with_label(std::span<const Demonstration> demos, int label);

}  // namespace pico
