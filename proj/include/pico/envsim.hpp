#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pico/alignment.hpp"
#include "pico/tensor.hpp"

namespace pico {

// Gaussian noise injected into expert actions during demonstration
// collection. std = 0 reduces to noise-free collection.
struct NoiseConfig {
  double action_noise_std = 0.01;
};

// One demonstration: aligned states, executed actions (expert output plus the
// recorded noise), ground-truth labels, the collapsed sketch, and the derived
// seed it was generated from.
struct Demonstration {
  std::vector<Tensor> states;   // T x [state_dim]
  std::vector<Tensor> actions;  // T x [action_dim]
  std::vector<Tensor> noise;    // T x [action_dim], the injected part of each action
  std::vector<int> labels;      // T
  TaskSketch sketch;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(states.size()); }
};

struct DatasetInfo {
  std::string domain;  // "blockworld" | "dialpad"
  int state_dim = 0;
  int action_dim = 0;
  int num_primitives = 0;
  int t_min = 0, t_max = 0;                // declared trajectory length bounds
  double action_noise_std = 0.0;
  std::vector<std::string> state_layout;   // name per state coordinate
};

struct Dataset {
  DatasetInfo info;
  std::vector<Demonstration> demos;

  std::size_t size() const { return demos.size(); }
};

// --- Blockworld: reach / grasp / lift on a planar workspace -----------------
//
// State  [6]: eff_x, eff_y, aperture, block_x, block_y, lift_target_y
// Action [3]: eff velocity x, y and aperture rate, all per step.
// Labels: 0 reach (proportional control toward the block until within 0.02),
//         1 grasp (close aperture to >= 0.9), 2 lift (ascend to the target
//         height, which is sampled above the block's start). Every sketch is
//         (0, 1, 2). Expert speeds are capped at 0.08 per step; trajectory
//         lengths land in [60, 180].
Dataset generate_blockworld(int n, std::uint64_t seed, const NoiseConfig& noise = {});

// --- Dialpad: press sketch_len keys in sequence ------------------------------
//
// State  [2 + 2K + 1]: eff_x, eff_y, K key positions (reshuffled per
// demonstration), pressed fraction. Action [2]: eff velocity. Labels: index
// of the key currently being targeted; the expert dwells 3 steps on contact.
Dataset generate_dialpad(int n, int keys, int sketch_len, std::uint64_t seed,
                         const NoiseConfig& noise = {});

// Seeded shuffle split at per-trajectory granularity; disjoint and
// exhaustive. train gets round(fraction * n) demos, clamped to [1, n-1].
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);

// Scripted expert action for a blockworld state (noise-free). Used by tests
// and by open-loop rollout comparisons.
Tensor blockworld_expert_action(const Tensor& state);

// Advances a blockworld state by one executed action (positions integrate the
// velocities; the aperture is clamped to [0, 1]).
Tensor blockworld_step(const Tensor& state, const Tensor& action);

}  // namespace pico
