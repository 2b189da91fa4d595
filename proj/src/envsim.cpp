#include "pico/envsim.hpp"

#include <algorithm>
#include <cmath>

#include "pico/error.hpp"
#include "pico/rng.hpp"

namespace pico {

namespace {

// Blockworld expert tuning. Thresholds drive the phase machine; speeds keep
// trajectory lengths inside [60, 180] at the default noise level without any
// padding. High-noise collection (DART comparisons) widens the declared
// bounds because threshold crossings then take a random-walk excursion.
constexpr double kGain = 0.08;          // proportional gain, also max speed
constexpr double kStationGain = 0.5;    // station keeping while grasping
constexpr double kReachTol = 0.02;
constexpr double kApertureRate = 0.045;
constexpr double kApertureDone = 0.9;
constexpr int kMinGraspSteps = 5;
constexpr double kLiftTol = 0.015;
constexpr int kBlockworldTMin = 60;
constexpr int kBlockworldTMax = 180;
constexpr int kPhaseStepCap = 400;

// Dialpad expert tuning.
constexpr double kDialGain = 0.1;
constexpr double kDialSpeedCap = 0.08;
constexpr double kDialTol = 0.025;
constexpr int kDialDwell = 3;
constexpr double kKeySeparation = 0.05;
constexpr int kDialTMin = 8;
constexpr int kDialTMax = 400;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Proportional step toward a target with capped speed.
void seek(double dx, double dy, double gain, double cap, double& vx, double& vy) {
  vx = gain * dx;
  vy = gain * dy;
  double mag = std::hypot(vx, vy);
  if (mag > cap) {
    vx *= cap / mag;
    vy *= cap / mag;
  }
}

enum BlockPhase { kReach = 0, kGrasp = 1, kLift = 2 };

}  // namespace

namespace {

// Expert action for a known phase. Reach and lift use proportional control;
// grasp station-keeps on the block with a stiffer gain while closing.
Tensor blockworld_phase_action(const Tensor& state, int phase) {
  double ex = state[0], ey = state[1];
  double bx = state[3], by = state[4], target_y = state[5];
  Tensor action({3});
  switch (phase) {
    case kReach:
      seek(bx - ex, by - ey, kGain, kGain, action[0], action[1]);
      break;
    case kGrasp:
      seek(bx - ex, by - ey, kStationGain, kGain, action[0], action[1]);
      action[2] = kApertureRate;
      break;
    default:
      seek(bx - ex, target_y - ey, kGain, kGain, action[0], action[1]);
      break;
  }
  return action;
}

}  // namespace

Tensor blockworld_expert_action(const Tensor& state) {
  if (state.size() != 6)
    throw DimensionError("blockworld_expert_action: state " + state.shape_str());
  // Stateless reading of the phase off the thresholds: grasp once at the
  // block, lift once the aperture is closed.
  bool at_block = std::hypot(state[3] - state[0], state[4] - state[1]) <= kReachTol;
  bool closed = state[2] >= kApertureDone;
  int phase = closed ? kLift : at_block ? kGrasp : kReach;
  return blockworld_phase_action(state, phase);
}

Tensor blockworld_step(const Tensor& state, const Tensor& action) {
  if (state.size() != 6 || action.size() != 3)
    throw DimensionError("blockworld_step: state " + state.shape_str() + ", action " +
                         action.shape_str());
  Tensor next = state;
  next[0] = state[0] + action[0];
  next[1] = state[1] + action[1];
  next[2] = clamp(state[2] + action[2], 0.0, 1.0);
  return next;
}

Dataset generate_blockworld(int n, std::uint64_t seed, const NoiseConfig& noise) {
  if (n < 1) throw ValidationError("generate_blockworld: n must be >= 1");
  if (noise.action_noise_std < 0.0)
    throw ValidationError("generate_blockworld: noise std must be >= 0");

  Dataset ds;
  ds.info.domain = "blockworld";
  ds.info.state_dim = 6;
  ds.info.action_dim = 3;
  ds.info.num_primitives = 3;
  // Threshold crossings under heavy noise take random-walk excursions, so the
  // declared bounds widen beyond the defaults.
  bool noisy = noise.action_noise_std > 0.02;
  ds.info.t_min = noisy ? 30 : kBlockworldTMin;
  ds.info.t_max = noisy ? kPhaseStepCap : kBlockworldTMax;
  ds.info.action_noise_std = noise.action_noise_std;
  ds.info.state_layout = {"eff_x", "eff_y", "aperture", "block_x", "block_y", "lift_target_y"};
  ds.demos.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    std::uint64_t demo_seed = seed + (static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ULL;
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i));

    double bx = rng.uniform(0.2, 0.8);
    double by = rng.uniform(0.1, 0.5);
    double ex, ey;
    do {
      ex = rng.uniform(0.05, 0.95);
      ey = rng.uniform(0.05, 0.95);
    } while (std::hypot(bx - ex, by - ey) < 0.35);
    double target_y = by + rng.uniform(0.15, 0.4);

    Demonstration demo;
    demo.seed = demo_seed;
    demo.sketch = TaskSketch({kReach, kGrasp, kLift});
    Tensor state({6}, {ex, ey, 0.0, bx, by, target_y});

    int phase = kReach;
    int steps_in_phase = 0;
    while (true) {
      if (++steps_in_phase > kPhaseStepCap)
        throw NumericalError("generate_blockworld: phase did not terminate");
      Tensor expert = blockworld_phase_action(state, phase);
      Tensor eps({3});
      for (int d = 0; d < 3; ++d) eps[d] = rng.normal(0.0, noise.action_noise_std);
      Tensor action({3});
      for (int d = 0; d < 3; ++d) action[d] = expert[d] + eps[d];

      demo.states.push_back(state);
      demo.actions.push_back(action);
      demo.noise.push_back(eps);
      demo.labels.push_back(phase);

      state = blockworld_step(state, action);

      // Monotone phase machine driven by the thresholds above.
      if (phase == kReach &&
          std::hypot(state[3] - state[0], state[4] - state[1]) <= kReachTol) {
        phase = kGrasp;
        steps_in_phase = 0;
      } else if (phase == kGrasp && state[2] >= kApertureDone &&
                 steps_in_phase >= kMinGraspSteps) {
        phase = kLift;
        steps_in_phase = 0;
      } else if (phase == kLift && std::abs(state[5] - state[1]) <= kLiftTol) {
        break;
      }
    }
    if (demo.length() < ds.info.t_min || demo.length() > ds.info.t_max)
      throw NumericalError("generate_blockworld: trajectory length " +
                           std::to_string(demo.length()) + " outside bounds");
    ds.demos.push_back(std::move(demo));
  }
  return ds;
}

Dataset generate_dialpad(int n, int keys, int sketch_len, std::uint64_t seed,
                         const NoiseConfig& noise) {
  if (n < 1) throw ValidationError("generate_dialpad: n must be >= 1");
  if (sketch_len < 1) throw ValidationError("generate_dialpad: sketch_len must be >= 1");
  if (keys < sketch_len)
    throw ValidationError("generate_dialpad: need keys >= sketch_len, got " +
                          std::to_string(keys) + " < " + std::to_string(sketch_len));
  if (noise.action_noise_std < 0.0)
    throw ValidationError("generate_dialpad: noise std must be >= 0");

  int state_dim = 2 + 2 * keys + 1;
  Dataset ds;
  ds.info.domain = "dialpad";
  ds.info.state_dim = state_dim;
  ds.info.action_dim = 2;
  ds.info.num_primitives = keys;
  ds.info.t_min = kDialTMin;
  ds.info.t_max = kDialTMax;
  ds.info.action_noise_std = noise.action_noise_std;
  ds.info.state_layout = {"eff_x", "eff_y"};
  for (int k = 0; k < keys; ++k) {
    ds.info.state_layout.push_back("key" + std::to_string(k) + "_x");
    ds.info.state_layout.push_back("key" + std::to_string(k) + "_y");
  }
  ds.info.state_layout.push_back("pressed_fraction");
  ds.demos.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    std::uint64_t demo_seed = seed + (static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ULL;
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i));

    // Key layout, reshuffled per demonstration with pairwise separation.
    std::vector<double> kx(static_cast<std::size_t>(keys)), ky(static_cast<std::size_t>(keys));
    for (int k = 0; k < keys; ++k) {
      int attempts = 0;
      while (true) {
        if (++attempts > 1000)
          throw NumericalError("generate_dialpad: could not place keys");
        double x = rng.uniform(0.05, 0.95), y = rng.uniform(0.05, 0.95);
        bool ok = true;
        for (int j = 0; j < k; ++j)
          if (std::hypot(kx[static_cast<std::size_t>(j)] - x,
                         ky[static_cast<std::size_t>(j)] - y) < kKeySeparation)
            ok = false;
        if (ok) {
          kx[static_cast<std::size_t>(k)] = x;
          ky[static_cast<std::size_t>(k)] = y;
          break;
        }
      }
    }

    // Sketch with no adjacent repeats.
    std::vector<int> sketch(static_cast<std::size_t>(sketch_len));
    for (int l = 0; l < sketch_len; ++l) {
      int pick;
      do {
        pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(keys)));
      } while (l > 0 && pick == sketch[static_cast<std::size_t>(l - 1)]);
      sketch[static_cast<std::size_t>(l)] = pick;
    }

    Demonstration demo;
    demo.seed = demo_seed;
    demo.sketch = TaskSketch(sketch);

    double ex = rng.uniform(0.1, 0.9), ey = rng.uniform(0.1, 0.9);
    auto make_state = [&](int pressed) {
      Tensor s({state_dim});
      s[0] = ex;
      s[1] = ey;
      for (int k = 0; k < keys; ++k) {
        s[2 + 2 * k] = kx[static_cast<std::size_t>(k)];
        s[3 + 2 * k] = ky[static_cast<std::size_t>(k)];
      }
      s[state_dim - 1] = static_cast<double>(pressed) / sketch_len;
      return s;
    };

    for (int l = 0; l < sketch_len; ++l) {
      int key = sketch[static_cast<std::size_t>(l)];
      double tx = kx[static_cast<std::size_t>(key)], ty = ky[static_cast<std::size_t>(key)];
      int dwell = 0;
      int steps_in_segment = 0;
      while (dwell < kDialDwell) {
        if (++steps_in_segment > kPhaseStepCap)
          throw NumericalError("generate_dialpad: segment did not terminate");
        bool on_key = std::hypot(tx - ex, ty - ey) <= kDialTol;
        double vx = 0.0, vy = 0.0;
        if (!on_key) {
          seek(tx - ex, ty - ey, kDialGain, kDialSpeedCap, vx, vy);
        } else {
          ++dwell;
        }
        Tensor eps({2});
        eps[0] = rng.normal(0.0, noise.action_noise_std);
        eps[1] = rng.normal(0.0, noise.action_noise_std);
        Tensor action({2}, {vx + eps[0], vy + eps[1]});

        demo.states.push_back(make_state(l));
        demo.actions.push_back(action);
        demo.noise.push_back(eps);
        demo.labels.push_back(key);

        ex += action[0];
        ey += action[1];
      }
    }
    if (demo.length() < kDialTMin || demo.length() > kDialTMax)
      throw NumericalError("generate_dialpad: trajectory length " +
                           std::to_string(demo.length()) + " outside bounds");
    ds.demos.push_back(std::move(demo));
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ValidationError("split_dataset: fraction must lie in (0, 1)");
  if (dataset.size() < 2) throw ValidationError("split_dataset: need at least 2 demonstrations");

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::stream(seed, "split");
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(dataset.size())));
  n_train = std::min(std::max<std::size_t>(n_train, 1), dataset.size() - 1);

  Dataset train, test;
  train.info = dataset.info;
  test.info = dataset.info;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Demonstration& d = dataset.demos[order[i]];
    if (i < n_train)
      train.demos.push_back(d);
    else
      test.demos.push_back(d);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace pico
