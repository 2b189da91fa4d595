#pragma once

#include <span>
#include <string>
#include <vector>

#include "pico/rng.hpp"
#include "pico/tape.hpp"

namespace pico {

enum class PrimitiveOrigin { pretrained, gap };

std::string origin_name(PrimitiveOrigin o);
PrimitiveOrigin origin_from_name(const std::string& s);

struct MlpConfig {
  int in = 0;
  int out = 0;
  std::vector<int> hidden = {64, 64};  // ReLU layers; the output head is linear
};

// Initializes W/b pairs "<prefix>fc<i>.W/.b" plus "<prefix>head.W/.b" with
// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) entries.
void mlp_init(ParameterSet& params, const MlpConfig& cfg, const std::string& prefix, Rng& rng);
Value mlp_forward(Session& session, const MlpConfig& cfg, const std::string& prefix, Value x);

// Feed-forward state -> action map with a linear output head. One element of
// the primitive library; may also live standalone (behavior-cloning output).
class PrimitivePolicy {
 public:
  PrimitivePolicy(std::string id, PrimitiveOrigin origin, MlpConfig cfg, Rng& rng);
  // Adopts already-trained tensors (must match the fc/head naming).
  PrimitivePolicy(std::string id, PrimitiveOrigin origin, MlpConfig cfg, ParameterSet params);

  const std::string& id() const { return id_; }
  PrimitiveOrigin origin() const { return origin_; }
  int state_dim() const { return cfg_.in; }
  int action_dim() const { return cfg_.out; }
  const MlpConfig& mlp() const { return cfg_; }

  Tensor forward(const Tensor& state) const;
  Value forward(Session& session, Value state) const;

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

 private:
  std::string id_;
  PrimitiveOrigin origin_;
  MlpConfig cfg_;
  ParameterSet params_;
};

struct PrimitiveMeta {
  std::string id;
  PrimitiveOrigin origin = PrimitiveOrigin::pretrained;
};

struct ModelConfig {
  int state_dim = 0;
  int action_dim = 0;
  int encoder_dim = 64;                  // affine+ReLU state encoder width
  int hidden_dim = 64;                   // tanh recurrence width
  std::vector<int> primitive_hidden = {64, 64};
};

// Per-timestep output of a rollout, with plain tensors.
struct RolloutRecord {
  Tensor lambda;             // [K]
  Tensor primitive_actions;  // [K x action_dim]
  Tensor blended_action;     // [action_dim]
  Tensor hidden;             // [hidden_dim]
  int label = 0;             // argmax(lambda), ties to the lowest index
};

// Same rollout with live tape handles, for building losses.
struct RolloutStep {
  Value lambda;
  Value hidden;
  Value blended;
  std::vector<Value> primitive_actions;
};

// The PICO network: an ordered library of primitive policies plus a recurrent
// metacontroller whose gate emits a distribution over library slots. All
// parameters live in one ParameterSet with prefixed names:
//   prim.<id>.fc0.W ...    primitive MLPs
//   ctrl.enc.W/b           state encoder
//   ctrl.rec.Wh/Wx/b       tanh recurrence
//   ctrl.gate.W/b          gate head (rows follow library order)
class PicoNetwork {
 public:
  explicit PicoNetwork(ModelConfig cfg);

  // Controller only; primitives are added afterwards.
  static PicoNetwork with_controller(const ModelConfig& cfg, Rng& rng);
  // K randomly initialized primitives ("p0".."p<K-1>") plus the controller.
  static PicoNetwork random(const ModelConfig& cfg, int library_size, Rng& rng);
  // Reassembles a network from checkpoint parts. Validates that every
  // expected parameter is present with the right shape.
  static PicoNetwork from_parts(ModelConfig cfg, std::vector<PrimitiveMeta> primitives,
                                ParameterSet params);

  const ModelConfig& config() const { return cfg_; }
  int library_size() const { return static_cast<int>(primitives_.size()); }
  const std::vector<PrimitiveMeta>& primitives() const { return primitives_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  // Appends a primitive and grows the gate head by one row. Existing rows and
  // all other parameters are preserved exactly.
  void add_random_primitive(const PrimitiveMeta& meta, Rng& rng);
  // Appends a pretrained policy, copying its tensors under prim.<id>; rng
  // seeds the new gate row.
  void add_primitive(const PrimitivePolicy& policy, Rng& rng);

  std::string prim_prefix(int k) const;

  Value primitive_forward(Session& session, int k, Value state) const;
  // (h, lambda); h_prev must have hidden_dim extent (zeros at t=1).
  std::pair<Value, Value> controller_step(Session& session, Value h_prev, Value state) const;

  // On-tape rollout with h threaded across timesteps starting from zero.
  std::vector<RolloutStep> rollout_on_tape(Session& session,
                                           std::span<const Tensor> states) const;
  // Evaluation-mode rollout producing plain records. Safe to call from many
  // threads on a frozen network.
  std::vector<RolloutRecord> rollout(std::span<const Tensor> states) const;

  // Freezes every parameter of primitives with the given origin.
  void freeze_primitives(PrimitiveOrigin origin);

 private:
  void init_controller(Rng& rng);
  void grow_gate_row(Rng& rng);

  ModelConfig cfg_;
  std::vector<PrimitiveMeta> primitives_;
  ParameterSet params_;
};

// Standalone eval-mode forward of one policy (spec surface; equivalent to
// PrimitivePolicy::forward).
Tensor primitive_forward(const PrimitivePolicy& policy, const Tensor& state);

// Convex combination of primitive actions. Validates that lambda sums to 1
// within 1e-9 and has no negative entries.
Tensor blended_action(const Tensor& lambda, const Tensor& primitive_actions);

// Per-timestep argmax of the gate distribution; ties break to the lowest
// index.
std::vector<int> predict_labels(const std::vector<RolloutRecord>& records);

}  // namespace pico
