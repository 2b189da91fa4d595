#include "pico/training.hpp"

#include <cmath>

#include "pico/error.hpp"

namespace pico {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("TrainConfig: epochs must be >= 1");
  if (learning_rate < 0.0) throw ValidationError("TrainConfig: learning_rate must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ValidationError("TrainConfig: betas must lie in [0, 1)");
  if (grad_clip_norm <= 0.0) throw ValidationError("TrainConfig: grad_clip_norm must be > 0");
  if (batch < 1) throw ValidationError("TrainConfig: batch must be >= 1");
}

double pico_loss(const std::vector<RolloutRecord>& records, const std::vector<Tensor>& actions) {
  if (records.size() != actions.size())
    throw ValidationError("pico_loss: " + std::to_string(records.size()) + " records vs " +
                          std::to_string(actions.size()) + " actions");
  if (records.empty()) throw ValidationError("pico_loss: empty trajectory");
  double acc = 0.0;
  for (std::size_t t = 0; t < records.size(); ++t)
    acc += mse_loss(records[t].blended_action, actions[t]);
  return acc / static_cast<double>(records.size());
}

double pico_loss(const std::vector<std::vector<RolloutRecord>>& batch_records,
                 const std::vector<std::vector<Tensor>>& batch_actions) {
  if (batch_records.size() != batch_actions.size())
    throw ValidationError("pico_loss: batch sizes differ");
  if (batch_records.empty()) throw ValidationError("pico_loss: empty batch");
  double acc = 0.0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < batch_records.size(); ++i) {
    const auto& records = batch_records[i];
    const auto& actions = batch_actions[i];
    if (records.size() != actions.size())
      throw ValidationError("pico_loss: trajectory " + std::to_string(i) + " misaligned");
    for (std::size_t t = 0; t < records.size(); ++t)
      acc += mse_loss(records[t].blended_action, actions[t]);
    steps += records.size();
  }
  if (steps == 0) throw ValidationError("pico_loss: empty batch");
  return acc / static_cast<double>(steps);
}

namespace {

AdamConfig adam_config(const TrainConfig& cfg) {
  return AdamConfig{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps};
}

}  // namespace

TrainingHistory train_pico(PicoNetwork& net, std::span<const Demonstration> train,
                           const TrainConfig& cfg, std::span<const Demonstration> validation) {
  cfg.validate();
  if (train.empty()) throw ValidationError("train_pico: empty dataset");
  for (const Demonstration& d : train)
    if (d.length() == 0 || d.states.front().size() != net.config().state_dim)
      throw DimensionError("train_pico: demonstration dims do not match the network");

  if (cfg.freeze_library) net.freeze_primitives(PrimitiveOrigin::pretrained);

  Adam adam(adam_config(cfg));
  Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainingHistory history;
  history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_sq = 0.0;
    std::size_t epoch_steps = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      Tape tape(/*training=*/true);
      Session session(tape, net.params());
      std::vector<Value> step_losses;
      std::size_t batch_steps = 0;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const Demonstration& demo = train[order[bi]];
        auto steps = net.rollout_on_tape(session, demo.states);
        for (std::size_t t = 0; t < steps.size(); ++t)
          step_losses.push_back(mse(steps[t].blended, demo.actions[t]));
        batch_steps += steps.size();
      }
      Value loss = mean(step_losses);
      double loss_value = loss.tensor()[0];
      if (!std::isfinite(loss_value))
        throw NumericalError("train_pico: non-finite loss at epoch " + std::to_string(epoch) +
                             ", trajectory " + std::to_string(order[start]));
      tape.backward(loss);
      auto grads = session.gradients();
      clip_global_norm(grads, cfg.grad_clip_norm);
      adam.step(net.params(), grads);

      epoch_sq += loss_value * static_cast<double>(batch_steps);
      epoch_steps += batch_steps;
    }

    EpochStats stats;
    stats.train_loss = epoch_sq / static_cast<double>(epoch_steps);
    if (!validation.empty()) {
      double val_sq = 0.0;
      std::size_t val_steps = 0;
      std::size_t matched = 0, compared = 0;
      for (const Demonstration& demo : validation) {
        auto records = net.rollout(demo.states);
        val_sq += pico_loss(records, demo.actions) * static_cast<double>(records.size());
        val_steps += records.size();
        if (!demo.labels.empty()) {
          auto labels = predict_labels(records);
          for (std::size_t t = 0; t < labels.size(); ++t) {
            ++compared;
            if (labels[t] == demo.labels[t]) ++matched;
          }
        }
      }
      stats.val_loss = val_sq / static_cast<double>(val_steps);
      if (compared > 0)
        stats.val_label_accuracy = static_cast<double>(matched) / static_cast<double>(compared);
    }
    history.epochs.push_back(stats);
  }
  return history;
}

PrimitivePolicy pretrain_primitive(const std::string& id, std::span<const StateAction> segments,
                                   const NoiseConfig& noise, const TrainConfig& cfg,
                                   const MlpConfig& mlp) {
  cfg.validate();
  if (segments.empty()) throw ValidationError("pretrain_primitive: empty segments");
  if (noise.action_noise_std < 0.0)
    throw ValidationError("pretrain_primitive: noise std must be >= 0");
  for (const StateAction& sa : segments)
    if (sa.state.size() != mlp.in || sa.action.size() != mlp.out)
      throw DimensionError("pretrain_primitive: segment dims do not match the policy");

  Rng init_rng = Rng::stream(cfg.seed, "init");
  PrimitivePolicy policy(id, PrimitiveOrigin::pretrained, mlp, init_rng);

  Adam adam(adam_config(cfg));
  Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      Tape tape(/*training=*/true);
      Session session(tape, policy.params());
      std::vector<Value> losses;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const StateAction& sa = segments[order[bi]];
        Value pred = policy.forward(session, tape.constant(sa.state));
        losses.push_back(mse(pred, sa.action));
      }
      Value loss = mean(losses);
      if (!std::isfinite(loss.tensor()[0]))
        throw NumericalError("pretrain_primitive: non-finite loss at epoch " +
                             std::to_string(epoch));
      tape.backward(loss);
      auto grads = session.gradients();
      clip_global_norm(grads, cfg.grad_clip_norm);
      adam.step(policy.params(), grads);
    }
  }
  return policy;
}

void add_gap_primitives(PicoNetwork& net, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("add_gap_primitives: n must be >= 1");
  Rng rng = Rng::stream(seed, "gap-init");
  int suffix = 0;
  for (int i = 0; i < n; ++i) {
    std::string id;
    do {
      id = "gap" + std::to_string(suffix++);
    } while ([&] {
      for (const auto& meta : net.primitives())
        if (meta.id == id) return true;
      return false;
    }());
    net.add_random_primitive({id, PrimitiveOrigin::gap}, rng);
  }
}

std::vector<StateAction> segments_with_label(std::span<const Demonstration> demos, int label) {
  std::vector<StateAction> out;
  for (const Demonstration& demo : demos)
    for (std::size_t t = 0; t < demo.labels.size(); ++t)
      if (demo.labels[t] == label) out.push_back({demo.states[t], demo.actions[t]});
  return out;
}

}  // namespace pico
