#include "pico/baseline.hpp"

#include <cmath>

#include "pico/error.hpp"
#include "pico/optim.hpp"

namespace pico {

namespace {

void init_affine(ParameterSet& params, const std::string& prefix, int out, int in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w({out, in});
  for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
  Tensor b({out});
  for (int i = 0; i < b.size(); ++i) b[i] = rng.uniform(-bound, bound);
  params.insert(prefix + ".W", std::move(w));
  params.insert(prefix + ".b", std::move(b));
}

}  // namespace

CtcModel::CtcModel(CtcModelConfig cfg, Rng& rng) : cfg_(cfg) {
  if (cfg_.state_dim <= 0 || cfg_.num_labels <= 0)
    throw ValidationError("CtcModel: dims must be positive");
  init_affine(params_, "ctc.enc", cfg_.encoder_dim, cfg_.state_dim, rng);
  double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_dim));
  Tensor wh({cfg_.hidden_dim, cfg_.hidden_dim});
  for (int i = 0; i < wh.size(); ++i) wh[i] = rng.uniform(-bound, bound);
  params_.insert("ctc.rec.Wh", std::move(wh));
  double bx = 1.0 / std::sqrt(static_cast<double>(cfg_.encoder_dim));
  Tensor wx({cfg_.hidden_dim, cfg_.encoder_dim});
  for (int i = 0; i < wx.size(); ++i) wx[i] = rng.uniform(-bx, bx);
  params_.insert("ctc.rec.Wx", std::move(wx));
  Tensor rb({cfg_.hidden_dim});
  for (int i = 0; i < rb.size(); ++i) rb[i] = rng.uniform(-bound, bound);
  params_.insert("ctc.rec.b", std::move(rb));
  init_affine(params_, "ctc.head", cfg_.num_labels, cfg_.hidden_dim, rng);
}

std::vector<Value> CtcModel::emissions_on_tape(Session& session,
                                               std::span<const Tensor> states) const {
  if (states.empty()) throw ValidationError("CtcModel: empty state sequence");
  std::vector<Value> rows;
  rows.reserve(states.size());
  Value h = session.tape().constant(Tensor({cfg_.hidden_dim}));
  for (const Tensor& s : states) {
    Value sv = session.tape().constant(s);
    Value enc = affine(sv, session("ctc.enc.W"), session("ctc.enc.b"), Activation::relu);
    Value pre = add({matvec(session("ctc.rec.Wh"), h), matvec(session("ctc.rec.Wx"), enc)});
    h = tanh(add(pre, session("ctc.rec.b")));
    Value logits = affine(h, session("ctc.head.W"), session("ctc.head.b"), Activation::linear);
    rows.push_back(log_softmax(logits));
  }
  return rows;
}

EmissionMatrix CtcModel::emissions(std::span<const Tensor> states) const {
  Tape tape(/*training=*/false);
  Session session(tape, params_);
  std::vector<Value> rows = emissions_on_tape(session, states);
  Tensor log_probs({static_cast<int>(rows.size()), cfg_.num_labels});
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int k = 0; k < cfg_.num_labels; ++k)
      log_probs.at(static_cast<int>(t), k) = rows[t].tensor()[k];
  return EmissionMatrix(std::move(log_probs));
}

CtcBaseline train_ctc_baseline(std::span<const Demonstration> train, const TrainConfig& cfg,
                               const CtcModelConfig& model_cfg, const MlpConfig& policy_mlp) {
  cfg.validate();
  if (train.empty()) throw ValidationError("train_ctc_baseline: empty dataset");
  for (const Demonstration& demo : train) {
    if (demo.sketch.length() < 1)
      throw ValidationError("train_ctc_baseline: demonstration without a sketch");
    if (demo.length() < demo.sketch.length())
      throw ValidationError("train_ctc_baseline: trajectory shorter than its sketch");
  }

  Rng init_rng = Rng::stream(cfg.seed, "ctc-init");
  CtcModel model(model_cfg, init_rng);

  Adam adam(AdamConfig{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps});
  Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      Tape tape(/*training=*/true);
      Session session(tape, model.params());
      std::vector<Value> per_traj;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const Demonstration& demo = train[order[bi]];
        std::vector<Value> rows = model.emissions_on_tape(session, demo.states);
        Value ll = ctc_log_likelihood_on_tape(rows, demo.sketch);
        // Length-normalized negative log likelihood keeps the learning rate
        // independent of T.
        per_traj.push_back(scale(ll, -1.0 / static_cast<double>(demo.length())));
      }
      Value loss = mean(per_traj);
      if (!std::isfinite(loss.tensor()[0]))
        throw NumericalError("train_ctc_baseline: non-finite loss at epoch " +
                             std::to_string(epoch) + ", trajectory " +
                             std::to_string(order[start]));
      tape.backward(loss);
      auto grads = session.gradients();
      clip_global_norm(grads, cfg.grad_clip_norm);
      adam.step(model.params(), grads);
    }
  }

  // Decode the training set and clone one policy per label.
  std::vector<Path> decoded;
  decoded.reserve(train.size());
  std::vector<std::vector<StateAction>> per_label(
      static_cast<std::size_t>(model_cfg.num_labels));
  for (const Demonstration& demo : train) {
    Path path = ctc_decode(model.emissions(demo.states), demo.sketch);
    for (std::size_t t = 0; t < path.size(); ++t)
      per_label[static_cast<std::size_t>(path[t])].push_back(
          {demo.states[t], demo.actions[t]});
    decoded.push_back(std::move(path));
  }

  CtcBaseline baseline{std::move(model), {}, std::move(decoded)};
  for (int k = 0; k < model_cfg.num_labels; ++k) {
    const auto& segments = per_label[static_cast<std::size_t>(k)];
    std::string id = "ctc" + std::to_string(k);
    if (segments.empty()) {
      // No decoded timesteps for this label: keep a random policy.
      Rng policy_rng = Rng::stream(cfg.seed, id);
      baseline.policies.emplace_back(id, PrimitiveOrigin::pretrained, policy_mlp, policy_rng);
      continue;
    }
    TrainConfig clone_cfg = cfg;
    clone_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k) + 1;
    baseline.policies.push_back(
        pretrain_primitive(id, segments, NoiseConfig{0.0}, clone_cfg, policy_mlp));
  }
  return baseline;
}

EvaluationReport evaluate_ctc(const CtcBaseline& baseline,
                              std::span<const Demonstration> demos) {
  if (demos.empty()) throw ValidationError("evaluate_ctc: empty evaluation set");
  std::vector<std::vector<int>> pred_labels, true_labels;
  std::vector<std::vector<Tensor>> pred_actions, true_actions;
  for (const Demonstration& demo : demos) {
    Path path = ctc_decode(baseline.model.emissions(demo.states), demo.sketch);
    std::vector<Tensor> actions;
    actions.reserve(path.size());
    for (std::size_t t = 0; t < path.size(); ++t)
      actions.push_back(
          baseline.policies[static_cast<std::size_t>(path[t])].forward(demo.states[t]));
    pred_labels.push_back(path);
    true_labels.push_back(demo.labels);
    pred_actions.push_back(std::move(actions));
    true_actions.push_back(demo.actions);
  }
  return evaluate_labels_and_actions(pred_labels, true_labels, pred_actions, true_actions,
                                     baseline.model.config().num_labels);
}

}  // namespace pico
