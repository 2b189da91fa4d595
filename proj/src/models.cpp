#include "pico/models.hpp"

#include <cmath>

#include "pico/error.hpp"

namespace pico {

std::string origin_name(PrimitiveOrigin o) {
  return o == PrimitiveOrigin::pretrained ? "pretrained" : "gap";
}

PrimitiveOrigin origin_from_name(const std::string& s) {
  if (s == "pretrained") return PrimitiveOrigin::pretrained;
  if (s == "gap") return PrimitiveOrigin::gap;
  throw ValidationError("unknown primitive origin '" + s + "'");
}

namespace {

Tensor uniform_tensor(std::vector<int> shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

void init_affine(ParameterSet& params, const std::string& prefix, int out, int in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  params.insert(prefix + ".W", uniform_tensor({out, in}, bound, rng));
  params.insert(prefix + ".b", uniform_tensor({out}, bound, rng));
}

}  // namespace

void mlp_init(ParameterSet& params, const MlpConfig& cfg, const std::string& prefix, Rng& rng) {
  if (cfg.in <= 0 || cfg.out <= 0) throw ValidationError("mlp_init: dims must be positive");
  int prev = cfg.in;
  for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
    init_affine(params, prefix + "fc" + std::to_string(i), cfg.hidden[i], prev, rng);
    prev = cfg.hidden[i];
  }
  init_affine(params, prefix + "head", cfg.out, prev, rng);
}

Value mlp_forward(Session& session, const MlpConfig& cfg, const std::string& prefix, Value x) {
  Value h = x;
  for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
    std::string tag = prefix + "fc" + std::to_string(i);
    h = affine(h, session(tag + ".W"), session(tag + ".b"), Activation::relu);
  }
  return affine(h, session(prefix + "head.W"), session(prefix + "head.b"), Activation::linear);
}

// --- PrimitivePolicy ---------------------------------------------------------

PrimitivePolicy::PrimitivePolicy(std::string id, PrimitiveOrigin origin, MlpConfig cfg, Rng& rng)
    : id_(std::move(id)), origin_(origin), cfg_(std::move(cfg)) {
  mlp_init(params_, cfg_, "", rng);
}

PrimitivePolicy::PrimitivePolicy(std::string id, PrimitiveOrigin origin, MlpConfig cfg,
                                 ParameterSet params)
    : id_(std::move(id)), origin_(origin), cfg_(std::move(cfg)), params_(std::move(params)) {}

Tensor PrimitivePolicy::forward(const Tensor& state) const {
  if (state.size() != cfg_.in)
    throw DimensionError("PrimitivePolicy::forward: state " + state.shape_str() + ", expected [" +
                         std::to_string(cfg_.in) + "]");
  Tape tape(/*training=*/false);
  Session session(tape, params_);
  return mlp_forward(session, cfg_, "", tape.constant(state)).tensor();
}

Value PrimitivePolicy::forward(Session& session, Value state) const {
  return mlp_forward(session, cfg_, "", state);
}

// --- PicoNetwork -------------------------------------------------------------

PicoNetwork::PicoNetwork(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.state_dim <= 0 || cfg_.action_dim <= 0)
    throw ValidationError("PicoNetwork: state/action dims must be positive");
  if (cfg_.encoder_dim <= 0 || cfg_.hidden_dim <= 0)
    throw ValidationError("PicoNetwork: encoder/hidden dims must be positive");
}

PicoNetwork PicoNetwork::with_controller(const ModelConfig& cfg, Rng& rng) {
  PicoNetwork net(cfg);
  net.init_controller(rng);
  return net;
}

PicoNetwork PicoNetwork::random(const ModelConfig& cfg, int library_size, Rng& rng) {
  if (library_size < 1) throw ValidationError("PicoNetwork::random: library size must be >= 1");
  PicoNetwork net = with_controller(cfg, rng);
  for (int k = 0; k < library_size; ++k)
    net.add_random_primitive({"p" + std::to_string(k), PrimitiveOrigin::pretrained}, rng);
  return net;
}

PicoNetwork PicoNetwork::from_parts(ModelConfig cfg, std::vector<PrimitiveMeta> primitives,
                                    ParameterSet params) {
  PicoNetwork net(std::move(cfg));
  net.primitives_ = std::move(primitives);
  net.params_ = std::move(params);
  const ModelConfig& c = net.cfg_;
  auto expect = [&](const std::string& name, std::vector<int> shape) {
    if (!net.params_.contains(name))
      throw ValidationError("PicoNetwork::from_parts: missing parameter '" + name + "'");
    if (net.params_.at(name).shape() != shape)
      throw DimensionError("PicoNetwork::from_parts: parameter '" + name + "' has shape " +
                           net.params_.at(name).shape_str());
  };
  expect("ctrl.enc.W", {c.encoder_dim, c.state_dim});
  expect("ctrl.enc.b", {c.encoder_dim});
  expect("ctrl.rec.Wh", {c.hidden_dim, c.hidden_dim});
  expect("ctrl.rec.Wx", {c.hidden_dim, c.encoder_dim});
  expect("ctrl.rec.b", {c.hidden_dim});
  expect("ctrl.gate.W", {net.library_size(), c.hidden_dim});
  expect("ctrl.gate.b", {net.library_size()});
  for (int k = 0; k < net.library_size(); ++k) {
    std::string prefix = net.prim_prefix(k);
    int prev = c.state_dim;
    for (std::size_t i = 0; i < c.primitive_hidden.size(); ++i) {
      expect(prefix + "fc" + std::to_string(i) + ".W", {c.primitive_hidden[i], prev});
      expect(prefix + "fc" + std::to_string(i) + ".b", {c.primitive_hidden[i]});
      prev = c.primitive_hidden[i];
    }
    expect(prefix + "head.W", {c.action_dim, prev});
    expect(prefix + "head.b", {c.action_dim});
  }
  return net;
}

void PicoNetwork::init_controller(Rng& rng) {
  init_affine(params_, "ctrl.enc", cfg_.encoder_dim, cfg_.state_dim, rng);
  double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_dim));
  params_.insert("ctrl.rec.Wh", uniform_tensor({cfg_.hidden_dim, cfg_.hidden_dim}, bound, rng));
  double bx = 1.0 / std::sqrt(static_cast<double>(cfg_.encoder_dim));
  params_.insert("ctrl.rec.Wx", uniform_tensor({cfg_.hidden_dim, cfg_.encoder_dim}, bx, rng));
  params_.insert("ctrl.rec.b", uniform_tensor({cfg_.hidden_dim}, bound, rng));
  // Gate head starts with zero rows; one row is added per primitive.
  params_.insert("ctrl.gate.W", Tensor({0, cfg_.hidden_dim}));
  params_.insert("ctrl.gate.b", Tensor({0}));
}

std::string PicoNetwork::prim_prefix(int k) const {
  if (k < 0 || k >= library_size())
    throw ValidationError("PicoNetwork: primitive index " + std::to_string(k) + " out of range");
  return "prim." + primitives_[static_cast<std::size_t>(k)].id + ".";
}

void PicoNetwork::grow_gate_row(Rng& rng) {
  Tensor& W = params_.at("ctrl.gate.W");
  Tensor& b = params_.at("ctrl.gate.b");
  int rows = W.rows(), cols = W.cols();
  double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Tensor grown({rows + 1, cols});
  for (int i = 0; i < rows * cols; ++i) grown[i] = W[i];
  for (int j = 0; j < cols; ++j) grown.at(rows, j) = rng.uniform(-bound, bound);
  Tensor grown_b({rows + 1});
  for (int i = 0; i < rows; ++i) grown_b[i] = b[i];
  grown_b[rows] = rng.uniform(-bound, bound);
  W = std::move(grown);
  b = std::move(grown_b);
}

void PicoNetwork::add_random_primitive(const PrimitiveMeta& meta, Rng& rng) {
  if (params_.size() == 0) throw StateError("PicoNetwork: controller not initialized");
  for (const auto& p : primitives_)
    if (p.id == meta.id) throw ValidationError("PicoNetwork: duplicate primitive id '" + meta.id + "'");
  MlpConfig mcfg{cfg_.state_dim, cfg_.action_dim, cfg_.primitive_hidden};
  mlp_init(params_, mcfg, "prim." + meta.id + ".", rng);
  primitives_.push_back(meta);
  grow_gate_row(rng);
}

void PicoNetwork::add_primitive(const PrimitivePolicy& policy, Rng& rng) {
  if (params_.size() == 0) throw StateError("PicoNetwork: controller not initialized");
  if (policy.state_dim() != cfg_.state_dim || policy.action_dim() != cfg_.action_dim)
    throw DimensionError("PicoNetwork: policy dims do not match network config");
  for (const auto& p : primitives_)
    if (p.id == policy.id())
      throw ValidationError("PicoNetwork: duplicate primitive id '" + policy.id() + "'");
  std::string prefix = "prim." + policy.id() + ".";
  for (const auto& name : policy.params().names())
    params_.insert(prefix + name, policy.params().at(name));
  primitives_.push_back({policy.id(), policy.origin()});
  grow_gate_row(rng);
}

Value PicoNetwork::primitive_forward(Session& session, int k, Value state) const {
  MlpConfig mcfg{cfg_.state_dim, cfg_.action_dim, cfg_.primitive_hidden};
  return mlp_forward(session, mcfg, prim_prefix(k), state);
}

std::pair<Value, Value> PicoNetwork::controller_step(Session& session, Value h_prev,
                                                     Value state) const {
  if (h_prev.tensor().size() != cfg_.hidden_dim)
    throw DimensionError("controller_step: h_prev " + h_prev.tensor().shape_str() +
                         ", expected [" + std::to_string(cfg_.hidden_dim) + "]");
  if (state.tensor().size() != cfg_.state_dim)
    throw DimensionError("controller_step: state " + state.tensor().shape_str() + ", expected [" +
                         std::to_string(cfg_.state_dim) + "]");
  Value enc = affine(state, session("ctrl.enc.W"), session("ctrl.enc.b"), Activation::relu);
  Value pre = add({matvec(session("ctrl.rec.Wh"), h_prev), matvec(session("ctrl.rec.Wx"), enc)});
  Value h = tanh(add(pre, session("ctrl.rec.b")));
  Value logits = affine(h, session("ctrl.gate.W"), session("ctrl.gate.b"), Activation::linear);
  return {h, softmax(logits)};
}

std::vector<RolloutStep> PicoNetwork::rollout_on_tape(Session& session,
                                                      std::span<const Tensor> states) const {
  if (states.empty()) throw ValidationError("rollout: empty state sequence");
  if (library_size() < 1) throw StateError("rollout: empty primitive library");
  std::vector<RolloutStep> steps;
  steps.reserve(states.size());
  Value h = session.tape().constant(Tensor({cfg_.hidden_dim}));  // h0 = 0
  for (const Tensor& s : states) {
    Value sv = session.tape().constant(s);
    auto [h_next, lambda] = controller_step(session, h, sv);
    h = h_next;
    RolloutStep step;
    step.hidden = h;
    step.lambda = lambda;
    step.primitive_actions.reserve(static_cast<std::size_t>(library_size()));
    for (int k = 0; k < library_size(); ++k)
      step.primitive_actions.push_back(primitive_forward(session, k, sv));
    step.blended = blend(lambda, step.primitive_actions);
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<RolloutRecord> PicoNetwork::rollout(std::span<const Tensor> states) const {
  Tape tape(/*training=*/false);
  Session session(tape, params_);
  std::vector<RolloutStep> steps = rollout_on_tape(session, states);
  std::vector<RolloutRecord> records;
  records.reserve(steps.size());
  int k_count = library_size();
  for (const RolloutStep& step : steps) {
    RolloutRecord rec;
    rec.lambda = step.lambda.tensor();
    rec.hidden = step.hidden.tensor();
    rec.blended_action = step.blended.tensor();
    rec.primitive_actions = Tensor({k_count, cfg_.action_dim});
    for (int k = 0; k < k_count; ++k) {
      const Tensor& a = step.primitive_actions[static_cast<std::size_t>(k)].tensor();
      for (int d = 0; d < cfg_.action_dim; ++d) rec.primitive_actions.at(k, d) = a[d];
    }
    rec.label = argmax(rec.lambda);
    records.push_back(std::move(rec));
  }
  return records;
}

void PicoNetwork::freeze_primitives(PrimitiveOrigin origin) {
  for (const auto& meta : primitives_)
    if (meta.origin == origin) params_.freeze_prefix("prim." + meta.id + ".");
}

// --- Free functions -----------------------------------------------------------

Tensor primitive_forward(const PrimitivePolicy& policy, const Tensor& state) {
  return policy.forward(state);
}

Tensor blended_action(const Tensor& lambda, const Tensor& primitive_actions) {
  if (lambda.rank() != 1 || primitive_actions.rank() != 2 ||
      primitive_actions.rows() != lambda.size())
    throw DimensionError("blended_action: lambda " + lambda.shape_str() + " vs actions " +
                         primitive_actions.shape_str());
  double sum = 0.0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (lambda[k] < 0.0) throw ValidationError("blended_action: negative lambda entry");
    sum += lambda[k];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("blended_action: lambda sums to " + std::to_string(sum));
  Tensor out({primitive_actions.cols()});
  for (int k = 0; k < lambda.size(); ++k)
    for (int d = 0; d < out.size(); ++d) out[d] += lambda[k] * primitive_actions.at(k, d);
  return out;
}

std::vector<int> predict_labels(const std::vector<RolloutRecord>& records) {
  if (records.empty()) throw ValidationError("predict_labels: no records");
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const RolloutRecord& rec : records) labels.push_back(argmax(rec.lambda));
  return labels;
}

}  // namespace pico
