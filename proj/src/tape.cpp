#include "pico/tape.hpp"

#include <cmath>

#include "pico/error.hpp"

namespace pico {

// --- ParameterSet -----------------------------------------------------------

void ParameterSet::insert(const std::string& name, Tensor value) {
  if (params_.count(name)) throw ValidationError("ParameterSet: duplicate name '" + name + "'");
  params_.emplace(name, std::move(value));
}

bool ParameterSet::contains(const std::string& name) const { return params_.count(name) > 0; }

Tensor& ParameterSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("ParameterSet: unknown name '" + name + "'");
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("ParameterSet: unknown name '" + name + "'");
  return it->second;
}

void ParameterSet::freeze(const std::string& name) {
  if (!contains(name)) throw ValidationError("ParameterSet::freeze: unknown name '" + name + "'");
  frozen_.insert(name);
}

void ParameterSet::unfreeze(const std::string& name) { frozen_.erase(name); }

void ParameterSet::freeze_prefix(const std::string& prefix) {
  for (const auto& [name, _] : params_)
    if (name.rfind(prefix, 0) == 0) frozen_.insert(name);
}

bool ParameterSet::is_frozen(const std::string& name) const { return frozen_.count(name) > 0; }

std::vector<std::string> ParameterSet::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

// --- Tape -------------------------------------------------------------------

const Tensor& Value::tensor() const {
  if (!tape_) throw StateError("Value: empty handle");
  return tape_->node(id_).value;
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Value Tape::constant(Tensor v) {
  Node n;
  n.op = OpKind::leaf;
  n.value = std::move(v);
  n.needs_grad = false;
  return Value(this, push(std::move(n)));
}

Value Tape::leaf(Tensor v, bool needs_grad) {
  Node n;
  n.op = OpKind::leaf;
  n.value = std::move(v);
  n.needs_grad = training_ && needs_grad;
  return Value(this, push(std::move(n)));
}

Tensor& Tape::grad_buffer(int id) {
  Node& n = node(id);
  if (n.grad.size() == 0) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad = Tensor();
  ran_backward_ = false;
}

const Tensor& Tape::grad(Value v) const {
  if (v.tape() != this) throw StateError("Tape::grad: value from another tape");
  return node(v.id()).grad;
}

void Tape::backward(Value loss) {
  if (!training_) throw StateError("Tape::backward: tape is in evaluation mode");
  if (loss.tape() != this) throw StateError("Tape::backward: loss from another tape");
  if (nodes_.empty()) throw StateError("Tape::backward: empty tape");
  if (loss.tensor().size() != 1) throw StateError("Tape::backward: loss must be scalar");
  grad_buffer(loss.id())[0] += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    const Node& n = node(id);
    if (!n.needs_grad || n.grad.size() == 0) continue;
    backward_node(id);
  }
  ran_backward_ = true;
}

void Tape::backward_node(int id) {
  Node& n = node(id);
  const Tensor& g = n.grad;
  auto in_needs = [&](int k) { return node(n.in[static_cast<std::size_t>(k)]).needs_grad; };
  auto gin = [&](int k) -> Tensor& { return grad_buffer(n.in[static_cast<std::size_t>(k)]); };
  auto vin = [&](int k) -> const Tensor& { return node(n.in[static_cast<std::size_t>(k)]).value; };

  switch (n.op) {
    case OpKind::leaf:
      break;

    case OpKind::affine: {
      // in = {x, W, b}; value = act(Wx + b)
      const Tensor& x = vin(0);
      const Tensor& W = vin(1);
      int m = W.rows(), nc = W.cols();
      // gz = g through the activation
      std::vector<double> gz(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        double gi = g[i];
        if (n.act == Activation::relu && n.value[i] <= 0.0) gi = 0.0;  // subgradient at 0 is 0
        gz[static_cast<std::size_t>(i)] = gi;
      }
      if (in_needs(1)) {
        Tensor& gw = gin(1);
        for (int i = 0; i < m; ++i) {
          double gzi = gz[static_cast<std::size_t>(i)];
          if (gzi == 0.0) continue;
          double* grow = gw.data().data() + static_cast<std::size_t>(i) * nc;
          for (int j = 0; j < nc; ++j) grow[j] += gzi * x[j];
        }
      }
      if (in_needs(2)) {
        Tensor& gb = gin(2);
        for (int i = 0; i < m; ++i) gb[i] += gz[static_cast<std::size_t>(i)];
      }
      if (in_needs(0)) {
        Tensor& gx = gin(0);
        for (int i = 0; i < m; ++i) {
          double gzi = gz[static_cast<std::size_t>(i)];
          if (gzi == 0.0) continue;
          const double* wrow = W.data().data() + static_cast<std::size_t>(i) * nc;
          for (int j = 0; j < nc; ++j) gx[j] += gzi * wrow[j];
        }
      }
      break;
    }

    case OpKind::matvec: {
      // in = {W, x}
      const Tensor& W = vin(0);
      const Tensor& x = vin(1);
      int m = W.rows(), nc = W.cols();
      if (in_needs(0)) {
        Tensor& gw = gin(0);
        for (int i = 0; i < m; ++i) {
          double gi = g[i];
          if (gi == 0.0) continue;
          double* grow = gw.data().data() + static_cast<std::size_t>(i) * nc;
          for (int j = 0; j < nc; ++j) grow[j] += gi * x[j];
        }
      }
      if (in_needs(1)) {
        Tensor& gx = gin(1);
        for (int i = 0; i < m; ++i) {
          double gi = g[i];
          if (gi == 0.0) continue;
          const double* wrow = W.data().data() + static_cast<std::size_t>(i) * nc;
          for (int j = 0; j < nc; ++j) gx[j] += gi * wrow[j];
        }
      }
      break;
    }

    case OpKind::add: {
      for (std::size_t k = 0; k < n.in.size(); ++k) {
        if (!in_needs(static_cast<int>(k))) continue;
        Tensor& gi = gin(static_cast<int>(k));
        for (int i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
      break;
    }

    case OpKind::relu: {
      if (in_needs(0)) {
        Tensor& gx = gin(0);
        for (int i = 0; i < g.size(); ++i)
          if (n.value[i] > 0.0) gx[i] += g[i];
      }
      break;
    }

    case OpKind::tanh: {
      if (in_needs(0)) {
        Tensor& gx = gin(0);
        for (int i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      }
      break;
    }

    case OpKind::softmax: {
      if (in_needs(0)) {
        const Tensor& y = n.value;
        double dot = 0.0;
        for (int i = 0; i < g.size(); ++i) dot += g[i] * y[i];
        Tensor& gx = gin(0);
        for (int i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - dot);
      }
      break;
    }

    case OpKind::log_softmax: {
      if (in_needs(0)) {
        const Tensor& y = n.value;
        double gsum = 0.0;
        for (int i = 0; i < g.size(); ++i) gsum += g[i];
        Tensor& gx = gin(0);
        for (int i = 0; i < g.size(); ++i) gx[i] += g[i] - std::exp(y[i]) * gsum;
      }
      break;
    }

    case OpKind::mse: {
      // value = mean((pred - target)^2)
      const Tensor& p = vin(0);
      const Tensor& t = vin(1);
      double c = 2.0 * g[0] / p.size();
      if (in_needs(0)) {
        Tensor& gp = gin(0);
        for (int i = 0; i < p.size(); ++i) gp[i] += c * (p[i] - t[i]);
      }
      if (in_needs(1)) {
        Tensor& gt = gin(1);
        for (int i = 0; i < p.size(); ++i) gt[i] -= c * (p[i] - t[i]);
      }
      break;
    }

    case OpKind::mean: {
      double c = g[0] / static_cast<double>(n.in.size());
      for (std::size_t k = 0; k < n.in.size(); ++k)
        if (in_needs(static_cast<int>(k))) gin(static_cast<int>(k))[0] += c;
      break;
    }

    case OpKind::blend: {
      // in = {lambda, a_0, ..., a_{K-1}}; value = sum_k lambda[k] * a_k
      const Tensor& lambda = vin(0);
      int k_count = static_cast<int>(n.in.size()) - 1;
      if (in_needs(0)) {
        Tensor& gl = gin(0);
        for (int k = 0; k < k_count; ++k) {
          const Tensor& ak = vin(k + 1);
          double dot = 0.0;
          for (int i = 0; i < g.size(); ++i) dot += g[i] * ak[i];
          gl[k] += dot;
        }
      }
      for (int k = 0; k < k_count; ++k) {
        if (!in_needs(k + 1)) continue;
        Tensor& ga = gin(k + 1);
        double lk = lambda[k];
        for (int i = 0; i < g.size(); ++i) ga[i] += lk * g[i];
      }
      break;
    }

    case OpKind::pick: {
      if (in_needs(0)) gin(0)[n.iarg] += g[0];
      break;
    }

    case OpKind::logaddexp: {
      double v = n.value[0];
      if (in_needs(0)) gin(0)[0] += g[0] * std::exp(vin(0)[0] - v);
      if (in_needs(1)) gin(1)[0] += g[0] * std::exp(vin(1)[0] - v);
      break;
    }

    case OpKind::scale: {
      if (in_needs(0)) {
        Tensor& gx = gin(0);
        for (int i = 0; i < g.size(); ++i) gx[i] += n.darg * g[i];
      }
      break;
    }
  }
}

// --- Op builders ------------------------------------------------------------

namespace {

Tape* common_tape(std::initializer_list<Value> vs) {
  Tape* t = nullptr;
  for (const Value& v : vs) {
    if (!v.valid()) throw StateError("tape op: empty value handle");
    if (t && v.tape() != t) throw StateError("tape op: operands from different tapes");
    t = v.tape();
  }
  return t;
}

}  // namespace

Value affine(Value input, Value weights, Value bias, Activation act) {
  Tape* t = common_tape({input, weights, bias});
  Tape::Node n;
  n.op = OpKind::affine;
  n.act = act == Activation::none ? Activation::linear : act;
  n.value = forward_affine(input.tensor(), weights.tensor(), bias.tensor(), act);
  n.in = {input.id(), weights.id(), bias.id()};
  n.needs_grad = t->node(input.id()).needs_grad || t->node(weights.id()).needs_grad ||
                 t->node(bias.id()).needs_grad;
  return Value(t, t->push(std::move(n)));
}

namespace {

Value unary_op(Value x, OpKind op, Tensor value, double darg = 0.0, int iarg = 0) {
  Tape* t = common_tape({x});
  Tape::Node n;
  n.op = op;
  n.darg = darg;
  n.iarg = iarg;
  n.value = std::move(value);
  n.in = {x.id()};
  n.needs_grad = t->node(x.id()).needs_grad;
  return Value(t, t->push(std::move(n)));
}

Value nary_op(const std::vector<Value>& xs, OpKind op, Tensor value) {
  if (xs.empty()) throw ValidationError("tape op: no operands");
  Tape* t = xs.front().tape();
  Tape::Node n;
  n.op = op;
  n.value = std::move(value);
  n.needs_grad = false;
  n.in.reserve(xs.size());
  for (const Value& v : xs) {
    if (!v.valid() || v.tape() != t) throw StateError("tape op: operands from different tapes");
    n.in.push_back(v.id());
    n.needs_grad = n.needs_grad || t->node(v.id()).needs_grad;
  }
  return Value(t, t->push(std::move(n)));
}

}  // namespace

Value matvec(Value weights, Value x) {
  Tape* t = common_tape({weights, x});
  Tape::Node n;
  n.op = OpKind::matvec;
  n.value = matvec(weights.tensor(), x.tensor());
  n.in = {weights.id(), x.id()};
  n.needs_grad = t->node(weights.id()).needs_grad || t->node(x.id()).needs_grad;
  return Value(t, t->push(std::move(n)));
}

Value add(const std::vector<Value>& xs) {
  Tensor out = xs.empty() ? Tensor() : Tensor(xs.front().tensor().shape());
  for (const Value& v : xs) {
    if (!v.tensor().same_shape(out))
      throw DimensionError("add: operand " + v.tensor().shape_str() + " vs " + out.shape_str());
    for (int i = 0; i < out.size(); ++i) out[i] += v.tensor()[i];
  }
  return nary_op(xs, OpKind::add, std::move(out));
}

Value add(Value a, Value b) { return add(std::vector<Value>{a, b}); }

Value relu(Value x) { return unary_op(x, OpKind::relu, relu_map(x.tensor())); }

Value tanh(Value x) { return unary_op(x, OpKind::tanh, tanh_map(x.tensor())); }

Value softmax(Value logits) { return unary_op(logits, OpKind::softmax, softmax(logits.tensor())); }

Value log_softmax(Value logits) {
  return unary_op(logits, OpKind::log_softmax, log_softmax(logits.tensor()));
}

Value mse(Value pred, Value target) {
  Tape* t = common_tape({pred, target});
  Tape::Node n;
  n.op = OpKind::mse;
  n.value = Tensor::scalar(mse_loss(pred.tensor(), target.tensor()));
  n.in = {pred.id(), target.id()};
  n.needs_grad = t->node(pred.id()).needs_grad || t->node(target.id()).needs_grad;
  return Value(t, t->push(std::move(n)));
}

Value mse(Value pred, const Tensor& target) {
  if (!pred.valid()) throw StateError("mse: empty value handle");
  return mse(pred, pred.tape()->constant(target));
}

Value mean(const std::vector<Value>& scalars) {
  if (scalars.empty()) throw ValidationError("mean: no operands");
  double acc = 0.0;
  for (const Value& v : scalars) {
    if (v.tensor().size() != 1) throw DimensionError("mean: operand is not scalar");
    acc += v.tensor()[0];
  }
  return nary_op(scalars, OpKind::mean, Tensor::scalar(acc / static_cast<double>(scalars.size())));
}

Value blend(Value lambda, const std::vector<Value>& actions) {
  if (actions.empty()) throw ValidationError("blend: no actions");
  const Tensor& l = lambda.tensor();
  if (l.size() != static_cast<int>(actions.size()))
    throw DimensionError("blend: lambda " + l.shape_str() + " vs " +
                         std::to_string(actions.size()) + " actions");
  Tensor out(actions.front().tensor().shape());
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const Tensor& a = actions[k].tensor();
    if (!a.same_shape(out))
      throw DimensionError("blend: action " + a.shape_str() + " vs " + out.shape_str());
    double lk = l[static_cast<int>(k)];
    for (int i = 0; i < out.size(); ++i) out[i] += lk * a[i];
  }
  std::vector<Value> ins;
  ins.reserve(actions.size() + 1);
  ins.push_back(lambda);
  ins.insert(ins.end(), actions.begin(), actions.end());
  return nary_op(ins, OpKind::blend, std::move(out));
}

Value pick(Value vec, int index) {
  const Tensor& v = vec.tensor();
  if (index < 0 || index >= v.size())
    throw ValidationError("pick: index " + std::to_string(index) + " out of range for " +
                          v.shape_str());
  return unary_op(vec, OpKind::pick, Tensor::scalar(v[index]), 0.0, index);
}

Value logaddexp(Value a, Value b) {
  Tape* t = common_tape({a, b});
  if (a.tensor().size() != 1 || b.tensor().size() != 1)
    throw DimensionError("logaddexp: operands must be scalar");
  Tape::Node n;
  n.op = OpKind::logaddexp;
  n.value = Tensor::scalar(logsumexp2(a.tensor()[0], b.tensor()[0]));
  n.in = {a.id(), b.id()};
  n.needs_grad = t->node(a.id()).needs_grad || t->node(b.id()).needs_grad;
  return Value(t, t->push(std::move(n)));
}

Value scale(Value x, double factor) {
  Tensor out(x.tensor().shape());
  for (int i = 0; i < out.size(); ++i) out[i] = factor * x.tensor()[i];
  return unary_op(x, OpKind::scale, std::move(out), factor);
}

// --- Session ----------------------------------------------------------------

Value Session::operator()(const std::string& name) {
  auto it = leased_.find(name);
  if (it != leased_.end()) return it->second;
  const Tensor& v = params_->at(name);
  Value leaf = tape_->leaf(v, !params_->is_frozen(name));
  leased_.emplace(name, leaf);
  return leaf;
}

std::map<std::string, Tensor> Session::gradients() const {
  if (!tape_->ran_backward()) throw StateError("Session::gradients: backward has not run");
  std::map<std::string, Tensor> out;
  for (const auto& [name, value] : leased_) {
    if (params_->is_frozen(name)) continue;
    const Tensor& g = tape_->grad(value);
    out.emplace(name, g.size() == 0 ? Tensor(value.tensor().shape()) : g);
  }
  return out;
}

}  // namespace pico
