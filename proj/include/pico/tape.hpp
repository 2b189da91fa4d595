#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pico/tensor.hpp"

namespace pico {

// Named parameter tensors plus the set of names excluded from updates.
class ParameterSet {
 public:
  void insert(const std::string& name, Tensor value);
  bool contains(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  void freeze(const std::string& name);
  void unfreeze(const std::string& name);
  // Freeze every parameter whose name starts with `prefix`.
  void freeze_prefix(const std::string& prefix);
  bool is_frozen(const std::string& name) const;
  void clear_frozen() { frozen_.clear(); }

  std::vector<std::string> names() const;  // sorted
  const std::set<std::string>& frozen() const { return frozen_; }
  std::size_t size() const { return params_.size(); }

  const std::map<std::string, Tensor>& items() const { return params_; }

 private:
  std::map<std::string, Tensor> params_;
  std::set<std::string> frozen_;
};

class Tape;

// Handle to a node on a tape.
class Value {
 public:
  Value() = default;
  Value(Tape* t, int id) : tape_(t), id_(id) {}
  const Tensor& tensor() const;
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class OpKind : unsigned char {
  leaf,
  affine,
  matvec,
  add,
  relu,
  tanh,
  softmax,
  log_softmax,
  mse,
  mean,
  blend,
  pick,
  logaddexp,
  scale,
};

// Recorded computation graph. Operations append nodes in topological order;
// one reverse traversal accumulates gradients into every node that is
// reachable from a non-frozen parameter leaf.
//
// A tape in evaluation mode computes identical forward values but tracks no
// gradients and refuses backward(). A tape is owned by exactly one run.
class Tape {
 public:
  explicit Tape(bool training = true) : training_(training) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool training() const { return training_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  void reserve(int n) { nodes_.reserve(static_cast<std::size_t>(n)); }

  Value constant(Tensor v);
  // Leaf that participates in gradient computation (when training).
  Value leaf(Tensor v, bool needs_grad);

  // Reverse-mode sweep from a scalar loss. May be called for several losses
  // on one tape; gradients accumulate until zero_grad().
  void backward(Value loss);
  void zero_grad();
  const Tensor& grad(Value v) const;
  bool ran_backward() const { return ran_backward_; }

  // Internal node plumbing, used by the op builders in tape.cpp.
  struct Node {
    OpKind op = OpKind::leaf;
    Activation act = Activation::linear;
    int iarg = 0;        // pick index
    double darg = 0.0;   // scale factor
    std::vector<int> in;
    Tensor value;
    Tensor grad;  // empty until backward touches the node
    bool needs_grad = false;
  };
  int push(Node n);
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  Tensor& grad_buffer(int id);
  void backward_node(int id);

  std::vector<Node> nodes_;
  bool training_;
  bool ran_backward_ = false;
};

// --- Tape operations -------------------------------------------------------
// Forward values are computed by the kernels in tensor.hpp, so evaluation and
// training mode produce identical outputs by construction.

Value affine(Value input, Value weights, Value bias, Activation act);
Value matvec(Value weights, Value x);
Value add(const std::vector<Value>& xs);
Value add(Value a, Value b);
Value relu(Value x);
Value tanh(Value x);
Value softmax(Value logits);
Value log_softmax(Value logits);
Value mse(Value pred, Value target);
Value mse(Value pred, const Tensor& target);
Value mean(const std::vector<Value>& scalars);
Value blend(Value lambda, const std::vector<Value>& actions);
Value pick(Value vec, int index);
Value logaddexp(Value a, Value b);
Value scale(Value x, double factor);

// Binds a ParameterSet to a Tape for one forward/backward pass. Parameters
// are leased onto the tape as leaves the first time they are named; frozen
// parameters become constants and receive no gradient.
class Session {
 public:
  Session(Tape& tape, const ParameterSet& params) : tape_(&tape), params_(&params) {}

  // Leased parameter leaf.
  Value operator()(const std::string& name);

  // Gradients of every non-frozen parameter leased onto the tape, keyed by
  // name. Requires a prior Tape::backward.
  std::map<std::string, Tensor> gradients() const;

  Tape& tape() { return *tape_; }

 private:
  Tape* tape_;
  const ParameterSet* params_;
  std::map<std::string, Value> leased_;
};

}  // namespace pico
