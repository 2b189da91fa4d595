#pragma once

#include <vector>

#include "pico/tape.hpp"
#include "pico/tensor.hpp"

namespace pico {

// Per-timestep sub-task labels, length T.
using Path = std::vector<int>;

// Ordered sub-task labels with no two adjacent entries equal, length L >= 1.
class TaskSketch {
 public:
  TaskSketch() = default;
  explicit TaskSketch(std::vector<int> labels);

  const std::vector<int>& labels() const { return labels_; }
  int length() const { return static_cast<int>(labels_.size()); }
  int operator[](int i) const { return labels_[static_cast<std::size_t>(i)]; }
  bool operator==(const TaskSketch& other) const { return labels_ == other.labels_; }

 private:
  std::vector<int> labels_;
};

// T x K matrix of log p(label k | timestep t); every row must log-sum-exp
// to 0 within 1e-9.
class EmissionMatrix {
 public:
  explicit EmissionMatrix(Tensor log_probs);

  int timesteps() const { return log_probs_.rows(); }
  int labels() const { return log_probs_.cols(); }
  double at(int t, int k) const { return log_probs_.at(t, k); }
  const Tensor& log_probs() const { return log_probs_; }

 private:
  Tensor log_probs_;
};

// Removes adjacent duplicate labels; a sketch is its own collapse.
TaskSketch collapse(const Path& path);
bool matches(const Path& path, const TaskSketch& sketch);

// All monotone paths of length T that collapse to the sketch, in
// lexicographic order of their advance positions. Count is C(T-1, L-1).
// Intended for small T (oracle use).
std::vector<Path> enumerate_matching_paths(int t_len, const TaskSketch& sketch);

// log sum over matching paths of the product of per-step emission
// probabilities, by forward DP over sketch positions with stay/advance
// transitions in log space.
double ctc_log_likelihood(const EmissionMatrix& emissions, const TaskSketch& sketch);

// Maximum-probability matching path via max-product DP with backtrace.
// Ties prefer the path whose advances happen earliest.
Path ctc_decode(const EmissionMatrix& emissions, const TaskSketch& sketch);

// Joint log likelihood of the sketch and the actions along it.
//
// action_log_likes is T x L: entry (t, l) is the action log-likelihood of
// sub-policy sketch[l] at timestep t. stop_log_probs is T x 2: row t holds
// {log p(stay), log p(advance)} for the transition out of timestep t (the
// last row is unused). The DP runs over the same stay/advance lattice as the
// CTC objective, accumulating action plus transition terms.
double taco_log_likelihood(const Tensor& action_log_likes, const Tensor& stop_log_probs,
                           const TaskSketch& sketch);

// Tape version of the CTC objective for training an emission network.
// emission_rows[t] must be a [K] vector of log-probabilities on the tape.
Value ctc_log_likelihood_on_tape(const std::vector<Value>& emission_rows,
                                 const TaskSketch& sketch);

}  // namespace pico
