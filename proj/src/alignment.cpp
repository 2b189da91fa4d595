#include "pico/alignment.hpp"

#include <cmath>
#include <limits>

#include "pico/error.hpp"

namespace pico {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_lattice(int t_len, const TaskSketch& sketch) {
  if (t_len < sketch.length())
    throw ValidationError("sketch of length " + std::to_string(sketch.length()) +
                          " cannot match a path of length " + std::to_string(t_len));
}

}  // namespace

TaskSketch::TaskSketch(std::vector<int> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw ValidationError("TaskSketch: empty label list");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0) throw ValidationError("TaskSketch: negative label");
    if (i > 0 && labels_[i] == labels_[i - 1])
      throw ValidationError("TaskSketch: adjacent duplicate label " + std::to_string(labels_[i]));
  }
}

EmissionMatrix::EmissionMatrix(Tensor log_probs) : log_probs_(std::move(log_probs)) {
  if (log_probs_.rank() != 2 || log_probs_.rows() < 1 || log_probs_.cols() < 1)
    throw DimensionError("EmissionMatrix: log_probs " + log_probs_.shape_str());
  for (int t = 0; t < log_probs_.rows(); ++t) {
    double mx = kNegInf;
    for (int k = 0; k < log_probs_.cols(); ++k) mx = std::max(mx, log_probs_.at(t, k));
    double sum = 0.0;
    for (int k = 0; k < log_probs_.cols(); ++k) sum += std::exp(log_probs_.at(t, k) - mx);
    double lse = mx + std::log(sum);
    if (std::abs(lse) > 1e-9)
      throw ValidationError("EmissionMatrix: row " + std::to_string(t) +
                            " log-sum-exps to " + std::to_string(lse));
  }
}

TaskSketch collapse(const Path& path) {
  if (path.empty()) throw ValidationError("collapse: empty path");
  std::vector<int> labels;
  for (int label : path)
    if (labels.empty() || labels.back() != label) labels.push_back(label);
  return TaskSketch(std::move(labels));
}

bool matches(const Path& path, const TaskSketch& sketch) {
  return collapse(path) == sketch;
}

std::vector<Path> enumerate_matching_paths(int t_len, const TaskSketch& sketch) {
  check_lattice(t_len, sketch);
  int l_len = sketch.length();
  // A matching path is fixed by its L-1 advance times, a combination of
  // {1..T-1}; enumerate combinations in lexicographic order.
  std::vector<int> advance(static_cast<std::size_t>(l_len - 1));
  for (int i = 0; i < l_len - 1; ++i) advance[static_cast<std::size_t>(i)] = i + 1;
  std::vector<Path> out;
  while (true) {
    Path p(static_cast<std::size_t>(t_len));
    int l = 0;
    for (int t = 0; t < t_len; ++t) {
      if (l < l_len - 1 && t == advance[static_cast<std::size_t>(l)]) ++l;
      p[static_cast<std::size_t>(t)] = sketch[l];
    }
    out.push_back(std::move(p));
    // Next combination.
    int i = l_len - 2;
    while (i >= 0 && advance[static_cast<std::size_t>(i)] == t_len - 1 - (l_len - 2 - i)) --i;
    if (i < 0) break;
    ++advance[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < l_len - 1; ++j)
      advance[static_cast<std::size_t>(j)] = advance[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

double ctc_log_likelihood(const EmissionMatrix& emissions, const TaskSketch& sketch) {
  check_lattice(emissions.timesteps(), sketch);
  int t_len = emissions.timesteps();
  int l_len = sketch.length();
  std::vector<double> alpha(static_cast<std::size_t>(l_len), kNegInf);
  alpha[0] = emissions.at(0, sketch[0]);
  for (int t = 1; t < t_len; ++t) {
    for (int l = std::min(l_len - 1, t); l >= 0; --l) {
      double stay = alpha[static_cast<std::size_t>(l)];
      double advance = l > 0 ? alpha[static_cast<std::size_t>(l - 1)] : kNegInf;
      alpha[static_cast<std::size_t>(l)] =
          logsumexp2(stay, advance) + emissions.at(t, sketch[l]);
    }
  }
  return alpha[static_cast<std::size_t>(l_len - 1)];
}

Path ctc_decode(const EmissionMatrix& emissions, const TaskSketch& sketch) {
  check_lattice(emissions.timesteps(), sketch);
  int t_len = emissions.timesteps();
  int l_len = sketch.length();
  // best[t][l], choice[t][l]: 0 = stay (predecessor l), 1 = advance (l-1).
  std::vector<std::vector<double>> best(static_cast<std::size_t>(t_len),
                                        std::vector<double>(static_cast<std::size_t>(l_len), kNegInf));
  std::vector<std::vector<unsigned char>> choice(
      static_cast<std::size_t>(t_len),
      std::vector<unsigned char>(static_cast<std::size_t>(l_len), 0));
  best[0][0] = emissions.at(0, sketch[0]);
  for (int t = 1; t < t_len; ++t) {
    for (int l = 0; l <= std::min(l_len - 1, t); ++l) {
      double stay = best[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l)];
      double advance =
          l > 0 ? best[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l - 1)] : kNegInf;
      // On ties prefer stay: the transition into this position then happened
      // earlier, which makes advances as early as possible overall.
      if (advance > stay) {
        best[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] = advance;
        choice[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] = 1;
      } else {
        best[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] = stay;
        choice[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] = 0;
      }
      best[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] += emissions.at(t, sketch[l]);
    }
  }
  Path path(static_cast<std::size_t>(t_len), 0);
  int l = l_len - 1;
  for (int t = t_len - 1; t >= 0; --t) {
    path[static_cast<std::size_t>(t)] = sketch[l];
    if (t > 0 && choice[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] == 1) --l;
  }
  return path;
}

double taco_log_likelihood(const Tensor& action_log_likes, const Tensor& stop_log_probs,
                           const TaskSketch& sketch) {
  if (action_log_likes.rank() != 2)
    throw DimensionError("taco_log_likelihood: action_log_likes " + action_log_likes.shape_str());
  int t_len = action_log_likes.rows();
  int l_len = sketch.length();
  if (action_log_likes.cols() != l_len)
    throw DimensionError("taco_log_likelihood: expected " + std::to_string(l_len) +
                         " columns, got " + std::to_string(action_log_likes.cols()));
  if (stop_log_probs.rank() != 2 || stop_log_probs.rows() != t_len || stop_log_probs.cols() != 2)
    throw DimensionError("taco_log_likelihood: stop_log_probs " + stop_log_probs.shape_str() +
                         ", expected [" + std::to_string(t_len) + "x2]");
  check_lattice(t_len, sketch);
  std::vector<double> alpha(static_cast<std::size_t>(l_len), kNegInf);
  alpha[0] = action_log_likes.at(0, 0);
  for (int t = 1; t < t_len; ++t) {
    double stay_lp = stop_log_probs.at(t - 1, 0);
    double adv_lp = stop_log_probs.at(t - 1, 1);
    for (int l = std::min(l_len - 1, t); l >= 0; --l) {
      double stay = alpha[static_cast<std::size_t>(l)] + stay_lp;
      double advance =
          l > 0 ? alpha[static_cast<std::size_t>(l - 1)] + adv_lp : kNegInf;
      alpha[static_cast<std::size_t>(l)] = logsumexp2(stay, advance) + action_log_likes.at(t, l);
    }
  }
  return alpha[static_cast<std::size_t>(l_len - 1)];
}

Value ctc_log_likelihood_on_tape(const std::vector<Value>& emission_rows,
                                 const TaskSketch& sketch) {
  int t_len = static_cast<int>(emission_rows.size());
  check_lattice(t_len, sketch);
  int l_len = sketch.length();
  // alpha values carried as tape scalars; unreachable cells are absent.
  std::vector<Value> alpha(static_cast<std::size_t>(l_len));
  alpha[0] = pick(emission_rows[0], sketch[0]);
  for (int t = 1; t < t_len; ++t) {
    for (int l = std::min(l_len - 1, t); l >= 0; --l) {
      Value stay = alpha[static_cast<std::size_t>(l)];
      Value advance = l > 0 ? alpha[static_cast<std::size_t>(l - 1)] : Value();
      Value combined;
      if (stay.valid() && advance.valid())
        combined = logaddexp(stay, advance);
      else if (stay.valid())
        combined = stay;
      else
        combined = advance;
      alpha[static_cast<std::size_t>(l)] =
          add(combined, pick(emission_rows[static_cast<std::size_t>(t)], sketch[l]));
    }
  }
  return alpha[static_cast<std::size_t>(l_len - 1)];
}

}  // namespace pico
