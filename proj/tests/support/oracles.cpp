#include "support/oracles.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace pico::testing {

std::vector<Path> brute_force_matching_paths(int t_len, int k_count, const TaskSketch& sketch) {
  std::vector<Path> out;
  Path current(static_cast<std::size_t>(t_len), 0);
  while (true) {
    if (collapse(current) == sketch) out.push_back(current);
    // Odometer increment over K^T sequences.
    int pos = t_len - 1;
    while (pos >= 0) {
      if (++current[static_cast<std::size_t>(pos)] < k_count) break;
      current[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

double brute_force_ctc_log_likelihood(const EmissionMatrix& emissions, const TaskSketch& sketch) {
  auto paths = brute_force_matching_paths(emissions.timesteps(), emissions.labels(), sketch);
  double total = 0.0;
  for (const Path& path : paths) {
    double logp = 0.0;
    for (int t = 0; t < emissions.timesteps(); ++t)
      logp += emissions.at(t, path[static_cast<std::size_t>(t)]);
    total += std::exp(logp);
  }
  return std::log(total);
}

namespace {

std::vector<int> advance_times(const Path& path) {
  std::vector<int> times;
  for (std::size_t t = 1; t < path.size(); ++t)
    if (path[t] != path[t - 1]) times.push_back(static_cast<int>(t));
  return times;
}

}  // namespace

Path brute_force_ctc_decode(const EmissionMatrix& emissions, const TaskSketch& sketch) {
  auto paths = brute_force_matching_paths(emissions.timesteps(), emissions.labels(), sketch);
  const Path* best = nullptr;
  double best_logp = -std::numeric_limits<double>::infinity();
  for (const Path& path : paths) {
    double logp = 0.0;
    for (int t = 0; t < emissions.timesteps(); ++t)
      logp += emissions.at(t, path[static_cast<std::size_t>(t)]);
    if (!best || logp > best_logp + 1e-12) {
      best = &path;
      best_logp = logp;
    } else if (logp > best_logp - 1e-12) {
      // Tie: earlier advance times win.
      if (advance_times(path) < advance_times(*best)) best = &path;
    }
  }
  return *best;
}

double brute_force_taco_log_likelihood(const Tensor& action_log_likes,
                                       const Tensor& stop_log_probs, const TaskSketch& sketch) {
  int t_len = action_log_likes.rows();
  int l_len = sketch.length();
  // Enumerate matching paths by their sketch-position sequence.
  auto paths = enumerate_matching_paths(t_len, sketch);
  double total = 0.0;
  for (const Path& path : paths) {
    // Recover per-step sketch positions to index action_log_likes columns.
    double logp = 0.0;
    int l = 0;
    for (int t = 0; t < t_len; ++t) {
      if (t > 0) {
        bool advanced = path[static_cast<std::size_t>(t)] != path[static_cast<std::size_t>(t - 1)];
        if (advanced) ++l;
        logp += stop_log_probs.at(t - 1, advanced ? 1 : 0);
      }
      logp += action_log_likes.at(t, l);
    }
    (void)l_len;
    total += std::exp(logp);
  }
  return std::log(total);
}

EmissionMatrix random_emissions(int t_len, int k_count, Rng& rng) {
  Tensor logits({t_len, k_count});
  for (int i = 0; i < logits.size(); ++i) logits[i] = rng.uniform(-2.0, 2.0);
  Tensor log_probs({t_len, k_count});
  for (int t = 0; t < t_len; ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_count; ++k) mx = std::max(mx, logits.at(t, k));
    double sum = 0.0;
    for (int k = 0; k < k_count; ++k) sum += std::exp(logits.at(t, k) - mx);
    double lse = mx + std::log(sum);
    for (int k = 0; k < k_count; ++k) log_probs.at(t, k) = logits.at(t, k) - lse;
  }
  return EmissionMatrix(std::move(log_probs));
}

TaskSketch random_sketch(int l_len, int k_count, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(l_len));
  for (int l = 0; l < l_len; ++l) {
    int pick;
    do {
      pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(k_count)));
    } while (l > 0 && pick == labels[static_cast<std::size_t>(l - 1)]);
    labels[static_cast<std::size_t>(l)] = pick;
  }
  return TaskSketch(std::move(labels));
}

double silhouette_score(const Tensor& coords, const std::vector<int>& labels) {
  int n = coords.rows();
  double total = 0.0;
  int counted = 0;
  for (int i = 0; i < n; ++i) {
    // Mean distance to own cluster (a) and nearest other cluster (b).
    std::map<int, std::pair<double, int>> sums;  // label -> (distance sum, count)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double dx = coords.at(i, 0) - coords.at(j, 0);
      double dy = coords.at(i, 1) - coords.at(j, 1);
      auto& entry = sums[labels[static_cast<std::size_t>(j)]];
      entry.first += std::sqrt(dx * dx + dy * dy);
      entry.second += 1;
    }
    int own = labels[static_cast<std::size_t>(i)];
    if (!sums.count(own) || sums.size() < 2) continue;
    double a = sums[own].first / sums[own].second;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, entry] : sums) {
      if (label == own) continue;
      b = std::min(b, entry.first / entry.second);
    }
    double denom = std::max(a, b);
    if (denom > 0.0) {
      total += (b - a) / denom;
      ++counted;
    }
  }
  return counted > 0 ? total / counted : 0.0;
}

}  // namespace pico::testing
