#pragma once

#include <vector>

#include "pico/alignment.hpp"
#include "pico/rng.hpp"
#include "pico/tensor.hpp"

// Independent oracles for the DP routines and the latent analysis. These
// deliberately brute-force: they enumerate K^T label sequences instead of
// walking the stay/advance lattice, so they share no code with the
// implementations they check.
namespace pico::testing {

// All K^T label sequences over [0, K), filtered by collapse == sketch.
std::vector<Path> brute_force_matching_paths(int t_len, int k_count, const TaskSketch& sketch);

// log sum over brute-forced paths of the product of emission probabilities.
double brute_force_ctc_log_likelihood(const EmissionMatrix& emissions, const TaskSketch& sketch);

// Highest-probability matching path; ties resolved toward the earliest
// advance times (lexicographically smallest advance vector).
Path brute_force_ctc_decode(const EmissionMatrix& emissions, const TaskSketch& sketch);

// Brute-force version of the joint sketch/action objective.
double brute_force_taco_log_likelihood(const Tensor& action_log_likes,
                                       const Tensor& stop_log_probs, const TaskSketch& sketch);

// Random emission matrix with rows normalized in log space.
EmissionMatrix random_emissions(int t_len, int k_count, Rng& rng);

// Random sketch of length l over [0, K) without adjacent repeats.
TaskSketch random_sketch(int l_len, int k_count, Rng& rng);

// Mean silhouette score of 2-D points under integer labels.
double silhouette_score(const Tensor& coords, const std::vector<int>& labels);

}  // namespace pico::testing
