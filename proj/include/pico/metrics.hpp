#pragma once

#include <vector>

#include "pico/tensor.hpp"

namespace pico {

struct EvaluationReport {
  double label_accuracy = 0.0;
  double action_mse = 0.0;
  Tensor confusion;  // K x K counts; entry (i, j) = truth i predicted j
  long long n_timesteps = 0;
  // Per-trajectory breakdown, aligned with the evaluated sequence order.
  std::vector<double> per_traj_accuracy;
  std::vector<double> per_traj_mse;
};

// Fraction of matching labels over all timesteps of all sequences
// (micro-averaged).
double label_accuracy(const std::vector<std::vector<int>>& pred,
                      const std::vector<std::vector<int>>& truth);
double label_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Mean over timesteps, dimensions and trajectories of squared differences.
double action_mse(const std::vector<std::vector<Tensor>>& pred,
                  const std::vector<std::vector<Tensor>>& truth);
double action_mse(const std::vector<Tensor>& pred, const std::vector<Tensor>& truth);

// K x K counts. Labels must lie in [0, K).
Tensor confusion_matrix(const std::vector<std::vector<int>>& pred,
                        const std::vector<std::vector<int>>& truth, int k_count);

EvaluationReport evaluate_labels_and_actions(const std::vector<std::vector<int>>& pred_labels,
                                             const std::vector<std::vector<int>>& true_labels,
                                             const std::vector<std::vector<Tensor>>& pred_actions,
                                             const std::vector<std::vector<Tensor>>& true_actions,
                                             int k_count);

struct LatentProjection {
  Tensor coords;                    // N x 2
  double explained_ratio[2] = {0, 0};
  std::vector<int> labels;          // one per point (copied through)
};

// Mean-centered projection onto the top-2 eigenvectors of the covariance,
// with a deterministic sign convention: the largest-magnitude coordinate of
// each component is positive. Raises on data with zero variance in every
// direction.
LatentProjection pca_project(const Tensor& points, const std::vector<int>& labels);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues in descending order and matching orthonormal columns.
void symmetric_eigen(const Tensor& matrix, std::vector<double>& eigenvalues, Tensor& eigenvectors);

}  // namespace pico
