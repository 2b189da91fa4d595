#include "pico/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pico/error.hpp"

namespace pico {

double label_accuracy(const std::vector<std::vector<int>>& pred,
                      const std::vector<std::vector<int>>& truth) {
  if (pred.size() != truth.size())
    throw ValidationError("label_accuracy: sequence counts differ");
  long long matched = 0, total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != truth[i].size())
      throw ValidationError("label_accuracy: sequence " + std::to_string(i) + " lengths differ");
    for (std::size_t t = 0; t < pred[i].size(); ++t) {
      ++total;
      if (pred[i][t] == truth[i][t]) ++matched;
    }
  }
  if (total == 0) throw ValidationError("label_accuracy: no comparisons");
  return static_cast<double>(matched) / static_cast<double>(total);
}

double label_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  return label_accuracy(std::vector<std::vector<int>>{pred}, {truth});
}

double action_mse(const std::vector<std::vector<Tensor>>& pred,
                  const std::vector<std::vector<Tensor>>& truth) {
  if (pred.size() != truth.size()) throw ValidationError("action_mse: sequence counts differ");
  double acc = 0.0;
  long long count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != truth[i].size())
      throw ValidationError("action_mse: sequence " + std::to_string(i) + " lengths differ");
    for (std::size_t t = 0; t < pred[i].size(); ++t) {
      const Tensor& p = pred[i][t];
      const Tensor& q = truth[i][t];
      if (!p.same_shape(q))
        throw DimensionError("action_mse: " + p.shape_str() + " vs " + q.shape_str());
      for (int d = 0; d < p.size(); ++d) {
        double diff = p[d] - q[d];
        acc += diff * diff;
        ++count;
      }
    }
  }
  if (count == 0) throw ValidationError("action_mse: no elements");
  return acc / static_cast<double>(count);
}

double action_mse(const std::vector<Tensor>& pred, const std::vector<Tensor>& truth) {
  return action_mse(std::vector<std::vector<Tensor>>{pred}, {truth});
}

Tensor confusion_matrix(const std::vector<std::vector<int>>& pred,
                        const std::vector<std::vector<int>>& truth, int k_count) {
  if (k_count < 1) throw ValidationError("confusion_matrix: K must be >= 1");
  if (pred.size() != truth.size())
    throw ValidationError("confusion_matrix: sequence counts differ");
  Tensor confusion({k_count, k_count});
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != truth[i].size())
      throw ValidationError("confusion_matrix: sequence " + std::to_string(i) +
                            " lengths differ");
    for (std::size_t t = 0; t < pred[i].size(); ++t) {
      int p = pred[i][t], q = truth[i][t];
      if (p < 0 || p >= k_count || q < 0 || q >= k_count)
        throw ValidationError("confusion_matrix: label out of range [0, " +
                              std::to_string(k_count) + ")");
      confusion.at(q, p) += 1.0;
    }
  }
  return confusion;
}

EvaluationReport evaluate_labels_and_actions(const std::vector<std::vector<int>>& pred_labels,
                                             const std::vector<std::vector<int>>& true_labels,
                                             const std::vector<std::vector<Tensor>>& pred_actions,
                                             const std::vector<std::vector<Tensor>>& true_actions,
                                             int k_count) {
  EvaluationReport report;
  report.label_accuracy = label_accuracy(pred_labels, true_labels);
  report.action_mse = action_mse(pred_actions, true_actions);
  report.confusion = confusion_matrix(pred_labels, true_labels, k_count);
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    report.per_traj_accuracy.push_back(label_accuracy(pred_labels[i], true_labels[i]));
    report.per_traj_mse.push_back(action_mse(pred_actions[i], true_actions[i]));
    report.n_timesteps += static_cast<long long>(pred_labels[i].size());
  }
  return report;
}

void symmetric_eigen(const Tensor& matrix, std::vector<double>& eigenvalues, Tensor& eigenvectors) {
  if (matrix.rank() != 2 || matrix.rows() != matrix.cols())
    throw DimensionError("symmetric_eigen: matrix " + matrix.shape_str());
  int n = matrix.rows();
  Tensor a = matrix;
  Tensor v({n, n});
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

  // Cyclic Jacobi sweeps; n <= 64 here, convergence is quadratic.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          double api = a.at(p, i), aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          double vip = v.at(i, p), viq = v.at(i, q);
          v.at(i, p) = c * vip - s * viq;
          v.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int x, int y) { return a.at(x, x) > a.at(y, y); });
  eigenvalues.assign(static_cast<std::size_t>(n), 0.0);
  eigenvectors = Tensor({n, n});
  for (int j = 0; j < n; ++j) {
    int src = idx[static_cast<std::size_t>(j)];
    eigenvalues[static_cast<std::size_t>(j)] = a.at(src, src);
    for (int i = 0; i < n; ++i) eigenvectors.at(i, j) = v.at(i, src);
  }
}

LatentProjection pca_project(const Tensor& points, const std::vector<int>& labels) {
  if (points.rank() != 2) throw DimensionError("pca_project: points " + points.shape_str());
  int n = points.rows(), d = points.cols();
  if (n < 2 || d < 2) throw ValidationError("pca_project: need N >= 2 and d >= 2");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw ValidationError("pca_project: labels size does not match points");

  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += points.at(i, j);
  for (double& m : mean) m /= static_cast<double>(n);

  Tensor cov({d, d});
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      double xa = points.at(i, a) - mean[static_cast<std::size_t>(a)];
      for (int b = a; b < d; ++b) {
        double xb = points.at(i, b) - mean[static_cast<std::size_t>(b)];
        cov.at(a, b) += xa * xb;
      }
    }
  }
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      cov.at(a, b) /= static_cast<double>(n);
      cov.at(b, a) = cov.at(a, b);
    }

  std::vector<double> eigenvalues;
  Tensor eigenvectors;
  symmetric_eigen(cov, eigenvalues, eigenvectors);

  double total = 0.0;
  for (double& ev : eigenvalues) {
    if (ev < 0.0 && ev > -1e-12) ev = 0.0;  // Jacobi round-off
    total += std::max(ev, 0.0);
  }
  if (total <= 0.0) throw ValidationError("pca_project: zero variance in all directions");

  // Sign convention: the largest-magnitude coordinate of each component is
  // positive (first index wins ties).
  for (int comp = 0; comp < 2; ++comp) {
    int best = 0;
    for (int i = 1; i < d; ++i)
      if (std::abs(eigenvectors.at(i, comp)) > std::abs(eigenvectors.at(best, comp))) best = i;
    if (eigenvectors.at(best, comp) < 0.0)
      for (int i = 0; i < d; ++i) eigenvectors.at(i, comp) = -eigenvectors.at(i, comp);
  }

  LatentProjection proj;
  proj.coords = Tensor({n, 2});
  for (int i = 0; i < n; ++i)
    for (int comp = 0; comp < 2; ++comp) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j)
        acc += (points.at(i, j) - mean[static_cast<std::size_t>(j)]) * eigenvectors.at(j, comp);
      proj.coords.at(i, comp) = acc;
    }
  proj.explained_ratio[0] = std::max(eigenvalues[0], 0.0) / total;
  proj.explained_ratio[1] = std::max(eigenvalues[1], 0.0) / total;
  proj.labels = labels;
  return proj;
}

}  // namespace pico
