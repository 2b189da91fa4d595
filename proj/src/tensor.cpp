#include "pico/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pico/error.hpp"

namespace pico {

namespace {

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int e : shape) {
    if (e < 0) throw ValidationError("Tensor: negative extent in shape");
    n *= static_cast<std::size_t>(e);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_product(shape_) != data_.size())
    throw DimensionError("Tensor: shape " + shape_str() + " does not match " +
                         std::to_string(data_.size()) + " values");
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::row(std::vector<double> values) {
  int n = static_cast<int>(values.size());
  return Tensor({n}, std::move(values));
}

int Tensor::rows() const {
  if (rank() != 2) throw DimensionError("Tensor::rows: tensor " + shape_str() + " is not rank 2");
  return shape_[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw DimensionError("Tensor::cols: tensor " + shape_str() + " is not rank 2");
  return shape_[1];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

Tensor matvec(const Tensor& weights, const Tensor& x) {
  if (weights.rank() != 2 || x.rank() != 1 || weights.cols() != x.size())
    throw DimensionError("matvec: weights " + weights.shape_str() + " incompatible with input " +
                         x.shape_str());
  int m = weights.rows(), n = weights.cols();
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    const double* wrow = weights.data().data() + static_cast<std::size_t>(i) * n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += wrow[j] * x[j];
    out[i] = acc;
  }
  return out;
}

Tensor forward_affine(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      Activation activation) {
  if (weights.rank() != 2 || input.rank() != 1 || weights.cols() != input.size())
    throw DimensionError("forward_affine: weights " + weights.shape_str() +
                         " incompatible with input " + input.shape_str());
  if (bias.rank() != 1 || bias.size() != weights.rows())
    throw DimensionError("forward_affine: bias " + bias.shape_str() + " incompatible with weights " +
                         weights.shape_str());
  Tensor out = matvec(weights, input);
  for (int i = 0; i < out.size(); ++i) {
    out[i] += bias[i];
    if (activation == Activation::relu && out[i] < 0.0) out[i] = 0.0;
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  if (logits.size() == 0) throw DimensionError("softmax: empty input");
  double mx = logits[0];
  for (int i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
  Tensor out(logits.shape());
  double sum = 0.0;
  for (int i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (int i = 0; i < out.size(); ++i) out[i] /= sum;
  return out;
}

Tensor log_softmax(const Tensor& logits) {
  if (logits.size() == 0) throw DimensionError("log_softmax: empty input");
  double mx = logits[0];
  for (int i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (int i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
  double lse = mx + std::log(sum);
  Tensor out(logits.shape());
  for (int i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

double mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target))
    throw DimensionError("mse_loss: pred " + pred.shape_str() + " vs target " + target.shape_str());
  if (pred.size() == 0) throw DimensionError("mse_loss: empty operands");
  double acc = 0.0;
  for (int i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / pred.size();
}

Tensor tanh_map(const Tensor& x) {
  Tensor out(x.shape());
  for (int i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

Tensor relu_map(const Tensor& x) {
  Tensor out(x.shape());
  for (int i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

int argmax(const Tensor& v) {
  if (v.size() == 0) throw ValidationError("argmax: empty input");
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double logsumexp2(double a, double b) {
  double m = std::max(a, b);
  if (!std::isfinite(m)) return m;  // both -inf
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace pico
