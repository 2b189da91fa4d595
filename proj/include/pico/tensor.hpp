#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace pico {

// Dense tensor of 64-bit reals, row-major, rank 0 (scalar) to 2 in practice.
class Tensor {
 public:
  Tensor() = default;
  // Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);  // rank-1 [n]

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int size() const { return static_cast<int>(data_.size()); }

  // Rank-2 accessors. rows()/cols() are valid for rank 2 only.
  int rows() const;
  int cols() const;
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }

  double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  void fill(double v);

  std::string shape_str() const;  // "[3x4]" for error messages

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

enum class Activation { relu, linear, none };  // none is an alias of linear

// Numeric kernels shared by the eval path and the tape. All of them validate
// shapes and raise DimensionError naming the operands on mismatch.
Tensor forward_affine(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      Activation activation);
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);
double mse_loss(const Tensor& pred, const Tensor& target);
Tensor tanh_map(const Tensor& x);
Tensor relu_map(const Tensor& x);
Tensor matvec(const Tensor& weights, const Tensor& x);

// Index of the largest entry; ties break to the lowest index.
int argmax(const Tensor& v);

double logsumexp2(double a, double b);

}  // namespace pico
