// Copyright 2026 The phonovc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over dense 2-D matrices.
//
// Every tensor in the model is a [channels x time] matrix (scalars are 1x1).
// A Var is a cheap handle to a graph node; operations on Vars record a
// backward closure when any input requires a gradient and gradient
// recording is enabled (see NoGradGuard). Computation is single-threaded,
// so a fixed sequence of operations is bit-reproducible.

#ifndef PHONOVC_AUTOGRAD_HPP_
#define PHONOVC_AUTOGRAD_HPP_

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace phonovc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace ag {

struct Node {
  Matrix value;
  Matrix grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Matrix& g);
  bool has_grad() const { return grad.size() > 0; }
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  // Direct mutation is only valid on leaves (parameters, constants).
  Matrix& mutable_value() { return node_->value; }
  // Zero matrix of the value's shape when nothing has been accumulated.
  Matrix grad() const;
  bool has_grad() const { return node_->has_grad(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  void zero_grad() { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Runs backpropagation from a 1x1 root, seeding d(root)/d(root) = 1.
void backward(const Var& root);

bool grad_enabled();

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

Var constant(Matrix value);
Var scalar(double value);
// Same value, no gradient path to the input.
Var stop_gradient(const Var& x);

// Elementwise arithmetic. Shapes must match exactly.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
Var add_scalar(const Var& x, double value);
// x [R x T] + column [R x 1] broadcast over time.
Var add_column(const Var& x, const Var& column);
// x [R x T] * column [R x 1] broadcast over time.
Var mul_column(const Var& x, const Var& column);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& x);

Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var exp(const Var& x);
// Natural log of max(x, floor); gradient is zero where clamped.
Var log_clamped(const Var& x, double floor);
Var square(const Var& x);
Var abs(const Var& x);
// Gradient passes only where lo <= x <= hi.
Var clamp(const Var& x, double lo, double hi);

Var sum(const Var& x);
Var mean(const Var& x);
Var l1_loss(const Var& a, const Var& b);
Var mse_loss(const Var& a, const Var& b);

// Normalizes every column over its rows, then applies gamma/beta [R x 1].
Var layer_norm(const Var& x, const Var& gamma, const Var& beta,
               double eps = 1e-5);

// Softmax down each column. Entries where allowed(r, c) is false get zero
// weight (a -inf logit). Every column needs at least one allowed entry.
Var softmax_columns(const Var& x);
Var masked_softmax_columns(const Var& x,
                           const Eigen::Array<bool, Eigen::Dynamic,
                                              Eigen::Dynamic>& allowed);

Var slice_rows(const Var& x, Eigen::Index start, Eigen::Index count);
Var slice_cols(const Var& x, Eigen::Index start, Eigen::Index count);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);

// Column i of x repeated counts[i] times, in order.
Var repeat_cols(const Var& x, std::span<const int> counts);
// Column i of the result is the mean of the i-th consecutive run of
// counts[i] columns of x. sum(counts) must equal x.cols().
Var segment_mean_cols(const Var& x, std::span<const int> counts);
// Column j of the result is column ids[j] of table.
Var gather_cols(const Var& table, std::span<const int> ids);

// Reflection padding along time, numpy/torch "reflect" convention.
Var pad_reflect_cols(const Var& x, int left, int right);

struct ConvSpec {
  int kernel = 1;
  int stride = 1;
  int dilation = 1;
  int padding = 0;  // zero padding on both sides of the time axis
  // Columns are laid out as time * period + phase; the kernel slides over
  // time independently for each phase (a (k, 1) 2-D convolution).
  int period = 1;
};

// weight: [Cout x kernel*Cin], column index k * Cin + ci. bias: [Cout x 1]
// or undefined.
Var conv1d(const Var& x, const Var& weight, const Var& bias,
           const ConvSpec& spec);
int conv_output_length(int length, const ConvSpec& spec);

// weight: [kernel*Cout x Cin], row index k * Cout + co. Output length is
// (T - 1) * stride - 2 * padding + kernel.
Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias,
                     int kernel, int stride, int padding);

// Average pooling along time with zero padding counted in the mean.
Var avg_pool_cols(const Var& x, int kernel, int stride, int padding);

// Magnitude STFT of a [1 x L] signal without implicit padding:
// frames = 1 + (L - n_fft) / hop, output [n_fft/2 + 1 x frames],
// magnitude = sqrt(re^2 + im^2 + 1e-9).
Var stft_magnitude(const Var& signal, int n_fft, int hop,
                   std::span<const double> window);

}  // namespace ag
}  // namespace phonovc

#endif  // PHONOVC_AUTOGRAD_HPP_
