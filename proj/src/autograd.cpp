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

#include "phonovc/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "phonovc/error.hpp"
#include "phonovc/fft.hpp"

namespace phonovc::ag {
namespace {

thread_local bool g_grad_enabled = true;

using NodePtr = std::shared_ptr<Node>;

bool any_requires_grad(std::initializer_list<const Var*> inputs) {
  for (const Var* v : inputs) {
    if (v->defined() && v->requires_grad()) return true;
  }
  return false;
}

// Builds the result node. The closure receives the result node and pushes
// its gradient into parents (in the order given).
Var make_result(Matrix value, std::initializer_list<const Var*> inputs,
                std::function<void(Node&)> fn) {
  if (!g_grad_enabled || !any_requires_grad(inputs)) {
    return Var(std::move(value));
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  for (const Var* v : inputs) {
    node->parents.push_back(v->defined() ? v->node() : nullptr);
  }
  node->backward_fn = std::move(fn);
  return Var(std::move(node));
}

Var make_result_many(Matrix value, std::span<const Var> inputs,
                     std::function<void(Node&)> fn) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || v.requires_grad();
  if (!g_grad_enabled || !needs) return Var(std::move(value));
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  for (const Var& v : inputs) node->parents.push_back(v.node());
  node->backward_fn = std::move(fn);
  return Var(std::move(node));
}

inline bool wants(const NodePtr& p) { return p && p->requires_grad; }

void check_same_shape(const Var& a, const Var& b, const char* op) {
  PHONOVC_CHECK(a.rows() == b.rows() && a.cols() == b.cols(), ShapeError, op,
                ": shape mismatch [", a.rows(), "x", a.cols(), "] vs [",
                b.rows(), "x", b.cols(), "]");
}

template <typename F>
Var unary(const Var& x, Matrix value, F local_grad) {
  return make_result(std::move(value), {&x}, [local_grad](Node& self) {
    const NodePtr& p = self.parents[0];
    if (wants(p)) p->accumulate(local_grad(self));
  });
}

}  // namespace

void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var::Var(Matrix value, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Matrix Var::grad() const {
  if (node_->has_grad()) return node_->grad;
  return Matrix::Zero(rows(), cols());
}

double Var::item() const {
  PHONOVC_CHECK(rows() == 1 && cols() == 1, ShapeError,
                "item() on non-scalar [", rows(), "x", cols(), "]");
  return node_->value(0, 0);
}

void backward(const Var& root) {
  PHONOVC_CHECK(root.rows() == 1 && root.cols() == 1, ShapeError,
                "backward() needs a scalar root");
  if (!root.requires_grad()) return;
  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent && parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && node->has_grad()) node->backward_fn(*node);
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var constant(Matrix value) { return Var(std::move(value)); }

Var scalar(double value) { return Var(Matrix::Constant(1, 1, value)); }

Var stop_gradient(const Var& x) { return Var(x.value()); }

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return make_result(a.value() + b.value(), {&a, &b}, [](Node& self) {
    for (auto& p : self.parents)
      if (wants(p)) p->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return make_result(a.value() - b.value(), {&a, &b}, [](Node& self) {
    if (wants(self.parents[0])) self.parents[0]->accumulate(self.grad);
    if (wants(self.parents[1])) self.parents[1]->accumulate(-self.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return make_result(a.value().cwiseProduct(b.value()), {&a, &b},
                     [](Node& self) {
                       auto& pa = self.parents[0];
                       auto& pb = self.parents[1];
                       if (wants(pa))
                         pa->accumulate(self.grad.cwiseProduct(pb->value));
                       if (wants(pb))
                         pb->accumulate(self.grad.cwiseProduct(pa->value));
                     });
}

Var scale(const Var& x, double factor) {
  return unary(x, x.value() * factor,
               [factor](Node& self) -> Matrix { return self.grad * factor; });
}

Var add_scalar(const Var& x, double value) {
  return unary(x, x.value().array() + value,
               [](Node& self) -> Matrix { return self.grad; });
}

Var add_column(const Var& x, const Var& column) {
  PHONOVC_CHECK(column.cols() == 1 && column.rows() == x.rows(), ShapeError,
                "add_column: column [", column.rows(), "x", column.cols(),
                "] does not fit [", x.rows(), "x", x.cols(), "]");
  Matrix out = x.value().colwise() + column.value().col(0);
  return make_result(std::move(out), {&x, &column}, [](Node& self) {
    if (wants(self.parents[0])) self.parents[0]->accumulate(self.grad);
    if (wants(self.parents[1]))
      self.parents[1]->accumulate(self.grad.rowwise().sum());
  });
}

Var mul_column(const Var& x, const Var& column) {
  PHONOVC_CHECK(column.cols() == 1 && column.rows() == x.rows(), ShapeError,
                "mul_column: column does not fit");
  Matrix out = x.value().array().colwise() * column.value().col(0).array();
  return make_result(std::move(out), {&x, &column}, [](Node& self) {
    auto& px = self.parents[0];
    auto& pc = self.parents[1];
    if (wants(px))
      px->accumulate(self.grad.array().colwise() * pc->value.col(0).array());
    if (wants(pc))
      pc->accumulate(self.grad.cwiseProduct(px->value).rowwise().sum());
  });
}

Var matmul(const Var& a, const Var& b) {
  PHONOVC_CHECK(a.cols() == b.rows(), ShapeError, "matmul: [", a.rows(), "x",
                a.cols(), "] * [", b.rows(), "x", b.cols(), "]");
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return make_result(std::move(out), {&a, &b}, [](Node& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (wants(pa)) {
      Matrix g(pa->value.rows(), pa->value.cols());
      g.noalias() = self.grad * pb->value.transpose();
      pa->accumulate(g);
    }
    if (wants(pb)) {
      Matrix g(pb->value.rows(), pb->value.cols());
      g.noalias() = pa->value.transpose() * self.grad;
      pb->accumulate(g);
    }
  });
}

Var transpose(const Var& x) {
  return unary(x, x.value().transpose(),
               [](Node& self) -> Matrix { return self.grad.transpose(); });
}

Var relu(const Var& x) {
  return unary(x, x.value().cwiseMax(0.0), [](Node& self) -> Matrix {
    return (self.parents[0]->value.array() > 0.0)
        .select(self.grad, Matrix::Zero(self.grad.rows(), self.grad.cols()));
  });
}

Var leaky_relu(const Var& x, double slope) {
  Matrix out = (x.value().array() > 0.0)
                   .select(x.value(), x.value() * slope);
  return unary(x, std::move(out), [slope](Node& self) -> Matrix {
    return (self.parents[0]->value.array() > 0.0)
        .select(self.grad, self.grad * slope);
  });
}

Var tanh(const Var& x) {
  Matrix out = x.value().array().tanh();
  return unary(x, std::move(out), [](Node& self) -> Matrix {
    return self.grad.array() * (1.0 - self.value.array().square());
  });
}

Var sigmoid(const Var& x) {
  Matrix out = (1.0 + (-x.value().array()).exp()).inverse();
  return unary(x, std::move(out), [](Node& self) -> Matrix {
    return self.grad.array() * self.value.array() * (1.0 - self.value.array());
  });
}

Var exp(const Var& x) {
  Matrix out = x.value().array().exp();
  return unary(x, std::move(out), [](Node& self) -> Matrix {
    return self.grad.cwiseProduct(self.value);
  });
}

Var log_clamped(const Var& x, double floor) {
  Matrix out = x.value().cwiseMax(floor).array().log();
  return unary(x, std::move(out), [floor](Node& self) -> Matrix {
    const Matrix& in = self.parents[0]->value;
    return (in.array() >= floor)
        .select(self.grad.array() / in.array(),
                Eigen::ArrayXXd::Zero(in.rows(), in.cols()));
  });
}

Var square(const Var& x) {
  return unary(x, x.value().array().square(), [](Node& self) -> Matrix {
    return 2.0 * self.grad.cwiseProduct(self.parents[0]->value);
  });
}

Var abs(const Var& x) {
  return unary(x, x.value().cwiseAbs(), [](Node& self) -> Matrix {
    return self.grad.array() * self.parents[0]->value.array().sign();
  });
}

Var clamp(const Var& x, double lo, double hi) {
  Matrix out = x.value().cwiseMax(lo).cwiseMin(hi);
  return unary(x, std::move(out), [lo, hi](Node& self) -> Matrix {
    const auto in = self.parents[0]->value.array();
    return ((in >= lo) && (in <= hi))
        .select(self.grad, Matrix::Zero(self.grad.rows(), self.grad.cols()));
  });
}

Var sum(const Var& x) {
  return unary(x, Matrix::Constant(1, 1, x.value().sum()),
               [](Node& self) -> Matrix {
                 const Matrix& in = self.parents[0]->value;
                 return Matrix::Constant(in.rows(), in.cols(), self.grad(0, 0));
               });
}

Var mean(const Var& x) {
  const double n = static_cast<double>(x.value().size());
  PHONOVC_CHECK(n > 0, ShapeError, "mean of an empty matrix");
  return unary(x, Matrix::Constant(1, 1, x.value().sum() / n),
               [n](Node& self) -> Matrix {
                 const Matrix& in = self.parents[0]->value;
                 return Matrix::Constant(in.rows(), in.cols(),
                                         self.grad(0, 0) / n);
               });
}

Var l1_loss(const Var& a, const Var& b) { return mean(abs(sub(a, b))); }

Var mse_loss(const Var& a, const Var& b) { return mean(square(sub(a, b))); }

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  PHONOVC_CHECK(gamma.rows() == rows && beta.rows() == rows &&
                    gamma.cols() == 1 && beta.cols() == 1,
                ShapeError, "layer_norm: gamma/beta must be [", rows, "x1]");
  auto normalized = std::make_shared<Matrix>(rows, cols);
  auto inv_std = std::make_shared<Vector>(cols);
  const Matrix& in = x.value();
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double mu = in.col(c).mean();
    const double var = (in.col(c).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)(c) = is;
    normalized->col(c) = (in.col(c).array() - mu) * is;
  }
  Matrix out = (normalized->array().colwise() * gamma.value().col(0).array())
                   .colwise() +
               beta.value().col(0).array();
  return make_result(
      std::move(out), {&x, &gamma, &beta},
      [normalized, inv_std](Node& self) {
        auto& px = self.parents[0];
        auto& pg = self.parents[1];
        auto& pb = self.parents[2];
        const Matrix& g = self.grad;
        if (wants(pg))
          pg->accumulate(g.cwiseProduct(*normalized).rowwise().sum());
        if (wants(pb)) pb->accumulate(g.rowwise().sum());
        if (wants(px)) {
          const double n = static_cast<double>(g.rows());
          Matrix dxhat = g.array().colwise() * pg->value.col(0).array();
          Matrix dx(g.rows(), g.cols());
          for (Eigen::Index c = 0; c < g.cols(); ++c) {
            const double s1 = dxhat.col(c).sum();
            const double s2 = dxhat.col(c).dot(normalized->col(c));
            dx.col(c) = ((*inv_std)(c) / n) *
                        (n * dxhat.col(c).array() - s1 -
                         normalized->col(c).array() * s2);
          }
          px->accumulate(dx);
        }
      });
}

namespace {

Var softmax_impl(const Var& x,
                 const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* allowed) {
  const Matrix& in = x.value();
  Matrix out = Matrix::Zero(in.rows(), in.cols());
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    double max_v = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      if (!allowed || (*allowed)(r, c)) max_v = std::max(max_v, in(r, c));
    }
    PHONOVC_CHECK(std::isfinite(max_v), ShapeError,
                  "softmax: column ", c, " has no admissible entry");
    double total = 0.0;
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      if (!allowed || (*allowed)(r, c)) {
        out(r, c) = std::exp(in(r, c) - max_v);
        total += out(r, c);
      }
    }
    out.col(c) /= total;
  }
  return unary(x, std::move(out), [](Node& self) -> Matrix {
    const Matrix& y = self.value;
    Matrix gy = self.grad.cwiseProduct(y);
    Eigen::RowVectorXd dots = gy.colwise().sum();
    return gy - (y.array().rowwise() * dots.array()).matrix();
  });
}

}  // namespace

Var softmax_columns(const Var& x) { return softmax_impl(x, nullptr); }

Var masked_softmax_columns(
    const Var& x,
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& allowed) {
  PHONOVC_CHECK(allowed.rows() == x.rows() && allowed.cols() == x.cols(),
                ShapeError, "masked_softmax_columns: mask shape mismatch");
  return softmax_impl(x, &allowed);
}

Var slice_rows(const Var& x, Eigen::Index start, Eigen::Index count) {
  PHONOVC_CHECK(start >= 0 && count >= 0 && start + count <= x.rows(),
                ShapeError, "slice_rows out of range");
  return unary(x, x.value().middleRows(start, count),
               [start, count](Node& self) -> Matrix {
                 const Matrix& in = self.parents[0]->value;
                 Matrix g = Matrix::Zero(in.rows(), in.cols());
                 g.middleRows(start, count) = self.grad;
                 return g;
               });
}

Var slice_cols(const Var& x, Eigen::Index start, Eigen::Index count) {
  PHONOVC_CHECK(start >= 0 && count >= 0 && start + count <= x.cols(),
                ShapeError, "slice_cols [", start, ", ", start + count,
                ") out of range for ", x.cols(), " columns");
  return unary(x, x.value().middleCols(start, count),
               [start, count](Node& self) -> Matrix {
                 const Matrix& in = self.parents[0]->value;
                 Matrix g = Matrix::Zero(in.rows(), in.cols());
                 g.middleCols(start, count) = self.grad;
                 return g;
               });
}

Var concat_rows(std::span<const Var> parts) {
  PHONOVC_CHECK(!parts.empty(), ShapeError, "concat_rows of nothing");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].cols();
  for (const Var& p : parts) {
    PHONOVC_CHECK(p.cols() == cols, ShapeError, "concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return make_result_many(std::move(out), parts, [](Node& self) {
    Eigen::Index off = 0;
    for (auto& p : self.parents) {
      const Eigen::Index r = p->value.rows();
      if (wants(p)) p->accumulate(self.grad.middleRows(off, r));
      off += r;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  PHONOVC_CHECK(!parts.empty(), ShapeError, "concat_cols of nothing");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts[0].rows();
  for (const Var& p : parts) {
    PHONOVC_CHECK(p.rows() == rows, ShapeError, "concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return make_result_many(std::move(out), parts, [](Node& self) {
    Eigen::Index off = 0;
    for (auto& p : self.parents) {
      const Eigen::Index c = p->value.cols();
      if (wants(p)) p->accumulate(self.grad.middleCols(off, c));
      off += c;
    }
  });
}

Var repeat_cols(const Var& x, std::span<const int> counts) {
  PHONOVC_CHECK(static_cast<Eigen::Index>(counts.size()) == x.cols(),
                ShapeError, "repeat_cols: ", counts.size(), " counts for ",
                x.cols(), " columns");
  Eigen::Index total = 0;
  for (int c : counts) {
    PHONOVC_CHECK(c >= 1, ShapeError, "repeat_cols: count ", c, " < 1");
    total += c;
  }
  std::vector<int> reps(counts.begin(), counts.end());
  Matrix out(x.rows(), total);
  Eigen::Index pos = 0;
  for (size_t i = 0; i < reps.size(); ++i) {
    for (int r = 0; r < reps[i]; ++r) out.col(pos++) = x.value().col(i);
  }
  return unary(x, std::move(out), [reps](Node& self) -> Matrix {
    Matrix g(self.grad.rows(), static_cast<Eigen::Index>(reps.size()));
    Eigen::Index p = 0;
    for (size_t i = 0; i < reps.size(); ++i) {
      g.col(i) = self.grad.middleCols(p, reps[i]).rowwise().sum();
      p += reps[i];
    }
    return g;
  });
}

Var segment_mean_cols(const Var& x, std::span<const int> counts) {
  Eigen::Index total = 0;
  for (int c : counts) {
    PHONOVC_CHECK(c >= 1, ShapeError, "segment_mean_cols: count ", c, " < 1");
    total += c;
  }
  PHONOVC_CHECK(total == x.cols(), ShapeError,
                "segment_mean_cols: counts sum to ", total, " but input has ",
                x.cols(), " columns");
  std::vector<int> reps(counts.begin(), counts.end());
  Matrix out(x.rows(), static_cast<Eigen::Index>(reps.size()));
  Eigen::Index pos = 0;
  for (size_t i = 0; i < reps.size(); ++i) {
    out.col(i) = x.value().middleCols(pos, reps[i]).rowwise().sum() /
                 static_cast<double>(reps[i]);
    pos += reps[i];
  }
  return unary(x, std::move(out), [reps, total](Node& self) -> Matrix {
    Matrix g(self.grad.rows(), total);
    Eigen::Index p = 0;
    for (size_t i = 0; i < reps.size(); ++i) {
      const Vector share = self.grad.col(i) / static_cast<double>(reps[i]);
      for (int r = 0; r < reps[i]; ++r) g.col(p++) = share;
    }
    return g;
  });
}

Var gather_cols(const Var& table, std::span<const int> ids) {
  std::vector<int> idx(ids.begin(), ids.end());
  Matrix out(table.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) {
    PHONOVC_CHECK(idx[j] >= 0 && idx[j] < table.cols(), ShapeError,
                  "gather_cols: id ", idx[j], " outside [0, ", table.cols(),
                  ")");
    out.col(j) = table.value().col(idx[j]);
  }
  return unary(table, std::move(out), [idx](Node& self) -> Matrix {
    const Matrix& t = self.parents[0]->value;
    Matrix g = Matrix::Zero(t.rows(), t.cols());
    for (size_t j = 0; j < idx.size(); ++j) g.col(idx[j]) += self.grad.col(j);
    return g;
  });
}

Var pad_reflect_cols(const Var& x, int left, int right) {
  const Eigen::Index n = x.cols();
  PHONOVC_CHECK(left >= 0 && right >= 0 && left < n && right < n, ShapeError,
                "pad_reflect_cols: padding (", left, ", ", right,
                ") needs more than ", n, " columns");
  std::vector<Eigen::Index> source(n + left + right);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(source.size()); ++j) {
    Eigen::Index s = j - left;
    if (s < 0) s = -s;
    if (s >= n) s = 2 * (n - 1) - s;
    source[j] = s;
  }
  Matrix out(x.rows(), static_cast<Eigen::Index>(source.size()));
  for (size_t j = 0; j < source.size(); ++j) out.col(j) = x.value().col(source[j]);
  return unary(x, std::move(out), [source](Node& self) -> Matrix {
    const Matrix& in = self.parents[0]->value;
    Matrix g = Matrix::Zero(in.rows(), in.cols());
    for (size_t j = 0; j < source.size(); ++j) g.col(source[j]) += self.grad.col(j);
    return g;
  });
}

int conv_output_length(int length, const ConvSpec& spec) {
  const int span = spec.dilation * (spec.kernel - 1) + 1;
  const int padded = length + 2 * spec.padding;
  if (padded < span) return 0;
  return (padded - span) / spec.stride + 1;
}

namespace {

// cols[(k * Cin + ci), to * period + ph] = x[ci, (to*stride - pad + k*dil) *
// period + ph], zero outside the input.
Matrix im2col(const Matrix& x, const ConvSpec& s, int t_in, int t_out) {
  const Eigen::Index cin = x.rows();
  Matrix cols = Matrix::Zero(cin * s.kernel,
                             static_cast<Eigen::Index>(t_out) * s.period);
  for (int to = 0; to < t_out; ++to) {
    for (int k = 0; k < s.kernel; ++k) {
      const int ti = to * s.stride - s.padding + k * s.dilation;
      if (ti < 0 || ti >= t_in) continue;
      for (int ph = 0; ph < s.period; ++ph) {
        cols.block(k * cin, to * s.period + ph, cin, 1) =
            x.col(static_cast<Eigen::Index>(ti) * s.period + ph);
      }
    }
  }
  return cols;
}

void col2im_add(const Matrix& cols, const ConvSpec& s, int t_in, int t_out,
                Matrix& dx) {
  const Eigen::Index cin = dx.rows();
  for (int to = 0; to < t_out; ++to) {
    for (int k = 0; k < s.kernel; ++k) {
      const int ti = to * s.stride - s.padding + k * s.dilation;
      if (ti < 0 || ti >= t_in) continue;
      for (int ph = 0; ph < s.period; ++ph) {
        dx.col(static_cast<Eigen::Index>(ti) * s.period + ph) +=
            cols.block(k * cin, to * s.period + ph, cin, 1);
      }
    }
  }
}

}  // namespace

Var conv1d(const Var& x, const Var& weight, const Var& bias,
           const ConvSpec& spec) {
  PHONOVC_CHECK(spec.kernel >= 1 && spec.stride >= 1 && spec.dilation >= 1 &&
                    spec.padding >= 0 && spec.period >= 1,
                ShapeError, "conv1d: invalid spec");
  PHONOVC_CHECK(x.cols() % spec.period == 0, ShapeError,
                "conv1d: ", x.cols(), " columns not divisible by period ",
                spec.period);
  PHONOVC_CHECK(weight.cols() == spec.kernel * x.rows(), ShapeError,
                "conv1d: weight has ", weight.cols(), " columns, expected ",
                spec.kernel, "*", x.rows());
  const Eigen::Index cout = weight.rows();
  PHONOVC_CHECK(!bias.defined() || (bias.rows() == cout && bias.cols() == 1),
                ShapeError, "conv1d: bias shape mismatch");
  const int t_in = static_cast<int>(x.cols() / spec.period);
  const int t_out = conv_output_length(t_in, spec);
  PHONOVC_CHECK(t_out >= 1, ShapeError, "conv1d: input of length ", t_in,
                " too short for kernel ", spec.kernel, " dilation ",
                spec.dilation);
  auto cols = std::make_shared<Matrix>(im2col(x.value(), spec, t_in, t_out));
  Matrix out(cout, cols->cols());
  out.noalias() = weight.value() * (*cols);
  if (bias.defined()) out.colwise() += bias.value().col(0);
  ConvSpec s = spec;
  return make_result(
      std::move(out), {&x, &weight, &bias},
      [cols, s, t_in, t_out](Node& self) {
        auto& px = self.parents[0];
        auto& pw = self.parents[1];
        auto& pb = self.parents[2];
        const Matrix& g = self.grad;
        if (wants(pw)) {
          Matrix gw(pw->value.rows(), pw->value.cols());
          gw.noalias() = g * cols->transpose();
          pw->accumulate(gw);
        }
        if (wants(pb)) pb->accumulate(g.rowwise().sum());
        if (wants(px)) {
          Matrix gcols(cols->rows(), cols->cols());
          gcols.noalias() = pw->value.transpose() * g;
          Matrix dx = Matrix::Zero(px->value.rows(), px->value.cols());
          col2im_add(gcols, s, t_in, t_out, dx);
          px->accumulate(dx);
        }
      });
}

Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias,
                     int kernel, int stride, int padding) {
  PHONOVC_CHECK(kernel >= 1 && stride >= 1 && padding >= 0, ShapeError,
                "conv_transpose1d: invalid spec");
  PHONOVC_CHECK(weight.cols() == x.rows() && weight.rows() % kernel == 0,
                ShapeError, "conv_transpose1d: weight [", weight.rows(), "x",
                weight.cols(), "] does not fit input with ", x.rows(),
                " channels");
  const Eigen::Index cout = weight.rows() / kernel;
  const int t_in = static_cast<int>(x.cols());
  const int t_out = (t_in - 1) * stride - 2 * padding + kernel;
  PHONOVC_CHECK(t_out >= 1, ShapeError, "conv_transpose1d: empty output");
  Matrix z(weight.rows(), t_in);
  z.noalias() = weight.value() * x.value();
  Matrix out = Matrix::Zero(cout, t_out);
  for (int t = 0; t < t_in; ++t) {
    for (int k = 0; k < kernel; ++k) {
      const int to = t * stride - padding + k;
      if (to < 0 || to >= t_out) continue;
      out.col(to) += z.block(k * cout, t, cout, 1);
    }
  }
  if (bias.defined()) out.colwise() += bias.value().col(0);
  return make_result(
      std::move(out), {&x, &weight, &bias},
      [kernel, stride, padding, cout, t_in, t_out](Node& self) {
        auto& px = self.parents[0];
        auto& pw = self.parents[1];
        auto& pb = self.parents[2];
        const Matrix& g = self.grad;
        if (wants(pb)) pb->accumulate(g.rowwise().sum());
        if (!wants(px) && !wants(pw)) return;
        Matrix gz = Matrix::Zero(kernel * cout, t_in);
        for (int t = 0; t < t_in; ++t) {
          for (int k = 0; k < kernel; ++k) {
            const int to = t * stride - padding + k;
            if (to < 0 || to >= t_out) continue;
            gz.block(k * cout, t, cout, 1) = g.col(to);
          }
        }
        if (wants(pw)) {
          Matrix gw(pw->value.rows(), pw->value.cols());
          gw.noalias() = gz * px->value.transpose();
          pw->accumulate(gw);
        }
        if (wants(px)) {
          Matrix gx(px->value.rows(), px->value.cols());
          gx.noalias() = pw->value.transpose() * gz;
          px->accumulate(gx);
        }
      });
}

Var avg_pool_cols(const Var& x, int kernel, int stride, int padding) {
  const int t_in = static_cast<int>(x.cols());
  const int t_out = (t_in + 2 * padding - kernel) / stride + 1;
  PHONOVC_CHECK(t_out >= 1, ShapeError, "avg_pool_cols: input too short");
  Matrix out = Matrix::Zero(x.rows(), t_out);
  const double inv = 1.0 / kernel;
  for (int to = 0; to < t_out; ++to) {
    for (int k = 0; k < kernel; ++k) {
      const int ti = to * stride - padding + k;
      if (ti >= 0 && ti < t_in) out.col(to) += x.value().col(ti) * inv;
    }
  }
  return unary(x, std::move(out),
               [kernel, stride, padding, t_in, t_out, inv](Node& self) -> Matrix {
                 Matrix g = Matrix::Zero(self.grad.rows(), t_in);
                 for (int to = 0; to < t_out; ++to) {
                   for (int k = 0; k < kernel; ++k) {
                     const int ti = to * stride - padding + k;
                     if (ti >= 0 && ti < t_in) g.col(ti) += self.grad.col(to) * inv;
                   }
                 }
                 return g;
               });
}

Var stft_magnitude(const Var& signal, int n_fft, int hop,
                   std::span<const double> window) {
  PHONOVC_CHECK(signal.rows() == 1, ShapeError,
                "stft_magnitude expects a [1 x L] signal");
  PHONOVC_CHECK(static_cast<int>(window.size()) == n_fft, ShapeError,
                "stft_magnitude: window length ", window.size(), " != n_fft ",
                n_fft);
  const int length = static_cast<int>(signal.cols());
  PHONOVC_CHECK(length >= n_fft && hop >= 1, ShapeError,
                "stft_magnitude: signal of ", length,
                " samples shorter than n_fft ", n_fft);
  const int frames = 1 + (length - n_fft) / hop;
  const int bins = n_fft / 2 + 1;
  std::vector<double> win(window.begin(), window.end());
  auto spectra = std::make_shared<std::vector<std::complex<double>>>(
      static_cast<size_t>(frames) * bins);
  Matrix out(bins, frames);
  std::vector<double> buf(n_fft);
  const double* x = signal.value().data();
  for (int t = 0; t < frames; ++t) {
    for (int n = 0; n < n_fft; ++n) buf[n] = win[n] * x[t * hop + n];
    std::span<std::complex<double>> spec(spectra->data() + size_t(t) * bins,
                                         bins);
    fft::forward_real(buf, spec);
    for (int k = 0; k < bins; ++k) out(k, t) = std::sqrt(std::norm(spec[k]) + 1e-9);
  }
  return unary(
      signal, std::move(out),
      [spectra, win, n_fft, hop, frames, bins, length](Node& self) -> Matrix {
        Matrix g = Matrix::Zero(1, length);
        std::vector<std::complex<double>> a(n_fft), u(n_fft);
        for (int t = 0; t < frames; ++t) {
          std::fill(a.begin(), a.end(), std::complex<double>(0.0, 0.0));
          for (int k = 0; k < bins; ++k) {
            const std::complex<double> s = (*spectra)[size_t(t) * bins + k];
            a[k] = s * (self.grad(k, t) / self.value(k, t));
          }
          fft::backward_complex(a, u);
          for (int n = 0; n < n_fft; ++n) g(0, t * hop + n) += win[n] * u[n].real();
        }
        return g;
      });
}

}  // namespace phonovc::ag
