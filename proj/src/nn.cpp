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

#include "phonovc/nn.hpp"

#include <cmath>

#include "phonovc/error.hpp"

namespace phonovc::nn {
namespace {

Matrix init_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, int fan_in,
                   Init init) {
  switch (init) {
    case Init::kZero:
      return Matrix::Zero(rows, cols);
    case Init::kSmall:
      return rng.normal_matrix(rows, cols, 0.01);
    case Init::kFanIn:
      break;
  }
  return rng.uniform_matrix(rows, cols, 1.0 / std::sqrt(double(fan_in)));
}

}  // namespace

Var ParameterStore::add(const std::string& name, Matrix init) {
  PHONOVC_CHECK(!contains(name), ConfigError, "duplicate parameter '", name,
                "'");
  index_[name] = entries_.size();
  entries_.push_back({name, Var(std::move(init), true)});
  return entries_.back().var;
}

Var ParameterStore::find(const std::string& name) const {
  auto it = index_.find(name);
  PHONOVC_CHECK(it != index_.end(), ConfigError, "unknown parameter '", name,
                "'");
  return entries_[it->second].var;
}

long long ParameterStore::scalar_count() const {
  long long n = 0;
  for (const auto& e : entries_) n += e.var.value().size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.var.zero_grad();
}

Linear Linear::make(ParameterStore& ps, const std::string& name, int in,
                    int out, Init init) {
  Linear l;
  l.w = ps.add(name + ".w", init_matrix(ps.rng(), out, in, in, init));
  l.b = ps.add(name + ".b", Matrix::Zero(out, 1));
  return l;
}

Var Linear::operator()(const Var& x) const {
  return ag::add_column(ag::matmul(w, x), b);
}

Conv Conv::make(ParameterStore& ps, const std::string& name, int in, int out,
                int kernel, int dilation, Init init) {
  return make_strided(ps, name, in, out, kernel, 1,
                      dilation * (kernel - 1) / 2, 1, init)
      .with_dilation(dilation);
}

Conv Conv::make_strided(ParameterStore& ps, const std::string& name, int in,
                        int out, int kernel, int stride, int padding,
                        int period, Init init) {
  Conv c;
  c.w = ps.add(name + ".w",
               init_matrix(ps.rng(), out, kernel * in, kernel * in, init));
  c.b = ps.add(name + ".b", Matrix::Zero(out, 1));
  c.spec = ag::ConvSpec{kernel, stride, 1, padding, period};
  return c;
}

Conv Conv::with_dilation(int dilation) const {
  Conv c = *this;
  c.spec.dilation = dilation;
  return c;
}

Var Conv::operator()(const Var& x) const { return ag::conv1d(x, w, b, spec); }

ConvTranspose ConvTranspose::make_upsample(ParameterStore& ps,
                                           const std::string& name, int in,
                                           int out, int factor, Init init) {
  ConvTranspose c;
  c.kernel = factor + 2 * (factor / 2);
  c.stride = factor;
  c.padding = factor / 2;
  c.w = ps.add(name + ".w",
               init_matrix(ps.rng(), c.kernel * out, in, in, init));
  c.b = ps.add(name + ".b", Matrix::Zero(out, 1));
  return c;
}

Var ConvTranspose::operator()(const Var& x) const {
  return ag::conv_transpose1d(x, w, b, kernel, stride, padding);
}

LayerNorm LayerNorm::make(ParameterStore& ps, const std::string& name,
                          int dim) {
  LayerNorm n;
  n.gamma = ps.add(name + ".gamma", Matrix::Ones(dim, 1));
  n.beta = ps.add(name + ".beta", Matrix::Zero(dim, 1));
  return n;
}

Var LayerNorm::operator()(const Var& x) const {
  return ag::layer_norm(x, gamma, beta);
}

Embedding Embedding::make(ParameterStore& ps, const std::string& name,
                          int vocab, int dim) {
  Embedding e;
  e.table = ps.add(name + ".table",
                   ps.rng().normal_matrix(dim, vocab, 1.0 / std::sqrt(double(dim))));
  return e;
}

Var Embedding::operator()(std::span<const int> ids) const {
  for (size_t i = 0; i < ids.size(); ++i) {
    PHONOVC_CHECK(ids[i] >= 0 && ids[i] < vocab(), ConfigError, "token id ",
                  ids[i], " at position ", i, " outside vocabulary of size ",
                  vocab());
  }
  return ag::gather_cols(table, ids);
}

AttentionBlock AttentionBlock::make(ParameterStore& ps,
                                    const std::string& name, int dim,
                                    int ff_mult) {
  AttentionBlock a;
  a.q = Linear::make(ps, name + ".q", dim, dim);
  a.k = Linear::make(ps, name + ".k", dim, dim);
  a.v = Linear::make(ps, name + ".v", dim, dim);
  a.o = Linear::make(ps, name + ".o", dim, dim);
  a.norm1 = LayerNorm::make(ps, name + ".norm1", dim);
  a.ff1 = Conv::make(ps, name + ".ff1", dim, dim * ff_mult, 3);
  a.ff2 = Conv::make(ps, name + ".ff2", dim * ff_mult, dim, 3);
  a.norm2 = LayerNorm::make(ps, name + ".norm2", dim);
  return a;
}

Var AttentionBlock::operator()(const Var& x) const {
  const double scale = 1.0 / std::sqrt(double(x.rows()));
  Var scores = ag::scale(ag::matmul(ag::transpose(k(x)), q(x)), scale);
  Var attended = o(ag::matmul(v(x), ag::softmax_columns(scores)));
  Var h = norm1(ag::add(x, attended));
  Var ff = ff2(ag::relu(ff1(h)));
  return norm2(ag::add(h, ff));
}

WaveNet WaveNet::make(ParameterStore& ps, const std::string& name, int dim,
                      int kernel, int layers, int cond_dim,
                      int dilation_rate) {
  WaveNet w;
  w.dim = dim;
  int dilation = 1;
  for (int i = 0; i < layers; ++i) {
    const std::string p = name + "." + std::to_string(i);
    w.in_layers.push_back(Conv::make(ps, p + ".in", dim, 2 * dim, kernel, dilation));
    if (cond_dim > 0) {
      w.cond_layers.push_back(Linear::make(ps, p + ".cond", cond_dim, 2 * dim));
    }
    const int out = i + 1 < layers ? 2 * dim : dim;
    w.res_skip.push_back(Conv::make(ps, p + ".res_skip", dim, out, 1));
    dilation *= dilation_rate;
  }
  return w;
}

Var WaveNet::operator()(const Var& x_in, const Var& g) const {
  Var x = x_in;
  Var out;
  const int layers = static_cast<int>(in_layers.size());
  for (int i = 0; i < layers; ++i) {
    Var h = in_layers[i](x);
    if (g.defined() && !cond_layers.empty()) {
      h = ag::add_column(h, cond_layers[i](g));
    }
    Var acts = ag::mul(ag::tanh(ag::slice_rows(h, 0, dim)),
                       ag::sigmoid(ag::slice_rows(h, dim, dim)));
    Var rs = res_skip[i](acts);
    Var skip = rs;
    if (i + 1 < layers) {
      x = ag::add(x, ag::slice_rows(rs, 0, dim));
      skip = ag::slice_rows(rs, dim, dim);
    }
    out = out.defined() ? ag::add(out, skip) : skip;
  }
  return out;
}

}  // namespace phonovc::nn
