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

// Layers over ag::Var. Activations are [channels x time].

#ifndef PHONOVC_NN_HPP_
#define PHONOVC_NN_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "phonovc/autograd.hpp"
#include "phonovc/random.hpp"

namespace phonovc::nn {

using ag::Var;

// Named trainable tensors in creation order.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Var var;
  };

  explicit ParameterStore(uint64_t seed = 0) : rng_(seed) {}

  // Throws ConfigError on a duplicate name.
  Var add(const std::string& name, Matrix init);
  Var find(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<Entry>& entries() const { return entries_; }
  long long scalar_count() const;
  void zero_grad();
  Rng& rng() { return rng_; }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
  Rng rng_;
};

enum class Init { kFanIn, kZero, kSmall };

struct Linear {
  Var w;  // [out x in]
  Var b;  // [out x 1]

  static Linear make(ParameterStore& ps, const std::string& name, int in,
                     int out, Init init = Init::kFanIn);
  Var operator()(const Var& x) const;
};

struct Conv {
  Var w;  // [out x kernel*in]
  Var b;
  ag::ConvSpec spec;

  // "Same" padding for odd kernels at stride 1.
  static Conv make(ParameterStore& ps, const std::string& name, int in,
                   int out, int kernel, int dilation = 1,
                   Init init = Init::kFanIn);
  static Conv make_strided(ParameterStore& ps, const std::string& name,
                           int in, int out, int kernel, int stride,
                           int padding, int period = 1,
                           Init init = Init::kFanIn);
  Conv with_dilation(int dilation) const;
  Var operator()(const Var& x) const;
};

struct ConvTranspose {
  Var w;  // [kernel*out x in]
  Var b;
  int kernel = 1;
  int stride = 1;
  int padding = 0;

  // Upsampling by `factor`: kernel factor + 2*(factor/2), padding factor/2,
  // so T columns become exactly T*factor.
  static ConvTranspose make_upsample(ParameterStore& ps,
                                     const std::string& name, int in, int out,
                                     int factor, Init init = Init::kSmall);
  Var operator()(const Var& x) const;
};

struct LayerNorm {
  Var gamma;
  Var beta;

  static LayerNorm make(ParameterStore& ps, const std::string& name, int dim);
  Var operator()(const Var& x) const;
};

struct Embedding {
  Var table;  // [dim x vocab]

  static Embedding make(ParameterStore& ps, const std::string& name,
                        int vocab, int dim);
  // Throws ConfigError when an id is outside [0, vocab).
  Var operator()(std::span<const int> ids) const;
  int vocab() const { return static_cast<int>(table.cols()); }
};

// Post-norm transformer block without position encoding: single-head
// self-attention then a kernel-3 convolutional feed-forward.
struct AttentionBlock {
  Linear q, k, v, o;
  LayerNorm norm1;
  Conv ff1, ff2;
  LayerNorm norm2;

  static AttentionBlock make(ParameterStore& ps, const std::string& name,
                             int dim, int ff_mult = 2);
  Var operator()(const Var& x) const;
};

// Non-causal gated WaveNet with global conditioning.
struct WaveNet {
  std::vector<Conv> in_layers;      // dim -> 2*dim
  std::vector<Linear> cond_layers;  // cond_dim -> 2*dim
  std::vector<Conv> res_skip;       // dim -> 2*dim (last layer: dim)
  int dim = 0;

  static WaveNet make(ParameterStore& ps, const std::string& name, int dim,
                      int kernel, int layers, int cond_dim, int dilation_rate = 1);
  // x: [dim x T], g: [cond_dim x 1] or undefined. Returns the skip sum.
  Var operator()(const Var& x, const Var& g) const;
};

}  // namespace phonovc::nn

#endif  // PHONOVC_NN_HPP_
