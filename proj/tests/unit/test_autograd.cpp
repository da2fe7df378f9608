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

#include <gtest/gtest.h>

#include <vector>

#include "gradcheck.hpp"
#include "phonovc/autograd.hpp"
#include "phonovc/dsp.hpp"
#include "phonovc/error.hpp"
#include "phonovc/random.hpp"

namespace phonovc {
namespace {

using ag::Var;
using Vars = std::vector<Var>;
using testing::max_grad_error;

constexpr double kTol = 1e-6;

Matrix rand(Eigen::Index r, Eigen::Index c, uint64_t seed) {
  Rng rng(seed);
  return rng.normal_matrix(r, c);
}

// Contracts an arbitrary output with fixed random weights.
Var project(const Var& y, uint64_t seed = 99) {
  return ag::sum(ag::mul(y, ag::constant(rand(y.rows(), y.cols(), seed))));
}

TEST(Autograd, ElementwiseBinary) {
  auto a = rand(3, 4, 1), b = rand(3, 4, 2);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) { return project(ag::add(v[0], v[1])); }), kTol);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) { return project(ag::sub(v[0], v[1])); }), kTol);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) { return project(ag::mul(v[0], v[1])); }), kTol);
}

TEST(Autograd, ScalarAndColumnBroadcast) {
  auto x = rand(3, 5, 3), c = rand(3, 1, 4);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::scale(v[0], -1.7)); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::add_scalar(v[0], 0.3)); }), kTol);
  EXPECT_LT(max_grad_error({x, c}, [](const Vars& v) { return project(ag::add_column(v[0], v[1])); }), kTol);
  EXPECT_LT(max_grad_error({x, c}, [](const Vars& v) { return project(ag::mul_column(v[0], v[1])); }), kTol);
}

TEST(Autograd, MatmulTranspose) {
  auto a = rand(3, 4, 5), b = rand(4, 2, 6);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) { return project(ag::matmul(v[0], v[1])); }), kTol);
  EXPECT_LT(max_grad_error({a}, [](const Vars& v) { return project(ag::transpose(v[0])); }), kTol);
}

TEST(Autograd, Nonlinearities) {
  // Keep values away from kinks.
  Matrix x = rand(4, 4, 7);
  x = (x.array().abs() + 0.1).matrix().cwiseProduct(rand(4, 4, 8).cwiseSign());
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::relu(v[0])); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::leaky_relu(v[0], 0.1)); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::tanh(v[0])); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::sigmoid(v[0])); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::exp(v[0])); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::square(v[0])); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::abs(v[0])); }), kTol);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::clamp(v[0], -0.95, 0.95)); }), kTol);
  Matrix pos = x.array().abs() + 0.2;
  EXPECT_LT(max_grad_error({pos}, [](const Vars& v) { return project(ag::log_clamped(v[0], 1e-5)); }), kTol);
}

TEST(Autograd, Reductions) {
  auto a = rand(3, 4, 9), b = rand(3, 4, 10);
  EXPECT_LT(max_grad_error({a}, [](const Vars& v) { return ag::sum(v[0]); }), kTol);
  EXPECT_LT(max_grad_error({a}, [](const Vars& v) { return ag::mean(v[0]); }), kTol);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) { return ag::l1_loss(v[0], v[1]); }), kTol);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) { return ag::mse_loss(v[0], v[1]); }), kTol);
}

TEST(Autograd, LayerNorm) {
  auto x = rand(5, 3, 11), g = rand(5, 1, 12), b = rand(5, 1, 13);
  EXPECT_LT(max_grad_error({x, g, b}, [](const Vars& v) {
              return project(ag::layer_norm(v[0], v[1], v[2]));
            }),
            1e-5);
}

TEST(Autograd, LayerNormNormalizesColumns) {
  Var y = ag::layer_norm(ag::constant(rand(6, 4, 14)), ag::constant(Matrix::Ones(6, 1)),
                         ag::constant(Matrix::Zero(6, 1)));
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(y.value().col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR((y.value().col(j).array().square()).mean(), 1.0, 1e-4);
  }
}

TEST(Autograd, Softmax) {
  auto x = rand(4, 3, 15);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::softmax_columns(v[0])); }), kTol);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(4, 3);
  mask << true, false, true, true, true, false, false, true, true, true, false, true;
  EXPECT_LT(max_grad_error({x}, [&mask](const Vars& v) {
              return project(ag::masked_softmax_columns(v[0], mask));
            }),
            kTol);
  Var s = ag::masked_softmax_columns(ag::constant(x), mask);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(s.value().col(j).sum(), 1.0, 1e-12);
    for (int i = 0; i < 4; ++i) {
      if (!mask(i, j)) {
        EXPECT_EQ(s.value()(i, j), 0.0);
      }
    }
  }
}

TEST(Autograd, SliceConcat) {
  auto a = rand(4, 5, 16), b = rand(4, 2, 17), c = rand(3, 5, 18);
  EXPECT_LT(max_grad_error({a}, [](const Vars& v) { return project(ag::slice_rows(v[0], 1, 2)); }), kTol);
  EXPECT_LT(max_grad_error({a}, [](const Vars& v) { return project(ag::slice_cols(v[0], 2, 3)); }), kTol);
  EXPECT_LT(max_grad_error({a, b}, [](const Vars& v) {
              return project(ag::concat_cols(std::span<const Var>(v.data(), 2)));
            }),
            kTol);
  EXPECT_LT(max_grad_error({a, c}, [](const Vars& v) {
              return project(ag::concat_rows(std::span<const Var>(v.data(), 2)));
            }),
            kTol);
}

TEST(Autograd, RepeatSegmentGather) {
  auto x = rand(3, 3, 19);
  const std::vector<int> counts = {2, 1, 3};
  EXPECT_LT(max_grad_error({x}, [&](const Vars& v) { return project(ag::repeat_cols(v[0], counts)); }), kTol);
  auto f = rand(3, 6, 20);
  EXPECT_LT(max_grad_error({f}, [&](const Vars& v) { return project(ag::segment_mean_cols(v[0], counts)); }), kTol);
  const std::vector<int> ids = {2, 0, 2, 1};
  EXPECT_LT(max_grad_error({x}, [&](const Vars& v) { return project(ag::gather_cols(v[0], ids)); }), kTol);
  EXPECT_LT(max_grad_error({f}, [](const Vars& v) { return project(ag::pad_reflect_cols(v[0], 2, 3)); }), kTol);
}

TEST(Autograd, PadReflectValues) {
  Matrix x(1, 4);
  x << 1, 2, 3, 4;
  Var y = ag::pad_reflect_cols(ag::constant(x), 2, 2);
  Matrix expected(1, 8);
  expected << 3, 2, 1, 2, 3, 4, 3, 2;
  EXPECT_EQ(y.value(), expected);
}

TEST(Autograd, Conv1dVariants) {
  auto x = rand(3, 12, 21), b = rand(4, 1, 23);
  for (ag::ConvSpec spec : {ag::ConvSpec{3, 1, 1, 1, 1}, ag::ConvSpec{5, 2, 1, 2, 1},
                            ag::ConvSpec{3, 1, 2, 2, 1}, ag::ConvSpec{3, 2, 1, 1, 3}}) {
    auto w = rand(4, spec.kernel * 3, 22);
    EXPECT_LT(max_grad_error({x, w, b}, [&](const Vars& v) {
                return project(ag::conv1d(v[0], v[1], v[2], spec));
              }),
              kTol)
        << "kernel " << spec.kernel << " stride " << spec.stride;
  }
}

TEST(Autograd, Conv1dMatchesDirectSum) {
  Matrix x = rand(2, 7, 24), w = rand(3, 3 * 2, 25), b = rand(3, 1, 26);
  ag::ConvSpec spec{3, 2, 1, 1, 1};
  Matrix y = ag::conv1d(ag::constant(x), ag::constant(w), ag::constant(b), spec).value();
  ASSERT_EQ(y.cols(), ag::conv_output_length(7, spec));
  for (int o = 0; o < 3; ++o) {
    for (int t = 0; t < y.cols(); ++t) {
      double acc = b(o, 0);
      for (int k = 0; k < 3; ++k) {
        const int ti = t * 2 - 1 + k;
        if (ti < 0 || ti >= 7) continue;
        for (int c = 0; c < 2; ++c) acc += w(o, k * 2 + c) * x(c, ti);
      }
      EXPECT_NEAR(y(o, t), acc, 1e-12);
    }
  }
}

TEST(Autograd, ConvTranspose) {
  auto x = rand(3, 5, 27), w = rand(4 * 2, 3, 28), b = rand(2, 1, 29);
  EXPECT_LT(max_grad_error({x, w, b}, [](const Vars& v) {
              return project(ag::conv_transpose1d(v[0], v[1], v[2], 4, 2, 1));
            }),
            kTol);
  Var y = ag::conv_transpose1d(ag::constant(x), ag::constant(w), ag::constant(b), 4, 2, 1);
  EXPECT_EQ(y.cols(), (5 - 1) * 2 - 2 + 4);
}

TEST(Autograd, AvgPool) {
  auto x = rand(2, 9, 30);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) { return project(ag::avg_pool_cols(v[0], 4, 2, 2)); }), kTol);
}

TEST(Autograd, StftMagnitude) {
  auto sig = rand(1, 40, 31);
  const auto win = hann_window(16);
  EXPECT_LT(max_grad_error({sig}, [&](const Vars& v) {
              return project(ag::stft_magnitude(v[0], 16, 8, win));
            }),
            1e-5);
}

TEST(Autograd, LogMelPipeline) {
  DspConfig cfg;
  cfg.sample_rate = 8000;
  cfg.n_fft = 32;
  cfg.hop_length = 8;
  cfg.n_mels = 6;
  auto sig = rand(1, 64, 32);
  EXPECT_LT(max_grad_error({sig}, [&](const Vars& v) {
              return project(log_mel_from_linear(linear_spectrogram(v[0], cfg), cfg));
            }),
            1e-4);
}

TEST(Autograd, SharedSubgraphAccumulates) {
  auto x = rand(2, 2, 33);
  EXPECT_LT(max_grad_error({x}, [](const Vars& v) {
              Var h = ag::tanh(v[0]);
              return project(ag::add(ag::mul(h, h), h));
            }),
            kTol);
}

TEST(Autograd, NoGradGuardSkipsGraph) {
  Var x(rand(2, 2, 34), true);
  {
    ag::NoGradGuard guard;
    Var y = ag::tanh(x);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(ag::tanh(x).requires_grad());
}

TEST(Autograd, StopGradientBlocksFlow) {
  Var x(rand(2, 2, 35), true);
  ag::backward(ag::sum(ag::add(ag::stop_gradient(x), ag::scale(x, 2.0))));
  EXPECT_TRUE(x.grad().isApprox(Matrix::Constant(2, 2, 2.0)));
}

TEST(Autograd, ShapeErrors) {
  Var a(Matrix::Zero(2, 3)), b(Matrix::Zero(3, 2));
  EXPECT_THROW(ag::add(a, b), ShapeError);
  EXPECT_THROW(ag::matmul(a, a), ShapeError);
  EXPECT_THROW(ag::backward(a), ShapeError);
}

}  // namespace
}  // namespace phonovc
