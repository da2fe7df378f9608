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

#include "phonovc/ssl_encoder.hpp"

#include <cmath>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

void check_durations(std::span<const int> dur, Eigen::Index frames,
                     const char* op) {
  PHONOVC_CHECK(!dur.empty(), AlignmentError, op, ": no phonemes");
  long total = 0;
  for (size_t i = 0; i < dur.size(); ++i) {
    PHONOVC_CHECK(dur[i] >= 1, AlignmentError, op, ": duration[", i, "] = ",
                  dur[i]);
    total += dur[i];
  }
  PHONOVC_CHECK(total == frames, AlignmentError, op, ": durations sum to ",
                total, " but there are ", frames, " frames");
}

}  // namespace

SslEncoderParams SslEncoderParams::make(nn::ParameterStore& ps,
                                        const ModelConfig& cfg) {
  SslEncoderParams p;
  p.avg_proj = nn::Linear::make(ps, "ssl.avg_proj", cfg.ssl_dim, cfg.hidden);
  p.avg_norm = nn::LayerNorm::make(ps, "ssl.avg_norm", cfg.hidden);
  p.key = nn::Linear::make(ps, "ssl.key", cfg.ssl_dim, cfg.hidden);
  p.value = nn::Linear::make(ps, "ssl.value", cfg.ssl_dim, cfg.hidden);
  p.out = nn::Linear::make(ps, "ssl.out", cfg.hidden, cfg.hidden);
  return p;
}

ag::Var phoneme_avg_pool(const ag::Var& vec, std::span<const int> dur) {
  check_durations(dur, vec.cols(), "phoneme_avg_pool");
  return ag::segment_mean_cols(vec, dur);
}

Matrix phoneme_avg_pool(const Matrix& vec, std::span<const int> dur) {
  return phoneme_avg_pool(ag::constant(vec), dur).value();
}

PhonemeAttention phoneme_attention(const ag::Var& c_text, const ag::Var& vec,
                                   std::span<const int> dur,
                                   const SslEncoderParams& params) {
  check_durations(dur, vec.cols(), "phoneme_attention");
  const Eigen::Index d = static_cast<Eigen::Index>(dur.size());
  PHONOVC_CHECK(c_text.cols() == d, ShapeError, "phoneme_attention: ",
                c_text.cols(), " queries for ", d, " phonemes");
  PHONOVC_CHECK(vec.rows() == params.key.w.cols(), ShapeError,
                "phoneme_attention: SSL dimension ", vec.rows(),
                ", model expects ", params.key.w.cols());
  PHONOVC_CHECK(c_text.rows() == params.key.w.rows(), ShapeError,
                "phoneme_attention: query dimension ", c_text.rows(),
                ", key dimension ", params.key.w.rows());
  const Eigen::Index f = vec.cols();
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> allowed =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(f, d, false);
  Eigen::Index start = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    allowed.block(start, i, dur[i], 1).setConstant(true);
    start += dur[i];
  }
  const double scale = 1.0 / std::sqrt(double(c_text.rows()));
  ag::Var keys = params.key(vec);
  ag::Var values = params.value(vec);
  ag::Var scores = ag::scale(ag::matmul(ag::transpose(keys), c_text), scale);
  ag::Var weights = ag::masked_softmax_columns(scores, allowed);
  PhonemeAttention out;
  out.output = params.out(ag::matmul(values, weights));
  out.weights = weights.value();
  return out;
}

ag::Var fuse_ssl(const ag::Var& c_avg, const ag::Var& c_att, double alpha,
                 double beta) {
  PHONOVC_CHECK(c_avg.rows() == c_att.rows() && c_avg.cols() == c_att.cols(),
                ShapeError, "fuse_ssl: shape mismatch [", c_avg.rows(), "x",
                c_avg.cols(), "] vs [", c_att.rows(), "x", c_att.cols(), "]");
  return ag::add(ag::scale(c_avg, alpha), ag::scale(c_att, beta));
}

SslEncoding encode_ssl(const ag::Var& c_text, const Matrix& contentvec,
                       std::span<const int> pframe,
                       const SslEncoderParams& params, double alpha,
                       double beta) {
  SslEncoding e;
  e.alpha = alpha;
  e.beta = beta;
  ag::Var vec = ag::constant(contentvec);
  e.vec_dur = phoneme_avg_pool(vec, pframe);
  e.c_avg = params.avg_norm(params.avg_proj(e.vec_dur));
  e.c_att = phoneme_attention(c_text, vec, pframe, params).output;
  e.c_ssl = fuse_ssl(e.c_avg, e.c_att, alpha, beta);
  return e;
}

}  // namespace phonovc
