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

#ifndef PHONOVC_SSL_ENCODER_HPP_
#define PHONOVC_SSL_ENCODER_HPP_

#include <span>

#include "phonovc/model_config.hpp"
#include "phonovc/nn.hpp"

namespace phonovc {

struct SslEncoding {
  ag::Var vec_dur;  // [n x d]
  ag::Var c_avg;    // [H x d]
  ag::Var c_att;    // [H x d]
  ag::Var c_ssl;    // [H x d]
  double alpha = 1.0;
  double beta = 0.5;
};

struct SslEncoderParams {
  nn::Linear avg_proj;  // n -> H
  nn::LayerNorm avg_norm;
  nn::Linear key;    // n -> H
  nn::Linear value;  // n -> H
  nn::Linear out;    // H -> H

  static SslEncoderParams make(nn::ParameterStore& ps, const ModelConfig& cfg);
};

// Column i is the mean of the frames of phoneme i. Throws AlignmentError
// if a duration is below 1 or the durations do not sum to vec.cols().
ag::Var phoneme_avg_pool(const ag::Var& vec, std::span<const int> dur);
Matrix phoneme_avg_pool(const Matrix& vec, std::span<const int> dur);

struct PhonemeAttention {
  ag::Var output;   // [H x d]
  Matrix weights;   // [f x d]; column i is zero outside phoneme i's frames
};

// Query: column i of c_text. Keys and values: projections of the frames of
// phoneme i only. Scaled dot-product, softmax within the slice, output
// projection to H.
PhonemeAttention phoneme_attention(const ag::Var& c_text, const ag::Var& vec,
                                   std::span<const int> dur,
                                   const SslEncoderParams& params);

ag::Var fuse_ssl(const ag::Var& c_avg, const ag::Var& c_att, double alpha,
                 double beta);

SslEncoding encode_ssl(const ag::Var& c_text, const Matrix& contentvec,
                       std::span<const int> pframe,
                       const SslEncoderParams& params, double alpha,
                       double beta);

}  // namespace phonovc

#endif  // PHONOVC_SSL_ENCODER_HPP_
