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

#ifndef PHONOVC_PRIOR_NETWORK_HPP_
#define PHONOVC_PRIOR_NETWORK_HPP_

#include <span>
#include <vector>

#include "phonovc/model_config.hpp"
#include "phonovc/nn.hpp"

namespace phonovc {

struct PriorState {
  ag::Var c;               // [H x d]
  ag::Var spk;             // [S x 1]
  ag::Var x_d;             // [H x d]
  ag::Var x_f;             // [H x f']
  ag::Var mel_hat;         // [n_mels x f']
  ag::Var x;               // [H x f']
  ag::Var prior_mu;        // [H x f']
  ag::Var prior_logsigma;  // [H x f']
  ag::Var logw_pred;       // [1 x d]
  std::vector<int> durations;  // the durations used for x_f
};

struct DurationOutputs {
  ag::Var logw_pred;  // [1 x d]
  Matrix logw_true;   // [1 x d]
};

struct PriorParams {
  nn::LayerNorm input_norm;
  std::vector<nn::Linear> enc_spk;  // S -> H, one per block
  std::vector<nn::AttentionBlock> enc_blocks;

  nn::Conv dur_conv1;
  nn::LayerNorm dur_norm1;
  nn::Linear dur_spk;
  nn::Conv dur_conv2;
  nn::LayerNorm dur_norm2;
  nn::Linear dur_out;  // C -> 1

  std::vector<nn::Conv> mel_convs;
  std::vector<nn::Linear> mel_spk;
  std::vector<nn::LayerNorm> mel_norms;
  nn::Linear mel_out;  // H -> n_mels
  nn::Conv prenet;     // n_mels -> H
  nn::Conv post1;      // residual postnet, post2 starts at zero
  nn::Conv post2;

  nn::Linear stats;  // H -> 2H
  double logsigma_clamp = 7.0;

  static PriorParams make(nn::ParameterStore& ps, const ModelConfig& cfg);
};

struct PriorEncoding {
  ag::Var c;
  ag::Var x_d;
};

// c = LayerNorm(c_text + c_ssl); x_d from the speaker-conditioned
// attention stack (speaker projection added before every block).
PriorEncoding encode_prior(const ag::Var& c_text, const ag::Var& c_ssl,
                           const ag::Var& spk, const PriorParams& params);

// Column i of x_d repeated durations[i] times. AlignmentError if any
// duration is below 1.
ag::Var length_regulate(const ag::Var& x_d, std::span<const int> durations);
Matrix length_regulate(const Matrix& x_d, std::span<const int> durations);

struct MelAuxiliary {
  ag::Var mel_hat;
  ag::Var x;
};

// mel_hat from (x_f, spk); x = postnet(x_f + prenet(mel_hat)).
MelAuxiliary mel_auxiliary(const ag::Var& x_f, const ag::Var& spk,
                           const PriorParams& params);

// [1 x d] log durations.
ag::Var predict_duration(const ag::Var& x_d, const ag::Var& spk,
                         const PriorParams& params);

// max(1, round(exp(logw) * pace)) per entry; ConfigError if pace <= 0.
std::vector<int> durations_from_log(const Matrix& logw_pred, double pace);

// [1 x d] natural log of the frame counts.
Matrix log_durations(std::span<const int> pframe);

struct PriorDistribution {
  ag::Var mu;
  ag::Var logsigma;  // clamped to [-clamp, clamp]
};

PriorDistribution prior_distribution(const ag::Var& x,
                                     const PriorParams& params);

// Full prior path. With `durations` empty the predicted durations (at
// `pace`) drive length regulation.
PriorState run_prior(const ag::Var& c_text, const ag::Var& c_ssl,
                     const ag::Var& spk, std::span<const int> durations,
                     double pace, const PriorParams& params);

}  // namespace phonovc

#endif  // PHONOVC_PRIOR_NETWORK_HPP_
