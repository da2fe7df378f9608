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

#ifndef PHONOVC_POSTERIOR_DECODER_HPP_
#define PHONOVC_POSTERIOR_DECODER_HPP_

#include <vector>

#include "phonovc/model_config.hpp"
#include "phonovc/nn.hpp"
#include "phonovc/random.hpp"

namespace phonovc {

struct LatentPosterior {
  ag::Var mu;        // [H x f]
  ag::Var logsigma;  // [H x f]
  ag::Var z;         // mu + exp(logsigma) * noise_scale * eps
};

struct PosteriorParams {
  nn::Conv pre;  // linear bins -> H
  nn::WaveNet enc;
  nn::Conv proj;  // H -> 2H

  static PosteriorParams make(nn::ParameterStore& ps, const ModelConfig& cfg);
};

LatentPosterior posterior_encode(const Matrix& linear_spec, const ag::Var& spk,
                                 const PosteriorParams& params, Rng& rng,
                                 double noise_scale = 1.0);

// Mean-only affine coupling: the half selected by `flip` is shifted by a
// WaveNet of the other half. Volume preserving; the output layer starts
// at zero so a fresh coupling is the identity.
struct CouplingLayer {
  nn::Conv pre;  // H/2 -> H
  nn::WaveNet enc;
  nn::Conv post;  // H -> H/2
  bool flip = false;
};

struct FlowParams {
  std::vector<CouplingLayer> layers;
  int channels = 0;

  static FlowParams make(nn::ParameterStore& ps, const ModelConfig& cfg);
};

enum class FlowDirection { kForward, kInverse };

struct FlowResult {
  ag::Var z;
  double logdet = 0.0;  // always 0 for mean-only couplings
};

FlowResult flow_transport(const ag::Var& z, const ag::Var& spk,
                          FlowDirection direction, const FlowParams& params);

struct ResBlock {
  std::vector<nn::Conv> convs1;  // dilated
  std::vector<nn::Conv> convs2;
};

struct GeneratorParams {
  nn::Conv pre;  // H -> C, kernel 7
  nn::Linear cond;  // S -> C
  std::vector<nn::ConvTranspose> ups;
  std::vector<std::vector<ResBlock>> blocks;  // per stage, per kernel
  nn::Conv post;  // -> 1, kernel 7
  std::vector<int> factors;

  static GeneratorParams make(nn::ParameterStore& ps, const ModelConfig& cfg);
};

// [H x f] latent -> [1 x f * product(factors)] waveform in (-1, 1).
ag::Var generate_waveform(const ag::Var& z, const ag::Var& spk,
                          const GeneratorParams& params);

struct SubDiscriminator {
  std::vector<nn::Conv> convs;
  nn::Conv post;
  int period = 0;  // 0 for scale discriminators
  int pool_steps = 0;
};

struct DiscriminatorBank {
  std::vector<SubDiscriminator> mpd;
  std::vector<SubDiscriminator> msd;

  static DiscriminatorBank make(nn::ParameterStore& ps, const ModelConfig& cfg);
  int size() const { return static_cast<int>(mpd.size() + msd.size()); }
};

struct DiscriminatorOutput {
  std::vector<ag::Var> scores;                 // one per sub-discriminator
  std::vector<std::vector<ag::Var>> features;  // per sub-discriminator
};

// Reflect-pads a [1 x L] waveform on the right to a multiple of `period`:
// ceil(L / period) frames of width `period` in time*period+phase order.
int fold_period_length(int length, int period);
ag::Var fold_period(const ag::Var& audio, int period);

DiscriminatorOutput run_discriminators(const ag::Var& audio,
                                       const DiscriminatorBank& bank);

struct Discrimination {
  DiscriminatorOutput real;
  DiscriminatorOutput fake;
};

// ShapeError on length mismatch.
Discrimination discriminate(const ag::Var& audio_real, const ag::Var& audio_fake,
                            const DiscriminatorBank& bank);

}  // namespace phonovc

#endif  // PHONOVC_POSTERIOR_DECODER_HPP_
