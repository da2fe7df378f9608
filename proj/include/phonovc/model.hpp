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

#ifndef PHONOVC_MODEL_HPP_
#define PHONOVC_MODEL_HPP_

#include "phonovc/model_config.hpp"
#include "phonovc/nn.hpp"
#include "phonovc/posterior_decoder.hpp"
#include "phonovc/prior_network.hpp"
#include "phonovc/ssl_encoder.hpp"
#include "phonovc/text_encoder.hpp"

namespace phonovc {

// Generator-side parameters live in `gen`, discriminators in `disc`.
// Parameters are created in a fixed order from config.seed.
class Model {
 public:
  explicit Model(const ModelConfig& config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  // [speaker_dim x 1]; ConfigError for ids outside the training set.
  ag::Var speaker(int id) const;

  nn::ParameterStore gen;
  nn::ParameterStore disc;
  nn::Embedding speakers;
  TextEncoderParams text;
  SslEncoderParams ssl;
  PriorParams prior;
  PosteriorParams posterior;
  FlowParams flow;
  GeneratorParams generator;
  DiscriminatorBank discriminators;

 private:
  ModelConfig config_;
};

}  // namespace phonovc

#endif  // PHONOVC_MODEL_HPP_
