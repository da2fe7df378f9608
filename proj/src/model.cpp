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

#include "phonovc/model.hpp"

#include "phonovc/error.hpp"

namespace phonovc {

Model::Model(const ModelConfig& config)
    : gen(mix_seed(config.seed, 1)),
      disc(mix_seed(config.seed, 2)),
      config_(config) {
  config_.validate();
  speakers = nn::Embedding::make(gen, "speaker", config_.n_speakers,
                                 config_.speaker_dim);
  text = TextEncoderParams::make(gen, config_);
  ssl = SslEncoderParams::make(gen, config_);
  prior = PriorParams::make(gen, config_);
  posterior = PosteriorParams::make(gen, config_);
  flow = FlowParams::make(gen, config_);
  generator = GeneratorParams::make(gen, config_);
  discriminators = DiscriminatorBank::make(disc, config_);
}

ag::Var Model::speaker(int id) const {
  PHONOVC_CHECK(id >= 0 && id < config_.n_speakers, ConfigError,
                "unknown speaker id ", id, " (model has ", config_.n_speakers,
                " speakers)");
  const int ids[1] = {id};
  return speakers(ids);
}

}  // namespace phonovc
