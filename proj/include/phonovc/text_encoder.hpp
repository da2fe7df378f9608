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

#ifndef PHONOVC_TEXT_ENCODER_HPP_
#define PHONOVC_TEXT_ENCODER_HPP_

#include <span>
#include <vector>

#include "phonovc/features.hpp"
#include "phonovc/model_config.hpp"
#include "phonovc/nn.hpp"

namespace phonovc {

// All [H x P].
struct TextEncoding {
  ag::Var c_words;
  ag::Var c_phones;
  ag::Var c_tones;
  ag::Var c_bert;
  ag::Var c_text;
};

struct TextEncoderParams {
  nn::Embedding words;
  nn::Embedding phones;
  nn::Embedding tones;
  nn::Linear bert;  // bert_dim -> H
  std::vector<nn::AttentionBlock> word_blocks;
  std::vector<nn::AttentionBlock> phone_blocks;
  std::vector<nn::AttentionBlock> tone_blocks;
  std::vector<nn::AttentionBlock> bert_blocks;

  static TextEncoderParams make(nn::ParameterStore& ps, const ModelConfig& cfg);
};

// Repeats column i of a [. x W] matrix w2p[i] times.
ag::Var expand_word_level(const ag::Var& word_feats, std::span<const int> w2p);
Matrix expand_word_level(const Matrix& word_feats, std::span<const int> w2p);

// Each stream: embedding (linear projection for words_bert), expansion of
// word-level streams to phonemes, then its own attention stack.
TextEncoding encode_text(const UtteranceFeatures& features,
                         const TextEncoderParams& params);

}  // namespace phonovc

#endif  // PHONOVC_TEXT_ENCODER_HPP_
