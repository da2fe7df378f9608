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

#include "phonovc/text_encoder.hpp"

#include <string>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

std::vector<nn::AttentionBlock> make_stack(nn::ParameterStore& ps,
                                           const std::string& name, int dim,
                                           int blocks) {
  std::vector<nn::AttentionBlock> out;
  for (int i = 0; i < blocks; ++i) {
    out.push_back(nn::AttentionBlock::make(ps, name + "." + std::to_string(i), dim));
  }
  return out;
}

ag::Var run_stack(const std::vector<nn::AttentionBlock>& blocks, ag::Var x) {
  for (const auto& b : blocks) x = b(x);
  return x;
}

void check_w2p(std::span<const int> w2p, Eigen::Index words) {
  PHONOVC_CHECK(static_cast<Eigen::Index>(w2p.size()) == words, ShapeError,
                "expand_word_level: ", w2p.size(), " w2p entries for ", words,
                " words");
  for (size_t i = 0; i < w2p.size(); ++i) {
    PHONOVC_CHECK(w2p[i] >= 1, AlignmentError, "expand_word_level: w2p[", i,
                  "] = ", w2p[i]);
  }
}

}  // namespace

TextEncoderParams TextEncoderParams::make(nn::ParameterStore& ps,
                                          const ModelConfig& cfg) {
  TextEncoderParams p;
  p.words = nn::Embedding::make(ps, "text.words", cfg.n_words, cfg.hidden);
  p.phones = nn::Embedding::make(ps, "text.phones", cfg.n_phones, cfg.hidden);
  p.tones = nn::Embedding::make(ps, "text.tones", cfg.n_tones, cfg.hidden);
  p.bert = nn::Linear::make(ps, "text.bert", cfg.bert_dim, cfg.hidden);
  p.word_blocks = make_stack(ps, "text.word_enc", cfg.hidden, cfg.text_blocks);
  p.phone_blocks = make_stack(ps, "text.phone_enc", cfg.hidden, cfg.text_blocks);
  p.tone_blocks = make_stack(ps, "text.tone_enc", cfg.hidden, cfg.text_blocks);
  p.bert_blocks = make_stack(ps, "text.bert_enc", cfg.hidden, cfg.text_blocks);
  return p;
}

ag::Var expand_word_level(const ag::Var& word_feats, std::span<const int> w2p) {
  check_w2p(w2p, word_feats.cols());
  return ag::repeat_cols(word_feats, w2p);
}

Matrix expand_word_level(const Matrix& word_feats, std::span<const int> w2p) {
  return expand_word_level(ag::constant(word_feats), w2p).value();
}

TextEncoding encode_text(const UtteranceFeatures& f,
                         const TextEncoderParams& params) {
  PHONOVC_CHECK(f.num_words() >= 1 && f.num_phonemes() >= 1, ShapeError,
                "encode_text: empty utterance '", f.utterance_id, "'");
  PHONOVC_CHECK(f.words_bert.cols() == f.num_words(), ShapeError,
                "encode_text: words_bert has ", f.words_bert.cols(),
                " columns for ", f.num_words(), " words");
  PHONOVC_CHECK(f.words_bert.rows() == params.bert.w.cols(), ShapeError,
                "encode_text: text embeddings have dimension ",
                f.words_bert.rows(), ", model expects ", params.bert.w.cols());
  TextEncoding e;
  e.c_words = run_stack(params.word_blocks,
                        expand_word_level(params.words(f.words), f.w2p));
  e.c_phones = run_stack(params.phone_blocks, params.phones(f.phonemes));
  e.c_tones = run_stack(params.tone_blocks,
                        expand_word_level(params.tones(f.tones), f.w2p));
  e.c_bert = run_stack(
      params.bert_blocks,
      expand_word_level(params.bert(ag::constant(f.words_bert)), f.w2p));
  PHONOVC_CHECK(e.c_words.cols() == f.num_phonemes(), ShapeError,
                "encode_text: w2p expands to ", e.c_words.cols(),
                " phonemes, utterance has ", f.num_phonemes());
  e.c_text = ag::add(ag::add(e.c_words, e.c_phones), ag::add(e.c_tones, e.c_bert));
  return e;
}

}  // namespace phonovc
