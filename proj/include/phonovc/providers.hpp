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

// Pluggable extractors behind the feature front-end: recognition (words,
// phonemes, tones), forced alignment (frames per phoneme), text embeddings
// and self-supervised speech features.
//
// The stub implementations are pure functions of their input and a seed,
// so they are safe to share between worker threads.

#ifndef PHONOVC_PROVIDERS_HPP_
#define PHONOVC_PROVIDERS_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phonovc/dsp.hpp"

namespace phonovc {

struct TranscriptionHint {
  std::string utterance_id;
  std::string transcript;  // may be empty
};

struct Transcription {
  std::vector<std::string> words;
  std::vector<std::vector<std::string>> word_phonemes;
  std::vector<int> tones;  // one per word, 0 = no tone

  std::vector<std::string> phonemes() const;
  std::vector<int> w2p() const;
};

struct Alignment {
  std::vector<int> pframe;
  std::vector<int> wframe;
};

class AsrProvider {
 public:
  virtual ~AsrProvider() = default;
  virtual Transcription transcribe(const Audio& audio,
                                   const TranscriptionHint& hint) const = 0;
};

class AlignerProvider {
 public:
  virtual ~AlignerProvider() = default;
  // Aligns the transcription onto `num_frames` spectrogram frames.
  virtual Alignment align(const Audio& audio, int num_frames,
                          const Transcription& text) const = 0;
};

class BertProvider {
 public:
  virtual ~BertProvider() = default;
  virtual int dim() const = 0;
  // [dim x W]
  virtual Matrix embed(const std::vector<std::string>& words) const = 0;
};

class SslProvider {
 public:
  virtual ~SslProvider() = default;
  virtual int dim() const = 0;
  // [dim x f_ssl] at the provider's native frame rate.
  virtual Matrix extract(const Audio& audio) const = 0;
};

struct ExtractorProviderSet {
  std::shared_ptr<const AsrProvider> asr;
  std::shared_ptr<const AlignerProvider> aligner;
  std::shared_ptr<const BertProvider> bert;
  std::shared_ptr<const SslProvider> ssl;
};

struct StubOptions {
  uint64_t seed = 0;
  int bert_dim = 192;
  int ssl_dim = 256;
  double ssl_frame_rate = 50.0;  // frames per second
};

// Stub recognizer: the transcript (or, if empty, the utterance id) is
// hashed with the seed into a fixed synthetic syllable inventory, framed
// by "sil" words. Stub aligner: seeded per-phoneme weights partition the
// frames proportionally. Stub BERT: seeded Gaussian vector per word token.
// Stub SSL: seeded random projection of a 40-band log-mel at the SSL frame
// rate, squashed with tanh.
ExtractorProviderSet make_stub_providers(const StubOptions& options);

struct StubLexiconEntry {
  std::string word;
  std::vector<std::string> phonemes;
  int tone = 0;
};

// The stub recognizer's fixed syllable inventory.
int stub_lexicon_size();
StubLexiconEntry stub_lexicon_entry(int k);

// Real extractors are not bundled; this throws ConfigError explaining how
// to plug them in through ExtractorProviderSet.
ExtractorProviderSet make_real_providers();

// Proportional partition of num_frames over weights; every entry >= 1.
// Throws AlignmentError if num_frames < weights.size().
std::vector<int> partition_frames(const std::vector<double>& weights,
                                  int num_frames);

}  // namespace phonovc

#endif  // PHONOVC_PROVIDERS_HPP_
