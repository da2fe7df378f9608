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

#ifndef PHONOVC_TESTS_FIXTURES_HPP_
#define PHONOVC_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "phonovc/config.hpp"
#include "phonovc/dsp.hpp"
#include "phonovc/feature_store.hpp"
#include "phonovc/features.hpp"
#include "phonovc/model_config.hpp"
#include "phonovc/random.hpp"
#include "phonovc/synth.hpp"

namespace phonovc::testing {

// "sil n i h ao sil", tones 0 2 3 0, 75 frames.
inline UtteranceFeatures nihao_features(int bert_dim, int ssl_dim,
                                         int linear_bins, int n_mels, int hop,
                                         uint64_t seed = 7) {
  Rng rng(seed);
  UtteranceFeatures f;
  f.utterance_id = "nihao";
  f.words = {2, 3, 4, 2};
  f.phonemes = {2, 3, 4, 5, 6, 2};
  f.tones = {0, 2, 3, 0};
  f.pframe = {8, 9, 5, 10, 33, 10};
  f.wframe = {8, 14, 43, 10};
  f.w2p = {1, 2, 2, 1};
  f.speaker = 0;
  f.words_bert = rng.normal_matrix(bert_dim, 4);
  f.contentvec = rng.normal_matrix(ssl_dim, 75);
  f.linear_spec = rng.uniform_matrix(linear_bins, 75, 1.0).cwiseAbs();
  f.mel_spec = rng.normal_matrix(n_mels, 75);
  f.audio.resize(75L * hop);
  for (auto& s : f.audio) s = 0.1 * rng.normal();
  return f;
}

// 16 kHz, 32-point FFT, hop 16, 10 mel bands.
inline DspConfig tiny_dsp() {
  DspConfig d;
  d.sample_rate = 16000;
  d.n_fft = 32;
  d.hop_length = 16;
  d.n_mels = 10;
  return d;
}

inline ModelConfig tiny_model() {
  ModelConfig c;
  c.hidden = 8;
  c.bert_dim = 4;
  c.ssl_dim = 6;
  c.n_words = 8;
  c.n_phones = 8;
  c.n_tones = 8;
  c.n_speakers = 2;
  c.speaker_dim = 8;
  c.text_blocks = 1;
  c.prior_blocks = 1;
  c.n_mels = 10;
  c.mel_layers = 1;
  c.dur_channels = 8;
  c.linear_bins = 17;
  c.posterior_layers = 2;
  c.posterior_kernel = 3;
  c.flow_layers = 1;
  c.flow_wn_layers = 1;
  c.hop_length = 16;
  c.gen_channels = 8;
  c.upsample_factors = {4, 4};
  c.resblock_kernels = {3};
  c.resblock_dilations = {1};
  c.periods = {2, 3};
  c.scales = 1;
  c.disc_channels = 4;
  c.disc_layers = 2;
  return c;
}

// Overlay for a TrainingSession on a tiny synthetic corpus.
inline Config tiny_session_config() {
  Config c;
  tiny_model().write(c);
  c.set("train.batch_size", 2);
  c.set("train.lr_g", 1e-3);
  c.set("train.lr_d", 1e-3);
  c.set("train.total_steps", 20);
  c.set("train.checkpoint_interval", 5);
  c.set("train.segment_frames", 8);
  return c;
}

inline SynthSpec tiny_synth(int speakers = 2, int texts = 3) {
  SynthSpec s;
  s.speakers = speakers;
  s.texts = texts;
  s.dsp = tiny_dsp();
  s.stub.bert_dim = 4;
  s.stub.ssl_dim = 6;
  return s;
}

struct TinyCorpus {
  CorpusInfo info;
  TokenTables tables;
  std::vector<UtteranceFeatures> features;
};

// Synthetic corpus written to `root` and read back.
inline TinyCorpus tiny_corpus(const std::string& root, int speakers = 2,
                              int texts = 3) {
  const FeatureStore store(root);
  write_synth_store(tiny_synth(speakers, texts), store);
  return {store.read_info(), store.read_tables(), store.read_all()};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("phonovc_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string sub(const std::string& name) const { return (path_ / name).string(); }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace phonovc::testing

#endif  // PHONOVC_TESTS_FIXTURES_HPP_
