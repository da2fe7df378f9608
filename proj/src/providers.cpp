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

#include "phonovc/providers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

#include "phonovc/error.hpp"
#include "phonovc/features.hpp"
#include "phonovc/fft.hpp"
#include "phonovc/random.hpp"

namespace phonovc {
namespace {

constexpr std::array<const char*, 21> kInitials = {
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h",
    "j", "q", "x", "zh", "ch", "sh", "r", "z", "c", "s"};
constexpr std::array<const char*, 24> kFinals = {
    "a",  "o",   "e",   "i",   "u",  "ai",  "ei",   "ao",
    "ou", "an",  "en",  "ang", "eng", "ong", "ia",  "ie",
    "iao", "iu", "ian", "in",  "ing", "ua",  "uo",  "ui"};
constexpr int kSyllables = 96;

}  // namespace

int stub_lexicon_size() { return kSyllables; }

// Word token "c<k>" is one syllable with 1-2 phonemes.
StubLexiconEntry stub_lexicon_entry(int k) {
  PHONOVC_CHECK(k >= 0 && k < kSyllables, ConfigError, "stub lexicon index ",
                k, " out of range");
  StubLexiconEntry s;
  s.word = "c" + std::to_string(k);
  if (k % 4 != 3) s.phonemes.push_back(kInitials[(k * 7) % kInitials.size()]);
  s.phonemes.push_back(kFinals[(k * 5 + k / 7) % kFinals.size()]);
  s.tone = 1 + (k * 3) % 5;
  return s;
}

namespace {

class StubAsr final : public AsrProvider {
 public:
  explicit StubAsr(uint64_t seed) : seed_(seed) {}

  Transcription transcribe(const Audio& audio,
                           const TranscriptionHint& hint) const override {
    PHONOVC_CHECK(!audio.samples.empty(), IoError,
                  "stub recognizer received empty audio for '",
                  hint.utterance_id, "'");
    const std::string& key =
        hint.transcript.empty() ? hint.utterance_id : hint.transcript;
    Rng rng(fnv1a(key, seed_));
    Transcription t;
    auto push = [&t](const std::string& w, std::vector<std::string> ph, int tone) {
      t.words.push_back(w);
      t.word_phonemes.push_back(std::move(ph));
      t.tones.push_back(tone);
    };
    push("sil", {"sil"}, 0);
    const int n = rng.uniform_int(2, 5);
    for (int i = 0; i < n; ++i) {
      StubLexiconEntry s = stub_lexicon_entry(rng.uniform_int(0, kSyllables - 1));
      push(s.word, s.phonemes, s.tone);
    }
    push("sil", {"sil"}, 0);
    return t;
  }

 private:
  uint64_t seed_;
};

class StubAligner final : public AlignerProvider {
 public:
  explicit StubAligner(uint64_t seed) : seed_(seed) {}

  Alignment align(const Audio&, int num_frames,
                  const Transcription& text) const override {
    const auto phonemes = text.phonemes();
    std::vector<double> weights;
    weights.reserve(phonemes.size());
    for (size_t i = 0; i < phonemes.size(); ++i) {
      Rng rng(mix_seed(fnv1a(phonemes[i], seed_), i));
      const bool silence = phonemes[i] == "sil";
      weights.push_back(silence ? rng.uniform(1.0, 2.0) : rng.uniform(0.6, 1.6));
    }
    Alignment a;
    a.pframe = partition_frames(weights, num_frames);
    a.wframe = word_frames(a.pframe, text.w2p());
    return a;
  }

 private:
  uint64_t seed_;
};

class StubBert final : public BertProvider {
 public:
  StubBert(uint64_t seed, int dim) : seed_(seed), dim_(dim) {}
  int dim() const override { return dim_; }

  Matrix embed(const std::vector<std::string>& words) const override {
    Matrix out(dim_, static_cast<Eigen::Index>(words.size()));
    for (size_t j = 0; j < words.size(); ++j) {
      Rng rng(fnv1a(words[j], seed_ ^ 0xB3A7ULL));
      out.col(j) = rng.normal_matrix(dim_, 1);
    }
    return out;
  }

 private:
  uint64_t seed_;
  int dim_;
};

class StubSsl final : public SslProvider {
 public:
  StubSsl(uint64_t seed, int dim, double frame_rate)
      : dim_(dim), frame_rate_(frame_rate) {
    Rng rng(mix_seed(seed, 0x55AA));
    projection_ = rng.normal_matrix(dim_, kBands, 1.0 / std::sqrt(double(kBands)));
  }
  int dim() const override { return dim_; }

  Matrix extract(const Audio& audio) const override {
    PHONOVC_CHECK(!audio.samples.empty() && audio.sample_rate > 0, IoError,
                  "stub SSL extractor received empty audio");
    const int hop = std::max(1, static_cast<int>(std::lround(audio.sample_rate / frame_rate_)));
    const int frames = std::max<int>(1, static_cast<int>(audio.samples.size() / hop));
    DspConfig cfg;
    cfg.sample_rate = audio.sample_rate;
    cfg.n_fft = kFft;
    cfg.hop_length = hop;
    cfg.n_mels = kBands;
    const Matrix fb = mel_filterbank(cfg);
    const auto window = hann_window(kFft);
    std::vector<double> buf(kFft);
    std::vector<std::complex<double>> spec(kFft / 2 + 1);
    Vector mag(kFft / 2 + 1);
    Matrix logmel(kBands, frames);
    const long n = static_cast<long>(audio.samples.size());
    for (int t = 0; t < frames; ++t) {
      const long start = long(t) * hop + hop / 2 - kFft / 2;
      for (int i = 0; i < kFft; ++i) {
        const long idx = start + i;
        buf[i] = (idx >= 0 && idx < n) ? audio.samples[idx] * window[i] : 0.0;
      }
      fft::forward_real(buf, spec);
      for (int k = 0; k <= kFft / 2; ++k) mag(k) = std::abs(spec[k]);
      logmel.col(t) = (fb * mag).cwiseMax(1e-5).array().log();
    }
    // Roughly centre log-mel values before projecting.
    Matrix normalized = (logmel.array() + 5.0) / 5.0;
    return (projection_ * normalized).array().tanh();
  }

 private:
  static constexpr int kFft = 1024;
  static constexpr int kBands = 40;
  int dim_;
  double frame_rate_;
  Matrix projection_;
};

}  // namespace

std::vector<std::string> Transcription::phonemes() const {
  std::vector<std::string> out;
  for (const auto& word : word_phonemes)
    out.insert(out.end(), word.begin(), word.end());
  return out;
}

std::vector<int> Transcription::w2p() const {
  std::vector<int> out;
  out.reserve(word_phonemes.size());
  for (const auto& word : word_phonemes) out.push_back(static_cast<int>(word.size()));
  return out;
}

std::vector<int> partition_frames(const std::vector<double>& weights,
                                  int num_frames) {
  const int n = static_cast<int>(weights.size());
  PHONOVC_CHECK(n >= 1, AlignmentError, "nothing to align");
  PHONOVC_CHECK(num_frames >= n, AlignmentError, "cannot align ", n,
                " phonemes onto ", num_frames, " frames");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out(n);
  std::vector<double> remainder(n);
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double raw = weights[i] / total * num_frames;
    out[i] = std::max(1, static_cast<int>(std::floor(raw)));
    remainder[i] = raw - std::floor(raw);
    assigned += out[i];
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int k = 0; assigned < num_frames; k = (k + 1) % n) {
    ++out[order[k]];
    ++assigned;
  }
  // Raising entries to 1 can overshoot; take frames back from the longest.
  while (assigned > num_frames) {
    const auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  return out;
}

ExtractorProviderSet make_stub_providers(const StubOptions& options) {
  ExtractorProviderSet set;
  set.asr = std::make_shared<StubAsr>(options.seed);
  set.aligner = std::make_shared<StubAligner>(options.seed);
  set.bert = std::make_shared<StubBert>(options.seed, options.bert_dim);
  set.ssl = std::make_shared<StubSsl>(options.seed, options.ssl_dim,
                                      options.ssl_frame_rate);
  return set;
}

ExtractorProviderSet make_real_providers() {
  throw ConfigError(
      "real extractors are not bundled with this build; construct an "
      "ExtractorProviderSet with your recognizer, aligner, text-embedding "
      "and SSL implementations and pass it to extract_features()");
}

}  // namespace phonovc
