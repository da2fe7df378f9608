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

#include "phonovc/synth.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "phonovc/error.hpp"
#include "phonovc/random.hpp"

namespace phonovc {
namespace fs = std::filesystem;
namespace {

constexpr int kMaxHarmonics = 48;

struct Formants {
  double f1, f2;
  bool silence;
};

Formants formants_of(const std::string& phoneme, uint64_t seed) {
  if (phoneme == "sil") return {0.0, 0.0, true};
  Rng rng(fnv1a(phoneme, seed ^ 0xF0F0ULL));
  return {rng.uniform(280.0, 950.0), rng.uniform(1000.0, 2600.0), false};
}

}  // namespace

std::string synth_speaker_name(int speaker) {
  return "spk" + std::to_string(speaker);
}

std::string synth_utterance_id(int speaker, int text) {
  return synth_speaker_name(speaker) + "_t" + std::to_string(text);
}

SynthUtterance synth_utterance(const SynthSpec& spec, int speaker, int text) {
  PHONOVC_CHECK(speaker >= 0 && speaker < spec.speakers && text >= 0 &&
                    text < spec.texts && !spec.duration_scale.empty(),
                ConfigError, "synthetic utterance (", speaker, ", ", text,
                ") out of range");
  SynthUtterance u;
  u.entry.utterance_id = synth_utterance_id(speaker, text);
  u.entry.speaker = synth_speaker_name(speaker);
  u.entry.transcript = "text" + std::to_string(text);

  // Text and base timing depend only on the text index.
  Rng trng(mix_seed(spec.seed, 1000 + text));
  auto push = [&u](const std::string& w, std::vector<std::string> ph, int tone) {
    u.text.words.push_back(w);
    u.text.word_phonemes.push_back(std::move(ph));
    u.text.tones.push_back(tone);
  };
  push("sil", {"sil"}, 0);
  const int n = trng.uniform_int(spec.min_syllables, spec.max_syllables);
  for (int i = 0; i < n; ++i) {
    auto s = stub_lexicon_entry(trng.uniform_int(0, stub_lexicon_size() - 1));
    push(s.word, s.phonemes, s.tone);
  }
  push("sil", {"sil"}, 0);
  const int scale = spec.duration_scale[speaker % spec.duration_scale.size()];
  const size_t count = u.text.phonemes().size();
  for (size_t i = 0; i < count; ++i) {
    u.pframe.push_back(
        scale * trng.uniform_int(spec.min_phone_frames, spec.max_phone_frames));
  }

  // Render.
  const int hop = spec.dsp.hop_length;
  const double sr = spec.dsp.sample_rate;
  const double f0 = 110.0 * std::pow(1.3, speaker);
  const double tilt = 1500.0 + 700.0 * speaker;
  const auto phonemes = u.text.phonemes();
  long total = 0;
  for (int d : u.pframe) total += long(d) * hop;
  u.audio.sample_rate = spec.dsp.sample_rate;
  u.audio.samples.assign(total, 0.0);
  const int harmonics =
      std::min(kMaxHarmonics, static_cast<int>(0.45 * sr / f0));
  std::vector<double> amp(harmonics, 0.0), target(harmonics, 0.0);
  const double smooth = 1.0 - std::exp(-1.0 / (0.004 * sr));
  Rng noise(mix_seed(spec.seed, 5000 + 37 * speaker + text));
  long pos = 0;
  for (size_t p = 0; p < phonemes.size(); ++p) {
    const Formants fm = formants_of(phonemes[p], spec.seed);
    for (int h = 0; h < harmonics; ++h) {
      const double fh = (h + 1) * f0;
      target[h] = fm.silence
                      ? 0.0
                      : (std::exp(-std::pow((fh - fm.f1) / 180.0, 2)) +
                         0.6 * std::exp(-std::pow((fh - fm.f2) / 260.0, 2)) +
                         0.04) *
                            std::exp(-fh / tilt);
    }
    const long end = pos + long(u.pframe[p]) * hop;
    for (; pos < end; ++pos) {
      const double t = pos / sr;
      double s = 0.002 * noise.normal();
      for (int h = 0; h < harmonics; ++h) {
        amp[h] += smooth * (target[h] - amp[h]);
        s += amp[h] * std::sin(2.0 * std::numbers::pi * (h + 1) * f0 * t);
      }
      u.audio.samples[pos] = 0.25 * s;
    }
  }
  return u;
}

std::vector<SynthUtterance> synth_corpus(const SynthSpec& spec) {
  std::vector<SynthUtterance> out;
  for (int s = 0; s < spec.speakers; ++s)
    for (int t = 0; t < spec.texts; ++t) out.push_back(synth_utterance(spec, s, t));
  return out;
}

RawUtterance synth_raw_features(const SynthUtterance& utt,
                                const ExtractorProviderSet& providers,
                                const DspConfig& dsp) {
  RawUtterance raw;
  raw.utterance_id = utt.entry.utterance_id;
  raw.speaker = utt.entry.speaker;
  raw.text = utt.text;
  raw.audio = utt.audio.samples;
  raw.linear_spec = linear_spectrogram(utt.audio.samples, dsp);
  raw.mel_spec = log_mel_spectrogram(utt.audio.samples, dsp);
  const int frames = static_cast<int>(raw.mel_spec.cols());
  raw.alignment.pframe = repair_durations(utt.pframe, frames, 0);
  raw.alignment.wframe = word_frames(raw.alignment.pframe, utt.text.w2p());
  raw.words_bert = providers.bert->embed(utt.text.words);
  raw.contentvec = resample_ssl(providers.ssl->extract(utt.audio), frames);
  return raw;
}

PreprocessSummary write_synth_store(const SynthSpec& spec,
                                    const FeatureStore& store) {
  const auto providers = make_stub_providers(spec.stub);
  PreprocessSummary summary;
  std::vector<std::string> ids;
  for (const auto& utt : synth_corpus(spec)) {
    const auto f = assign_tokens(synth_raw_features(utt, providers, spec.dsp),
                                 summary.tables, true);
    store.write(f, utt.entry.speaker);
    ids.push_back(f.utterance_id);
  }
  CorpusInfo info;
  info.dsp = spec.dsp;
  info.providers = "synthetic";
  info.seed = spec.stub.seed;
  info.bert_dim = spec.stub.bert_dim;
  info.ssl_dim = spec.stub.ssl_dim;
  store.write_info(info);
  store.write_tables(summary.tables);
  store.write_index(ids);
  summary.utterances = static_cast<int>(ids.size());
  return summary;
}

std::string write_synth_audio(const SynthSpec& spec, const std::string& dir) {
  const fs::path wav_dir = fs::path(dir) / "wav";
  fs::create_directories(wav_dir);
  CorpusManifest manifest;
  manifest.sample_rate = spec.dsp.sample_rate;
  manifest.hop_length = spec.dsp.hop_length;
  manifest.fft_size = spec.dsp.n_fft;
  for (auto& utt : synth_corpus(spec)) {
    const std::string name = utt.entry.utterance_id + ".wav";
    write_wav((wav_dir / name).string(), utt.audio);
    utt.entry.audio_path = "wav/" + name;
    manifest.entries.push_back(utt.entry);
  }
  const std::string path = (fs::path(dir) / "manifest.txt").string();
  write_manifest(path, manifest);
  return path;
}

}  // namespace phonovc
