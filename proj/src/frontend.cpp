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

#include "phonovc/frontend.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <optional>
#include <thread>

#include "phonovc/error.hpp"

namespace phonovc {

RawUtterance extract_raw(const ManifestEntry& entry, const Audio& audio,
                         const ExtractorProviderSet& providers,
                         const DspConfig& dsp, int repair_budget) {
  PHONOVC_CHECK(providers.asr && providers.aligner && providers.bert &&
                    providers.ssl,
                ConfigError, "extractor provider set is incomplete");
  PHONOVC_CHECK(audio.sample_rate == dsp.sample_rate, IoError, "'",
                entry.utterance_id, "' is sampled at ", audio.sample_rate,
                " Hz, corpus expects ", dsp.sample_rate);
  PHONOVC_CHECK(static_cast<int>(audio.samples.size()) >= dsp.hop_length,
                IoError, "'", entry.utterance_id, "' is shorter than one hop");

  RawUtterance raw;
  raw.utterance_id = entry.utterance_id;
  raw.speaker = entry.speaker;
  raw.audio = audio.samples;
  raw.text = providers.asr->transcribe(
      audio, TranscriptionHint{entry.utterance_id, entry.transcript});
  const auto& t = raw.text;
  PHONOVC_CHECK(!t.words.empty(), ExtractionError, "'", entry.utterance_id,
                "': recognizer returned no words");
  PHONOVC_CHECK(t.words.size() == t.tones.size() &&
                    t.words.size() == t.word_phonemes.size(),
                ExtractionError, "'", entry.utterance_id,
                "': recognizer token counts disagree (words ", t.words.size(),
                ", tones ", t.tones.size(), ", phoneme groups ",
                t.word_phonemes.size(), ")");
  for (size_t i = 0; i < t.word_phonemes.size(); ++i) {
    PHONOVC_CHECK(!t.word_phonemes[i].empty(), ExtractionError, "'",
                  entry.utterance_id, "': word ", i, " has no phonemes");
  }

  raw.linear_spec = linear_spectrogram(audio.samples, dsp);
  raw.mel_spec = log_mel_spectrogram(audio.samples, dsp);
  const int frames = static_cast<int>(raw.mel_spec.cols());

  Alignment a = providers.aligner->align(audio, frames, t);
  const auto w2p = t.w2p();
  PHONOVC_CHECK(a.pframe.size() == t.phonemes().size(), AlignmentError, "'",
                entry.utterance_id, "': aligner returned ", a.pframe.size(),
                " durations for ", t.phonemes().size(), " phonemes");
  a.pframe = repair_durations(a.pframe, frames, repair_budget);
  a.wframe = word_frames(a.pframe, w2p);
  raw.alignment = std::move(a);

  raw.words_bert = providers.bert->embed(t.words);
  PHONOVC_CHECK(raw.words_bert.cols() == static_cast<Eigen::Index>(t.words.size()),
                ExtractionError, "'", entry.utterance_id,
                "': text embedding has ", raw.words_bert.cols(),
                " columns for ", t.words.size(), " words");
  raw.contentvec = resample_ssl(providers.ssl->extract(audio), frames);
  return raw;
}

UtteranceFeatures assign_tokens(const RawUtterance& raw, TokenTables& tables,
                                bool grow) {
  UtteranceFeatures f;
  f.utterance_id = raw.utterance_id;
  for (const auto& w : raw.text.words)
    f.words.push_back(grow ? tables.words.add(w) : tables.words.id(w));
  for (const auto& p : raw.text.phonemes())
    f.phonemes.push_back(grow ? tables.phones.add(p) : tables.phones.id(p));
  f.tones = raw.text.tones;
  f.words_bert = raw.words_bert;
  f.pframe = raw.alignment.pframe;
  f.wframe = raw.alignment.wframe;
  f.w2p = raw.text.w2p();
  f.speaker = grow ? tables.speakers.add(raw.speaker)
                   : tables.speakers.id(raw.speaker);
  f.contentvec = raw.contentvec;
  f.linear_spec = raw.linear_spec;
  f.mel_spec = raw.mel_spec;
  f.audio = raw.audio;
  const auto violations = validate_alignment(f);
  if (!violations.empty()) {
    throw AlignmentError(detail::concat("'", f.utterance_id, "' violates ",
                                        violations[0].invariant, ": ",
                                        violations[0].detail));
  }
  return f;
}

UtteranceFeatures extract_features(const ManifestEntry& entry,
                                   const Audio& audio,
                                   const ExtractorProviderSet& providers,
                                   const DspConfig& dsp, TokenTables& tables,
                                   bool grow) {
  return assign_tokens(extract_raw(entry, audio, providers, dsp), tables, grow);
}

UtteranceFeatures extract_features(const ManifestEntry& entry,
                                   const ExtractorProviderSet& providers,
                                   const DspConfig& dsp, TokenTables& tables,
                                   bool grow) {
  return extract_features(entry, read_wav(entry.audio_path), providers, dsp,
                          tables, grow);
}

PreprocessSummary preprocess_corpus(const CorpusManifest& manifest,
                                    const ExtractorProviderSet& providers,
                                    const PreprocessOptions& options,
                                    const FeatureStore& store) {
  options.dsp.validate();
  PHONOVC_CHECK(manifest.sample_rate == options.dsp.sample_rate &&
                    manifest.hop_length == options.dsp.hop_length &&
                    manifest.fft_size == options.dsp.n_fft,
                ConfigError, "manifest and DSP settings disagree");
  const size_t n = manifest.entries.size();
  std::vector<std::optional<RawUtterance>> raws(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < n; i = next++) {
      const auto& e = manifest.entries[i];
      try {
        raws[i] = extract_raw(e, read_wav(e.audio_path), providers,
                              options.dsp, options.repair_budget);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp<int>(options.jobs, 1, std::max<int>(1, int(n)));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  PreprocessSummary summary;
  std::vector<std::string> ids;
  CorpusInfo info;
  info.dsp = options.dsp;
  info.providers = options.providers_name;
  info.seed = options.seed;
  info.bert_dim = providers.bert->dim();
  info.ssl_dim = providers.ssl->dim();
  for (size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& ex) {
        throw ExtractionError(detail::concat("preprocess failed on '",
                                             manifest.entries[i].utterance_id,
                                             "': ", ex.what()));
      }
    }
    const UtteranceFeatures f = assign_tokens(*raws[i], summary.tables, true);
    store.write(f, raws[i]->speaker);
    ids.push_back(f.utterance_id);
    raws[i].reset();
  }
  store.write_info(info);
  store.write_tables(summary.tables);
  store.write_index(ids);
  summary.utterances = static_cast<int>(n);
  return summary;
}

}  // namespace phonovc
