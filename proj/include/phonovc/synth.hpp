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

// Synthetic multi-speaker corpus with known phoneme timing. Each speaker
// has its own pitch and spectral tilt; each phoneme its own formant pair.
// Every speaker reads the same texts, with per-phoneme durations equal to
// the text's base durations times the speaker's integer duration scale.

#ifndef PHONOVC_SYNTH_HPP_
#define PHONOVC_SYNTH_HPP_

#include <string>
#include <vector>

#include "phonovc/feature_store.hpp"
#include "phonovc/frontend.hpp"
#include "phonovc/providers.hpp"

namespace phonovc {

struct SynthSpec {
  int speakers = 4;
  int texts = 8;  // utterances per speaker
  std::vector<int> duration_scale = {2, 1, 1, 1};  // cycled over speakers
  int min_syllables = 2;
  int max_syllables = 4;
  int min_phone_frames = 3;
  int max_phone_frames = 6;
  uint64_t seed = 1234;
  DspConfig dsp;
  StubOptions stub;
};

struct SynthUtterance {
  ManifestEntry entry;  // audio_path left empty
  Audio audio;
  Transcription text;
  std::vector<int> pframe;
};

std::string synth_speaker_name(int speaker);
std::string synth_utterance_id(int speaker, int text);

// Renders one utterance of `text` by `speaker`.
SynthUtterance synth_utterance(const SynthSpec& spec, int speaker, int text);

// All utterances, speaker-major.
std::vector<SynthUtterance> synth_corpus(const SynthSpec& spec);

// Feature bundle from the known timing; text embeddings and SSL come from
// the stub providers.
RawUtterance synth_raw_features(const SynthUtterance& utt,
                                const ExtractorProviderSet& providers,
                                const DspConfig& dsp);

// Writes the corpus straight into a feature store (exact alignment).
PreprocessSummary write_synth_store(const SynthSpec& spec,
                                    const FeatureStore& store);

// Writes <dir>/wav/<id>.wav and <dir>/manifest.txt for the regular
// extraction path. Returns the manifest path.
std::string write_synth_audio(const SynthSpec& spec, const std::string& dir);

}  // namespace phonovc

#endif  // PHONOVC_SYNTH_HPP_
