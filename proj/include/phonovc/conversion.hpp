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

#ifndef PHONOVC_CONVERSION_HPP_
#define PHONOVC_CONVERSION_HPP_

#include <string>
#include <vector>

#include "phonovc/frontend.hpp"
#include "phonovc/training.hpp"

namespace phonovc {

struct ConversionOptions {
  bool repredict = false;
  double pace = 1.0;
  uint64_t seed = 0;
  double noise_scale = -1.0;  // negative: the model's infer.noise_scale
};

// dur.enabled (default false) and dur.pace (default 1.0) from a model
// config; flags given on the command line override them.
ConversionOptions conversion_defaults(const Config& config);

struct DurationRecord {
  std::string utterance_id;
  std::vector<int> source;  // source pframe
  std::vector<int> used;    // durations the prior path was expanded with

  std::string to_json() const;
  static DurationRecord from_json(const std::string& text);
};

struct ConversionResult {
  Audio audio;
  DurationRecord durations;
  int frames = 0;
  Matrix logw_pred;  // [1 x d] target-speaker log durations at pace 1
};

// Content from `source`, speaker embedding from `target_speaker`. With
// repredict off the source pframe is reused verbatim; with it on the
// durations are max(1, round(exp(logw) * pace)).
ConversionResult convert_features(const UtteranceFeatures& source,
                                  int target_speaker, const Model& model,
                                  const DspConfig& dsp,
                                  const ConversionOptions& options);

// Providers matching the ones a corpus was extracted with.
ExtractorProviderSet providers_for_corpus(const CorpusInfo& info);

// Extracts features from `audio` with the checkpoint's token tables (unknown
// tokens map to <unk>) and converts. ConfigError for an unknown speaker.
ConversionResult convert(const Audio& audio, const std::string& utterance_id,
                         const std::string& target_speaker,
                         const TrainingSession& checkpoint,
                         const ExtractorProviderSet& providers,
                         const ConversionOptions& options,
                         const std::string& transcript = "");

struct BatchFailure {
  std::string utterance_id;
  std::string message;
};

struct BatchResult {
  CorpusManifest outputs;  // converted audio, speaker = target
  std::vector<DurationRecord> records;
  std::vector<BatchFailure> failures;
};

// Writes OUT/wav/<id>.wav, OUT/durations/<id>.json, OUT/manifest.txt,
// OUT/failures.txt and duration profiles under OUT/profiles/{conv,source}.
// A failing utterance is recorded and the batch continues.
BatchResult batch_convert(const CorpusManifest& manifest,
                          const std::string& target_speaker,
                          const TrainingSession& checkpoint,
                          const ExtractorProviderSet& providers,
                          const ConversionOptions& options,
                          const std::string& out_dir);

}  // namespace phonovc

#endif  // PHONOVC_CONVERSION_HPP_
