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

#ifndef PHONOVC_FRONTEND_HPP_
#define PHONOVC_FRONTEND_HPP_

#include <string>
#include <utility>
#include <vector>

#include "phonovc/feature_store.hpp"
#include "phonovc/providers.hpp"

namespace phonovc {

// Provider outputs for one utterance with tokens still as strings.
struct RawUtterance {
  std::string utterance_id;
  std::string speaker;
  Transcription text;
  Alignment alignment;
  Matrix words_bert;
  Matrix contentvec;
  Matrix linear_spec;
  Matrix mel_spec;
  std::vector<double> audio;
};

// Runs every provider and the spectrogram front-end. Throws
// ExtractionError on inconsistent recognizer output, AlignmentError when
// the aligner misses the frame count by more than `repair_budget`.
RawUtterance extract_raw(const ManifestEntry& entry, const Audio& audio,
                         const ExtractorProviderSet& providers,
                         const DspConfig& dsp,
                         int repair_budget = kDefaultRepairBudget);

// Maps string tokens to ids. With `grow` the tables are extended with new
// tokens and speakers; otherwise unknown tokens become <unk> and unknown
// speakers raise ConfigError.
UtteranceFeatures assign_tokens(const RawUtterance& raw, TokenTables& tables,
                                bool grow);

// Reads the audio named by the entry (IoError if unreadable or at another
// sample rate) and returns a validated bundle.
UtteranceFeatures extract_features(const ManifestEntry& entry,
                                   const ExtractorProviderSet& providers,
                                   const DspConfig& dsp, TokenTables& tables,
                                   bool grow = true);
UtteranceFeatures extract_features(const ManifestEntry& entry,
                                   const Audio& audio,
                                   const ExtractorProviderSet& providers,
                                   const DspConfig& dsp, TokenTables& tables,
                                   bool grow = true);

struct PreprocessOptions {
  DspConfig dsp;
  int jobs = 1;
  int repair_budget = kDefaultRepairBudget;
  std::string providers_name = "stub";
  uint64_t seed = 0;
};

struct PreprocessSummary {
  int utterances = 0;
  TokenTables tables;
};

// Extracts the whole manifest (provider calls run on `jobs` workers; token
// ids are assigned in manifest order) and writes the feature store. The
// first failing utterance aborts with its id in the message.
PreprocessSummary preprocess_corpus(const CorpusManifest& manifest,
                                    const ExtractorProviderSet& providers,
                                    const PreprocessOptions& options,
                                    const FeatureStore& store);

}  // namespace phonovc

#endif  // PHONOVC_FRONTEND_HPP_
