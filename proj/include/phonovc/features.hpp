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

#ifndef PHONOVC_FEATURES_HPP_
#define PHONOVC_FEATURES_HPP_

#include <span>
#include <string>
#include <vector>

#include "phonovc/autograd.hpp"

namespace phonovc {

// Everything the model consumes for one utterance. Matrices are
// [feature x time]; "time" is words for words_bert and spectrogram frames
// for contentvec / linear_spec / mel_spec.
struct UtteranceFeatures {
  std::string utterance_id;
  std::vector<int> words;     // W token ids
  std::vector<int> phonemes;  // P token ids
  std::vector<int> tones;     // W tone ids, 0 = no tone
  Matrix words_bert;          // [bert_dim x W]
  std::vector<int> pframe;    // P frame counts
  std::vector<int> wframe;    // W frame counts
  std::vector<int> w2p;       // W phoneme counts
  int speaker = 0;
  Matrix contentvec;   // [ssl_dim x f], already on the spectrogram grid
  Matrix linear_spec;  // [n_fft/2+1 x f]
  Matrix mel_spec;     // [n_mels x f]
  std::vector<double> audio;

  int num_words() const { return static_cast<int>(words.size()); }
  int num_phonemes() const { return static_cast<int>(phonemes.size()); }
  int num_frames() const { return static_cast<int>(mel_spec.cols()); }
};

struct Violation {
  std::string invariant;  // e.g. "sum(pframe)≠frames"
  std::string detail;
};

// Empty iff every cross-field invariant of UtteranceFeatures holds.
std::vector<Violation> validate_alignment(const UtteranceFeatures& features);

// wframe[i] = sum of pframe over the w2p[i] phonemes of word i.
std::vector<int> word_frames(std::span<const int> pframe,
                             std::span<const int> w2p);

constexpr int kDefaultRepairBudget = 3;

// Adjusts pframe so it sums to target_frames. Units are handed out one per
// phoneme in order of decreasing length (ties: earlier phoneme first),
// cycling if needed; no entry may drop below 1. Throws AlignmentError when
// the deviation exceeds the budget or cannot be absorbed.
std::vector<int> repair_durations(std::span<const int> pframe,
                                  int target_frames,
                                  int budget = kDefaultRepairBudget);

// Linear interpolation along time onto target_frames columns. Query j maps
// to source position j * (f_ssl - 1) / (target_frames - 1) (end points
// aligned); a single-column target samples the middle of the source.
Matrix resample_ssl(const Matrix& raw, int target_frames);

}  // namespace phonovc

#endif  // PHONOVC_FEATURES_HPP_
