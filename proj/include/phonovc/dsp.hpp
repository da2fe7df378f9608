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

// Audio I/O and spectrogram front-end.
//
// Framing convention: the signal is reflect-padded by (n_fft - hop) / 2
// samples on both sides and framed without centering, which yields exactly
// floor(L / hop) frames for a signal of L samples. The vocoder inverts this
// grid exactly: f frames become f * hop samples.

#ifndef PHONOVC_DSP_HPP_
#define PHONOVC_DSP_HPP_

#include <string>
#include <vector>

#include "phonovc/autograd.hpp"

namespace phonovc {

struct Audio {
  std::vector<double> samples;
  int sample_rate = 0;

  double seconds() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

struct DspConfig {
  int sample_rate = 44100;
  int n_fft = 2048;
  int hop_length = 512;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2

  int linear_bins() const { return n_fft / 2 + 1; }
  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

// Mono WAV; PCM 16/24/32-bit and IEEE float 32/64 are accepted.
// Multi-channel input is averaged to mono.
Audio read_wav(const std::string& path);
// Writes 16-bit PCM; samples are clipped to [-1, 1].
void write_wav(const std::string& path, const Audio& audio);

// Number of spectrogram frames for a signal of `num_samples` samples.
int frame_count(long num_samples, const DspConfig& config);

std::vector<double> hann_window(int length);

// Slaney-style mel filterbank, [n_mels x n_fft/2+1].
Matrix mel_filterbank(const DspConfig& config);

// [1 x L] signal -> [n_fft/2+1 x floor(L/hop)] magnitude spectrogram.
// Differentiable with respect to the signal.
ag::Var linear_spectrogram(const ag::Var& signal, const DspConfig& config);

// log(max(mel_basis * magnitude, 1e-5)), differentiable.
ag::Var log_mel_from_linear(const ag::Var& linear, const DspConfig& config);

// Convenience wrappers on plain sample buffers (no gradient).
Matrix linear_spectrogram(const std::vector<double>& samples,
                          const DspConfig& config);
Matrix log_mel_spectrogram(const std::vector<double>& samples,
                           const DspConfig& config);

}  // namespace phonovc

#endif  // PHONOVC_DSP_HPP_
