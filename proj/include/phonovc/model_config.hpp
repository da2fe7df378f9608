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

#ifndef PHONOVC_MODEL_CONFIG_HPP_
#define PHONOVC_MODEL_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "phonovc/config.hpp"

namespace phonovc {

struct ModelConfig {
  // Shared phoneme/frame width; text.hidden_dim, ssl.hidden_dim and
  // prior.hidden_dim must agree.
  int hidden = 192;
  int bert_dim = 192;
  int ssl_dim = 256;
  int n_words = 2;
  int n_phones = 2;
  int n_tones = 8;
  int n_speakers = 1;
  int speaker_dim = 192;
  int text_blocks = 1;

  double ssl_alpha = 1.0;
  double ssl_beta = 0.5;

  int prior_blocks = 4;
  double logsigma_clamp = 7.0;
  int n_mels = 80;
  int mel_layers = 2;
  int dur_channels = 192;
  bool dur_zero_init = false;

  int linear_bins = 1025;
  int posterior_layers = 16;
  int posterior_kernel = 5;
  bool use_flow = true;
  int flow_layers = 4;
  int flow_wn_layers = 4;

  int hop_length = 512;
  int gen_channels = 512;
  std::vector<int> upsample_factors = {8, 8, 4, 2};
  std::vector<int> resblock_kernels = {3, 7, 11};
  std::vector<int> resblock_dilations = {1, 3, 5};
  std::vector<int> periods = {2, 3, 5, 7, 11};
  int scales = 3;
  int disc_channels = 32;  // first-layer width; doubled per layer
  int disc_layers = 4;

  double noise_scale = 0.667;
  uint64_t seed = 1;

  // Generator output samples for f frames: f * product(upsample_factors),
  // which validate() pins to f * hop_length.
  long output_samples(long frames) const;
  void validate() const;
  void read(const Config& config);
  void write(Config& config) const;
};

struct TrainConfig {
  int batch_size = 16;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double eps = 1e-9;
  double weight_decay = 0.01;
  double grad_clip = 0.0;  // global norm; 0 disables

  double w_rec = 1.0;
  double w_melpre = 1.0;
  double w_kl = 1.0;
  double w_dur = 1.0;
  double w_g = 1.0;
  bool mel_scale_enabled = false;
  double mel_scale = 45.0;  // applied to l_rec and l_melpre when enabled

  int total_steps = 500000;
  int checkpoint_interval = 10000;
  uint64_t seed = 1;
  int segment_frames = 32;

  void validate() const;
  void read(const Config& config);
  void write(Config& config) const;
};

// Preset values as a Config overlay; names are "desk" and "paper".
Config preset_config(const std::string& name);

}  // namespace phonovc

#endif  // PHONOVC_MODEL_CONFIG_HPP_
