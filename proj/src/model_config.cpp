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

#include "phonovc/model_config.hpp"

#include "phonovc/error.hpp"

namespace phonovc {

long ModelConfig::output_samples(long frames) const {
  long n = frames;
  for (int u : upsample_factors) n *= u;
  return n;
}

void ModelConfig::validate() const {
  PHONOVC_CHECK(hidden >= 1 && bert_dim >= 1 && ssl_dim >= 1 &&
                    speaker_dim >= 1 && dur_channels >= 1 && n_mels >= 1,
                ConfigError, "model dimensions must be positive");
  PHONOVC_CHECK(hidden % 2 == 0 || !use_flow, ConfigError,
                "flow coupling needs an even hidden dimension, got ", hidden);
  PHONOVC_CHECK(n_words >= 2 && n_phones >= 2 && n_tones >= 1 &&
                    n_speakers >= 1,
                ConfigError, "vocabulary and speaker counts must be positive");
  PHONOVC_CHECK(text_blocks >= 0 && prior_blocks >= 0 && mel_layers >= 1 &&
                    posterior_layers >= 1 && flow_layers >= 0 &&
                    flow_wn_layers >= 1,
                ConfigError, "layer counts out of range");
  PHONOVC_CHECK(posterior_kernel % 2 == 1, ConfigError,
                "posterior.kernel must be odd");
  PHONOVC_CHECK(logsigma_clamp > 0, ConfigError,
                "prior.logsigma_clamp must be positive");
  PHONOVC_CHECK(!upsample_factors.empty(), ConfigError,
                "vocoder.upsample_factors is empty");
  long product = 1;
  for (int u : upsample_factors) {
    PHONOVC_CHECK(u >= 1, ConfigError, "upsample factor ", u, " invalid");
    product *= u;
  }
  PHONOVC_CHECK(product == hop_length, ConfigError,
                "vocoder.upsample_factors multiply to ", product,
                " but hop length is ", hop_length);
  PHONOVC_CHECK(gen_channels >> upsample_factors.size() >= 1, ConfigError,
                "vocoder.initial_channels too small for ",
                upsample_factors.size(), " upsampling stages");
  PHONOVC_CHECK(!resblock_kernels.empty() && !resblock_dilations.empty(),
                ConfigError, "resblock kernels and dilations must be non-empty");
  for (int k : resblock_kernels) {
    PHONOVC_CHECK(k % 2 == 1, ConfigError, "resblock kernel ", k,
                  " must be odd");
  }
  for (int p : periods) {
    PHONOVC_CHECK(p >= 2, ConfigError, "discriminator period ", p,
                  " must be at least 2");
  }
  PHONOVC_CHECK(scales >= 0 && disc_channels >= 1 && disc_layers >= 1,
                ConfigError, "discriminator settings out of range");
  PHONOVC_CHECK(noise_scale >= 0, ConfigError,
                "infer.noise_scale must be non-negative");
}

void ModelConfig::read(const Config& c) {
  hidden = c.get_int("text.hidden_dim", hidden);
  for (const char* key : {"ssl.hidden_dim", "prior.hidden_dim"}) {
    PHONOVC_CHECK(c.get_int(key, hidden) == hidden, ConfigError, key, " = ",
                  c.get_int(key, hidden), " must equal text.hidden_dim = ",
                  hidden);
  }
  bert_dim = c.get_int("text.bert_dim", bert_dim);
  ssl_dim = c.get_int("ssl.input_dim", ssl_dim);
  n_words = c.get_int("text.n_words", n_words);
  n_phones = c.get_int("text.n_phones", n_phones);
  n_tones = c.get_int("text.n_tones", n_tones);
  n_speakers = c.get_int("model.n_speakers", n_speakers);
  speaker_dim = c.get_int("model.speaker_dim", speaker_dim);
  text_blocks = c.get_int("text.n_blocks", text_blocks);
  ssl_alpha = c.get_double("ssl.alpha", ssl_alpha);
  ssl_beta = c.get_double("ssl.beta", ssl_beta);
  prior_blocks = c.get_int("prior.n_blocks", prior_blocks);
  logsigma_clamp = c.get_double("prior.logsigma_clamp", logsigma_clamp);
  n_mels = c.get_int("mel.n_mels", n_mels);
  mel_layers = c.get_int("mel.layers", mel_layers);
  dur_channels = c.get_int("dur.channels", dur_channels);
  dur_zero_init = c.get_bool("dur.zero_init", dur_zero_init);
  linear_bins = c.get_int("posterior.linear_bins", linear_bins);
  posterior_layers = c.get_int("posterior.layers", posterior_layers);
  posterior_kernel = c.get_int("posterior.kernel", posterior_kernel);
  use_flow = c.get_bool("model.use_flow", use_flow);
  flow_layers = c.get_int("flow.layers", flow_layers);
  flow_wn_layers = c.get_int("flow.wn_layers", flow_wn_layers);
  hop_length = c.get_int("vocoder.hop_length", hop_length);
  gen_channels = c.get_int("vocoder.initial_channels", gen_channels);
  upsample_factors = c.get_ints("vocoder.upsample_factors", upsample_factors);
  resblock_kernels = c.get_ints("vocoder.resblock_kernels", resblock_kernels);
  resblock_dilations =
      c.get_ints("vocoder.resblock_dilations", resblock_dilations);
  periods = c.get_ints("vocoder.periods", periods);
  scales = c.get_int("vocoder.scales", scales);
  disc_channels = c.get_int("vocoder.disc_channels", disc_channels);
  disc_layers = c.get_int("vocoder.disc_layers", disc_layers);
  noise_scale = c.get_double("infer.noise_scale", noise_scale);
  seed = std::stoull(c.get_string("model.seed", std::to_string(seed)));
}

void ModelConfig::write(Config& c) const {
  c.set("text.hidden_dim", hidden);
  c.set("ssl.hidden_dim", hidden);
  c.set("prior.hidden_dim", hidden);
  c.set("text.bert_dim", bert_dim);
  c.set("ssl.input_dim", ssl_dim);
  c.set("text.n_words", n_words);
  c.set("text.n_phones", n_phones);
  c.set("text.n_tones", n_tones);
  c.set("model.n_speakers", n_speakers);
  c.set("model.speaker_dim", speaker_dim);
  c.set("text.n_blocks", text_blocks);
  c.set("ssl.alpha", ssl_alpha);
  c.set("ssl.beta", ssl_beta);
  c.set("prior.n_blocks", prior_blocks);
  c.set("prior.logsigma_clamp", logsigma_clamp);
  c.set("mel.n_mels", n_mels);
  c.set("mel.layers", mel_layers);
  c.set("dur.channels", dur_channels);
  c.set("dur.zero_init", dur_zero_init);
  c.set("posterior.linear_bins", linear_bins);
  c.set("posterior.layers", posterior_layers);
  c.set("posterior.kernel", posterior_kernel);
  c.set("model.use_flow", use_flow);
  c.set("flow.layers", flow_layers);
  c.set("flow.wn_layers", flow_wn_layers);
  c.set("vocoder.hop_length", hop_length);
  c.set("vocoder.initial_channels", gen_channels);
  c.set("vocoder.upsample_factors", upsample_factors);
  c.set("vocoder.resblock_kernels", resblock_kernels);
  c.set("vocoder.resblock_dilations", resblock_dilations);
  c.set("vocoder.periods", periods);
  c.set("vocoder.scales", scales);
  c.set("vocoder.disc_channels", disc_channels);
  c.set("vocoder.disc_layers", disc_layers);
  c.set("infer.noise_scale", noise_scale);
  c.set("model.seed", std::to_string(seed));
}

void TrainConfig::validate() const {
  PHONOVC_CHECK(batch_size >= 1 && total_steps >= 1 &&
                    checkpoint_interval >= 1 && segment_frames >= 1,
                ConfigError, "training counts must be positive");
  PHONOVC_CHECK(lr_g > 0 && lr_d > 0 && eps > 0 && beta1 >= 0 && beta1 < 1 &&
                    beta2 >= 0 && beta2 < 1 && weight_decay >= 0 &&
                    grad_clip >= 0,
                ConfigError, "optimizer settings out of range");
  PHONOVC_CHECK(w_rec >= 0 && w_melpre >= 0 && w_kl >= 0 && w_dur >= 0 &&
                    w_g >= 0 && mel_scale > 0,
                ConfigError, "loss weights must be non-negative");
}

void TrainConfig::read(const Config& c) {
  batch_size = c.get_int("train.batch_size", batch_size);
  lr_g = c.get_double("train.lr_g", lr_g);
  lr_d = c.get_double("train.lr_d", lr_d);
  beta1 = c.get_double("train.beta1", beta1);
  beta2 = c.get_double("train.beta2", beta2);
  eps = c.get_double("train.eps", eps);
  weight_decay = c.get_double("train.weight_decay", weight_decay);
  grad_clip = c.get_double("train.grad_clip", grad_clip);
  w_rec = c.get_double("loss.rec", w_rec);
  w_melpre = c.get_double("loss.melpre", w_melpre);
  w_kl = c.get_double("loss.kl", w_kl);
  w_dur = c.get_double("loss.dur", w_dur);
  w_g = c.get_double("loss.g", w_g);
  mel_scale_enabled = c.get_bool("loss.mel_scale_enabled", mel_scale_enabled);
  mel_scale = c.get_double("loss.mel_scale", mel_scale);
  total_steps = c.get_int("train.total_steps", total_steps);
  checkpoint_interval =
      c.get_int("train.checkpoint_interval", checkpoint_interval);
  seed = std::stoull(c.get_string("train.seed", std::to_string(seed)));
  segment_frames = c.get_int("train.segment_frames", segment_frames);
}

void TrainConfig::write(Config& c) const {
  c.set("train.batch_size", batch_size);
  c.set("train.lr_g", lr_g);
  c.set("train.lr_d", lr_d);
  c.set("train.beta1", beta1);
  c.set("train.beta2", beta2);
  c.set("train.eps", eps);
  c.set("train.weight_decay", weight_decay);
  c.set("train.grad_clip", grad_clip);
  c.set("loss.rec", w_rec);
  c.set("loss.melpre", w_melpre);
  c.set("loss.kl", w_kl);
  c.set("loss.dur", w_dur);
  c.set("loss.g", w_g);
  c.set("loss.mel_scale_enabled", mel_scale_enabled);
  c.set("loss.mel_scale", mel_scale);
  c.set("train.total_steps", total_steps);
  c.set("train.checkpoint_interval", checkpoint_interval);
  c.set("train.seed", std::to_string(seed));
  c.set("train.segment_frames", segment_frames);
}

Config preset_config(const std::string& name) {
  Config c;
  if (name == "paper") {
    ModelConfig m;
    m.write(c);
    TrainConfig t;
    t.write(c);
    return c;
  }
  PHONOVC_CHECK(name == "desk", ConfigError, "unknown preset '", name,
                "' (expected desk or paper)");
  c.set("text.hidden_dim", 64);
  c.set("ssl.hidden_dim", 64);
  c.set("prior.hidden_dim", 64);
  c.set("model.speaker_dim", 64);
  c.set("text.n_blocks", 1);
  c.set("prior.n_blocks", 2);
  c.set("dur.channels", 64);
  c.set("mel.layers", 2);
  c.set("posterior.layers", 4);
  c.set("flow.layers", 2);
  c.set("flow.wn_layers", 2);
  c.set("vocoder.initial_channels", 64);
  c.set("vocoder.upsample_factors", std::vector<int>{8, 8, 8});
  c.set("vocoder.resblock_kernels", std::vector<int>{3});
  c.set("vocoder.resblock_dilations", std::vector<int>{1, 3});
  c.set("vocoder.disc_channels", 8);
  c.set("vocoder.disc_layers", 3);
  c.set("train.batch_size", 2);
  c.set("train.lr_g", 1e-3);
  c.set("train.lr_d", 1e-3);
  c.set("train.total_steps", 200);
  c.set("train.checkpoint_interval", 50);
  c.set("train.segment_frames", 12);
  return c;
}

}  // namespace phonovc
