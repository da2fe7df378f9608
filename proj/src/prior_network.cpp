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

#include "phonovc/prior_network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phonovc/error.hpp"

namespace phonovc {

PriorParams PriorParams::make(nn::ParameterStore& ps, const ModelConfig& cfg) {
  PriorParams p;
  const int h = cfg.hidden;
  p.input_norm = nn::LayerNorm::make(ps, "prior.input_norm", h);
  for (int i = 0; i < cfg.prior_blocks; ++i) {
    const std::string name = "prior.enc." + std::to_string(i);
    p.enc_spk.push_back(nn::Linear::make(ps, name + ".spk", cfg.speaker_dim, h));
    p.enc_blocks.push_back(nn::AttentionBlock::make(ps, name, h));
  }
  const int c = cfg.dur_channels;
  p.dur_conv1 = nn::Conv::make(ps, "dur.conv1", h, c, 3);
  p.dur_norm1 = nn::LayerNorm::make(ps, "dur.norm1", c);
  p.dur_spk = nn::Linear::make(ps, "dur.spk", cfg.speaker_dim, c);
  p.dur_conv2 = nn::Conv::make(ps, "dur.conv2", c, c, 3);
  p.dur_norm2 = nn::LayerNorm::make(ps, "dur.norm2", c);
  p.dur_out = nn::Linear::make(ps, "dur.out", c, 1,
                               cfg.dur_zero_init ? nn::Init::kZero : nn::Init::kFanIn);
  for (int i = 0; i < cfg.mel_layers; ++i) {
    const std::string name = "mel." + std::to_string(i);
    p.mel_convs.push_back(nn::Conv::make(ps, name + ".conv", h, h, 3));
    p.mel_spk.push_back(nn::Linear::make(ps, name + ".spk", cfg.speaker_dim, h));
    p.mel_norms.push_back(nn::LayerNorm::make(ps, name + ".norm", h));
  }
  p.mel_out = nn::Linear::make(ps, "mel.out", h, cfg.n_mels);
  p.prenet = nn::Conv::make(ps, "mel.prenet", cfg.n_mels, h, 3);
  p.post1 = nn::Conv::make(ps, "mel.post1", h, h, 3);
  p.post2 = nn::Conv::make(ps, "mel.post2", h, h, 3, 1, nn::Init::kZero);
  p.stats = nn::Linear::make(ps, "prior.stats", h, 2 * h);
  p.logsigma_clamp = cfg.logsigma_clamp;
  return p;
}

PriorEncoding encode_prior(const ag::Var& c_text, const ag::Var& c_ssl,
                           const ag::Var& spk, const PriorParams& params) {
  PHONOVC_CHECK(c_text.rows() == c_ssl.rows() && c_text.cols() == c_ssl.cols(),
                ShapeError, "encode_prior: c_text [", c_text.rows(), "x",
                c_text.cols(), "] vs c_ssl [", c_ssl.rows(), "x",
                c_ssl.cols(), "]");
  PHONOVC_CHECK(spk.cols() == 1, ShapeError,
                "encode_prior: speaker embedding must be a column");
  PriorEncoding e;
  e.c = params.input_norm(ag::add(c_text, c_ssl));
  ag::Var x = e.c;
  for (size_t i = 0; i < params.enc_blocks.size(); ++i) {
    x = params.enc_blocks[i](ag::add_column(x, params.enc_spk[i](spk)));
  }
  e.x_d = x;
  return e;
}

ag::Var length_regulate(const ag::Var& x_d, std::span<const int> durations) {
  PHONOVC_CHECK(static_cast<Eigen::Index>(durations.size()) == x_d.cols(),
                ShapeError, "length_regulate: ", durations.size(),
                " durations for ", x_d.cols(), " phonemes");
  for (size_t i = 0; i < durations.size(); ++i) {
    PHONOVC_CHECK(durations[i] >= 1, AlignmentError,
                  "length_regulate: duration[", i, "] = ", durations[i]);
  }
  return ag::repeat_cols(x_d, durations);
}

Matrix length_regulate(const Matrix& x_d, std::span<const int> durations) {
  return length_regulate(ag::constant(x_d), durations).value();
}

MelAuxiliary mel_auxiliary(const ag::Var& x_f, const ag::Var& spk,
                           const PriorParams& params) {
  PHONOVC_CHECK(x_f.rows() == params.mel_out.w.cols(), ShapeError,
                "mel_auxiliary: input has ", x_f.rows(), " channels, expected ",
                params.mel_out.w.cols());
  ag::Var h = x_f;
  for (size_t i = 0; i < params.mel_convs.size(); ++i) {
    ag::Var y = ag::relu(ag::add_column(params.mel_convs[i](h),
                                        params.mel_spk[i](spk)));
    h = params.mel_norms[i](ag::add(h, y));
  }
  MelAuxiliary out;
  out.mel_hat = params.mel_out(h);
  ag::Var pre = ag::add(x_f, params.prenet(out.mel_hat));
  out.x = ag::add(pre, params.post2(ag::relu(params.post1(pre))));
  return out;
}

ag::Var predict_duration(const ag::Var& x_d, const ag::Var& spk,
                         const PriorParams& params) {
  PHONOVC_CHECK(x_d.rows() == params.dur_conv1.w.cols() / 3, ShapeError,
                "predict_duration: input has ", x_d.rows(), " channels");
  ag::Var h = params.dur_norm1(ag::relu(params.dur_conv1(x_d)));
  h = ag::add_column(h, params.dur_spk(spk));
  h = params.dur_norm2(ag::relu(params.dur_conv2(h)));
  return params.dur_out(h);
}

std::vector<int> durations_from_log(const Matrix& logw_pred, double pace) {
  PHONOVC_CHECK(pace > 0, ConfigError, "pace must be positive, got ", pace);
  std::vector<int> out(logw_pred.size());
  for (Eigen::Index i = 0; i < logw_pred.size(); ++i) {
    const double v = std::round(std::exp(logw_pred.data()[i]) * pace);
    out[i] = static_cast<int>(std::clamp(v, 1.0, 1e6));
  }
  return out;
}

Matrix log_durations(std::span<const int> pframe) {
  Matrix out(1, static_cast<Eigen::Index>(pframe.size()));
  for (size_t i = 0; i < pframe.size(); ++i) {
    PHONOVC_CHECK(pframe[i] >= 1, AlignmentError, "log_durations: pframe[", i,
                  "] = ", pframe[i]);
    out(0, i) = std::log(static_cast<double>(pframe[i]));
  }
  return out;
}

PriorDistribution prior_distribution(const ag::Var& x,
                                     const PriorParams& params) {
  const Eigen::Index h = params.stats.w.rows() / 2;
  ag::Var stats = params.stats(x);
  PriorDistribution d;
  d.mu = ag::slice_rows(stats, 0, h);
  d.logsigma = ag::clamp(ag::slice_rows(stats, h, h), -params.logsigma_clamp,
                         params.logsigma_clamp);
  return d;
}

PriorState run_prior(const ag::Var& c_text, const ag::Var& c_ssl,
                     const ag::Var& spk, std::span<const int> durations,
                     double pace, const PriorParams& params) {
  PriorState s;
  s.spk = spk;
  PriorEncoding enc = encode_prior(c_text, c_ssl, spk, params);
  s.c = enc.c;
  s.x_d = enc.x_d;
  s.logw_pred = predict_duration(s.x_d, spk, params);
  if (durations.empty()) {
    s.durations = durations_from_log(s.logw_pred.value(), pace);
  } else {
    s.durations.assign(durations.begin(), durations.end());
  }
  s.x_f = length_regulate(s.x_d, s.durations);
  MelAuxiliary mel = mel_auxiliary(s.x_f, spk, params);
  s.mel_hat = mel.mel_hat;
  s.x = mel.x;
  PriorDistribution dist = prior_distribution(s.x, params);
  s.prior_mu = dist.mu;
  s.prior_logsigma = dist.logsigma;
  return s;
}

}  // namespace phonovc
