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

#include "phonovc/posterior_decoder.hpp"

#include <array>
#include <string>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

constexpr double kSlope = 0.1;

std::string idx(const std::string& prefix, size_t i) {
  return prefix + "." + std::to_string(i);
}

}  // namespace

PosteriorParams PosteriorParams::make(nn::ParameterStore& ps,
                                      const ModelConfig& cfg) {
  PosteriorParams p;
  p.pre = nn::Conv::make(ps, "posterior.pre", cfg.linear_bins, cfg.hidden, 1);
  p.enc = nn::WaveNet::make(ps, "posterior.wn", cfg.hidden, cfg.posterior_kernel,
                            cfg.posterior_layers, cfg.speaker_dim);
  p.proj = nn::Conv::make(ps, "posterior.proj", cfg.hidden, 2 * cfg.hidden, 1);
  return p;
}

LatentPosterior posterior_encode(const Matrix& linear_spec, const ag::Var& spk,
                                 const PosteriorParams& params, Rng& rng,
                                 double noise_scale) {
  PHONOVC_CHECK(linear_spec.rows() == params.pre.w.cols(), ShapeError,
                "posterior_encode: spectrogram has ", linear_spec.rows(),
                " bins, model expects ", params.pre.w.cols());
  PHONOVC_CHECK(linear_spec.cols() >= 1, ShapeError,
                "posterior_encode: empty spectrogram");
  const Eigen::Index h = params.proj.w.rows() / 2;
  ag::Var x = params.pre(ag::constant(linear_spec));
  ag::Var stats = params.proj(params.enc(x, spk));
  LatentPosterior post;
  post.mu = ag::slice_rows(stats, 0, h);
  post.logsigma = ag::slice_rows(stats, h, h);
  if (noise_scale == 0.0) {
    post.z = post.mu;
  } else {
    Matrix eps = rng.normal_matrix(h, linear_spec.cols(), noise_scale);
    post.z = ag::add(post.mu, ag::mul(ag::exp(post.logsigma), ag::constant(eps)));
  }
  return post;
}

FlowParams FlowParams::make(nn::ParameterStore& ps, const ModelConfig& cfg) {
  FlowParams p;
  p.channels = cfg.hidden;
  if (!cfg.use_flow) return p;
  const int half = cfg.hidden / 2;
  for (int i = 0; i < cfg.flow_layers; ++i) {
    const std::string name = idx("flow", i);
    CouplingLayer l;
    l.pre = nn::Conv::make(ps, name + ".pre", half, cfg.hidden, 1);
    l.enc = nn::WaveNet::make(ps, name + ".wn", cfg.hidden, 5, cfg.flow_wn_layers,
                              cfg.speaker_dim);
    l.post = nn::Conv::make(ps, name + ".post", cfg.hidden, half, 1, 1,
                            nn::Init::kZero);
    l.flip = (i % 2) == 1;
    p.layers.push_back(std::move(l));
  }
  return p;
}

FlowResult flow_transport(const ag::Var& z, const ag::Var& spk,
                          FlowDirection direction, const FlowParams& params) {
  PHONOVC_CHECK(direction == FlowDirection::kForward ||
                    direction == FlowDirection::kInverse,
                ConfigError, "flow_transport: invalid direction");
  FlowResult out;
  out.z = z;
  if (params.layers.empty()) return out;
  PHONOVC_CHECK(z.rows() == params.channels, ShapeError, "flow_transport: ",
                z.rows(), " channels, expected ", params.channels);
  const Eigen::Index half = params.channels / 2;
  auto apply = [&](const CouplingLayer& l, const ag::Var& x, double sign) {
    ag::Var a = ag::slice_rows(x, 0, half);
    ag::Var b = ag::slice_rows(x, half, half);
    const ag::Var& cond = l.flip ? b : a;
    const ag::Var& moved = l.flip ? a : b;
    ag::Var shift = l.post(l.enc(l.pre(cond), spk));
    ag::Var shifted = ag::add(moved, ag::scale(shift, sign));
    std::array<ag::Var, 2> parts = l.flip ? std::array<ag::Var, 2>{shifted, b}
                                          : std::array<ag::Var, 2>{a, shifted};
    return ag::concat_rows(parts);
  };
  if (direction == FlowDirection::kForward) {
    for (const auto& l : params.layers) out.z = apply(l, out.z, 1.0);
  } else {
    for (auto it = params.layers.rbegin(); it != params.layers.rend(); ++it) {
      out.z = apply(*it, out.z, -1.0);
    }
  }
  return out;
}

GeneratorParams GeneratorParams::make(nn::ParameterStore& ps,
                                      const ModelConfig& cfg) {
  GeneratorParams g;
  g.factors = cfg.upsample_factors;
  const int c0 = cfg.gen_channels;
  g.pre = nn::Conv::make(ps, "gen.pre", cfg.hidden, c0, 7);
  g.cond = nn::Linear::make(ps, "gen.cond", cfg.speaker_dim, c0);
  int ch = c0;
  for (size_t i = 0; i < g.factors.size(); ++i) {
    const int next = ch / 2;
    g.ups.push_back(nn::ConvTranspose::make_upsample(ps, idx("gen.up", i), ch,
                                                     next, g.factors[i]));
    std::vector<ResBlock> stage;
    for (size_t k = 0; k < cfg.resblock_kernels.size(); ++k) {
      ResBlock rb;
      const int kernel = cfg.resblock_kernels[k];
      for (size_t d = 0; d < cfg.resblock_dilations.size(); ++d) {
        const std::string name = idx(idx(idx("gen.res", i), k), d);
        rb.convs1.push_back(nn::Conv::make(ps, name + ".c1", next, next, kernel,
                                           cfg.resblock_dilations[d],
                                           nn::Init::kSmall));
        rb.convs2.push_back(nn::Conv::make(ps, name + ".c2", next, next, kernel,
                                           1, nn::Init::kSmall));
      }
      stage.push_back(std::move(rb));
    }
    g.blocks.push_back(std::move(stage));
    ch = next;
  }
  g.post = nn::Conv::make(ps, "gen.post", ch, 1, 7);
  return g;
}

ag::Var generate_waveform(const ag::Var& z, const ag::Var& spk,
                          const GeneratorParams& params) {
  PHONOVC_CHECK(z.rows() * 7 == params.pre.w.cols(), ShapeError,
                "generate_waveform: latent has ", z.rows(), " channels");
  PHONOVC_CHECK(z.cols() >= 1, ShapeError, "generate_waveform: empty latent");
  ag::Var x = params.pre(z);
  if (spk.defined()) x = ag::add_column(x, params.cond(spk));
  for (size_t i = 0; i < params.ups.size(); ++i) {
    x = params.ups[i](ag::leaky_relu(x, kSlope));
    ag::Var sum;
    for (const auto& rb : params.blocks[i]) {
      ag::Var h = x;
      for (size_t d = 0; d < rb.convs1.size(); ++d) {
        ag::Var t = rb.convs1[d](ag::leaky_relu(h, kSlope));
        t = rb.convs2[d](ag::leaky_relu(t, kSlope));
        h = ag::add(h, t);
      }
      sum = sum.defined() ? ag::add(sum, h) : h;
    }
    x = ag::scale(sum, 1.0 / params.blocks[i].size());
  }
  return ag::tanh(params.post(ag::leaky_relu(x, 0.01)));
}

DiscriminatorBank DiscriminatorBank::make(nn::ParameterStore& ps,
                                          const ModelConfig& cfg) {
  DiscriminatorBank bank;
  for (size_t i = 0; i < cfg.periods.size(); ++i) {
    const std::string name = idx("mpd", i);
    SubDiscriminator d;
    d.period = cfg.periods[i];
    int in = 1;
    for (int l = 0; l < cfg.disc_layers; ++l) {
      const int out = cfg.disc_channels << l;
      d.convs.push_back(nn::Conv::make_strided(ps, idx(name + ".conv", l), in,
                                               out, 5, 3, 2, d.period));
      in = out;
    }
    d.convs.push_back(nn::Conv::make_strided(ps, name + ".conv_last", in, in, 5,
                                             1, 2, d.period));
    d.post = nn::Conv::make_strided(ps, name + ".post", in, 1, 3, 1, 1, d.period);
    bank.mpd.push_back(std::move(d));
  }
  for (int s = 0; s < cfg.scales; ++s) {
    const std::string name = idx("msd", s);
    SubDiscriminator d;
    d.pool_steps = s;
    d.convs.push_back(nn::Conv::make_strided(ps, name + ".conv.0", 1,
                                             cfg.disc_channels, 15, 1, 7));
    int in = cfg.disc_channels;
    for (int l = 1; l < cfg.disc_layers; ++l) {
      const int out = cfg.disc_channels << l;
      d.convs.push_back(nn::Conv::make_strided(ps, idx(name + ".conv", l), in,
                                               out, 41, 4, 20));
      in = out;
    }
    d.convs.push_back(nn::Conv::make_strided(ps, name + ".conv_last", in, in, 5,
                                             1, 2));
    d.post = nn::Conv::make_strided(ps, name + ".post", in, 1, 3, 1, 1);
    bank.msd.push_back(std::move(d));
  }
  return bank;
}

int fold_period_length(int length, int period) {
  PHONOVC_CHECK(period >= 1 && length >= 1, ShapeError,
                "fold_period: invalid length ", length, " or period ", period);
  return ((length + period - 1) / period) * period;
}

ag::Var fold_period(const ag::Var& audio, int period) {
  PHONOVC_CHECK(audio.rows() == 1, ShapeError,
                "fold_period expects a [1 x L] waveform");
  const int length = static_cast<int>(audio.cols());
  const int pad = fold_period_length(length, period) - length;
  if (pad == 0) return audio;
  PHONOVC_CHECK(pad < length, ShapeError, "fold_period: waveform of ", length,
                " samples too short for period ", period);
  return ag::pad_reflect_cols(audio, 0, pad);
}

DiscriminatorOutput run_discriminators(const ag::Var& audio,
                                       const DiscriminatorBank& bank) {
  PHONOVC_CHECK(audio.rows() == 1, ShapeError,
                "discriminators expect a [1 x L] waveform");
  DiscriminatorOutput out;
  auto run = [&out](const SubDiscriminator& d, ag::Var x) {
    std::vector<ag::Var> feats;
    for (const auto& conv : d.convs) {
      x = ag::leaky_relu(conv(x), kSlope);
      feats.push_back(x);
    }
    x = d.post(x);
    feats.push_back(x);
    out.scores.push_back(x);
    out.features.push_back(std::move(feats));
  };
  for (const auto& d : bank.mpd) run(d, fold_period(audio, d.period));
  ag::Var pooled = audio;
  int steps = 0;
  for (const auto& d : bank.msd) {
    for (; steps < d.pool_steps; ++steps) pooled = ag::avg_pool_cols(pooled, 4, 2, 2);
    run(d, pooled);
  }
  return out;
}

Discrimination discriminate(const ag::Var& audio_real,
                            const ag::Var& audio_fake,
                            const DiscriminatorBank& bank) {
  PHONOVC_CHECK(audio_real.rows() == 1 && audio_fake.rows() == 1 &&
                    audio_real.cols() == audio_fake.cols(),
                ShapeError, "discriminate: real has ", audio_real.cols(),
                " samples, fake has ", audio_fake.cols());
  return {run_discriminators(audio_real, bank),
          run_discriminators(audio_fake, bank)};
}

}  // namespace phonovc
