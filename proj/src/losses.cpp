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

#include "phonovc/losses.hpp"

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

void check_four(const ag::Var& a, const ag::Var& b, const ag::Var& c,
                const ag::Var& d) {
  for (const ag::Var* v : {&b, &c, &d}) {
    PHONOVC_CHECK(v->rows() == a.rows() && v->cols() == a.cols(), ShapeError,
                  "kl_divergence: shape mismatch [", a.rows(), "x", a.cols(),
                  "] vs [", v->rows(), "x", v->cols(), "]");
  }
}

}  // namespace

ag::Var kl_divergence(const ag::Var& post_mu, const ag::Var& post_logsigma,
                      const ag::Var& prior_mu, const ag::Var& prior_logsigma) {
  check_four(post_mu, post_logsigma, prior_mu, prior_logsigma);
  ag::Var var_q = ag::exp(ag::scale(post_logsigma, 2.0));
  ag::Var inv_var_p = ag::exp(ag::scale(prior_logsigma, -2.0));
  ag::Var num = ag::add(var_q, ag::square(ag::sub(post_mu, prior_mu)));
  ag::Var kl = ag::add(ag::sub(prior_logsigma, post_logsigma),
                       ag::scale(ag::mul(num, inv_var_p), 0.5));
  return ag::add_scalar(ag::mean(kl), -0.5);
}

double kl_divergence(const Matrix& post_mu, const Matrix& post_logsigma,
                     const Matrix& prior_mu, const Matrix& prior_logsigma) {
  ag::NoGradGuard guard;
  return kl_divergence(ag::constant(post_mu), ag::constant(post_logsigma),
                       ag::constant(prior_mu), ag::constant(prior_logsigma))
      .item();
}

ag::Var duration_loss(const ag::Var& logw_pred, const Matrix& logw_true) {
  PHONOVC_CHECK(logw_pred.value().size() == logw_true.size() &&
                    logw_true.size() > 0,
                ShapeError, "duration_loss: ", logw_pred.value().size(),
                " predictions for ", logw_true.size(), " targets");
  Matrix target = logw_true;
  target.resize(logw_pred.rows(), logw_pred.cols());
  return ag::mse_loss(logw_pred, ag::constant(target));
}

double duration_loss(const Matrix& logw_pred, const Matrix& logw_true) {
  ag::NoGradGuard guard;
  return duration_loss(ag::constant(logw_pred), logw_true).item();
}

ag::Var discriminator_loss(const std::vector<ag::Var>& real_scores,
                           const std::vector<ag::Var>& fake_scores) {
  PHONOVC_CHECK(real_scores.size() == fake_scores.size() && !real_scores.empty(),
                ShapeError, "discriminator_loss: score lists differ");
  ag::Var total;
  for (size_t i = 0; i < real_scores.size(); ++i) {
    ag::Var r = ag::mean(ag::square(ag::add_scalar(real_scores[i], -1.0)));
    ag::Var g = ag::mean(ag::square(fake_scores[i]));
    ag::Var term = ag::add(r, g);
    total = total.defined() ? ag::add(total, term) : term;
  }
  return total;
}

ag::Var generator_adversarial_loss(const std::vector<ag::Var>& fake_scores) {
  PHONOVC_CHECK(!fake_scores.empty(), ShapeError,
                "generator_adversarial_loss: no scores");
  ag::Var total;
  for (const auto& s : fake_scores) {
    ag::Var term = ag::mean(ag::square(ag::add_scalar(s, -1.0)));
    total = total.defined() ? ag::add(total, term) : term;
  }
  return total;
}

ag::Var feature_matching_loss(
    const std::vector<std::vector<ag::Var>>& real_features,
    const std::vector<std::vector<ag::Var>>& fake_features) {
  PHONOVC_CHECK(real_features.size() == fake_features.size(), ShapeError,
                "feature_matching_loss: discriminator counts differ");
  ag::Var total = ag::scalar(0.0);
  for (size_t i = 0; i < real_features.size(); ++i) {
    PHONOVC_CHECK(real_features[i].size() == fake_features[i].size(),
                  ShapeError, "feature_matching_loss: layer counts differ");
    for (size_t l = 0; l < real_features[i].size(); ++l) {
      total = ag::add(total, ag::l1_loss(ag::stop_gradient(real_features[i][l]),
                                         fake_features[i][l]));
    }
  }
  return ag::scale(total, 2.0);
}

ag::Var reconstruction_loss(const ag::Var& fake_audio, const ag::Var& real_audio,
                            const DspConfig& dsp) {
  PHONOVC_CHECK(fake_audio.cols() == real_audio.cols(), ShapeError,
                "reconstruction_loss: ", fake_audio.cols(), " vs ",
                real_audio.cols(), " samples");
  ag::Var fake_mel = log_mel_from_linear(linear_spectrogram(fake_audio, dsp), dsp);
  Matrix real_mel;
  {
    ag::NoGradGuard guard;
    real_mel = log_mel_from_linear(linear_spectrogram(real_audio, dsp), dsp).value();
  }
  return ag::l1_loss(fake_mel, ag::constant(real_mel));
}

}  // namespace phonovc
