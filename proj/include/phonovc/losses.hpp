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

#ifndef PHONOVC_LOSSES_HPP_
#define PHONOVC_LOSSES_HPP_

#include <vector>

#include "phonovc/autograd.hpp"
#include "phonovc/dsp.hpp"

namespace phonovc {

// Mean over elements of KL(N(mu_q, e^{2 ls_q}) || N(mu_p, e^{2 ls_p})):
//   ls_p - ls_q + (e^{2 ls_q} + (mu_q - mu_p)^2) / (2 e^{2 ls_p}) - 1/2
ag::Var kl_divergence(const ag::Var& post_mu, const ag::Var& post_logsigma,
                      const ag::Var& prior_mu, const ag::Var& prior_logsigma);
double kl_divergence(const Matrix& post_mu, const Matrix& post_logsigma,
                     const Matrix& prior_mu, const Matrix& prior_logsigma);

// Mean squared difference of log durations.
ag::Var duration_loss(const ag::Var& logw_pred, const Matrix& logw_true);
double duration_loss(const Matrix& logw_pred, const Matrix& logw_true);

// Least-squares GAN terms summed over sub-discriminators.
ag::Var discriminator_loss(const std::vector<ag::Var>& real_scores,
                           const std::vector<ag::Var>& fake_scores);
ag::Var generator_adversarial_loss(const std::vector<ag::Var>& fake_scores);
// 2 * sum over layers of mean |real - fake|; real features are detached.
ag::Var feature_matching_loss(
    const std::vector<std::vector<ag::Var>>& real_features,
    const std::vector<std::vector<ag::Var>>& fake_features);

// L1 between log-mel spectrograms of the two waveforms.
ag::Var reconstruction_loss(const ag::Var& fake_audio, const ag::Var& real_audio,
                            const DspConfig& dsp);

}  // namespace phonovc

#endif  // PHONOVC_LOSSES_HPP_
