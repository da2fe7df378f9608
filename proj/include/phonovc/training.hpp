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

#ifndef PHONOVC_TRAINING_HPP_
#define PHONOVC_TRAINING_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "phonovc/feature_store.hpp"
#include "phonovc/model.hpp"

namespace phonovc {

// Terms as they enter total_g, i.e. after loss weights and the mel scale.
struct LossReport {
  int step = 0;
  double l_rec = 0.0;
  double l_melpre = 0.0;
  double l_kl = 0.0;
  double l_dur = 0.0;
  double l_g = 0.0;
  double l_d = 0.0;
  double total_g = 0.0;
  double wall_time = 0.0;  // seconds spent in the step

  std::string to_json() const;
  static LossReport from_json(const std::string& line);
  // Loss fields only; wall_time is ignored.
  bool same_losses(const LossReport& other) const;
};

class AdamW {
 public:
  AdamW() = default;
  AdamW(double lr, double beta1, double beta2, double eps, double weight_decay);

  // Decoupled decay then the Adam update, for every parameter that holds a
  // gradient. Moment buffers are created on first use.
  void step(const nn::ParameterStore& params);
  long long steps() const { return steps_; }

  struct Moments {
    Matrix m;
    Matrix v;
  };
  std::vector<Moments>& moments() { return moments_; }
  const std::vector<Moments>& moments() const { return moments_; }
  void set_steps(long long steps) { steps_ = steps; }
  double lr() const { return lr_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  double weight_decay_ = 0.0;
  long long steps_ = 0;
  std::vector<Moments> moments_;
};

// Prior-side terms for one utterance with ground-truth durations.
struct CvaeTerms {
  ag::Var spk;
  PriorState prior;
  LatentPosterior posterior;
  ag::Var l_melpre;
  ag::Var l_kl;
  ag::Var l_dur;
};

// The posterior sample draws its noise from `rng`. Throws AlignmentError
// when the prior and posterior frame counts differ.
CvaeTerms cvae_terms(const Model& model, const UtteranceFeatures& features,
                     Rng& rng);

// One discriminator update then one generator update on `batch`, with all
// randomness drawn from `seed`. `step` is only recorded in the report.
// Throws NumericError naming the first non-finite term.
LossReport train_step(const std::vector<const UtteranceFeatures*>& batch,
                      Model& model, AdamW& opt_g, AdamW& opt_d,
                      const TrainConfig& config, const DspConfig& dsp,
                      uint64_t seed, int step);

// Fills vocabulary sizes, speaker count and feature dimensions from the
// corpus, reading everything else from `config`.
ModelConfig model_config_for_corpus(const Config& config, const CorpusInfo& info,
                                    const TokenTables& tables);

// Model, optimizers and step counter; what a checkpoint holds.
class TrainingSession {
 public:
  TrainingSession(const Config& config, const CorpusInfo& info,
                  const TokenTables& tables);

  // Throws IoError on a missing, corrupt or incompatible file.
  static std::unique_ptr<TrainingSession> load(const std::string& path);
  void save(const std::string& path) const;

  // Batch indices and noise for step n come from mix_seed(seed, n).
  LossReport step(const std::vector<UtteranceFeatures>& corpus);

  int current_step() const { return step_; }
  Model& model() { return *model_; }
  const Model& model() const { return *model_; }
  const Config& config() const { return config_; }
  const CorpusInfo& info() const { return info_; }
  const TokenTables& tables() const { return tables_; }
  const TrainConfig& train_config() const { return train_; }

 private:
  Config config_;
  CorpusInfo info_;
  TokenTables tables_;
  TrainConfig train_;
  std::unique_ptr<Model> model_;
  AdamW opt_g_;
  AdamW opt_d_;
  int step_ = 0;
};

// Throws ConfigError or AlignmentError if an utterance does not fit the
// session (unknown speaker, dimension mismatch, shorter than a segment).
void check_corpus(const std::vector<UtteranceFeatures>& corpus,
                  const TrainingSession& session);

struct TrainOptions {
  std::string out_dir;  // checkpoints and loss_log.jsonl; empty writes nothing
  int stop_after = -1;  // stop at this step instead of total_steps
  std::function<void(const LossReport&)> on_report;
};

struct TrainResult {
  std::vector<LossReport> reports;
  std::vector<std::string> checkpoints;
};

std::string checkpoint_name(int step);

// Runs from the session's current step to total_steps. Checkpoints land at
// every multiple of checkpoint_interval; the loss log keeps earlier records
// up to the session's step and appends one line per new step.
TrainResult train(const std::vector<UtteranceFeatures>& corpus,
                  TrainingSession& session, const TrainOptions& options);

}  // namespace phonovc

#endif  // PHONOVC_TRAINING_HPP_
