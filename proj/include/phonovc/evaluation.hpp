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

#ifndef PHONOVC_EVALUATION_HPP_
#define PHONOVC_EVALUATION_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phonovc/dsp.hpp"

namespace phonovc {

struct DurationProfile {
  std::string utterance_id;
  std::vector<int> durations;  // frames per phoneme

  // sum(durations) / len(durations); AlignmentError when empty.
  double avg_phoneme_duration() const;
};

// Speaker name -> profiles.
using ProfileSet = std::map<std::string, std::vector<DurationProfile>>;

// |d_conv - d_ref| / d_ref * 100. ConfigError unless d_ref > 0 and
// d_conv >= 0.
double rdd(double d_conv, double d_ref);

struct RddRow {
  std::string speaker;
  double rdd_source = 0.0;
  double rdd_target = 0.0;
  double rdd_source_target = 0.0;
  int utterances = 0;
};

struct RddReport {
  std::vector<RddRow> rows;
  RddRow average;  // arithmetic mean of the rows, speaker "Average"
  std::string note;

  // Table with two-decimal percentages.
  std::string to_text() const;
};

// Rows are the speakers of `conv`. Each converted utterance pairs with the
// source and target profiles of the same id under the same speaker; a row
// value is the mean over its utterances of the per-utterance RDD.
// ConfigError on a missing pairing.
RddReport rdd_report(const ProfileSet& conv, const ProfileSet& source,
                     const ProfileSet& target);

// One file per speaker, DIR/<speaker>.txt, each line "utt d1 d2 ...".
ProfileSet read_profiles(const std::string& dir);
void write_profiles(const std::string& dir, const ProfileSet& profiles);
std::vector<DurationProfile> parse_profiles(const std::string& text,
                                            const std::string& origin);

// External metric hook: (audio, reference) -> score.
using MetricClient = std::function<double(const Audio&, const Audio&)>;

struct MetricInput {
  std::string utterance_id;
  Audio audio;
  Audio reference;
};

struct MetricColumn {
  std::string metric;
  std::vector<std::string> utterance_ids;
  std::vector<std::optional<double>> scores;  // empty where the client failed
  std::vector<std::string> errors;            // "" where it succeeded

  // Mean of the successful scores; nullopt when none succeeded.
  std::optional<double> mean() const;
};

class MetricRegistry {
 public:
  struct Handle {
    std::string name;
  };

  // ConfigError on a duplicate or empty name, or an empty client.
  Handle register_metric(const std::string& name, MetricClient client);
  std::vector<std::string> list() const;
  bool contains(const std::string& name) const { return clients_.count(name) > 0; }
  // ConfigError "unknown metric" for unregistered names. A client that
  // throws fails only that utterance.
  MetricColumn evaluate(const std::string& name,
                        const std::vector<MetricInput>& inputs) const;

 private:
  std::map<std::string, MetricClient> clients_;
};

// Model-free metrics that ship with the tool: "length_ratio" (sample count
// of audio over reference).
void register_builtin_metrics(MetricRegistry& registry);

}  // namespace phonovc

#endif  // PHONOVC_EVALUATION_HPP_
