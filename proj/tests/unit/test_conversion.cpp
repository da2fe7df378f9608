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

#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "fixtures.hpp"
#include "phonovc/conversion.hpp"
#include "phonovc/error.hpp"
#include "phonovc/evaluation.hpp"

namespace phonovc {
namespace {

using testing::TempDir;
using testing::nihao_features;
using testing::tiny_dsp;
using testing::tiny_model;

int total(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

UtteranceFeatures nihao() { return nihao_features(4, 6, 17, 10, 16); }

TEST(ConvertFeatures, SourceDurationsByDefault) {
  Model m(tiny_model());
  const UtteranceFeatures src = nihao();
  const ConversionResult r = convert_features(src, 1, m, tiny_dsp(), {});
  EXPECT_EQ(r.durations.utterance_id, "nihao");
  EXPECT_EQ(r.durations.source, src.pframe);
  EXPECT_EQ(r.durations.used, src.pframe);
  EXPECT_EQ(r.frames, 75);
  EXPECT_EQ(r.audio.samples.size(), 75u * 16);
  EXPECT_EQ(r.audio.sample_rate, 16000);
  EXPECT_EQ(r.logw_pred.cols(), 6);
}

TEST(ConvertFeatures, RepredictFollowsRoundingRule) {
  ModelConfig cfg = tiny_model();
  cfg.dur_zero_init = true;
  Model m(cfg);
  ConversionOptions o;
  o.repredict = true;
  EXPECT_EQ(convert_features(nihao(), 0, m, tiny_dsp(), o).durations.used,
            std::vector<int>(6, 1));
  o.pace = 2.0;
  const ConversionResult r = convert_features(nihao(), 0, m, tiny_dsp(), o);
  EXPECT_EQ(r.durations.used, std::vector<int>(6, 2));
  EXPECT_EQ(r.frames, 12);
  EXPECT_EQ(r.audio.samples.size(), 12u * 16);

  Model trained(tiny_model());
  o.pace = 1.3;
  const ConversionResult t = convert_features(nihao(), 1, trained, tiny_dsp(), o);
  EXPECT_EQ(t.durations.used, durations_from_log(t.logw_pred, 1.3));
  EXPECT_EQ(t.frames, total(t.durations.used));
  o.pace = 0.0;
  EXPECT_THROW(convert_features(nihao(), 1, trained, tiny_dsp(), o), ConfigError);
}

TEST(ConvertFeatures, SeededNoise) {
  Model m(tiny_model());
  ConversionOptions o;
  o.noise_scale = 1.0;
  o.seed = 3;
  const Audio a = convert_features(nihao(), 1, m, tiny_dsp(), o).audio;
  const Audio b = convert_features(nihao(), 1, m, tiny_dsp(), o).audio;
  EXPECT_EQ(a.samples, b.samples);
  o.seed = 4;
  EXPECT_NE(convert_features(nihao(), 1, m, tiny_dsp(), o).audio.samples, a.samples);
  o.noise_scale = 0.0;
  const Audio c = convert_features(nihao(), 1, m, tiny_dsp(), o).audio;
  o.seed = 5;
  EXPECT_EQ(convert_features(nihao(), 1, m, tiny_dsp(), o).audio.samples, c.samples);
}

TEST(ConvertFeatures, TargetSpeakerMatters) {
  Model m(tiny_model());
  const Audio a = convert_features(nihao(), 0, m, tiny_dsp(), {}).audio;
  const Audio b = convert_features(nihao(), 1, m, tiny_dsp(), {}).audio;
  EXPECT_NE(a.samples, b.samples);
  EXPECT_THROW(convert_features(nihao(), 2, m, tiny_dsp(), {}), ConfigError);
}

TEST(DurationRecord, JsonRoundTrip) {
  DurationRecord r{"u1", {8, 9, 5}, {7, 9, 6}};
  const DurationRecord back = DurationRecord::from_json(r.to_json());
  EXPECT_EQ(back.utterance_id, "u1");
  EXPECT_EQ(back.source, r.source);
  EXPECT_EQ(back.used, r.used);
}

TEST(ConversionDefaults, ReadFromConfig) {
  Config c;
  ConversionOptions o = conversion_defaults(c);
  EXPECT_FALSE(o.repredict);
  EXPECT_EQ(o.pace, 1.0);
  c.set("dur.enabled", true);
  c.set("dur.pace", 1.5);
  o = conversion_defaults(c);
  EXPECT_TRUE(o.repredict);
  EXPECT_EQ(o.pace, 1.5);
  c.set("dur.pace", -1.0);
  EXPECT_THROW(conversion_defaults(c), ConfigError);
}

struct SessionFixture {
  TempDir dir{"conv"};
  testing::TinyCorpus corpus = testing::tiny_corpus(dir.sub("store"));
  TrainingSession session{testing::tiny_session_config(), corpus.info, corpus.tables};
  CorpusManifest manifest;

  SessionFixture() {
    const std::string path =
        write_synth_audio(testing::tiny_synth(), dir.sub("audio"));
    manifest = read_manifest(path, corpus.info.dsp);
  }
};

TEST(Convert, FromAudioWithCheckpointTables) {
  SessionFixture fx;
  const ManifestEntry& e = fx.manifest.entries.front();
  const Audio audio = read_wav(e.audio_path);
  const std::string target = synth_speaker_name(1);
  const ConversionResult r =
      convert(audio, e.utterance_id, target, fx.session,
              providers_for_corpus(fx.session.info()), {}, e.transcript);
  const int hop = fx.corpus.info.dsp.hop_length;
  EXPECT_EQ(r.frames, total(r.durations.used));
  EXPECT_EQ(r.durations.used, r.durations.source);
  EXPECT_EQ(static_cast<long>(r.audio.samples.size()), long(r.frames) * hop);
  EXPECT_EQ(r.frames, static_cast<int>(audio.samples.size()) / hop);
  EXPECT_THROW(convert(audio, e.utterance_id, "nobody", fx.session,
                       providers_for_corpus(fx.session.info()), {}, e.transcript),
               ConfigError);
}

TEST(BatchConvert, EmptyManifest) {
  SessionFixture fx;
  CorpusManifest empty;
  const BatchResult r = batch_convert(empty, synth_speaker_name(0), fx.session,
                                      providers_for_corpus(fx.session.info()), {},
                                      fx.dir.sub("out_empty"));
  EXPECT_TRUE(r.outputs.entries.empty());
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.failures.empty());
  EXPECT_TRUE(std::filesystem::exists(fx.dir.sub("out_empty") + "/manifest.txt"));
}

TEST(BatchConvert, FailureIsIsolated) {
  SessionFixture fx;
  CorpusManifest m = fx.manifest;
  m.entries.resize(3);
  m.entries[1].audio_path = fx.dir.sub("missing.wav");
  const std::string out = fx.dir.sub("out");
  const BatchResult r = batch_convert(m, synth_speaker_name(0), fx.session,
                                      providers_for_corpus(fx.session.info()), {}, out);
  ASSERT_EQ(r.outputs.entries.size(), 2u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].utterance_id, m.entries[1].utterance_id);
  const int hop = fx.corpus.info.dsp.hop_length;
  for (size_t i = 0; i < r.records.size(); ++i) {
    const Audio wav = read_wav(r.outputs.entries[i].audio_path);
    EXPECT_EQ(static_cast<long>(wav.samples.size()), long(total(r.records[i].used)) * hop);
    EXPECT_EQ(r.outputs.entries[i].speaker, synth_speaker_name(0));
    EXPECT_TRUE(std::filesystem::exists(out + "/durations/" + r.records[i].utterance_id +
                                        ".json"));
  }
  const ProfileSet conv = read_profiles(out + "/profiles/conv");
  ASSERT_EQ(conv.size(), 1u);
  EXPECT_EQ(conv.begin()->second.size(), 2u);
  const ProfileSet src = read_profiles(out + "/profiles/source");
  EXPECT_NO_THROW(rdd_report(conv, src, src));
}

}  // namespace
}  // namespace phonovc
