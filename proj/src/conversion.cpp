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

#include "phonovc/conversion.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "phonovc/error.hpp"
#include "phonovc/evaluation.hpp"

namespace phonovc {

ConversionOptions conversion_defaults(const Config& config) {
  ConversionOptions o;
  o.repredict = config.get_bool("dur.enabled", false);
  o.pace = config.get_double("dur.pace", 1.0);
  PHONOVC_CHECK(o.pace > 0.0, ConfigError, "dur.pace must be positive, got ",
                o.pace);
  return o;
}

std::string DurationRecord::to_json() const {
  nlohmann::ordered_json j;
  j["utterance_id"] = utterance_id;
  j["source"] = source;
  j["used"] = used;
  long frames = 0;
  for (int d : used) frames += d;
  j["frames"] = frames;
  return j.dump();
}

DurationRecord DurationRecord::from_json(const std::string& text) {
  DurationRecord r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.utterance_id = j.at("utterance_id").get<std::string>();
    r.source = j.at("source").get<std::vector<int>>();
    r.used = j.at("used").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(detail::concat("malformed duration record: ", e.what()));
  }
  return r;
}

ConversionResult convert_features(const UtteranceFeatures& source,
                                  int target_speaker, const Model& model,
                                  const DspConfig& dsp,
                                  const ConversionOptions& options) {
  const ModelConfig& cfg = model.config();
  PHONOVC_CHECK(options.pace > 0.0, ConfigError, "pace must be positive, got ",
                options.pace);
  PHONOVC_CHECK(dsp.hop_length == cfg.hop_length, ConfigError,
                "hop length ", dsp.hop_length, " does not match the model's ",
                cfg.hop_length);
  const auto bad = validate_alignment(source);
  PHONOVC_CHECK(bad.empty(), AlignmentError, source.utterance_id, ": ",
                bad.empty() ? "" : bad.front().invariant);
  ag::NoGradGuard no_grad;
  ag::Var spk = model.speaker(target_speaker);
  TextEncoding text = encode_text(source, model.text);
  SslEncoding ssl = encode_ssl(text.c_text, source.contentvec, source.pframe,
                               model.ssl, cfg.ssl_alpha, cfg.ssl_beta);
  const std::vector<int> none;
  PriorState prior =
      run_prior(text.c_text, ssl.c_ssl, spk,
                options.repredict ? std::span<const int>(none)
                                  : std::span<const int>(source.pframe),
                options.pace, model.prior);
  const double ns = options.noise_scale >= 0.0 ? options.noise_scale : cfg.noise_scale;
  Rng rng(mix_seed(options.seed, fnv1a(source.utterance_id)));
  Matrix eps = rng.normal_matrix(prior.prior_mu.rows(), prior.prior_mu.cols(), ns);
  ag::Var z_p = ag::add(prior.prior_mu,
                        ag::mul(ag::exp(prior.prior_logsigma), ag::constant(eps)));
  ag::Var z = flow_transport(z_p, spk, FlowDirection::kInverse, model.flow).z;
  ag::Var wave = generate_waveform(z, spk, model.generator);

  ConversionResult r;
  r.audio.sample_rate = dsp.sample_rate;
  r.audio.samples.assign(wave.value().data(), wave.value().data() + wave.value().size());
  r.durations.utterance_id = source.utterance_id;
  r.durations.source = source.pframe;
  r.durations.used = prior.durations;
  r.frames = static_cast<int>(z.cols());
  r.logw_pred = prior.logw_pred.value();
  return r;
}

ExtractorProviderSet providers_for_corpus(const CorpusInfo& info) {
  if (info.providers == "stub" || info.providers == "synthetic") {
    StubOptions o;
    o.seed = info.seed;
    o.bert_dim = info.bert_dim;
    o.ssl_dim = info.ssl_dim;
    return make_stub_providers(o);
  }
  PHONOVC_CHECK(info.providers == "real", ConfigError, "unknown provider set '",
                info.providers, "'");
  return make_real_providers();
}

ConversionResult convert(const Audio& audio, const std::string& utterance_id,
                         const std::string& target_speaker,
                         const TrainingSession& checkpoint,
                         const ExtractorProviderSet& providers,
                         const ConversionOptions& options,
                         const std::string& transcript) {
  TokenTables tables = checkpoint.tables();
  PHONOVC_CHECK(tables.speakers.contains(target_speaker), ConfigError,
                "unknown target speaker '", target_speaker, "'");
  ManifestEntry entry;
  entry.utterance_id = utterance_id;
  // Content comes from the source; the speaker slot only selects the target.
  entry.speaker = target_speaker;
  entry.transcript = transcript;
  UtteranceFeatures f = extract_features(entry, audio, providers,
                                         checkpoint.info().dsp, tables, false);
  return convert_features(f, tables.speakers.id(target_speaker),
                          checkpoint.model(), checkpoint.info().dsp, options);
}

BatchResult batch_convert(const CorpusManifest& manifest,
                          const std::string& target_speaker,
                          const TrainingSession& checkpoint,
                          const ExtractorProviderSet& providers,
                          const ConversionOptions& options,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  PHONOVC_CHECK(checkpoint.tables().speakers.contains(target_speaker),
                ConfigError, "unknown target speaker '", target_speaker, "'");
  const fs::path root(out_dir);
  fs::create_directories(root / "wav");
  fs::create_directories(root / "durations");
  BatchResult result;
  result.outputs.sample_rate = checkpoint.info().dsp.sample_rate;
  result.outputs.hop_length = checkpoint.info().dsp.hop_length;
  result.outputs.fft_size = checkpoint.info().dsp.n_fft;
  ProfileSet conv, source;
  for (const auto& e : manifest.entries) {
    try {
      const Audio audio = read_wav(e.audio_path);
      ConversionResult r = convert(audio, e.utterance_id, target_speaker,
                                   checkpoint, providers, options, e.transcript);
      const fs::path wav = root / "wav" / (e.utterance_id + ".wav");
      write_wav(wav.string(), r.audio);
      std::ofstream rec(root / "durations" / (e.utterance_id + ".json"));
      PHONOVC_CHECK(rec.good(), IoError, "cannot write duration record for ",
                    e.utterance_id);
      rec << r.durations.to_json() << '\n';
      result.outputs.entries.push_back(
          {e.utterance_id, wav.string(), target_speaker, e.transcript});
      conv[target_speaker].push_back({e.utterance_id, r.durations.used});
      source[target_speaker].push_back({e.utterance_id, r.durations.source});
      result.records.push_back(std::move(r.durations));
    } catch (const std::exception& ex) {
      result.failures.push_back({e.utterance_id, ex.what()});
    }
  }
  write_manifest((root / "manifest.txt").string(), result.outputs);
  std::ofstream failures(root / "failures.txt");
  PHONOVC_CHECK(failures.good(), IoError, "cannot write failures.txt in ", out_dir);
  for (const auto& f : result.failures) {
    failures << f.utterance_id << '\t' << f.message << '\n';
  }
  write_profiles((root / "profiles" / "conv").string(), conv);
  write_profiles((root / "profiles" / "source").string(), source);
  return result;
}

}  // namespace phonovc
