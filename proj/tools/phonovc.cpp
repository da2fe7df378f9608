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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "phonovc/conversion.hpp"
#include "phonovc/error.hpp"
#include "phonovc/evaluation.hpp"
#include "phonovc/frontend.hpp"
#include "phonovc/synth.hpp"
#include "phonovc/training.hpp"

namespace fs = std::filesystem;
using namespace phonovc;

namespace {

int resolve_speaker(const TrainingSession& s, const std::string& name) {
  const auto& speakers = s.tables().speakers;
  if (speakers.contains(name)) return speakers.id(name);
  PHONOVC_CHECK(false, ConfigError, "unknown speaker '", name,
                "' (checkpoint has ", speakers.size(), " speakers)");
  return -1;
}

ConversionOptions conversion_options(const TrainingSession& s, CLI::App* cmd,
                                     bool repredict, double pace, uint64_t seed,
                                     double noise_scale) {
  ConversionOptions o = conversion_defaults(s.config());
  if (cmd->count("--repredict") > 0) o.repredict = repredict;
  if (cmd->count("--pace") > 0) o.pace = pace;
  o.seed = seed;
  o.noise_scale = noise_scale;
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  if (fs::path(path).has_parent_path()) {
    fs::create_directories(fs::path(path).parent_path());
  }
  std::ofstream out(path);
  PHONOVC_CHECK(out.good(), IoError, "cannot write ", path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phonovc: phoneme-level voice conversion"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Extract a feature store from a manifest");
  std::string pre_manifest, pre_out, pre_providers = "stub";
  PreprocessOptions pre_opts;
  StubOptions stub;
  pre->add_option("--manifest", pre_manifest, "Manifest: id | wav | speaker [| transcript]")
      ->required();
  pre->add_option("--out", pre_out, "Feature store directory")->required();
  pre->add_option("--providers", pre_providers, "stub or real")
      ->check(CLI::IsMember({"stub", "real"}));
  pre->add_option("--seed", stub.seed, "Stub provider seed");
  pre->add_option("--sample-rate", pre_opts.dsp.sample_rate);
  pre->add_option("--hop", pre_opts.dsp.hop_length);
  pre->add_option("--n-fft", pre_opts.dsp.n_fft);
  pre->add_option("--n-mels", pre_opts.dsp.n_mels);
  pre->add_option("--bert-dim", stub.bert_dim);
  pre->add_option("--ssl-dim", stub.ssl_dim);
  pre->add_option("--jobs", pre_opts.jobs)->check(CLI::PositiveNumber);

  // synth-corpus
  auto* syn = app.add_subcommand("synth-corpus", "Write the synthetic smoke corpus");
  SynthSpec spec;
  std::string syn_out;
  bool syn_audio = false;
  syn->add_option("--out", syn_out, "Output directory")->required();
  syn->add_option("--speakers", spec.speakers)->check(CLI::PositiveNumber);
  syn->add_option("--texts", spec.texts)->check(CLI::PositiveNumber);
  syn->add_option("--seed", spec.seed);
  syn->add_flag("--audio", syn_audio,
                "Write wav files and a manifest instead of a feature store");

  // train
  auto* tr = app.add_subcommand("train", "Train on a feature store");
  std::string tr_features, tr_config, tr_out, tr_preset = "desk", tr_resume;
  int tr_steps = -1;
  tr->add_option("--features", tr_features, "Feature store directory")->required();
  tr->add_option("--config", tr_config, "Flat key = value overrides");
  tr->add_option("--out", tr_out, "Checkpoint and log directory")->required();
  tr->add_option("--preset", tr_preset)->check(CLI::IsMember({"desk", "paper"}));
  tr->add_option("--resume", tr_resume, "Checkpoint to continue from");
  tr->add_option("--steps", tr_steps, "Stop after this step");

  // convert
  auto* cv = app.add_subcommand("convert", "Convert one utterance");
  std::string cv_src, cv_speaker, cv_ckpt, cv_out, cv_text;
  bool cv_repredict = false;
  double cv_pace = 1.0, cv_noise = -1.0;
  uint64_t cv_seed = 0;
  cv->add_option("--src", cv_src, "Source wav")->required();
  cv->add_option("--speaker", cv_speaker, "Target speaker")->required();
  cv->add_option("--ckpt", cv_ckpt, "Checkpoint")->required();
  cv->add_flag("--repredict", cv_repredict, "Re-predict durations for the target");
  cv->add_option("--pace", cv_pace)->check(CLI::PositiveNumber);
  cv->add_option("--seed", cv_seed);
  cv->add_option("--noise-scale", cv_noise);
  cv->add_option("--text", cv_text, "Transcript hint");
  cv->add_option("--out", cv_out, "Output wav")->required();

  // batch-convert
  auto* bc = app.add_subcommand("batch-convert", "Convert every utterance of a manifest");
  std::string bc_manifest, bc_speaker, bc_ckpt, bc_out;
  bool bc_repredict = false;
  double bc_pace = 1.0, bc_noise = -1.0;
  uint64_t bc_seed = 0;
  bc->add_option("--manifest", bc_manifest)->required();
  bc->add_option("--speaker", bc_speaker)->required();
  bc->add_option("--ckpt", bc_ckpt)->required();
  bc->add_option("--out", bc_out)->required();
  bc->add_flag("--repredict", bc_repredict);
  bc->add_option("--pace", bc_pace)->check(CLI::PositiveNumber);
  bc->add_option("--seed", bc_seed);
  bc->add_option("--noise-scale", bc_noise);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluation tools");
  ev->require_subcommand(1);
  auto* ev_rdd = ev->add_subcommand("rdd", "Relative duration deviation report");
  std::string rdd_conv, rdd_source, rdd_target, rdd_out;
  ev_rdd->add_option("--conv", rdd_conv)->required();
  ev_rdd->add_option("--source", rdd_source)->required();
  ev_rdd->add_option("--target", rdd_target)->required();
  ev_rdd->add_option("--out", rdd_out, "Report path (stdout if omitted)");
  auto* ev_prof = ev->add_subcommand("profiles", "Export pframe profiles from a feature store");
  std::string prof_features, prof_out;
  ev_prof->add_option("--features", prof_features)->required();
  ev_prof->add_option("--out", prof_out)->required();
  auto* ev_metric = ev->add_subcommand("metric", "Run a registered metric");
  std::string met_name, met_manifest, met_reference;
  bool met_list = false;
  ev_metric->add_flag("--list", met_list, "List registered metrics");
  ev_metric->add_option("--name", met_name);
  ev_metric->add_option("--manifest", met_manifest, "Audio to score");
  ev_metric->add_option("--reference", met_reference, "References, matched by id");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      pre_opts.providers_name = pre_providers;
      pre_opts.seed = stub.seed;
      const CorpusManifest manifest = read_manifest(pre_manifest, pre_opts.dsp);
      const ExtractorProviderSet providers =
          pre_providers == "real" ? make_real_providers() : make_stub_providers(stub);
      const PreprocessSummary s =
          preprocess_corpus(manifest, providers, pre_opts, FeatureStore(pre_out));
      std::printf("%d utterances, %d words, %d phonemes, %d speakers -> %s\n",
                  s.utterances, s.tables.words.size(), s.tables.phones.size(),
                  s.tables.speakers.size(), pre_out.c_str());
    } else if (*syn) {
      if (syn_audio) {
        std::printf("%s\n", write_synth_audio(spec, syn_out).c_str());
      } else {
        const PreprocessSummary s = write_synth_store(spec, FeatureStore(syn_out));
        std::printf("%d utterances -> %s\n", s.utterances, syn_out.c_str());
      }
    } else if (*tr) {
      const FeatureStore store(tr_features);
      std::unique_ptr<TrainingSession> session;
      if (!tr_resume.empty()) {
        session = TrainingSession::load(tr_resume);
      } else {
        Config cfg = preset_config(tr_preset);
        if (!tr_config.empty()) cfg.merge(Config::load(tr_config));
        session = std::make_unique<TrainingSession>(cfg, store.read_info(),
                                                    store.read_tables());
      }
      const auto corpus = store.read_all();
      TrainOptions opts;
      opts.out_dir = tr_out;
      opts.stop_after = tr_steps;
      opts.on_report = [](const LossReport& r) {
        std::printf("step %d total_g %.4f l_rec %.4f l_melpre %.4f l_kl %.4f "
                    "l_dur %.4f l_g %.4f l_d %.4f (%.2fs)\n",
                    r.step, r.total_g, r.l_rec, r.l_melpre, r.l_kl, r.l_dur,
                    r.l_g, r.l_d, r.wall_time);
        std::fflush(stdout);
      };
      const TrainResult result = train(corpus, *session, opts);
      for (const auto& c : result.checkpoints) std::printf("checkpoint %s\n", c.c_str());
    } else if (*cv) {
      const auto session = TrainingSession::load(cv_ckpt);
      resolve_speaker(*session, cv_speaker);
      const Audio audio = read_wav(cv_src);
      const ConversionResult r = convert(
          audio, fs::path(cv_src).stem().string(), cv_speaker, *session,
          providers_for_corpus(session->info()),
          conversion_options(*session, cv, cv_repredict, cv_pace, cv_seed, cv_noise), cv_text);
      write_wav(cv_out, r.audio);
      write_text(cv_out + ".durations.json", r.durations.to_json() + "\n");
      std::printf("%d frames, %zu samples -> %s\n", r.frames, r.audio.samples.size(),
                  cv_out.c_str());
    } else if (*bc) {
      const auto session = TrainingSession::load(bc_ckpt);
      resolve_speaker(*session, bc_speaker);
      const CorpusManifest manifest = read_manifest(bc_manifest, session->info().dsp);
      const BatchResult r = batch_convert(
          manifest, bc_speaker, *session, providers_for_corpus(session->info()),
          conversion_options(*session, bc, bc_repredict, bc_pace, bc_seed, bc_noise), bc_out);
      for (const auto& f : r.failures) {
        std::fprintf(stderr, "failed %s: %s\n", f.utterance_id.c_str(),
                     f.message.c_str());
      }
      std::printf("%zu converted, %zu failed -> %s\n", r.outputs.entries.size(),
                  r.failures.size(), bc_out.c_str());
    } else if (*ev_rdd) {
      const RddReport report = rdd_report(read_profiles(rdd_conv),
                                          read_profiles(rdd_source),
                                          read_profiles(rdd_target));
      if (rdd_out.empty()) {
        std::cout << report.to_text();
      } else {
        write_text(rdd_out, report.to_text());
      }
    } else if (*ev_prof) {
      const FeatureStore store(prof_features);
      const TokenTables tables = store.read_tables();
      ProfileSet set;
      for (const auto& f : store.read_all()) {
        set[tables.speakers.name(f.speaker)].push_back({f.utterance_id, f.pframe});
      }
      write_profiles(prof_out, set);
    } else if (*ev_metric) {
      MetricRegistry registry;
      register_builtin_metrics(registry);
      if (met_list) {
        for (const auto& n : registry.list()) std::printf("%s\n", n.c_str());
        return 0;
      }
      PHONOVC_CHECK(!met_name.empty() && !met_manifest.empty() &&
                        !met_reference.empty(),
                    ConfigError, "metric needs --name, --manifest and --reference");
      PHONOVC_CHECK(registry.contains(met_name), ConfigError, "unknown metric '",
                    met_name, "'");
      DspConfig dsp;
      const CorpusManifest audio = read_manifest(met_manifest, dsp);
      const CorpusManifest refs = read_manifest(met_reference, dsp);
      std::map<std::string, std::string> ref_paths;
      for (const auto& e : refs.entries) ref_paths[e.utterance_id] = e.audio_path;
      std::vector<MetricInput> inputs;
      std::vector<std::string> unpaired;
      for (const auto& e : audio.entries) {
        auto it = ref_paths.find(e.utterance_id);
        if (it == ref_paths.end()) {
          unpaired.push_back(e.utterance_id);
          continue;
        }
        inputs.push_back({e.utterance_id, read_wav(e.audio_path), read_wav(it->second)});
      }
      const MetricColumn col = registry.evaluate(met_name, inputs);
      std::printf("utterance\t%s\n", met_name.c_str());
      for (size_t i = 0; i < col.utterance_ids.size(); ++i) {
        if (col.scores[i]) {
          std::printf("%s\t%.6f\n", col.utterance_ids[i].c_str(), *col.scores[i]);
        } else {
          std::printf("%s\tFAILED (%s)\n", col.utterance_ids[i].c_str(),
                      col.errors[i].c_str());
        }
      }
      for (const auto& id : unpaired) std::printf("%s\tFAILED (no reference)\n", id.c_str());
      if (const auto m = col.mean()) std::printf("mean\t%.6f\n", *m);
    }
  } catch (const phonovc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
