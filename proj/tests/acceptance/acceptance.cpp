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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "phonovc/conversion.hpp"
#include "phonovc/evaluation.hpp"
#include "phonovc/frontend.hpp"
#include "phonovc/losses.hpp"
#include "phonovc/ssl_encoder.hpp"
#include "phonovc/training.hpp"
#include "rdd_profiles.hpp"

namespace phonovc {
namespace {

// Tolerances and budgets.
constexpr double kPoolTol = 1e-6;
constexpr double kPoolBudgetS = 10.0;
constexpr double kAlignBudgetS = 30.0;
constexpr double kRoundTripTol = 1e-6;
constexpr double kAttnTol = 1e-6;
constexpr double kFusionTol = 1e-6;
constexpr double kKlTol = 1e-8;
constexpr double kGradStep = 1e-4;
constexpr double kGradTol = 1e-3;
constexpr double kSmokeDrop = 0.20;
constexpr double kSmokeBudgetS = 30 * 60.0;
constexpr double kRddTol = 0.01;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<int> random_partition(Rng& rng, int frames, int parts) {
  std::vector<int> cuts;
  std::vector<int> all(frames - 1);
  std::iota(all.begin(), all.end(), 1);
  for (int i = 0; i < parts - 1; ++i) {
    const int j = rng.uniform_int(i, frames - 2);
    std::swap(all[i], all[j]);
    cuts.push_back(all[i]);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> dur;
  int prev = 0;
  for (int c : cuts) {
    dur.push_back(c - prev);
    prev = c;
  }
  dur.push_back(frames - prev);
  return dur;
}

Outcome c01_pooling() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const int f = rng.uniform_int(1, 256);
    const int n = rng.uniform_int(1, std::min(32, f));
    const std::vector<int> dur = random_partition(rng, f, n);
    const Matrix vec = rng.normal_matrix(rng.uniform_int(1, 16), f);
    const Matrix pooled = phoneme_avg_pool(vec, dur);
    int s = 0;
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index r = 0; r < vec.rows(); ++r) {
        double sum = 0;
        for (int j = s; j < s + dur[i]; ++j) sum += vec(r, j);
        worst = std::max(worst, std::abs(pooled(r, i) - sum / dur[i]));
      }
      s += dur[i];
    }
  }
  const double secs = seconds_since(start);
  return {worst <= kPoolTol && secs < kPoolBudgetS,
          fmt("max abs error %.2e over 200 cases in %.2f s", worst, secs)};
}

Outcome c02_alignment(const std::string& root) {
  const auto start = Clock::now();
  SynthSpec spec;
  spec.speakers = 4;
  spec.texts = 25;
  spec.stub.bert_dim = 16;
  spec.stub.ssl_dim = 32;
  const std::string manifest_path = write_synth_audio(spec, root + "/audio");
  const CorpusManifest manifest = read_manifest(manifest_path, spec.dsp);
  PreprocessOptions opts;
  opts.dsp = spec.dsp;
  const FeatureStore store(root + "/store");
  preprocess_corpus(manifest, make_stub_providers(spec.stub), opts, store);
  const auto corpus = store.read_all();
  int clean = 0, detected = 0, mutations = 0;
  for (const auto& f : corpus) {
    if (validate_alignment(f).empty()) ++clean;
    UtteranceFeatures m = f;
    m.pframe[0] += 1;
    detected += !validate_alignment(m).empty();
    m = f;
    m.w2p[0] += 1;
    detected += !validate_alignment(m).empty();
    m = f;
    if (m.wframe.size() >= 2) {
      m.wframe[0] += 1;
      m.wframe[1] -= 1;
    } else {
      m.wframe[0] += 1;
    }
    detected += !validate_alignment(m).empty();
    mutations += 3;
  }
  const double secs = seconds_since(start);
  const int n = static_cast<int>(corpus.size());
  return {n == 100 && clean == n && detected == mutations && secs < kAlignBudgetS,
          fmt("%.0f utterances, %.0f clean, %.0f/%.0f mutations detected", n, clean,
              detected, mutations) +
              fmt(", %.1f s", secs)};
}

Outcome c03_round_trip() {
  Rng rng(303);
  int bitwise_ok = 0;
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = rng.uniform_int(1, 20);
    std::vector<int> dur(d);
    Matrix x;
    const bool friendly = t % 2 == 0;
    if (friendly) {
      // Small integers over power-of-two repeat counts average exactly.
      for (auto& k : dur) k = 1 << rng.uniform_int(0, 4);
      x = Matrix(6, d);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform_int(-50, 50);
    } else {
      for (auto& k : dur) k = rng.uniform_int(1, 13);
      x = rng.normal_matrix(6, d);
    }
    const Matrix back = phoneme_avg_pool(length_regulate(x, dur), dur);
    if (friendly) {
      bitwise_ok += back == x;
    } else {
      worst = std::max(worst, (back - x).cwiseAbs().maxCoeff());
    }
  }
  return {bitwise_ok == 50 && worst <= kRoundTripTol,
          fmt("%.0f/50 bitwise, max error %.2e on the rest", bitwise_ok, worst)};
}

Outcome c04_attention() {
  Rng rng(404);
  ModelConfig cfg = testing::tiny_model();
  double worst_sum = 0, worst_outside = 0;
  for (int t = 0; t < 100; ++t) {
    nn::ParameterStore ps(1000 + t);
    const SslEncoderParams p = SslEncoderParams::make(ps, cfg);
    const int f = rng.uniform_int(1, 60);
    const int d = rng.uniform_int(1, std::min(12, f));
    const std::vector<int> dur = random_partition(rng, f, d);
    const PhonemeAttention a =
        phoneme_attention(ag::constant(rng.normal_matrix(cfg.hidden, d)),
                          ag::constant(rng.normal_matrix(cfg.ssl_dim, f)), dur, p);
    int s = 0;
    for (int i = 0; i < d; ++i) {
      worst_sum = std::max(worst_sum, std::abs(a.weights.col(i).sum() - 1.0));
      for (int j = 0; j < f; ++j) {
        if (j < s || j >= s + dur[i]) {
          worst_outside = std::max(worst_outside, std::abs(a.weights(j, i)));
        }
      }
      s += dur[i];
    }
  }
  // Single-frame slice: the output is the projected value of that frame.
  nn::ParameterStore ps(7);
  const SslEncoderParams p = SslEncoderParams::make(ps, cfg);
  const Matrix frame = rng.normal_matrix(cfg.ssl_dim, 1);
  const PhonemeAttention one = phoneme_attention(
      ag::constant(rng.normal_matrix(cfg.hidden, 1)), ag::constant(frame),
      std::vector<int>{1}, p);
  const Matrix expect = p.out(p.value(ag::constant(frame))).value();
  const bool exact = one.output.value() == expect;
  return {worst_sum <= kAttnTol && worst_outside == 0.0 && exact,
          fmt("max |sum-1| %.2e, max outside weight %.2e, single frame exact %.0f",
              worst_sum, worst_outside, exact)};
}

Outcome c05_fusion() {
  Rng rng(505);
  const Matrix c = rng.normal_matrix(192, 6);
  const Matrix fused = fuse_ssl(ag::constant(c), ag::constant(c), 1.0, 0.5).value();
  const double err = (fused - 1.5 * c).cwiseAbs().maxCoeff();
  return {err <= kFusionTol, fmt("max |c_ssl - 1.5 c_avg| = %.2e", err)};
}

Outcome c06_kl() {
  Rng rng(606);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int r = rng.uniform_int(1, 8), c = rng.uniform_int(1, 8);
    const Matrix mq = rng.normal_matrix(r, c), lq = rng.normal_matrix(r, c, 0.5);
    const Matrix mp = rng.normal_matrix(r, c), lp = rng.normal_matrix(r, c, 0.5);
    double oracle = 0;
    for (Eigen::Index i = 0; i < mq.size(); ++i) {
      const double sq = std::exp(lq.data()[i]), sp = std::exp(lp.data()[i]);
      const double dm = mq.data()[i] - mp.data()[i];
      oracle += std::log(sp / sq) + (sq * sq + dm * dm) / (2 * sp * sp) - 0.5;
    }
    oracle /= static_cast<double>(mq.size());
    worst = std::max(worst, std::abs(kl_divergence(mq, lq, mp, lp) - oracle));
  }
  Rng same(1);
  const Matrix m = same.normal_matrix(3, 3), l = same.normal_matrix(3, 3);
  const double self = kl_divergence(m, l, m, l);
  const double half = kl_divergence(Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                                    Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  return {worst <= kKlTol && self == 0.0 && half == 0.5,
          fmt("max error %.2e, KL(p||p) = %.1e, KL(N(1,1)||N(0,1)) = %.17g", worst, self,
              half)};
}

Outcome c07_gradient() {
  ModelConfig cfg = testing::tiny_model();
  Model model(cfg);
  Rng data(707);
  UtteranceFeatures f;
  f.utterance_id = "grad";
  f.words = {2};
  f.phonemes = {3, 4};
  f.tones = {1};
  f.words_bert = data.normal_matrix(cfg.bert_dim, 1);
  f.pframe = {2, 4};
  f.wframe = {6};
  f.w2p = {2};
  f.speaker = 1;
  f.contentvec = data.normal_matrix(cfg.ssl_dim, 6);
  f.linear_spec = data.uniform_matrix(cfg.linear_bins, 6, 1.0).cwiseAbs();
  f.mel_spec = data.normal_matrix(cfg.n_mels, 6);
  f.audio.assign(6 * cfg.hop_length, 0.0);
  auto objective = [&] {
    Rng rng(77);
    CvaeTerms t = cvae_terms(model, f, rng);
    return ag::add(ag::add(t.l_melpre, t.l_dur), t.l_kl);
  };
  model.gen.zero_grad();
  ag::backward(objective());
  std::vector<std::pair<size_t, Eigen::Index>> picks;
  const auto& entries = model.gen.entries();
  Rng pick(708);
  while (picks.size() < 10) {
    const size_t i = pick.uniform_int(0, static_cast<int>(entries.size()) - 1);
    if (!entries[i].var.has_grad()) continue;
    picks.push_back({i, pick.uniform_int(0, static_cast<int>(entries[i].var.value().size()) - 1)});
  }
  double worst = 0;
  std::string where;
  for (auto [i, k] : picks) {
    ag::Var p = entries[i].var;
    const double analytic = p.grad().data()[k];
    const double orig = p.value().data()[k];
    p.mutable_value().data()[k] = orig + kGradStep;
    const double up = objective().item();
    p.mutable_value().data()[k] = orig - kGradStep;
    const double down = objective().item();
    p.mutable_value().data()[k] = orig;
    const double numeric = (up - down) / (2 * kGradStep);
    const double rel = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    if (rel >= worst) {
      worst = rel;
      where = entries[i].name;
    }
  }
  return {worst <= kGradTol,
          fmt("max relative error %.2e over 10 parameters", worst) + " (worst " + where + ")"};
}

double mean_total(const std::vector<LossReport>& r, size_t from, size_t count) {
  double s = 0;
  for (size_t i = from; i < from + count; ++i) s += r[i].total_g;
  return s / static_cast<double>(count);
}

struct Smoke {
  testing::TinyCorpus corpus;
  std::unique_ptr<TrainingSession> session;
  std::vector<LossReport> reports;
  double seconds = 0;
};

Smoke run_smoke(const std::string& root) {
  Smoke s;
  SynthSpec spec;  // 4 speakers x 8 texts; speaker 0 at twice the durations
  const FeatureStore store(root + "/smoke_store");
  write_synth_store(spec, store);
  s.corpus = {store.read_info(), store.read_tables(), store.read_all()};
  s.session = std::make_unique<TrainingSession>(preset_config("desk"), s.corpus.info,
                                                s.corpus.tables);
  const auto start = Clock::now();
  TrainOptions opts;
  opts.out_dir = root + "/smoke_run";
  s.reports = train(s.corpus.features, *s.session, opts).reports;
  s.seconds = seconds_since(start);
  return s;
}

Outcome c08_smoke(const Smoke& s) {
  if (s.reports.size() != 200) return {false, "expected 200 steps"};
  bool finite = true;
  for (const auto& r : s.reports) {
    for (double v : {r.l_rec, r.l_melpre, r.l_kl, r.l_dur, r.l_g, r.l_d, r.total_g}) {
      finite = finite && std::isfinite(v);
    }
  }
  const double first = mean_total(s.reports, 0, 10);
  const double last = mean_total(s.reports, 190, 10);
  const double drop = 1.0 - last / first;
  return {finite && drop >= kSmokeDrop && s.seconds <= kSmokeBudgetS,
          fmt("total_g %.3f -> %.3f (%.1f%% drop) in %.0f s", first, last, 100 * drop,
              s.seconds)};
}

double mean_predicted_duration(const Smoke& s, int speaker) {
  const Model& m = s.session->model();
  double total = 0;
  int count = 0;
  ag::NoGradGuard guard;
  for (const auto& f : s.corpus.features) {
    if (f.speaker != speaker) continue;
    const TextEncoding text = encode_text(f, m.text);
    const SslEncoding ssl = encode_ssl(text.c_text, f.contentvec, f.pframe, m.ssl,
                                       m.config().ssl_alpha, m.config().ssl_beta);
    const ag::Var spk = m.speaker(speaker);
    const PriorEncoding enc = encode_prior(text.c_text, ssl.c_ssl, spk, m.prior);
    const Matrix logw = predict_duration(enc.x_d, spk, m.prior).value();
    total += logw.array().exp().sum();
    count += static_cast<int>(logw.size());
  }
  return total / count;
}

Outcome c09_duration(const Smoke& s) {
  const double a = mean_predicted_duration(s, 0);
  const double b = mean_predicted_duration(s, 1);
  return {a > b, fmt("mean exp(logw_pred): speaker A %.3f, speaker B %.3f", a, b)};
}

Outcome c10_conversion(const Smoke& s) {
  const Model& m = s.session->model();
  const DspConfig& dsp = s.corpus.info.dsp;
  bool ok = true;
  int checked = 0;
  for (const auto& f : s.corpus.features) {
    if (checked == 4) break;
    ++checked;
    const int target = (f.speaker + 1) % m.config().n_speakers;
    const ConversionResult off = convert_features(f, target, m, dsp, {});
    ok = ok && off.frames == f.num_frames() && off.durations.used == f.pframe &&
         static_cast<long>(off.audio.samples.size()) == long(off.frames) * dsp.hop_length;
    ConversionOptions on;
    on.repredict = true;
    const ConversionResult one = convert_features(f, target, m, dsp, on);
    on.pace = 2.0;
    const ConversionResult two = convert_features(f, target, m, dsp, on);
    int expect = 0;
    for (Eigen::Index i = 0; i < one.logw_pred.size(); ++i) {
      expect += std::max(1, static_cast<int>(std::lround(std::exp(one.logw_pred(0, i)) * 2.0)));
    }
    ok = ok && two.frames == expect && two.logw_pred == one.logw_pred;
  }
  return {ok, fmt("%.0f utterances: repredict off copies pframe, pace 2 matches rounding rule",
                  checked)};
}

Outcome c11_rdd() {
  const std::vector<testing::RddTargets> table = {{"SSB0338", 0.28, 7.32, 13.92},
                                                  {"SSB0817", 4.67, 2.64, 4.27},
                                                  {"SSB1585", 6.38, 21.87, 41.91},
                                                  {"SSB1935", 1.66, 14.52, 23.29}};
  testing::RddProfiles p;
  for (const auto& row : table) testing::add_rdd_speaker(p, row);
  const RddReport r = rdd_report(p.conv, p.source, p.target);
  auto r2 = [](double v) { return std::round(v * 100) / 100; };
  bool rows = r.rows.size() == table.size();
  for (size_t i = 0; rows && i < table.size(); ++i) {
    rows = r2(r.rows[i].rdd_source) == table[i].source &&
           r2(r.rows[i].rdd_target) == table[i].target &&
           r2(r.rows[i].rdd_source_target) == table[i].source_target;
  }
  const bool src = std::abs(r.average.rdd_source - 3.25) <= kRddTol;
  const bool st = std::abs(r.average.rdd_source_target - 20.85) <= kRddTol;
  const bool tgt = std::abs(r.average.rdd_target - 11.59) <= kRddTol && !r.note.empty();
  return {rows && src && st && tgt,
          fmt("averages %.2f / %.2f / %.2f (target column reported as 11.34)",
              r.average.rdd_source, r.average.rdd_target, r.average.rdd_source_target)};
}

std::vector<std::string> loss_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

Outcome c12_determinism(const std::string& root) {
  SynthSpec spec;
  const FeatureStore store(root + "/det_store");
  write_synth_store(spec, store);
  const auto corpus = store.read_all();
  Config cfg = preset_config("desk");
  cfg.set("train.total_steps", 50);
  cfg.set("train.checkpoint_interval", 25);
  auto run = [&](const std::string& dir) {
    TrainingSession s(cfg, store.read_info(), store.read_tables());
    TrainOptions opts;
    opts.out_dir = dir;
    train(corpus, s, opts);
    return loss_lines(dir + "/loss_log.jsonl");
  };
  const auto a = run(root + "/det_a");
  const auto b = run(root + "/det_b");
  bool same = a.size() == 50 && b.size() == 50;
  for (size_t i = 0; same && i < a.size(); ++i) {
    same = LossReport::from_json(a[i]).same_losses(LossReport::from_json(b[i]));
  }
  auto resumed = TrainingSession::load(root + "/det_a/" + checkpoint_name(25));
  TrainOptions opts;
  opts.out_dir = root + "/det_resume";
  const TrainResult rest = train(corpus, *resumed, opts);
  bool resume = rest.reports.size() == 25;
  for (size_t i = 0; resume && i < rest.reports.size(); ++i) {
    resume = rest.reports[i].step == static_cast<int>(26 + i) &&
             rest.reports[i].same_losses(LossReport::from_json(a[25 + i]));
  }
  return {same && resume,
          std::string("two 50-step runs ") + (same ? "identical" : "differ") +
              ", resume from 25 " + (resume ? "bit-identical" : "diverges")};
}

}  // namespace
}  // namespace phonovc

int main() {
  using namespace phonovc;
  const testing::TempDir root("acceptance");
  int failed = 0;
  auto report = [&failed](const char* id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  report("C01", "pooling oracle", c01_pooling);
  report("C02", "alignment invariants", [&] { return c02_alignment(root.str()); });
  report("C03", "regulate/pool round trip", c03_round_trip);
  report("C04", "attention slices", c04_attention);
  report("C05", "fusion defaults", c05_fusion);
  report("C06", "KL closed form", c06_kl);
  report("C07", "gradient check", c07_gradient);
  Smoke smoke;
  std::string smoke_error;
  try {
    smoke = run_smoke(root.str());
  } catch (const std::exception& e) {
    smoke_error = e.what();
  }
  auto needs_smoke = [&](const std::function<Outcome(const Smoke&)>& f) {
    return [&, f] {
      if (!smoke_error.empty()) return Outcome{false, "smoke run failed: " + smoke_error};
      return f(smoke);
    };
  };
  report("C08", "smoke training", needs_smoke(c08_smoke));
  report("C09", "duration adaptation", needs_smoke(c09_duration));
  report("C10", "conversion duration contract", needs_smoke(c10_conversion));
  report("C11", "RDD arithmetic", c11_rdd);
  report("C12", "determinism and resume", [&] { return c12_determinism(root.str()); });
  std::printf("%d/12 criteria passed\n", 12 - failed);
  return failed;
}
