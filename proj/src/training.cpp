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

#include "phonovc/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "phonovc/error.hpp"
#include "phonovc/losses.hpp"

namespace phonovc {
namespace {

constexpr char kMagic[4] = {'P', 'V', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void check_finite(double value, const char* term, int step) {
  PHONOVC_CHECK(std::isfinite(value), NumericError, "non-finite ", term,
                " at step ", step, " (value ", value, ")");
}

double grad_norm_sq(const nn::ParameterStore& ps) {
  double s = 0.0;
  for (const auto& e : ps.entries()) {
    if (e.var.has_grad()) s += e.var.node()->grad.squaredNorm();
  }
  return s;
}

void clip_grads(const nn::ParameterStore& ps, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = std::sqrt(grad_norm_sq(ps));
  if (norm <= max_norm) return;
  const double f = max_norm / (norm + 1e-6);
  for (const auto& e : ps.entries()) {
    if (e.var.has_grad()) e.var.node()->grad *= f;
  }
}

ag::Var batch_mean(const std::vector<ag::Var>& terms) {
  ag::Var s = terms.front();
  for (size_t i = 1; i < terms.size(); ++i) s = ag::add(s, terms[i]);
  return ag::scale(s, 1.0 / terms.size());
}

// Binary helpers for the checkpoint format.
class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void matrix(const Matrix& m) {
    u64(static_cast<uint64_t>(m.rows()));
    u64(static_cast<uint64_t>(m.cols()));
    // Eigen storage is column-major; the file keeps that order.
    raw(m.data(), sizeof(double) * m.size());
  }

 private:
  void raw(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}
  uint32_t u32() {
    uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const uint64_t n = u64();
    PHONOVC_CHECK(n < (1ULL << 32), IoError, "corrupt checkpoint ", path_);
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  Matrix matrix() {
    const uint64_t r = u64();
    const uint64_t c = u64();
    PHONOVC_CHECK(r < (1ULL << 31) && c < (1ULL << 31) && r * c < (1ULL << 34),
                  IoError, "corrupt checkpoint ", path_);
    Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    raw(m.data(), sizeof(double) * m.size());
    return m;
  }

 private:
  void raw(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    PHONOVC_CHECK(in_.gcount() == static_cast<std::streamsize>(n), IoError,
                  "truncated checkpoint ", path_);
  }
  std::ifstream& in_;
  std::string path_;
};

void collect(std::map<std::string, Matrix>& out, const std::string& prefix,
             const nn::ParameterStore& ps, const AdamW& opt) {
  const auto& entries = ps.entries();
  for (size_t i = 0; i < entries.size(); ++i) {
    out[prefix + "/" + entries[i].name] = entries[i].var.value();
    if (i < opt.moments().size() && opt.moments()[i].m.size() > 0) {
      out["m." + prefix + "/" + entries[i].name] = opt.moments()[i].m;
      out["v." + prefix + "/" + entries[i].name] = opt.moments()[i].v;
    }
  }
}

void restore(std::map<std::string, Matrix>& tensors, const std::string& prefix,
             const nn::ParameterStore& ps, AdamW& opt, const std::string& path) {
  const auto& entries = ps.entries();
  opt.moments().assign(entries.size(), {});
  for (size_t i = 0; i < entries.size(); ++i) {
    const std::string key = prefix + "/" + entries[i].name;
    auto it = tensors.find(key);
    PHONOVC_CHECK(it != tensors.end(), IoError, "incompatible checkpoint ",
                  path, ": missing parameter ", key);
    ag::Var v = entries[i].var;
    PHONOVC_CHECK(it->second.rows() == v.rows() && it->second.cols() == v.cols(),
                  IoError, "incompatible checkpoint ", path, ": ", key, " is [",
                  it->second.rows(), "x", it->second.cols(), "], model expects [",
                  v.rows(), "x", v.cols(), "]");
    v.mutable_value() = std::move(it->second);
    tensors.erase(it);
    auto m = tensors.find("m." + key);
    auto s = tensors.find("v." + key);
    if (m != tensors.end() && s != tensors.end()) {
      PHONOVC_CHECK(m->second.rows() == v.rows() && m->second.cols() == v.cols() &&
                        s->second.rows() == v.rows() && s->second.cols() == v.cols(),
                    IoError, "incompatible checkpoint ", path,
                    ": optimizer state for ", key);
      opt.moments()[i] = {std::move(m->second), std::move(s->second)};
      tensors.erase(m);
      tensors.erase(s);
    }
  }
}

}  // namespace

std::string LossReport::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["l_rec"] = l_rec;
  j["l_melpre"] = l_melpre;
  j["l_kl"] = l_kl;
  j["l_dur"] = l_dur;
  j["l_g"] = l_g;
  j["l_d"] = l_d;
  j["total_g"] = total_g;
  j["wall_time"] = wall_time;
  return j.dump();
}

LossReport LossReport::from_json(const std::string& line) {
  LossReport r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.step = j.at("step").get<int>();
    r.l_rec = j.at("l_rec").get<double>();
    r.l_melpre = j.at("l_melpre").get<double>();
    r.l_kl = j.at("l_kl").get<double>();
    r.l_dur = j.at("l_dur").get<double>();
    r.l_g = j.at("l_g").get<double>();
    r.l_d = j.at("l_d").get<double>();
    r.total_g = j.at("total_g").get<double>();
    r.wall_time = j.value("wall_time", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(detail::concat("malformed loss record: ", e.what()));
  }
  return r;
}

bool LossReport::same_losses(const LossReport& o) const {
  return step == o.step && l_rec == o.l_rec && l_melpre == o.l_melpre &&
         l_kl == o.l_kl && l_dur == o.l_dur && l_g == o.l_g && l_d == o.l_d &&
         total_g == o.total_g;
}

AdamW::AdamW(double lr, double beta1, double beta2, double eps,
             double weight_decay)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      weight_decay_(weight_decay) {}

void AdamW::step(const nn::ParameterStore& params) {
  const auto& entries = params.entries();
  if (moments_.size() < entries.size()) moments_.resize(entries.size());
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, double(steps_));
  const double c2 = 1.0 - std::pow(beta2_, double(steps_));
  for (size_t i = 0; i < entries.size(); ++i) {
    ag::Var p = entries[i].var;
    if (!p.has_grad()) continue;
    const Matrix& g = p.node()->grad;
    Moments& mo = moments_[i];
    if (mo.m.size() == 0) {
      mo.m = Matrix::Zero(g.rows(), g.cols());
      mo.v = Matrix::Zero(g.rows(), g.cols());
    }
    mo.m = beta1_ * mo.m + (1.0 - beta1_) * g;
    mo.v = beta2_ * mo.v + (1.0 - beta2_) * g.cwiseProduct(g);
    Matrix& w = p.mutable_value();
    w *= 1.0 - lr_ * weight_decay_;
    w.array() -= lr_ * (mo.m.array() / c1) / ((mo.v.array() / c2).sqrt() + eps_);
  }
}

CvaeTerms cvae_terms(const Model& model, const UtteranceFeatures& features,
                     Rng& rng) {
  const ModelConfig& cfg = model.config();
  CvaeTerms t;
  t.spk = model.speaker(features.speaker);
  TextEncoding text = encode_text(features, model.text);
  SslEncoding ssl = encode_ssl(text.c_text, features.contentvec, features.pframe,
                               model.ssl, cfg.ssl_alpha, cfg.ssl_beta);
  t.prior = run_prior(text.c_text, ssl.c_ssl, t.spk, features.pframe, 1.0,
                      model.prior);
  t.posterior = posterior_encode(features.linear_spec, t.spk, model.posterior, rng);
  PHONOVC_CHECK(t.prior.prior_mu.cols() == t.posterior.mu.cols(), AlignmentError,
                features.utterance_id, ": prior has ", t.prior.prior_mu.cols(),
                " frames, posterior has ", t.posterior.mu.cols());
  PHONOVC_CHECK(t.prior.mel_hat.rows() == features.mel_spec.rows(), ShapeError,
                features.utterance_id, ": mel has ", features.mel_spec.rows(),
                " bins, model predicts ", t.prior.mel_hat.rows());
  t.l_melpre = ag::l1_loss(t.prior.mel_hat, ag::constant(features.mel_spec));
  t.l_dur = duration_loss(t.prior.logw_pred, log_durations(features.pframe));
  ag::Var mu_q = t.posterior.mu;
  if (cfg.use_flow) {
    mu_q = flow_transport(mu_q, t.spk, FlowDirection::kForward, model.flow).z;
  }
  t.l_kl = kl_divergence(mu_q, t.posterior.logsigma, t.prior.prior_mu,
                         t.prior.prior_logsigma);
  return t;
}

LossReport train_step(const std::vector<const UtteranceFeatures*>& batch,
                      Model& model, AdamW& opt_g, AdamW& opt_d,
                      const TrainConfig& config, const DspConfig& dsp,
                      uint64_t seed, int step) {
  PHONOVC_CHECK(!batch.empty(), ConfigError, "train_step: empty batch");
  const auto start_time = std::chrono::steady_clock::now();
  Rng rng(seed);
  const int seg = config.segment_frames;
  const int hop = dsp.hop_length;
  model.gen.zero_grad();
  model.disc.zero_grad();

  std::vector<ag::Var> rec, melpre, kl, dur, fakes, reals;
  for (const UtteranceFeatures* f : batch) {
    CvaeTerms t = cvae_terms(model, *f, rng);
    const int frames = f->num_frames();
    PHONOVC_CHECK(frames >= seg, ConfigError, f->utterance_id, " has ", frames,
                  " frames, shorter than the ", seg, "-frame segment");
    PHONOVC_CHECK(static_cast<long>(f->audio.size()) >= long(frames) * hop,
                  AlignmentError, f->utterance_id, ": audio shorter than ",
                  frames, " frames");
    const int start = rng.uniform_int(0, frames - seg);
    ag::Var z = ag::slice_cols(t.posterior.z, start, seg);
    ag::Var fake = generate_waveform(z, t.spk, model.generator);
    Matrix real(1, long(seg) * hop);
    for (long i = 0; i < real.cols(); ++i) real(0, i) = f->audio[start * long(hop) + i];
    ag::Var real_v = ag::constant(std::move(real));
    rec.push_back(reconstruction_loss(fake, real_v, dsp));
    melpre.push_back(t.l_melpre);
    kl.push_back(t.l_kl);
    dur.push_back(t.l_dur);
    fakes.push_back(fake);
    reals.push_back(real_v);
  }
  const double mel_factor = config.mel_scale_enabled ? config.mel_scale : 1.0;
  ag::Var l_rec = ag::scale(batch_mean(rec), config.w_rec * mel_factor);
  ag::Var l_melpre = ag::scale(batch_mean(melpre), config.w_melpre * mel_factor);
  ag::Var l_kl = ag::scale(batch_mean(kl), config.w_kl);
  ag::Var l_dur = ag::scale(batch_mean(dur), config.w_dur);
  check_finite(l_rec.item(), "l_rec", step);
  check_finite(l_melpre.item(), "l_melpre", step);
  check_finite(l_kl.item(), "l_kl", step);
  check_finite(l_dur.item(), "l_dur", step);

  LossReport report;
  report.step = step;

  // Discriminator update on detached generator output.
  {
    std::vector<ag::Var> terms;
    for (size_t i = 0; i < batch.size(); ++i) {
      Discrimination d =
          discriminate(reals[i], ag::stop_gradient(fakes[i]), model.discriminators);
      terms.push_back(discriminator_loss(d.real.scores, d.fake.scores));
    }
    ag::Var l_d = batch_mean(terms);
    report.l_d = l_d.item();
    check_finite(report.l_d, "l_d", step);
    ag::backward(l_d);
    clip_grads(model.disc, config.grad_clip);
    opt_d.step(model.disc);
    model.disc.zero_grad();
  }

  // Generator update against the updated discriminators.
  std::vector<ag::Var> adv;
  for (size_t i = 0; i < batch.size(); ++i) {
    Discrimination d = discriminate(reals[i], fakes[i], model.discriminators);
    adv.push_back(ag::add(generator_adversarial_loss(d.fake.scores),
                          feature_matching_loss(d.real.features, d.fake.features)));
  }
  ag::Var l_g = ag::scale(batch_mean(adv), config.w_g);
  report.l_g = l_g.item();
  check_finite(report.l_g, "l_g", step);
  ag::Var total = ag::add(ag::add(ag::add(l_rec, l_melpre), ag::add(l_kl, l_dur)), l_g);
  report.l_rec = l_rec.item();
  report.l_melpre = l_melpre.item();
  report.l_kl = l_kl.item();
  report.l_dur = l_dur.item();
  report.total_g = total.item();
  check_finite(report.total_g, "total_g", step);
  ag::backward(total);
  clip_grads(model.gen, config.grad_clip);
  opt_g.step(model.gen);
  model.gen.zero_grad();
  model.disc.zero_grad();
  report.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start_time)
                         .count();
  return report;
}

ModelConfig model_config_for_corpus(const Config& config, const CorpusInfo& info,
                                    const TokenTables& tables) {
  ModelConfig mc;
  mc.read(config);
  mc.n_words = tables.words.size();
  mc.n_phones = tables.phones.size();
  mc.n_speakers = tables.speakers.size();
  mc.bert_dim = info.bert_dim;
  mc.ssl_dim = info.ssl_dim;
  mc.n_mels = info.dsp.n_mels;
  mc.linear_bins = info.dsp.linear_bins();
  mc.hop_length = info.dsp.hop_length;
  PHONOVC_CHECK(mc.n_speakers > 0, ConfigError, "corpus has no speakers");
  mc.validate();
  return mc;
}

TrainingSession::TrainingSession(const Config& config, const CorpusInfo& info,
                                 const TokenTables& tables)
    : config_(config), info_(info), tables_(tables) {
  info_.dsp.validate();
  train_.read(config_);
  train_.validate();
  const ModelConfig mc = model_config_for_corpus(config_, info_, tables_);
  mc.write(config_);
  train_.write(config_);
  model_ = std::make_unique<Model>(mc);
  opt_g_ = AdamW(train_.lr_g, train_.beta1, train_.beta2, train_.eps,
                 train_.weight_decay);
  opt_d_ = AdamW(train_.lr_d, train_.beta1, train_.beta2, train_.eps,
                 train_.weight_decay);
}

void TrainingSession::save(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    PHONOVC_CHECK(out.good(), IoError, "cannot write checkpoint ", tmp);
    Writer w(out);
    out.write(kMagic, 4);
    w.u32(kVersion);
    w.str(config_.serialize());
    w.str(info_.to_config().serialize());
    w.str(tables_.words.serialize());
    w.str(tables_.phones.serialize());
    w.str(tables_.speakers.serialize());
    w.u64(static_cast<uint64_t>(step_));
    w.u64(static_cast<uint64_t>(opt_g_.steps()));
    w.u64(static_cast<uint64_t>(opt_d_.steps()));
    std::map<std::string, Matrix> tensors;
    collect(tensors, "g", model_->gen, opt_g_);
    collect(tensors, "d", model_->disc, opt_d_);
    w.u64(tensors.size());
    for (const auto& [name, m] : tensors) {
      w.str(name);
      w.matrix(m);
    }
    PHONOVC_CHECK(out.good(), IoError, "failed writing checkpoint ", tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<TrainingSession> TrainingSession::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  PHONOVC_CHECK(in.good(), IoError, "cannot open checkpoint ", path);
  char magic[4] = {};
  in.read(magic, 4);
  PHONOVC_CHECK(in.gcount() == 4 && std::equal(magic, magic + 4, kMagic), IoError,
                path, " is not a checkpoint");
  Reader r(in, path);
  const uint32_t version = r.u32();
  PHONOVC_CHECK(version == kVersion, IoError, "checkpoint ", path,
                " has unsupported version ", version);
  Config config;
  CorpusInfo info;
  TokenTables tables;
  try {
    config = Config::parse(r.str());
    info = CorpusInfo::from_config(Config::parse(r.str()));
    tables.words = Vocabulary::deserialize(r.str());
    tables.phones = Vocabulary::deserialize(r.str());
    tables.speakers = SpeakerTable::deserialize(r.str());
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(detail::concat("incompatible checkpoint ", path, ": ", e.what()));
  }
  const uint64_t step = r.u64();
  const uint64_t g_steps = r.u64();
  const uint64_t d_steps = r.u64();
  const uint64_t count = r.u64();
  PHONOVC_CHECK(count < (1ULL << 24), IoError, "corrupt checkpoint ", path);
  std::map<std::string, Matrix> tensors;
  for (uint64_t i = 0; i < count; ++i) {
    std::string name = r.str();
    tensors[name] = r.matrix();
  }
  in.peek();
  PHONOVC_CHECK(in.eof(), IoError, "trailing bytes in checkpoint ", path);

  std::unique_ptr<TrainingSession> s;
  try {
    s = std::make_unique<TrainingSession>(config, info, tables);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(detail::concat("incompatible checkpoint ", path, ": ", e.what()));
  }
  restore(tensors, "g", s->model_->gen, s->opt_g_, path);
  restore(tensors, "d", s->model_->disc, s->opt_d_, path);
  PHONOVC_CHECK(tensors.empty(), IoError, "incompatible checkpoint ", path,
                ": unexpected tensor ", tensors.begin()->first);
  s->opt_g_.set_steps(static_cast<long long>(g_steps));
  s->opt_d_.set_steps(static_cast<long long>(d_steps));
  s->step_ = static_cast<int>(step);
  return s;
}

LossReport TrainingSession::step(const std::vector<UtteranceFeatures>& corpus) {
  PHONOVC_CHECK(!corpus.empty(), ConfigError, "cannot train on an empty corpus");
  const int n = step_ + 1;
  Rng rng(mix_seed(train_.seed, static_cast<uint64_t>(n)));
  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  const int count = std::min<int>(train_.batch_size, static_cast<int>(order.size()));
  std::vector<const UtteranceFeatures*> batch;
  for (int i = 0; i < count; ++i) {
    const int j = rng.uniform_int(i, static_cast<int>(order.size()) - 1);
    std::swap(order[i], order[j]);
    batch.push_back(&corpus[order[i]]);
  }
  LossReport report = train_step(batch, *model_, opt_g_, opt_d_, train_,
                                 info_.dsp, rng.next_u64(), n);
  step_ = n;
  return report;
}

void check_corpus(const std::vector<UtteranceFeatures>& corpus,
                  const TrainingSession& session) {
  PHONOVC_CHECK(!corpus.empty(), ConfigError, "cannot train on an empty corpus");
  const ModelConfig& mc = session.model().config();
  const int seg = session.train_config().segment_frames;
  for (const auto& f : corpus) {
    const auto bad = validate_alignment(f);
    PHONOVC_CHECK(bad.empty(), AlignmentError, f.utterance_id, ": ",
                  bad.empty() ? "" : bad.front().invariant);
    PHONOVC_CHECK(f.speaker >= 0 && f.speaker < mc.n_speakers, ConfigError,
                  f.utterance_id, ": speaker id ", f.speaker, " out of range");
    PHONOVC_CHECK(f.words_bert.rows() == mc.bert_dim &&
                      f.contentvec.rows() == mc.ssl_dim &&
                      f.linear_spec.rows() == mc.linear_bins &&
                      f.mel_spec.rows() == mc.n_mels,
                  ConfigError, f.utterance_id,
                  ": feature dimensions do not match the model");
    for (int t : f.tones) {
      PHONOVC_CHECK(t >= 0 && t < mc.n_tones, ConfigError, f.utterance_id,
                    ": tone ", t, " outside [0, ", mc.n_tones, ")");
    }
    PHONOVC_CHECK(f.num_frames() >= seg, ConfigError, f.utterance_id, " has ",
                  f.num_frames(), " frames, shorter than the ", seg,
                  "-frame segment");
  }
}

std::string checkpoint_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%08d.bin", step);
  return buf;
}

TrainResult train(const std::vector<UtteranceFeatures>& corpus,
                  TrainingSession& session, const TrainOptions& options) {
  check_corpus(corpus, session);
  const TrainConfig& tc = session.train_config();
  const int stop = options.stop_after >= 0
                       ? std::min(options.stop_after, tc.total_steps)
                       : tc.total_steps;
  TrainResult result;
  std::ofstream log;
  const std::filesystem::path dir(options.out_dir);
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(dir);
    const auto log_path = dir / "loss_log.jsonl";
    std::vector<std::string> kept;
    if (std::ifstream old(log_path); old.good()) {
      std::string line;
      while (std::getline(old, line)) {
        if (line.empty()) continue;
        if (LossReport::from_json(line).step <= session.current_step()) {
          kept.push_back(line);
        }
      }
    }
    log.open(log_path, std::ios::trunc);
    PHONOVC_CHECK(log.good(), IoError, "cannot write ", log_path.string());
    for (const auto& line : kept) log << line << '\n';
    log.flush();
  }
  while (session.current_step() < stop) {
    LossReport r = session.step(corpus);
    result.reports.push_back(r);
    if (log.is_open()) {
      log << r.to_json() << '\n';
      log.flush();
    }
    if (options.on_report) options.on_report(r);
    if (!options.out_dir.empty() && r.step % tc.checkpoint_interval == 0) {
      const std::string path = (dir / checkpoint_name(r.step)).string();
      session.save(path);
      result.checkpoints.push_back(path);
    }
  }
  return result;
}

}  // namespace phonovc
