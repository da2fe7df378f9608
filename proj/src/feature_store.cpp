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

#include "phonovc/feature_store.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "phonovc/error.hpp"

namespace phonovc {
namespace fs = std::filesystem;
namespace {

constexpr char kMagic[4] = {'P', 'V', 'T', '1'};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  PHONOVC_CHECK(in.good(), IoError, "truncated tensor file '", path, "'");
  return v;
}

void write_raw(const std::string& path, DType dtype,
               const std::vector<uint64_t>& shape, const double* data,
               size_t count) {
  std::ofstream out(path, std::ios::binary);
  PHONOVC_CHECK(out.good(), IoError, "cannot write '", path, "'");
  out.write(kMagic, 4);
  put<uint8_t>(out, static_cast<uint8_t>(dtype));
  put<uint8_t>(out, static_cast<uint8_t>(shape.size()));
  put<uint16_t>(out, 0);
  for (uint64_t d : shape) put<uint64_t>(out, d);
  for (size_t i = 0; i < count; ++i) {
    switch (dtype) {
      case DType::kF32: put<float>(out, static_cast<float>(data[i])); break;
      case DType::kF64: put<double>(out, data[i]); break;
      case DType::kI32: put<int32_t>(out, static_cast<int32_t>(data[i])); break;
    }
  }
  PHONOVC_CHECK(out.good(), IoError, "failed writing '", path, "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  PHONOVC_CHECK(in.good(), IoError, "cannot open '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Matrix Tensor::matrix() const {
  PHONOVC_CHECK(shape.size() == 2, ShapeError, "tensor has ", shape.size(),
                " dims, expected 2");
  Matrix m(shape[0], shape[1]);
  for (uint64_t r = 0; r < shape[0]; ++r)
    for (uint64_t c = 0; c < shape[1]; ++c) m(r, c) = data[r * shape[1] + c];
  return m;
}

std::vector<int> Tensor::ints() const {
  PHONOVC_CHECK(shape.size() == 1, ShapeError, "tensor has ", shape.size(),
                " dims, expected 1");
  std::vector<int> out(data.size());
  for (size_t i = 0; i < data.size(); ++i) out[i] = static_cast<int>(data[i]);
  return out;
}

void write_tensor(const std::string& path, const Matrix& m, DType dtype) {
  std::vector<double> rowmajor(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      rowmajor[r * m.cols() + c] = m(r, c);
  write_raw(path, dtype, {uint64_t(m.rows()), uint64_t(m.cols())},
            rowmajor.data(), rowmajor.size());
}

void write_tensor(const std::string& path, std::span<const int> values) {
  std::vector<double> data(values.begin(), values.end());
  write_raw(path, DType::kI32, {values.size()}, data.data(), data.size());
}

void write_tensor(const std::string& path, std::span<const double> values,
                  DType dtype) {
  write_raw(path, dtype, {values.size()}, values.data(), values.size());
}

Tensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  PHONOVC_CHECK(in.good(), IoError, "cannot open tensor '", path, "'");
  char magic[4];
  in.read(magic, 4);
  PHONOVC_CHECK(in.good() && std::memcmp(magic, kMagic, 4) == 0, IoError,
                "'", path, "' is not a tensor file");
  Tensor t;
  const auto dtype = get<uint8_t>(in, path);
  PHONOVC_CHECK(dtype >= 1 && dtype <= 3, IoError, "'", path,
                "' has unknown dtype ", int(dtype));
  t.dtype = static_cast<DType>(dtype);
  const auto ndim = get<uint8_t>(in, path);
  get<uint16_t>(in, path);
  uint64_t count = 1;
  for (int i = 0; i < ndim; ++i) {
    t.shape.push_back(get<uint64_t>(in, path));
    count *= t.shape.back();
  }
  PHONOVC_CHECK(count < (uint64_t(1) << 34), IoError, "'", path,
                "' declares an implausible size");
  t.data.resize(count);
  for (uint64_t i = 0; i < count; ++i) {
    switch (t.dtype) {
      case DType::kF32: t.data[i] = get<float>(in, path); break;
      case DType::kF64: t.data[i] = get<double>(in, path); break;
      case DType::kI32: t.data[i] = get<int32_t>(in, path); break;
    }
  }
  in.peek();
  PHONOVC_CHECK(in.eof(), IoError, "'", path, "' has trailing bytes");
  return t;
}

CorpusManifest parse_manifest(const std::string& text,
                              const std::string& base_dir,
                              const DspConfig& dsp) {
  CorpusManifest m;
  m.sample_rate = dsp.sample_rate;
  m.hop_length = dsp.hop_length;
  m.fft_size = dsp.n_fft;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, '|')) fields.push_back(trim(field));
    PHONOVC_CHECK(fields.size() == 3 || fields.size() == 4, ConfigError,
                  "manifest line ", lineno, ": expected 3 or 4 '|' fields");
    ManifestEntry e;
    e.utterance_id = fields[0];
    e.audio_path = fields[1];
    e.speaker = fields[2];
    if (fields.size() == 4) e.transcript = fields[3];
    PHONOVC_CHECK(!e.utterance_id.empty() && !e.speaker.empty(), ConfigError,
                  "manifest line ", lineno, ": empty id or speaker");
    PHONOVC_CHECK(e.utterance_id.find_first_of("/\\ ") == std::string::npos,
                  ConfigError, "manifest line ", lineno,
                  ": utterance id may not contain '/', '\\' or spaces");
    PHONOVC_CHECK(seen.insert(e.utterance_id).second, ConfigError,
                  "manifest line ", lineno, ": duplicate utterance id '",
                  e.utterance_id, "'");
    if (!e.audio_path.empty() && fs::path(e.audio_path).is_relative() &&
        !base_dir.empty()) {
      e.audio_path = (fs::path(base_dir) / e.audio_path).string();
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

CorpusManifest read_manifest(const std::string& path, const DspConfig& dsp) {
  return parse_manifest(read_text(path), fs::path(path).parent_path().string(),
                        dsp);
}

void write_manifest(const std::string& path, const CorpusManifest& manifest) {
  std::ofstream out(path);
  PHONOVC_CHECK(out.good(), IoError, "cannot write '", path, "'");
  for (const auto& e : manifest.entries) {
    out << e.utterance_id << " | " << e.audio_path << " | " << e.speaker;
    if (!e.transcript.empty()) out << " | " << e.transcript;
    out << '\n';
  }
}

Config CorpusInfo::to_config() const {
  Config c;
  c.set("sample_rate", dsp.sample_rate);
  c.set("n_fft", dsp.n_fft);
  c.set("hop_length", dsp.hop_length);
  c.set("n_mels", dsp.n_mels);
  c.set("fmin", dsp.fmin);
  c.set("fmax", dsp.fmax);
  c.set("bert_dim", bert_dim);
  c.set("ssl_dim", ssl_dim);
  c.set("providers", providers);
  c.set("seed", std::to_string(seed));
  return c;
}

CorpusInfo CorpusInfo::from_config(const Config& c) {
  CorpusInfo info;
  info.dsp.sample_rate = c.get_int("sample_rate", info.dsp.sample_rate);
  info.dsp.n_fft = c.get_int("n_fft", info.dsp.n_fft);
  info.dsp.hop_length = c.get_int("hop_length", info.dsp.hop_length);
  info.dsp.n_mels = c.get_int("n_mels", info.dsp.n_mels);
  info.dsp.fmin = c.get_double("fmin", info.dsp.fmin);
  info.dsp.fmax = c.get_double("fmax", info.dsp.fmax);
  info.bert_dim = c.get_int("bert_dim", 0);
  info.ssl_dim = c.get_int("ssl_dim", 0);
  info.providers = c.get_string("providers", "stub");
  info.seed = std::stoull(c.get_string("seed", "0"));
  info.dsp.validate();
  return info;
}

FeatureStore::FeatureStore(std::string root) : root_(std::move(root)) {}

bool FeatureStore::exists() const {
  return fs::exists(fs::path(root_) / "corpus.txt");
}

std::string FeatureStore::dir(const std::string& utterance_id) const {
  return (fs::path(root_) / utterance_id).string();
}

void FeatureStore::write_info(const CorpusInfo& info) const {
  fs::create_directories(root_);
  info.to_config().save((fs::path(root_) / "corpus.txt").string());
}

CorpusInfo FeatureStore::read_info() const {
  return CorpusInfo::from_config(
      Config::load((fs::path(root_) / "corpus.txt").string()));
}

void FeatureStore::write_tables(const TokenTables& tables) const {
  fs::create_directories(root_);
  tables.words.save((fs::path(root_) / "words.vocab").string());
  tables.phones.save((fs::path(root_) / "phones.vocab").string());
  tables.speakers.save((fs::path(root_) / "speakers.txt").string());
}

TokenTables FeatureStore::read_tables() const {
  TokenTables t;
  t.words = Vocabulary::load((fs::path(root_) / "words.vocab").string());
  t.phones = Vocabulary::load((fs::path(root_) / "phones.vocab").string());
  t.speakers = SpeakerTable::load((fs::path(root_) / "speakers.txt").string());
  return t;
}

void FeatureStore::write_index(const std::vector<std::string>& ids) const {
  fs::create_directories(root_);
  std::ofstream out(fs::path(root_) / "utterances.txt");
  PHONOVC_CHECK(out.good(), IoError, "cannot write index in '", root_, "'");
  for (const auto& id : ids) out << id << '\n';
}

std::vector<std::string> FeatureStore::read_index() const {
  std::istringstream in(read_text((fs::path(root_) / "utterances.txt").string()));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void FeatureStore::write(const UtteranceFeatures& f,
                         const std::string& speaker_name) const {
  const fs::path d = dir(f.utterance_id);
  fs::create_directories(d);
  auto p = [&d](const char* name) { return (d / name).string(); };
  write_tensor(p("words.bin"), f.words);
  write_tensor(p("phonemes.bin"), f.phonemes);
  write_tensor(p("tones.bin"), f.tones);
  write_tensor(p("words_bert.bin"), f.words_bert);
  write_tensor(p("pframe.bin"), f.pframe);
  write_tensor(p("wframe.bin"), f.wframe);
  write_tensor(p("w2p.bin"), f.w2p);
  const int spk[1] = {f.speaker};
  write_tensor(p("speaker.bin"), spk);
  write_tensor(p("contentvec.bin"), f.contentvec);
  write_tensor(p("linear_spec.bin"), f.linear_spec);
  write_tensor(p("mel_spec.bin"), f.mel_spec);
  write_tensor(p("audio.bin"), std::span<const double>(f.audio));
  Config meta;
  meta.set("utterance_id", f.utterance_id);
  meta.set("speaker", speaker_name);
  meta.set("speaker_id", f.speaker);
  meta.set("words", f.num_words());
  meta.set("phonemes", f.num_phonemes());
  meta.set("frames", f.num_frames());
  meta.set("samples", static_cast<int>(f.audio.size()));
  meta.save(p("meta.txt"));
}

UtteranceFeatures FeatureStore::read(const std::string& utterance_id) const {
  const fs::path d = dir(utterance_id);
  PHONOVC_CHECK(fs::is_directory(d), IoError, "no features for '",
                utterance_id, "' under '", root_, "'");
  auto p = [&d](const char* name) { return (d / name).string(); };
  UtteranceFeatures f;
  const Config meta = Config::load(p("meta.txt"));
  f.utterance_id = meta.get_string("utterance_id", "");
  PHONOVC_CHECK(f.utterance_id == utterance_id, IoError, "meta record of '",
                utterance_id, "' names '", f.utterance_id, "'");
  f.words = read_tensor(p("words.bin")).ints();
  f.phonemes = read_tensor(p("phonemes.bin")).ints();
  f.tones = read_tensor(p("tones.bin")).ints();
  f.words_bert = read_tensor(p("words_bert.bin")).matrix();
  f.pframe = read_tensor(p("pframe.bin")).ints();
  f.wframe = read_tensor(p("wframe.bin")).ints();
  f.w2p = read_tensor(p("w2p.bin")).ints();
  const auto spk = read_tensor(p("speaker.bin")).ints();
  PHONOVC_CHECK(spk.size() == 1, IoError, "speaker.bin of '", utterance_id,
                "' must hold one id");
  f.speaker = spk[0];
  f.contentvec = read_tensor(p("contentvec.bin")).matrix();
  f.linear_spec = read_tensor(p("linear_spec.bin")).matrix();
  f.mel_spec = read_tensor(p("mel_spec.bin")).matrix();
  f.audio = read_tensor(p("audio.bin")).data;
  const auto violations = validate_alignment(f);
  if (!violations.empty()) {
    throw AlignmentError(detail::concat("stored features of '", utterance_id,
                                        "' violate ", violations[0].invariant,
                                        ": ", violations[0].detail));
  }
  return f;
}

std::vector<UtteranceFeatures> FeatureStore::read_all() const {
  std::vector<UtteranceFeatures> out;
  for (const auto& id : read_index()) out.push_back(read(id));
  return out;
}

}  // namespace phonovc
