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

// On-disk corpus layout.
//
//   <root>/corpus.txt           key = value corpus settings
//   <root>/utterances.txt       one utterance id per line, corpus order
//   <root>/words.vocab          "token id" lines (also phones.vocab)
//   <root>/speakers.txt         "name id" lines
//   <root>/<utt>/meta.txt       key = value sidecar
//   <root>/<utt>/<feature>.bin  tensor file
//
// Tensor file: 4-byte magic "PVT1", u8 dtype (1 f32, 2 f64, 3 i32), u8
// ndim, 2 zero bytes, ndim little-endian u64 dims, then row-major data.

#ifndef PHONOVC_FEATURE_STORE_HPP_
#define PHONOVC_FEATURE_STORE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phonovc/config.hpp"
#include "phonovc/dsp.hpp"
#include "phonovc/features.hpp"
#include "phonovc/vocabulary.hpp"

namespace phonovc {

enum class DType : uint8_t { kF32 = 1, kF64 = 2, kI32 = 3 };

struct Tensor {
  DType dtype = DType::kF32;
  std::vector<uint64_t> shape;
  std::vector<double> data;  // row-major

  Matrix matrix() const;          // 2-D only
  std::vector<int> ints() const;  // 1-D only
};

void write_tensor(const std::string& path, const Matrix& m,
                  DType dtype = DType::kF32);
void write_tensor(const std::string& path, std::span<const int> values);
void write_tensor(const std::string& path, std::span<const double> values,
                  DType dtype = DType::kF32);
Tensor read_tensor(const std::string& path);

struct ManifestEntry {
  std::string utterance_id;
  std::string audio_path;
  std::string speaker;
  std::string transcript;  // optional
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  int sample_rate = 44100;
  int hop_length = 512;
  int fft_size = 2048;
};

// "utterance_id | audio_path | speaker | transcript" lines; blank lines and
// lines starting with '#' are skipped. Relative audio paths are resolved
// against `base_dir`. Throws ConfigError on malformed lines or duplicate ids.
CorpusManifest parse_manifest(const std::string& text,
                              const std::string& base_dir,
                              const DspConfig& dsp);
CorpusManifest read_manifest(const std::string& path, const DspConfig& dsp);
void write_manifest(const std::string& path, const CorpusManifest& manifest);

struct CorpusInfo {
  DspConfig dsp;
  int bert_dim = 0;
  int ssl_dim = 0;
  std::string providers = "stub";
  uint64_t seed = 0;

  Config to_config() const;
  static CorpusInfo from_config(const Config& config);
};

struct TokenTables {
  Vocabulary words;
  Vocabulary phones;
  SpeakerTable speakers;
};

class FeatureStore {
 public:
  explicit FeatureStore(std::string root);

  const std::string& root() const { return root_; }
  bool exists() const;

  void write_info(const CorpusInfo& info) const;
  CorpusInfo read_info() const;
  void write_tables(const TokenTables& tables) const;
  TokenTables read_tables() const;
  void write_index(const std::vector<std::string>& ids) const;
  std::vector<std::string> read_index() const;

  void write(const UtteranceFeatures& features,
             const std::string& speaker_name) const;
  // Throws IoError on missing or corrupt files, AlignmentError when the
  // loaded bundle violates its invariants.
  UtteranceFeatures read(const std::string& utterance_id) const;
  // Every utterance in index order.
  std::vector<UtteranceFeatures> read_all() const;

 private:
  std::string dir(const std::string& utterance_id) const;
  std::string root_;
};

}  // namespace phonovc

#endif  // PHONOVC_FEATURE_STORE_HPP_
