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

#include "phonovc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

template <typename T>
T read_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz >= min_log_hz) return min_log_mel + std::log(hz / min_log_hz) / logstep;
  return hz / f_sp;
}

double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel >= min_log_mel) return min_log_hz * std::exp(logstep * (mel - min_log_mel));
  return f_sp * mel;
}

const Matrix& cached_filterbank(const DspConfig& c) {
  using Key = std::tuple<int, int, int, double, double>;
  static std::mutex mutex;
  static std::map<Key, Matrix> cache;
  std::lock_guard<std::mutex> lock(mutex);
  Key key{c.sample_rate, c.n_fft, c.n_mels, c.fmin, c.fmax};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, mel_filterbank(c)).first;
  return it->second;
}

const std::vector<double>& cached_window(int n) {
  static std::mutex mutex;
  static std::map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, hann_window(n)).first;
  return it->second;
}

}  // namespace

void DspConfig::validate() const {
  PHONOVC_CHECK(sample_rate > 0, ConfigError, "sample_rate must be positive");
  PHONOVC_CHECK(n_fft >= 2 && n_fft % 2 == 0, ConfigError,
                "n_fft must be even and >= 2");
  PHONOVC_CHECK(hop_length >= 1 && hop_length <= n_fft, ConfigError,
                "hop_length must lie in [1, n_fft]");
  PHONOVC_CHECK((n_fft - hop_length) % 2 == 0, ConfigError,
                "n_fft - hop_length must be even");
  PHONOVC_CHECK(n_mels >= 1, ConfigError, "n_mels must be positive");
}

Audio read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  PHONOVC_CHECK(in.good(), IoError, "cannot open audio file '", path, "'");
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  PHONOVC_CHECK(data.size() >= 12 && std::memcmp(data.data(), "RIFF", 4) == 0 &&
                    std::memcmp(data.data() + 8, "WAVE", 4) == 0,
                IoError, "'", path, "' is not a RIFF/WAVE file");
  int format = 0, channels = 0, rate = 0, bits = 0;
  const unsigned char* pcm = nullptr;
  size_t pcm_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const uint32_t size = read_le<uint32_t>(&data[pos + 4]);
    const unsigned char* body = &data[pos + 8];
    const size_t avail = data.size() - pos - 8;
    if (std::memcmp(&data[pos], "fmt ", 4) == 0 && size >= 16 && avail >= 16) {
      format = read_le<uint16_t>(body);
      channels = read_le<uint16_t>(body + 2);
      rate = static_cast<int>(read_le<uint32_t>(body + 4));
      bits = read_le<uint16_t>(body + 14);
      if (format == 0xFFFE && size >= 26) format = read_le<uint16_t>(body + 24);
    } else if (std::memcmp(&data[pos], "data", 4) == 0) {
      pcm = body;
      pcm_bytes = std::min<size_t>(size, avail);
    }
    pos += 8 + size + (size & 1u);
  }
  PHONOVC_CHECK(pcm != nullptr && channels > 0 && rate > 0, IoError, "'", path,
                "' lacks fmt/data chunks");
  PHONOVC_CHECK((format == 1 && (bits == 16 || bits == 24 || bits == 32)) ||
                    (format == 3 && (bits == 32 || bits == 64)),
                IoError, "'", path, "': unsupported sample format ", format,
                "/", bits, " bits");
  const int bytes = bits / 8;
  const size_t frames = pcm_bytes / (size_t(bytes) * channels);
  Audio audio;
  audio.sample_rate = rate;
  audio.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = pcm + (i * channels + c) * bytes;
      double v = 0.0;
      if (format == 3) {
        v = bits == 32 ? read_le<float>(p) : read_le<double>(p);
      } else if (bits == 16) {
        v = read_le<int16_t>(p) / 32768.0;
      } else if (bits == 24) {
        int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s |= ~0xFFFFFF;
        v = s / 8388608.0;
      } else {
        v = read_le<int32_t>(p) / 2147483648.0;
      }
      acc += v;
    }
    audio.samples[i] = acc / channels;
  }
  return audio;
}

void write_wav(const std::string& path, const Audio& audio) {
  PHONOVC_CHECK(audio.sample_rate > 0, IoError, "write_wav: invalid sample rate");
  std::ofstream os(path, std::ios::binary);
  PHONOVC_CHECK(os.good(), IoError, "cannot write '", path, "'");
  const uint32_t data_bytes = static_cast<uint32_t>(audio.samples.size() * 2);
  os.write("RIFF", 4);
  put_le<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_le<uint32_t>(os, 16);
  put_le<uint16_t>(os, 1);
  put_le<uint16_t>(os, 1);
  put_le<uint32_t>(os, static_cast<uint32_t>(audio.sample_rate));
  put_le<uint32_t>(os, static_cast<uint32_t>(audio.sample_rate * 2));
  put_le<uint16_t>(os, 2);
  put_le<uint16_t>(os, 16);
  os.write("data", 4);
  put_le<uint32_t>(os, data_bytes);
  for (double s : audio.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    put_le<int16_t>(os, static_cast<int16_t>(std::lround(c * 32767.0)));
  }
  PHONOVC_CHECK(os.good(), IoError, "failed writing '", path, "'");
}

int frame_count(long num_samples, const DspConfig& config) {
  return static_cast<int>(num_samples / config.hop_length);
}

std::vector<double> hann_window(int length) {
  // Periodic Hann, matching torch.hann_window's default.
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

Matrix mel_filterbank(const DspConfig& c) {
  const int bins = c.linear_bins();
  const double fmax = c.fmax > 0.0 ? c.fmax : c.sample_rate / 2.0;
  const double mel_lo = hz_to_mel(c.fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> hz(c.n_mels + 2);
  for (int i = 0; i < c.n_mels + 2; ++i) {
    hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (c.n_mels + 1));
  }
  Matrix fb = Matrix::Zero(c.n_mels, bins);
  for (int m = 0; m < c.n_mels; ++m) {
    const double lo = hz[m], mid = hz[m + 1], hi = hz[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double f = double(k) * c.sample_rate / c.n_fft;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      fb(m, k) = std::max(0.0, std::min(up, down)) * norm;
    }
  }
  return fb;
}

ag::Var linear_spectrogram(const ag::Var& signal, const DspConfig& config) {
  const int pad = (config.n_fft - config.hop_length) / 2;
  PHONOVC_CHECK(signal.cols() > pad && signal.cols() >= config.hop_length,
                ShapeError, "signal of ", signal.cols(),
                " samples is too short for n_fft ", config.n_fft);
  ag::Var padded = pad > 0 ? ag::pad_reflect_cols(signal, pad, pad) : signal;
  return ag::stft_magnitude(padded, config.n_fft, config.hop_length,
                            cached_window(config.n_fft));
}

ag::Var log_mel_from_linear(const ag::Var& linear, const DspConfig& config) {
  const ag::Var basis = ag::constant(cached_filterbank(config));
  return ag::log_clamped(ag::matmul(basis, linear), 1e-5);
}

Matrix linear_spectrogram(const std::vector<double>& samples,
                          const DspConfig& config) {
  ag::NoGradGuard no_grad;
  Matrix row = Eigen::Map<const Matrix>(samples.data(), 1,
                                        static_cast<Eigen::Index>(samples.size()));
  return linear_spectrogram(ag::constant(std::move(row)), config).value();
}

Matrix log_mel_spectrogram(const std::vector<double>& samples,
                           const DspConfig& config) {
  ag::NoGradGuard no_grad;
  Matrix row = Eigen::Map<const Matrix>(samples.data(), 1,
                                        static_cast<Eigen::Index>(samples.size()));
  return log_mel_from_linear(linear_spectrogram(ag::constant(std::move(row)), config),
                             config)
      .value();
}

}  // namespace phonovc
