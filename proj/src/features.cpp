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

#include "phonovc/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phonovc/error.hpp"

namespace phonovc {

std::vector<Violation> validate_alignment(const UtteranceFeatures& f) {
  using detail::concat;
  std::vector<Violation> out;
  const int frames = static_cast<int>(f.mel_spec.cols());
  const long pframe_sum = std::accumulate(f.pframe.begin(), f.pframe.end(), 0L);

  if (f.pframe.size() != f.phonemes.size()) {
    out.push_back({"len(pframe)≠P", concat("pframe has ", f.pframe.size(),
                                           " entries, P=", f.phonemes.size())});
  }
  for (size_t i = 0; i < f.pframe.size(); ++i) {
    if (f.pframe[i] < 1) {
      out.push_back({"pframe≥1", concat("pframe[", i, "]=", f.pframe[i])});
    }
  }
  if (pframe_sum != frames) {
    out.push_back({"sum(pframe)≠frames",
                   concat("sum(pframe)=", pframe_sum, ", frames=", frames)});
  }
  if (f.linear_spec.cols() != frames) {
    out.push_back({"linear_spec frames≠mel frames",
                   concat("linear_spec has ", f.linear_spec.cols(),
                          " frames, mel_spec has ", frames)});
  }
  if (f.contentvec.cols() != frames) {
    out.push_back({"contentvec frames≠frames",
                   concat("contentvec has ", f.contentvec.cols(),
                          " columns, frames=", frames)});
  }

  const size_t W = f.words.size();
  if (f.w2p.size() != W) {
    out.push_back({"len(w2p)≠W", concat("w2p has ", f.w2p.size(),
                                        " entries, W=", W)});
  }
  if (f.tones.size() != W) {
    out.push_back({"len(tones)≠W", concat("tones has ", f.tones.size(),
                                          " entries, W=", W)});
  }
  if (f.wframe.size() != W) {
    out.push_back({"len(wframe)≠W", concat("wframe has ", f.wframe.size(),
                                           " entries, W=", W)});
  }
  if (static_cast<size_t>(f.words_bert.cols()) != W) {
    out.push_back({"words_bert columns≠W",
                   concat("words_bert has ", f.words_bert.cols(),
                          " columns, W=", W)});
  }
  for (size_t i = 0; i < f.w2p.size(); ++i) {
    if (f.w2p[i] < 1) {
      out.push_back({"w2p≥1", concat("w2p[", i, "]=", f.w2p[i])});
    }
  }
  const long w2p_sum = std::accumulate(f.w2p.begin(), f.w2p.end(), 0L);
  if (w2p_sum != static_cast<long>(f.phonemes.size())) {
    out.push_back({"sum(w2p)≠P", concat("sum(w2p)=", w2p_sum,
                                        ", P=", f.phonemes.size())});
  } else if (f.pframe.size() == f.phonemes.size()) {
    // Word/phoneme frame consistency is only defined when w2p partitions P.
    size_t p = 0;
    for (size_t i = 0; i < f.w2p.size() && i < f.wframe.size(); ++i) {
      long expected = 0;
      for (int k = 0; k < f.w2p[i] && p < f.pframe.size(); ++k) {
        expected += f.pframe[p++];
      }
      if (expected != f.wframe[i]) {
        out.push_back({"wframe≠sum(pframe over word)",
                       concat("word ", i, ": wframe=", f.wframe[i],
                              ", phoneme frames sum to ", expected)});
      }
    }
  }
  return out;
}

std::vector<int> word_frames(std::span<const int> pframe,
                             std::span<const int> w2p) {
  const long total = std::accumulate(w2p.begin(), w2p.end(), 0L);
  PHONOVC_CHECK(total == static_cast<long>(pframe.size()), ShapeError,
                "word_frames: sum(w2p)=", total, " but ", pframe.size(),
                " phonemes");
  std::vector<int> out;
  out.reserve(w2p.size());
  size_t p = 0;
  for (int count : w2p) {
    PHONOVC_CHECK(count >= 1, ShapeError, "word_frames: w2p entry ", count,
                  " < 1");
    int acc = 0;
    for (int k = 0; k < count; ++k) acc += pframe[p++];
    out.push_back(acc);
  }
  return out;
}

std::vector<int> repair_durations(std::span<const int> pframe,
                                  int target_frames, int budget) {
  std::vector<int> out(pframe.begin(), pframe.end());
  PHONOVC_CHECK(!out.empty(), AlignmentError, "repair_durations: no phonemes");
  for (int v : out) {
    PHONOVC_CHECK(v >= 1, AlignmentError, "repair_durations: duration ", v,
                  " < 1");
  }
  const long sum = std::accumulate(out.begin(), out.end(), 0L);
  long deviation = target_frames - sum;
  if (deviation == 0) return out;
  PHONOVC_CHECK(std::labs(deviation) <= budget, AlignmentError,
                "durations sum to ", sum, " but the utterance has ",
                target_frames, " frames (budget ", budget, ")");

  std::vector<size_t> order(out.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return out[a] > out[b]; });
  const int step = deviation > 0 ? 1 : -1;
  size_t cursor = 0;
  size_t stalled = 0;
  while (deviation != 0) {
    const size_t idx = order[cursor];
    cursor = (cursor + 1) % order.size();
    if (step < 0 && out[idx] <= 1) {
      PHONOVC_CHECK(++stalled < order.size(), AlignmentError,
                    "cannot shorten durations to ", target_frames,
                    " frames without a phoneme dropping below 1 frame");
      continue;
    }
    stalled = 0;
    out[idx] += step;
    deviation -= step;
  }
  return out;
}

Matrix resample_ssl(const Matrix& raw, int target_frames) {
  PHONOVC_CHECK(raw.rows() > 0 && raw.cols() > 0, ShapeError,
                "resample_ssl: empty input matrix");
  PHONOVC_CHECK(target_frames >= 1, ShapeError,
                "resample_ssl: target_frames must be >= 1");
  const Eigen::Index src = raw.cols();
  if (src == target_frames) return raw;
  Matrix out(raw.rows(), target_frames);
  for (int j = 0; j < target_frames; ++j) {
    const double pos = target_frames == 1
                           ? (src - 1) / 2.0
                           : double(j) * double(src - 1) / (target_frames - 1);
    const Eigen::Index lo = std::min<Eigen::Index>(
        static_cast<Eigen::Index>(std::floor(pos)), src - 1);
    const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, src - 1);
    const double frac = pos - double(lo);
    if (frac == 0.0 || lo == hi) {
      out.col(j) = raw.col(lo);
    } else {
      out.col(j) = raw.col(lo) + frac * (raw.col(hi) - raw.col(lo));
    }
  }
  return out;
}

}  // namespace phonovc
