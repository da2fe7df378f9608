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

#include <cmath>

#include "fixtures.hpp"
#include "phonovc/error.hpp"
#include "phonovc/ssl_encoder.hpp"
#include "phonovc/text_encoder.hpp"

namespace phonovc {
namespace {

using testing::nihao_features;

std::vector<int> random_partition(Rng& rng, int parts, int total) {
  std::vector<int> d(parts, 1);
  for (int extra = total - parts; extra > 0; --extra) d[rng.uniform_int(0, parts - 1)]++;
  return d;
}

void zero(const ag::Var& v) {
  ag::Var p = v;
  p.mutable_value().setZero();
}

// Text encoder.

TEST(ExpandWordLevel, AllOnesIsIdentity) {
  Rng rng(1);
  const Matrix x = rng.normal_matrix(3, 5);
  const std::vector<int> w2p(5, 1);
  EXPECT_EQ(expand_word_level(x, w2p), x);
}

TEST(ExpandWordLevel, Table1ColumnPattern) {
  Matrix x(1, 4);
  x << 0, 1, 2, 3;
  const std::vector<int> w2p = {1, 2, 2, 1};
  const Matrix y = expand_word_level(x, w2p);
  ASSERT_EQ(y.cols(), 6);
  Matrix expect(1, 6);
  expect << 0, 1, 1, 2, 2, 3;
  EXPECT_EQ(y, expect);
}

TEST(ExpandWordLevel, MatchesRepetitionOracleAndPoolsBack) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = rng.uniform_int(1, 9);
    const Matrix x = rng.normal_matrix(4, w);
    std::vector<int> w2p(w);
    for (auto& k : w2p) k = rng.uniform_int(1, 4);
    Matrix oracle(4, 0);
    for (int i = 0; i < w; ++i) {
      for (int k = 0; k < w2p[i]; ++k) {
        oracle.conservativeResize(4, oracle.cols() + 1);
        oracle.col(oracle.cols() - 1) = x.col(i);
      }
    }
    const Matrix y = expand_word_level(x, w2p);
    EXPECT_EQ(y, oracle);
    const Matrix pooled = ag::segment_mean_cols(ag::constant(y), w2p).value();
    EXPECT_LT((pooled - x).cwiseAbs().maxCoeff(), 1e-12);
    // Power-of-two group sizes make the mean exact.
    for (auto& k : w2p) k = 1 << rng.uniform_int(0, 2);
    EXPECT_EQ(ag::segment_mean_cols(ag::constant(expand_word_level(x, w2p)), w2p).value(), x);
  }
}

TEST(ExpandWordLevel, RejectsBadCounts) {
  const Matrix x = Matrix::Ones(2, 3);
  const std::vector<int> zero_entry = {1, 0, 2};
  EXPECT_THROW(expand_word_level(x, zero_entry), AlignmentError);
  const std::vector<int> short_list = {1, 2};
  EXPECT_THROW(expand_word_level(x, short_list), ShapeError);
}

struct TextFixture {
  ModelConfig cfg;
  nn::ParameterStore ps{11};
  TextEncoderParams params;
  UtteranceFeatures f;

  explicit TextFixture(int hidden, int blocks) {
    cfg.hidden = hidden;
    cfg.bert_dim = 12;
    cfg.n_words = 8;
    cfg.n_phones = 8;
    cfg.n_tones = 8;
    cfg.text_blocks = blocks;
    params = TextEncoderParams::make(ps, cfg);
    f = nihao_features(12, 6, 17, 10, 16);
  }
};

TEST(EncodeText, SeventyFiveFrameShapesAndSum) {
  TextFixture t(192, 1);
  const TextEncoding e = encode_text(t.f, t.params);
  for (const ag::Var* v : {&e.c_words, &e.c_phones, &e.c_tones, &e.c_bert, &e.c_text}) {
    EXPECT_EQ(v->rows(), 192);
    EXPECT_EQ(v->cols(), 6);
  }
  const Matrix sum = e.c_words.value() + e.c_phones.value() + e.c_tones.value() +
                     e.c_bert.value();
  EXPECT_LT((e.c_text.value() - sum).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EncodeText, ZeroedProjectionsGiveZero) {
  for (int blocks : {0, 1}) {
    TextFixture t(16, blocks);
    zero(t.params.words.table);
    zero(t.params.phones.table);
    zero(t.params.tones.table);
    zero(t.params.bert.w);
    const TextEncoding e = encode_text(t.f, t.params);
    EXPECT_TRUE((e.c_text.value().array() == 0.0).all()) << "blocks " << blocks;
  }
}

TEST(EncodeText, ThreeZeroedStreamsLeaveTheFourth) {
  TextFixture t(16, 1);
  const TextEncoding full = encode_text(t.f, t.params);
  zero(t.params.words.table);
  zero(t.params.tones.table);
  zero(t.params.bert.w);
  const TextEncoding only = encode_text(t.f, t.params);
  EXPECT_EQ(only.c_text.value(), full.c_phones.value());
}

TEST(EncodeText, EmbeddingOnlyModePermutesColumns) {
  TextFixture t(16, 0);
  const TextEncoding a = encode_text(t.f, t.params);
  std::swap(t.f.phonemes[1], t.f.phonemes[2]);
  const TextEncoding b = encode_text(t.f, t.params);
  EXPECT_EQ(b.c_phones.value().col(1), a.c_phones.value().col(2));
  EXPECT_EQ(b.c_phones.value().col(2), a.c_phones.value().col(1));
  EXPECT_EQ(b.c_phones.value().col(0), a.c_phones.value().col(0));
}

TEST(EncodeText, OutOfVocabularyIdRejected) {
  TextFixture t(16, 0);
  t.f.phonemes[0] = 99;
  EXPECT_THROW(encode_text(t.f, t.params), ConfigError);
}

// SSL encoder.

struct SslFixture {
  ModelConfig cfg;
  nn::ParameterStore ps{21};
  SslEncoderParams params;

  SslFixture(int hidden, int ssl_dim) {
    cfg.hidden = hidden;
    cfg.ssl_dim = ssl_dim;
    params = SslEncoderParams::make(ps, cfg);
  }
};

TEST(PhonemeAvgPool, IdenticalColumns) {
  Rng rng(3);
  const Matrix col = rng.normal_matrix(5, 1);
  const Matrix vec = col.replicate(1, 10);
  const std::vector<int> dur = {3, 3, 4};
  const Matrix out = phoneme_avg_pool(vec, dur);
  for (int i = 0; i < 3; ++i) EXPECT_LT((out.col(i) - col).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PhonemeAvgPool, Table1Shape) {
  Rng rng(4);
  const std::vector<int> dur = {8, 9, 5, 10, 33, 10};
  const Matrix out = phoneme_avg_pool(rng.normal_matrix(256, 75), dur);
  EXPECT_EQ(out.rows(), 256);
  EXPECT_EQ(out.cols(), 6);
}

TEST(PhonemeAvgPool, MatchesSliceMeanOracle) {
  Rng rng(5);
  const Matrix vec = rng.normal_matrix(4, 12);
  const std::vector<int> dur = {3, 4, 5};
  const Matrix out = phoneme_avg_pool(vec, dur);
  int start = 0;
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 4; ++r) {
      double s = 0.0;
      for (int j = start; j < start + dur[i]; ++j) s += vec(r, j);
      EXPECT_NEAR(out(r, i), s / dur[i], 1e-12);
    }
    start += dur[i];
  }
}

TEST(PhonemeAvgPool, InvariantToOrderWithinSlice) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = rng.uniform_int(1, 6);
    const auto dur = random_partition(rng, d, d + rng.uniform_int(0, 20));
    const int f = std::accumulate(dur.begin(), dur.end(), 0);
    Matrix vec = rng.normal_matrix(3, f);
    const Matrix before = phoneme_avg_pool(vec, dur);
    int start = 0;
    for (int len : dur) {
      for (int k = len - 1; k > 0; --k) {
        vec.col(start + k).swap(vec.col(start + rng.uniform_int(0, k)));
      }
      start += len;
    }
    EXPECT_LT((phoneme_avg_pool(vec, dur) - before).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PhonemeAvgPool, RejectsBadDurations) {
  const Matrix vec = Matrix::Ones(2, 6);
  const std::vector<int> short_sum = {2, 3};
  const std::vector<int> zero_entry = {0, 6};
  EXPECT_THROW(phoneme_avg_pool(vec, short_sum), AlignmentError);
  EXPECT_THROW(phoneme_avg_pool(vec, zero_entry), AlignmentError);
}

TEST(PhonemeAttention, SingleFrameSliceReturnsProjectedValue) {
  SslFixture s(8, 5);
  Rng rng(7);
  const Matrix vec = rng.normal_matrix(5, 4);
  const std::vector<int> dur = {1, 3};
  const Matrix expect =
      s.params.out(s.params.value(ag::constant(vec.col(0)))).value();
  for (double q : {0.0, 1.0, -50.0}) {
    const Matrix query = Matrix::Constant(8, 2, q);
    const auto att = phoneme_attention(ag::constant(query), ag::constant(vec), dur, s.params);
    EXPECT_LT((att.output.value().col(0) - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_DOUBLE_EQ(att.weights(0, 0), 1.0);
  }
}

TEST(PhonemeAttention, IdenticalFramesIgnoreQuery) {
  SslFixture s(8, 5);
  Rng rng(8);
  const Matrix col = rng.normal_matrix(5, 1);
  const Matrix vec = col.replicate(1, 4);
  const std::vector<int> dur = {4};
  const Matrix expect = s.params.out(s.params.value(ag::constant(col))).value();
  const auto att = phoneme_attention(ag::constant(rng.normal_matrix(8, 1)),
                                     ag::constant(vec), dur, s.params);
  EXPECT_LT((att.output.value() - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PhonemeAttention, TwoFrameHandComputation) {
  SslFixture s(2, 2);
  auto set = [](ag::Var v, Matrix m) { v.mutable_value() = std::move(m); };
  set(s.params.key.w, Matrix::Identity(2, 2));
  set(s.params.key.b, Matrix::Zero(2, 1));
  set(s.params.value.w, 2.0 * Matrix::Identity(2, 2));
  set(s.params.value.b, Matrix::Zero(2, 1));
  set(s.params.out.w, Matrix::Identity(2, 2));
  set(s.params.out.b, Matrix::Zero(2, 1));
  Matrix vec(2, 2);
  vec << 1, 0, 0, 1;
  Matrix q(2, 1);
  q << 2, 0;
  const std::vector<int> dur = {2};
  const auto att = phoneme_attention(ag::constant(q), ag::constant(vec), dur, s.params);
  const double s0 = 2.0 / std::sqrt(2.0);
  const double w0 = std::exp(s0) / (std::exp(s0) + 1.0);
  EXPECT_NEAR(att.weights(0, 0), w0, 1e-12);
  EXPECT_NEAR(att.weights(1, 0), 1.0 - w0, 1e-12);
  EXPECT_NEAR(att.output.value()(0, 0), 2.0 * w0, 1e-12);
  EXPECT_NEAR(att.output.value()(1, 0), 2.0 * (1.0 - w0), 1e-12);
}

TEST(PhonemeAttention, WeightsAreSliceDistributions) {
  SslFixture s(8, 5);
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = rng.uniform_int(1, 6);
    const auto dur = random_partition(rng, d, d + rng.uniform_int(0, 25));
    const int f = std::accumulate(dur.begin(), dur.end(), 0);
    const auto att = phoneme_attention(ag::constant(rng.normal_matrix(8, d)),
                                       ag::constant(rng.normal_matrix(5, f)), dur,
                                       s.params);
    int start = 0;
    for (int i = 0; i < d; ++i) {
      EXPECT_NEAR(att.weights.col(i).sum(), 1.0, 1e-6);
      for (int j = 0; j < f; ++j) {
        const bool inside = j >= start && j < start + dur[i];
        if (inside) {
          EXPECT_GE(att.weights(j, i), 0.0);
        } else {
          EXPECT_EQ(att.weights(j, i), 0.0);
        }
      }
      start += dur[i];
    }
  }
}

TEST(PhonemeAttention, QueryScalingKeepsArgmax) {
  SslFixture s(8, 5);
  Rng rng(10);
  const std::vector<int> dur = {5, 7};
  const Matrix vec = rng.normal_matrix(5, 12);
  const Matrix q = rng.normal_matrix(8, 2);
  const auto a = phoneme_attention(ag::constant(q), ag::constant(vec), dur, s.params);
  const auto b = phoneme_attention(ag::constant(3.0 * q), ag::constant(vec), dur, s.params);
  for (int i = 0; i < 2; ++i) {
    Eigen::Index ia, ib;
    a.weights.col(i).maxCoeff(&ia);
    b.weights.col(i).maxCoeff(&ib);
    EXPECT_EQ(ia, ib);
  }
  EXPECT_GT((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PhonemeAttention, ShapeErrors) {
  SslFixture s(8, 5);
  const std::vector<int> dur = {2, 2};
  EXPECT_THROW(phoneme_attention(ag::constant(Matrix::Zero(8, 3)),
                                 ag::constant(Matrix::Zero(5, 4)), dur, s.params),
               ShapeError);
  EXPECT_THROW(phoneme_attention(ag::constant(Matrix::Zero(8, 2)),
                                 ag::constant(Matrix::Zero(4, 4)), dur, s.params),
               ShapeError);
}

TEST(FuseSsl, DegenerateAndDefaultWeights) {
  Rng rng(11);
  const ag::Var a = ag::constant(rng.normal_matrix(6, 4));
  const ag::Var b = ag::constant(rng.normal_matrix(6, 4));
  EXPECT_EQ(fuse_ssl(a, b, 2.0, 0.0).value(), 2.0 * a.value());
  const Matrix fused = fuse_ssl(a, a, 1.0, 0.5).value();
  EXPECT_LT((fused - 1.5 * a.value()).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix r = fuse_ssl(a, b, 0.3, -1.7).value();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(r(i, j), 0.3 * a.value()(i, j) - 1.7 * b.value()(i, j), 1e-15);
    }
  }
  EXPECT_THROW(fuse_ssl(a, ag::constant(Matrix::Zero(6, 3)), 1.0, 0.5), ShapeError);
}

TEST(EncodeSsl, FusedLengthMatchesPhonemes) {
  SslFixture s(16, 6);
  Rng rng(12);
  const auto f = nihao_features(4, 6, 17, 10, 16);
  const ag::Var c_text = ag::constant(rng.normal_matrix(16, 6));
  const SslEncoding e = encode_ssl(c_text, f.contentvec, f.pframe, s.params, 1.0, 0.5);
  EXPECT_EQ(e.vec_dur.rows(), 6);
  for (const ag::Var* v : {&e.vec_dur, &e.c_avg, &e.c_att, &e.c_ssl}) EXPECT_EQ(v->cols(), 6);
  const Matrix expect = e.c_avg.value() + 0.5 * e.c_att.value();
  EXPECT_LT((e.c_ssl.value() - expect).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace phonovc
