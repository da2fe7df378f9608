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

#include "fixtures.hpp"
#include "phonovc/error.hpp"
#include "phonovc/model.hpp"
#include "phonovc/model_config.hpp"
#include "phonovc/nn.hpp"

namespace phonovc {
namespace {

TEST(Config, ParseTypedAndRoundTrip) {
  const Config c = Config::parse("# comment\nssl.alpha = 0.5\nflag = true\n"
                                 "list = 8, 8, 8\nname = desk # trailing\n");
  EXPECT_EQ(c.get_double("ssl.alpha", 1.0), 0.5);
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_ints("list", {}), (std::vector<int>{8, 8, 8}));
  EXPECT_EQ(c.get_string("name", ""), "desk");
  EXPECT_EQ(c.get_int("missing", 3), 3);
  EXPECT_THROW(c.get_int("ssl.alpha", 0), ConfigError);
  EXPECT_THROW(c.get_double("name", 0), ConfigError);
  const Config back = Config::parse(c.serialize());
  EXPECT_EQ(back.entries(), c.entries());
  EXPECT_THROW(Config::parse("no equals sign\n"), ConfigError);
}

TEST(ModelConfig, WriteReadRoundTrip) {
  ModelConfig m = testing::tiny_model();
  m.ssl_alpha = 0.25;
  m.use_flow = false;
  Config c;
  m.write(c);
  ModelConfig back;
  back.read(c);
  EXPECT_EQ(back.hidden, 8);
  EXPECT_EQ(back.upsample_factors, m.upsample_factors);
  EXPECT_EQ(back.ssl_alpha, 0.25);
  EXPECT_FALSE(back.use_flow);
  EXPECT_EQ(back.periods, m.periods);
}

TEST(ModelConfig, Validation) {
  ModelConfig m;
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.output_samples(75), 38400);
  m.upsample_factors = {8, 8, 4};
  EXPECT_THROW(m.validate(), ConfigError);
  m = ModelConfig();
  m.posterior_kernel = 4;
  EXPECT_THROW(m.validate(), ConfigError);
  m = ModelConfig();
  m.logsigma_clamp = 0;
  EXPECT_THROW(m.validate(), ConfigError);
  Config c;
  c.set("text.hidden_dim", 64);
  c.set("ssl.hidden_dim", 32);
  EXPECT_THROW(ModelConfig().read(c), ConfigError);
}

TEST(ModelConfig, Presets) {
  ModelConfig paper;
  paper.read(preset_config("paper"));
  EXPECT_EQ(paper.hidden, 192);
  EXPECT_EQ(paper.upsample_factors, (std::vector<int>{8, 8, 4, 2}));
  TrainConfig pt;
  pt.read(preset_config("paper"));
  EXPECT_EQ(pt.total_steps, 500000);
  EXPECT_EQ(pt.batch_size, 16);
  ModelConfig desk;
  desk.read(preset_config("desk"));
  EXPECT_NO_THROW(desk.validate());
  EXPECT_EQ(desk.hidden, 64);
  TrainConfig dt;
  dt.read(preset_config("desk"));
  EXPECT_EQ(dt.total_steps, 200);
  EXPECT_EQ(dt.checkpoint_interval, 50);
  EXPECT_THROW(preset_config("huge"), ConfigError);
}

TEST(TrainConfig, Validation) {
  TrainConfig t;
  EXPECT_NO_THROW(t.validate());
  t.beta1 = 1.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig();
  t.w_kl = -1;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(ParameterStore, NamesAndCounts) {
  nn::ParameterStore ps(1);
  ps.add("a", Matrix::Zero(2, 3));
  EXPECT_THROW(ps.add("a", Matrix::Zero(1, 1)), ConfigError);
  nn::Linear::make(ps, "lin", 3, 4);
  EXPECT_TRUE(ps.contains("lin.w"));
  EXPECT_EQ(ps.scalar_count(), 6 + 12 + 4);
  EXPECT_EQ(ps.entries().front().name, "a");
}

TEST(Embedding, RangeChecked) {
  nn::ParameterStore ps(2);
  const nn::Embedding e = nn::Embedding::make(ps, "emb", 3, 5);
  const int ok[2] = {0, 2};
  const ag::Var v = e(ok);
  EXPECT_EQ(v.rows(), 5);
  EXPECT_EQ(v.cols(), 2);
  EXPECT_EQ(v.value().col(1), e.table.value().col(2));
  const int bad[1] = {3};
  EXPECT_THROW(e(bad), ConfigError);
  const int neg[1] = {-1};
  EXPECT_THROW(e(neg), ConfigError);
}

TEST(Model, SameSeedSameParameters) {
  Model a(testing::tiny_model()), b(testing::tiny_model());
  ASSERT_EQ(a.gen.entries().size(), b.gen.entries().size());
  for (size_t i = 0; i < a.gen.entries().size(); ++i) {
    EXPECT_EQ(a.gen.entries()[i].name, b.gen.entries()[i].name);
    EXPECT_EQ(a.gen.entries()[i].var.value(), b.gen.entries()[i].var.value());
  }
  EXPECT_THROW(a.speaker(2), ConfigError);
}

}  // namespace
}  // namespace phonovc
