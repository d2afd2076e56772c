#include <cmath>
#include <filesystem>
#include <vector>

#include "gtest/gtest.h"
#include "pfuse/common/error.hpp"
#include "pfuse/metrics/auc.hpp"
#include "pfuse/nn/layers.hpp"
#include "pfuse/rank/ranking_model.hpp"
#include "pfuse/rank/snapshot.hpp"
#include "support.hpp"

using pfuse::data::ImpressionLog;
using pfuse::data::ObjectiveSet;
using pfuse::nn::Tensor;
using pfuse::rank::RankingConfig;
using pfuse::rank::RankingModel;

namespace {

void zero_entries(RankingModel& model, const std::string& prefix) {
  for (const auto& name : model.params().names()) {
    if (name.rfind(prefix, 0) == 0) model.params().mutable_entry(name).fill(0.0);
  }
}

RankingConfig tiny_config() {
  RankingConfig c;
  c.n_experts = 1;
  c.expert_hidden_dims = {1};
  c.tower_hidden_dims = {1};
  c.tower_output_dim = 1;
  c.embedding_dim = 1;
  c.n_users = 3;
  c.n_items = 3;
  c.dense_dim = 1;
  c.objectives = ObjectiveSet({"ctr"}, {});
  return c;
}

ImpressionLog make_log(std::int64_t user, std::int64_t item, std::vector<double> dense,
                       std::size_t n_objectives) {
  ImpressionLog log;
  log.user_id = user;
  log.item_id = item;
  log.dense_features = std::move(dense);
  log.labels.assign(n_objectives, 0);
  return log;
}

}  // namespace

TEST(BuildInput, LengthAndLookup) {
  auto w = pfuse::testing::make_world(1, 10, 0);
  RankingModel model(w.ranking, 1);
  const auto& log = w.train[0];
  const auto v = model.build_input(log);
  EXPECT_EQ(v.size(), 2 * w.ranking.embedding_dim + log.dense_features.size());

  ImpressionLog probe = log;
  probe.user_id = 3;
  probe.item_id = 7;
  const auto p = model.build_input(probe);
  const auto user_row = model.params().get("rank.user_embedding").row(3);
  const auto item_row = model.params().get("rank.item_embedding").row(7);
  const std::size_t e = w.ranking.embedding_dim;
  for (std::size_t i = 0; i < e; ++i) {
    EXPECT_EQ(p[i], user_row[i]);
    EXPECT_EQ(p[e + i], item_row[i]);
  }
  for (std::size_t i = 0; i < probe.dense_features.size(); ++i) {
    EXPECT_EQ(p[2 * e + i], probe.dense_features[i]);
  }
}

TEST(BuildInput, ZeroTablesAndFeaturesGiveZeroVector) {
  auto w = pfuse::testing::make_world(1, 1, 0);
  RankingModel model(w.ranking, 1);
  zero_entries(model, "rank.user_embedding");
  zero_entries(model, "rank.item_embedding");
  auto log = w.train[0];
  std::fill(log.dense_features.begin(), log.dense_features.end(), 0.0);
  for (double x : model.build_input(log)) EXPECT_EQ(x, 0.0);
}

TEST(BuildInput, UnknownIdsUseReservedRow) {
  EXPECT_EQ(pfuse::rank::embedding_row(0, 10), 0u);
  EXPECT_EQ(pfuse::rank::embedding_row(11, 10), 0u);
  EXPECT_EQ(pfuse::rank::embedding_row(-4, 10), 0u);
  EXPECT_EQ(pfuse::rank::embedding_row(10, 10), 10u);
}

TEST(MoeForward, SingleExpertGateIsOne) {
  auto w = pfuse::testing::make_world(2, 5, 0);
  w.ranking.n_experts = 1;
  RankingModel model(w.ranking, 3);
  for (const auto& log : w.train) {
    const auto v = model.build_input(log);
    const auto moe = model.moe_forward(v);
    const auto expert = pfuse::nn::dense_forward(v, model.params().get("rank.expert0.0.w"),
                                                 model.params().get("rank.expert0.0.b").values(),
                                                 pfuse::nn::Activation::relu);
    for (std::size_t o = 0; o < moe.gates.size(); ++o) {
      ASSERT_EQ(moe.gates[o].size(), 1u);
      EXPECT_EQ(moe.gates[o][0], 1.0);
      for (std::size_t i = 0; i < expert.size(); ++i) {
        EXPECT_NEAR(moe.mixtures[o][i], expert[i], 1e-15);
      }
    }
  }
}

TEST(MoeForward, GateRowsSumToOne) {
  auto w = pfuse::testing::make_world(3, 50, 0);
  RankingModel model(w.ranking, 4);
  for (const auto& log : w.train) {
    const auto moe = model.moe_forward(model.build_input(log));
    for (const auto& gate : moe.gates) {
      double s = 0.0;
      for (double g : gate) s += g;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(MoeForward, HandSetGateLogits) {
  auto w = pfuse::testing::make_world(3, 1, 0);
  w.ranking.n_experts = 2;
  RankingModel model(w.ranking, 4);
  zero_entries(model, "rank.gate.ctr.w");
  model.params().assign("rank.gate.ctr.b", Tensor(1, 2, std::vector<double>{0.0, std::log(3.0)}));
  const auto moe = model.moe_forward(model.build_input(w.train[0]));
  const auto ctr = w.ranking.objectives.index_of("ctr");
  EXPECT_NEAR(moe.gates[ctr][0], 0.25, 1e-15);
  EXPECT_NEAR(moe.gates[ctr][1], 0.75, 1e-15);
}

TEST(RankForward, ZeroHeadsGiveHalf) {
  auto w = pfuse::testing::make_world(4, 20, 0);
  RankingModel model(w.ranking, 5);
  zero_entries(model, "rank.head.");
  for (const auto& log : w.train) {
    const auto out = model.rank_forward(log);
    ASSERT_EQ(out.pxtr.size(), w.ranking.objectives.size());
    for (double p : out.pxtr) EXPECT_EQ(p, 0.5);
    for (const auto& h : out.hidden) EXPECT_EQ(h.size(), w.ranking.tower_output_dim);
  }
}

TEST(RankForward, TinyNetworkHandComputed) {
  RankingModel model(tiny_config(), 1);
  auto& p = model.params();
  p.assign("rank.user_embedding", Tensor(4, 1, std::vector<double>{0.0, 0.0, 0.5, 0.0}));
  p.assign("rank.item_embedding", Tensor(4, 1, std::vector<double>{0.0, -1.0, 0.0, 0.0}));
  p.assign("rank.expert0.0.w", Tensor(1, 3, std::vector<double>{1.0, 1.0, 1.0}));
  p.assign("rank.expert0.0.b", Tensor(1, 1, 0.1));
  p.assign("rank.tower.ctr.0.w", Tensor(1, 1, 0.5));
  p.assign("rank.tower.ctr.0.b", Tensor(1, 1, -0.3));
  p.assign("rank.head.ctr.w", Tensor(1, 1, 2.0));
  p.assign("rank.head.ctr.b", Tensor(1, 1, 0.0));
  // v = (0.5, -1, 2); expert = relu(1.5 + 0.1) = 1.6; t = relu(0.8 - 0.3) = 0.5;
  // ŷ = sigmoid(2 · 0.5)
  const auto out = model.rank_forward(make_log(2, 1, {2.0}, 1));
  EXPECT_NEAR(out.hidden[0][0], 0.5, 1e-15);
  EXPECT_NEAR(out.pxtr[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(RankTrainStep, HalfPredictionsGiveLnTwo) {
  auto w = pfuse::testing::make_world(5, 32, 0);
  RankingModel model(w.ranking, 6);
  zero_entries(model, "rank.head.");
  const auto losses = model.train_step(w.train);
  ASSERT_EQ(losses.size(), w.ranking.objectives.size());
  for (double l : losses) EXPECT_NEAR(l, std::log(2.0), 1e-15);
}

TEST(RankTrainStep, EmptyBatchIsContractViolation) {
  auto w = pfuse::testing::make_world(5, 1, 0);
  RankingModel model(w.ranking, 6);
  EXPECT_THROW(model.train_step({}), pfuse::ContractViolation);
}

TEST(RankTrainStep, LossDecreasesOverFirstHundredSteps) {
  auto w = pfuse::testing::make_world(6, 3200, 2000);
  RankingModel model(w.ranking, 7);
  const auto probe = pfuse::rank::make_batch(w.eval, w.ranking.n_users, w.ranking.n_items,
                                             w.ranking.dense_dim, w.ranking.objectives.size());
  auto probe_loss = [&] {
    pfuse::nn::Graph g;
    const auto f = model.forward(g, probe);
    return g.value(model.loss(g, f, probe))[0];
  };
  std::vector<double> curve;
  for (std::size_t s = 0; s < 100; ++s) {
    model.train_step(std::span(w.train).subspan(s * 32, 32));
    curve.push_back(probe_loss());
  }
  std::vector<double> moving;
  for (std::size_t s = 9; s < curve.size(); ++s) {
    double sum = 0.0;
    for (std::size_t i = s - 9; i <= s; ++i) sum += curve[i];
    moving.push_back(sum / 10.0);
  }
  for (std::size_t i = 1; i < moving.size(); ++i) {
    EXPECT_LE(moving[i], moving[i - 1]) << "step " << i + 9;
  }
  EXPECT_LT(moving.back(), moving.front());
}

TEST(RankTrainStep, TrainedModelBeatsChanceOnEveryObjective) {
  pfuse::data::DatagenConfig config;
  config.n_train = 50000;
  const auto universe = pfuse::data::generate_universe(20240611, config);
  const auto train = pfuse::data::stream_impressions(universe, 1, config.n_train);
  const auto eval = pfuse::data::stream_impressions(universe, 2, config.n_eval);
  RankingConfig rc;
  rc.n_users = config.n_users;
  rc.n_items = config.n_items;
  rc.dense_dim = universe.dense_dim();
  RankingModel model(rc, 11);
  for (std::size_t s = 0; s < 2000; ++s) {
    const std::size_t begin = (s * 32) % (train.size() - 32);
    model.train_step(std::span(train).subspan(begin, 32));
  }
  const auto out = model.infer(eval);
  const pfuse::metrics::UserGroups groups(eval);
  for (std::size_t o = 0; o < rc.objectives.size(); ++o) {
    std::vector<double> scores(eval.size());
    for (std::size_t r = 0; r < eval.size(); ++r) scores[r] = out.pxtr(r, o);
    EXPECT_GT(pfuse::metrics::gauc(scores, eval, groups, o).gauc, 0.5) << rc.objectives.name(o);
  }
}

TEST(RankingModel, PerObjectiveSeparation) {
  auto w = pfuse::testing::make_world(7, 40, 0);
  RankingModel model(w.ranking, 8);
  const auto before = model.infer(w.train);
  const auto ctr = w.ranking.objectives.index_of("ctr");
  for (const auto& name : model.params().names()) {
    if (name.rfind("rank.tower.ctr.", 0) == 0) {
      for (auto& v : model.params().mutable_entry(name).values()) v += 0.3;
    }
  }
  const auto after = model.infer(w.train);
  bool ctr_changed = false;
  for (std::size_t r = 0; r < w.train.size(); ++r) {
    for (std::size_t o = 0; o < w.ranking.objectives.size(); ++o) {
      if (o == ctr) {
        ctr_changed = ctr_changed || before.pxtr(r, o) != after.pxtr(r, o);
      } else {
        EXPECT_EQ(before.pxtr(r, o), after.pxtr(r, o));
      }
    }
  }
  EXPECT_TRUE(ctr_changed);
}

TEST(RankingModel, OutputsStayInsideOpenInterval) {
  auto w = pfuse::testing::make_world(8, 500, 0);
  RankingModel model(w.ranking, 9);
  const auto out = model.infer(w.train);
  for (double p : out.pxtr.values()) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  for (const auto& h : out.hidden) EXPECT_TRUE(h.all_finite());
}

TEST(RankingConfig, RejectsTowerThatDoesNotEndAtD) {
  auto c = tiny_config();
  c.tower_hidden_dims = {4, 2};
  c.tower_output_dim = 3;
  EXPECT_THROW(c.validate(), pfuse::ConfigError);
}

TEST(Snapshot, FileRoundTripIsBitExact) {
  auto w = pfuse::testing::make_world(9, 64, 0);
  RankingModel model(w.ranking, 10);
  model.train_step(std::span(w.train).subspan(0, 32));
  const auto path = std::filesystem::temp_directory_path() / "pfuse_snapshot_test" / "r.json";
  pfuse::rank::write_snapshot(path, pfuse::rank::make_ranking_snapshot(model));
  const auto restored = pfuse::rank::ranking_from_snapshot(pfuse::rank::read_snapshot(path));
  EXPECT_EQ(restored.params(), model.params());
  std::filesystem::remove_all(path.parent_path());
  EXPECT_THROW(pfuse::rank::read_snapshot(path), pfuse::MissingArtifact);
}

class RankingGradientOracle : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RankingGradientOracle, LossMatchesFiniteDifferences) {
  auto w = pfuse::testing::make_world(GetParam(), 8, 0, 12, 6);
  w.ranking.n_experts = 2;
  w.ranking.expert_hidden_dims = {6};
  w.ranking.tower_hidden_dims = {5, 4};
  w.ranking.tower_output_dim = 4;
  w.ranking.embedding_dim = 3;
  RankingModel model(w.ranking, GetParam() + 10);
  // Random biases keep every ReLU pre-activation off its kink.
  pfuse::Rng rng(GetParam() + 20);
  for (const auto& name : model.params().names()) {
    for (auto& v : model.params().mutable_entry(name).values()) v = rng.normal(0.0, 0.5);
  }
  const auto batch = pfuse::rank::make_batch(w.train, w.ranking.n_users, w.ranking.n_items,
                                             w.ranking.dense_dim, 7);
  const auto worst = pfuse::testing::check_gradients({&model.params()}, [&](pfuse::nn::Graph& g) {
    return model.loss(g, model.forward(g, batch), batch);
  });
  EXPECT_LT(worst.relative, 1e-4) << worst.name << "[" << worst.index << "] " << worst.analytic
                                  << " vs " << worst.numeric;
}

INSTANTIATE_TEST_SUITE_P(Seeds, RankingGradientOracle, ::testing::Values(1, 2, 3, 4, 5));
