#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace reann;
using reann::testing::Gen;
using reann::testing::make_example;

namespace {

// Class depends on the first input only; the other two are noise.
std::vector<Example> first_input_decides(std::size_t k) {
  Gen g(31);
  std::vector<Example> out;
  for (std::size_t i = 0; i < k; ++i) {
    const double a = g.real(0, 1);
    out.push_back(make_example({a, g.real(0, 1), g.real(0, 1)}, a > 0.5 ? 1 : 0, 2));
  }
  return out;
}

Network trained(const std::vector<Example>& data, std::size_t h) {
  TrainConfig cfg;
  cfg.target_accuracy = 1.0;
  cfg.max_epochs = 1500;
  Rng rng(3);
  TrainReport report;
  return train_until_plateau(random_network(3, h, 2, 1.0, rng), data, cfg, report);
}

}  // namespace

TEST(PruneWeights, NeverDropsBelowTheFloor) {
  const auto data = first_input_decides(80);
  const auto net = trained(data, 2);
  PruneConfig pc;
  pc.accuracy_floor = 0.9;
  pc.retrain_epochs = 30;
  PruneReport report;
  TrainConfig tc;
  const auto pruned = prune_weights(net, data, tc, pc, report);
  EXPECT_GE(accuracy(pruned, data), 0.9);
  for (const auto& r : report.removals) EXPECT_GE(r.accuracy, 0.9);
  EXPECT_LT(pruned.connection_count(), net.connection_count());
  EXPECT_EQ(report.final_connections, pruned.connection_count());
  EXPECT_EQ(report.initial_connections, net.connection_count());
}

TEST(PruneWeights, FloorDefaultsToStartingAccuracy) {
  const auto data = first_input_decides(60);
  const auto net = trained(data, 1);
  PruneReport report;
  const auto pruned = prune_weights(net, data, TrainConfig{}, PruneConfig{}, report);
  EXPECT_DOUBLE_EQ(report.accuracy_floor, accuracy(net, data));
  EXPECT_GE(accuracy(pruned, data), report.accuracy_floor);
}

TEST(PruneWeights, MaskedWeightsAreExactlyZero) {
  const auto data = first_input_decides(60);
  PruneReport report;
  PruneConfig pc;
  pc.accuracy_floor = 0.85;
  const auto pruned = prune_weights(trained(data, 2), data, TrainConfig{}, pc, report);
  for (std::size_t i = 0; i < pruned.w.size(); ++i) {
    if (!pruned.mask_w.data()[i]) {
      EXPECT_EQ(pruned.w.data()[i], 0.0);
    }
  }
  for (std::size_t i = 0; i < pruned.v.size(); ++i) {
    if (!pruned.mask_v.data()[i]) {
      EXPECT_EQ(pruned.v.data()[i], 0.0);
    }
  }
}

TEST(PruneWeights, NoiseInputsLoseTheirWeights) {
  const auto data = first_input_decides(80);
  PruneConfig pc;
  pc.accuracy_floor = 0.95;
  PruneReport report;
  const auto pruned = prune_nodes(prune_weights(trained(data, 1), data, TrainConfig{}, pc, report), &report);
  EXPECT_EQ(pruned.input_columns, (std::vector<std::size_t>{0}));
  EXPECT_EQ(report.removed_inputs, (std::vector<std::size_t>{1, 2}));
}

TEST(Prunable, BiasesOnlyAfterTheirUnitIsEmpty) {
  Network net(2, 1, 2);
  auto has_bias = [](const std::vector<ParamRef>& refs, ParamKind k) {
    return std::any_of(refs.begin(), refs.end(), [&](const ParamRef& r) { return r.kind == k; });
  };
  EXPECT_FALSE(has_bias(detail::prunable(net), ParamKind::hidden_bias));
  EXPECT_FALSE(has_bias(detail::prunable(net), ParamKind::output_bias));
  net.mask_w.fill(0);
  net.mask_v.fill(0);
  EXPECT_TRUE(has_bias(detail::prunable(net), ParamKind::hidden_bias));
  EXPECT_TRUE(has_bias(detail::prunable(net), ParamKind::output_bias));
}

TEST(PruneNodes, DropsUnitWithoutOutgoingWeights) {
  Gen g(5);
  auto net = reann::testing::random_net(g, 2, 3, 2);
  net.mask_v(0, 1) = net.mask_v(1, 1) = 0;
  net.apply_masks();
  PruneReport report;
  const auto pruned = prune_nodes(net, &report);
  EXPECT_EQ(pruned.hidden(), 2u);
  EXPECT_EQ(report.removed_hidden, (std::vector<std::size_t>{1}));
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{g.real(0, 1), g.real(0, 1)};
    const auto a = forward(net, x).output, b = forward(pruned, x).output;
    for (std::size_t p = 0; p < 2; ++p) EXPECT_NEAR(a[p], b[p], 1e-12);
  }
}

TEST(PruneNodes, FoldsConstantUnitIntoOutputBias) {
  Gen g(6);
  auto net = reann::testing::random_net(g, 2, 2, 2);
  net.mask_w(0, 0) = net.mask_w(0, 1) = 0;  // unit 0 now outputs tanh(bias)
  net.apply_masks();
  const auto pruned = prune_nodes(net);
  EXPECT_EQ(pruned.hidden(), 1u);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{g.real(0, 1), g.real(0, 1)};
    const auto a = forward(net, x).output, b = forward(pruned, x).output;
    for (std::size_t p = 0; p < 2; ++p) EXPECT_NEAR(a[p], b[p], 1e-12);
  }
}

TEST(PruneNodes, RemovesDeadInputsAndRemembersColumns) {
  Gen g(7);
  auto net = reann::testing::random_net(g, 4, 2, 2);
  net.input_columns = {0, 3, 4, 8};
  for (std::size_t m = 0; m < 2; ++m) net.mask_w(m, 1) = net.mask_w(m, 3) = 0;
  net.apply_masks();
  PruneReport report;
  const auto pruned = prune_nodes(net, &report);
  EXPECT_EQ(pruned.inputs(), 2u);
  EXPECT_EQ(pruned.input_columns, (std::vector<std::size_t>{0, 4}));
  EXPECT_EQ(report.removed_inputs, (std::vector<std::size_t>{3, 8}));
  // Same predictions on full encoded rows.
  for (int i = 0; i < 20; ++i) {
    std::vector<double> row(9);
    for (auto& x : row) x = g.real(0, 1);
    Example ex = make_example(row, 0, 2);
    const auto a = forward_example(net, ex).output, b = forward_example(pruned, ex).output;
    for (std::size_t p = 0; p < 2; ++p) EXPECT_NEAR(a[p], b[p], 1e-14);
  }
}

TEST(PruneNodes, AllUnitsDeadIsContractViolation) {
  Network net(2, 1, 2);
  net.mask_v.fill(0);
  EXPECT_THROW(prune_nodes(net), ContractViolation);
}

TEST(PruneConfig, RangesAreEnforced) {
  PruneConfig pc;
  EXPECT_NO_THROW(pc.validate());
  pc.accuracy_floor = 1.5;
  EXPECT_THROW(pc.validate(), ConfigError);
  pc = PruneConfig{};
  pc.max_passes = 0;
  EXPECT_THROW(pc.validate(), ConfigError);
}
