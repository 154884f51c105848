#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "support.hpp"

using namespace reann;
using reann::testing::Gen;
using reann::testing::make_example;

namespace {

std::vector<double> random_values(Gen& g) {
  std::vector<double> v(g.index(60) + 1);
  for (auto& x : v) x = g.coin(0.3) ? std::round(g.real(-1, 1) * 4) / 4 : g.real(-1, 1);
  return v;
}

}  // namespace

TEST(GreedyCluster, HandRunExample) {
  const std::vector<double> values{0.95, -0.90, 0.20, -0.85};
  std::vector<std::size_t> assign;
  const auto u = greedy_cluster(values, 0.1, &assign);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_NEAR(u.centers[0], -0.875, 1e-15);
  EXPECT_DOUBLE_EQ(u.centers[1], 0.20);
  EXPECT_DOUBLE_EQ(u.centers[2], 0.95);
  EXPECT_EQ(u.counts, (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(assign, (std::vector<std::size_t>{2, 0, 1, 0}));
}

TEST(GreedyCluster, IdenticalValuesMakeOneCluster) {
  const std::vector<double> values(17, 0.4321);
  const auto u = greedy_cluster(values, 0.1);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u.centers[0], 0.4321);
  EXPECT_EQ(u.counts[0], 17u);
}

TEST(GreedyCluster, ChainingCannotDriftPastEpsilon) {
  // A naive running-mean chain would swallow all of these.
  const std::vector<double> values{0.0, 0.09, 0.18, 0.27, 0.36, 0.45};
  const auto u = greedy_cluster(values, 0.1);
  for (std::size_t c = 0; c < u.size(); ++c) {
    EXPECT_LE(u.centers[c] - u.lo[c], 0.1 + 1e-15);
    EXPECT_LE(u.hi[c] - u.centers[c], 0.1 + 1e-15);
  }
  EXPECT_GT(u.size(), 1u);
}

TEST(GreedyCluster, PropertiesOnRandomInputs) {
  Gen g(41);
  for (int trial = 0; trial < 500; ++trial) {
    const auto values = random_values(g);
    const double eps = g.real(0.01, 1.0);
    std::vector<std::size_t> assign;
    const auto u = greedy_cluster(values, eps, &assign);
    // coverage and ordering
    for (std::size_t i = 0; i < values.size(); ++i)
      ASSERT_LE(std::abs(values[i] - u.centers[assign[i]]), eps + 1e-12) << "trial " << trial;
    ASSERT_EQ(std::accumulate(u.counts.begin(), u.counts.end(), std::size_t{0}), values.size());
    for (std::size_t c = 1; c < u.size(); ++c) {
      ASSERT_LT(u.centers[c - 1], u.centers[c]);
      ASSERT_LT(u.hi[c - 1], u.lo[c]);
    }
    // training values map back to their own cluster
    for (std::size_t i = 0; i < values.size(); ++i) ASSERT_EQ(u.index_of(values[i]), assign[i]);
  }
}

TEST(GreedyCluster, ShrinkingEpsilonNeverMergesClusters) {
  Gen g(42);
  for (int trial = 0; trial < 500; ++trial) {
    const auto values = random_values(g);
    const double big = g.real(0.05, 1.0), small = big * g.real(0.1, 1.0);
    EXPECT_GE(greedy_cluster(values, small).size(), greedy_cluster(values, big).size()) << "trial " << trial;
  }
}

TEST(GreedyCluster, IndependentOfInputOrder) {
  Gen g(43);
  for (int trial = 0; trial < 100; ++trial) {
    auto values = random_values(g);
    const auto a = greedy_cluster(values, 0.2);
    std::reverse(values.begin(), values.end());
    const auto b = greedy_cluster(values, 0.2);
    EXPECT_EQ(a.centers, b.centers);
    EXPECT_EQ(a.counts, b.counts);
  }
}

TEST(UnitClusters, OutsideValuesGoToNearestCenter) {
  UnitClusters u{{-0.9, 0.0, 0.9}, {1, 1, 1}, {-0.95, -0.05, 0.85}, {-0.85, 0.05, 0.95}};
  EXPECT_EQ(u.index_of(-0.99), 0u);
  EXPECT_EQ(u.index_of(0.4), 1u);
  EXPECT_EQ(u.index_of(0.5), 2u);
  EXPECT_EQ(u.index_of(0.9), 2u);
}

namespace {

struct Fixture {
  Network net{2, 2, 2};
  std::vector<Example> data;
  Fixture() {
    Gen g(44);
    net = reann::testing::random_net(g, 2, 2, 2, 2.0);
    for (int i = 0; i < 40; ++i) {
      const double a = g.real(0, 1), b = g.real(0, 1);
      data.push_back(make_example({a, b}, 0, 2));
    }
    for (auto& ex : data) ex.target = predict_example(net, ex);
    for (auto& ex : data) {
      ex.target_vector = {0.0, 0.0};
      ex.target_vector[ex.target] = 1.0;
    }
  }
};

}  // namespace

TEST(DiscretizedAccuracy, OwnClusterPerValueIsTheNetwork) {
  Fixture f;
  const auto cl = cluster_with_epsilon(f.net, f.data, 1e-12);
  EXPECT_DOUBLE_EQ(discretized_accuracy(f.net, cl, f.data), accuracy(f.net, f.data));
}

TEST(DiscretizedAccuracy, SingleZeroClusterIsAConstantClassifier) {
  Fixture f;
  ActivationClustering cl;
  for (std::size_t m = 0; m < f.net.hidden(); ++m) cl.units.push_back({{0.0}, {f.data.size()}, {-1.0}, {1.0}});
  const std::size_t constant = argmax_class(output_from_hidden(f.net, std::vector<double>(f.net.hidden(), 0.0)));
  const auto rate = static_cast<double>(std::count_if(f.data.begin(), f.data.end(),
                                                      [&](const Example& e) { return e.target == constant; })) /
                    static_cast<double>(f.data.size());
  EXPECT_DOUBLE_EQ(discretized_accuracy(f.net, cl, f.data), rate);
}

TEST(ClusterActivations, MeetsFloorAndShrinksWhenNeeded) {
  Fixture f;
  ClusterConfig cfg;
  cfg.epsilon = 1.0;
  cfg.accuracy_floor = 1.0;
  const auto cl = cluster_activations(f.net, f.data, cfg);
  EXPECT_GE(cl.train_accuracy, 1.0);
  EXPECT_EQ(cl.attempts, static_cast<int>(std::round(std::log2(1.0 / cl.epsilon))) + 1);
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const auto acts = forward_example(f.net, f.data[i]).hidden_act;
    for (std::size_t m = 0; m < acts.size(); ++m)
      EXPECT_LE(std::abs(acts[m] - cl.units[m].centers[cl.assignment[i][m]]), cl.epsilon + 1e-12);
  }
}

TEST(ClusterActivations, UnreachableFloorIsDiscretizationError) {
  Fixture f;
  // Identical inputs with opposite labels: no clustering can classify both.
  f.data.push_back(make_example({0.5, 0.5}, 0, 2));
  f.data.push_back(make_example({0.5, 0.5}, 1, 2));
  ClusterConfig cfg;
  cfg.accuracy_floor = 1.0;
  EXPECT_THROW(cluster_activations(f.net, f.data, cfg), DiscretizationError);
}

TEST(ClusterActivations, JsonRoundTrip) {
  Fixture f;
  const auto cl = cluster_activations(f.net, f.data, ClusterConfig{});
  const auto back = clustering_from_json(nlohmann::json::parse(to_json(cl).dump()));
  EXPECT_EQ(back.assignment, cl.assignment);
  ASSERT_EQ(back.units.size(), cl.units.size());
  for (std::size_t m = 0; m < cl.units.size(); ++m) {
    EXPECT_EQ(back.units[m].centers, cl.units[m].centers);
    EXPECT_EQ(back.units[m].lo, cl.units[m].lo);
  }
  EXPECT_EQ(back.epsilon, cl.epsilon);
}

TEST(ClusterConfig, EpsilonRange) {
  ClusterConfig cfg;
  cfg.epsilon = 0.05;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.epsilon = 1.0;
  EXPECT_NO_THROW(cfg.validate());
}
