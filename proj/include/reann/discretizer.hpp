#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "reann/error.hpp"
#include "reann/network.hpp"

namespace reann {

struct ClusterConfig {
  double epsilon = 0.5;
  // Discretized training accuracy required to accept a clustering; unset
  // means the undiscretized network's training accuracy.
  std::optional<double> accuracy_floor;
  double shrink_factor = 0.5;
  double min_epsilon = 1e-6;

  void validate() const {
    if (!(epsilon >= 0.1 && epsilon <= 1.0)) throw ConfigError("cluster epsilon must lie in [0.1, 1.0]");
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw ConfigError("shrink_factor must lie in (0, 1)");
    if (accuracy_floor && !(*accuracy_floor > 0.0 && *accuracy_floor <= 1.0))
      throw ConfigError("cluster accuracy_floor must lie in (0, 1]");
  }
};

// Clusters of one hidden unit, in ascending order of activation. Members of a
// cluster form a contiguous value range [lo, hi]; ranges never overlap.
struct UnitClusters {
  std::vector<double> centers;
  std::vector<std::size_t> counts;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const noexcept { return centers.size(); }

  // Cluster whose member range contains `a`, otherwise the nearest center
  // (ties to the lower index).
  std::size_t index_of(double a) const {
    for (std::size_t c = 0; c < size(); ++c)
      if (a >= lo[c] && a <= hi[c]) return c;
    std::size_t best = 0;
    for (std::size_t c = 1; c < size(); ++c)
      if (std::abs(a - centers[c]) < std::abs(a - centers[best])) best = c;
    return best;
  }
};

struct ActivationClustering {
  double epsilon = 0.0;
  std::vector<UnitClusters> units;
  std::vector<std::vector<std::size_t>> assignment;  // [training example][hidden unit]
  double train_accuracy = 0.0;
  double accuracy_floor = 0.0;
  int attempts = 0;
};

// One pass over the sorted distinct values. A run of equal values joins the
// open cluster when it lies within eps of the running mean and the updated
// mean stays within eps of the cluster's smallest member; otherwise it opens
// a new cluster. Centers are member means. `assignment`, when given, receives
// the cluster of each input value.
inline UnitClusters greedy_cluster(std::span<const double> values, double eps,
                                   std::vector<std::size_t>* assignment = nullptr) {
  UnitClusters out;
  if (values.empty()) return out;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  if (assignment) assignment->assign(values.size(), 0);

  double sum = 0.0;
  std::size_t count = 0;
  auto close = [&] {
    out.centers.push_back(sum / static_cast<double>(count));
    out.counts.push_back(count);
  };
  for (std::size_t i = 0; i < order.size();) {
    const double v = values[order[i]];
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == v) ++j;
    const std::size_t run = j - i;
    bool joins = false;
    if (count > 0) {
      const double mean = sum / static_cast<double>(count);
      const double next_mean = (sum + v * static_cast<double>(run)) / static_cast<double>(count + run);
      joins = std::abs(v - mean) <= eps && next_mean - out.lo.back() <= eps;
    }
    if (!joins) {
      if (count > 0) close();
      out.lo.push_back(v);
      out.hi.push_back(v);
      sum = 0.0;
      count = 0;
    }
    sum += v * static_cast<double>(run);
    count += run;
    out.hi.back() = v;
    if (assignment)
      for (std::size_t k = i; k < j; ++k) (*assignment)[order[k]] = out.lo.size() - 1;
    i = j;
  }
  close();
  return out;
}

inline std::vector<std::vector<double>> hidden_activations(const Network& net, std::span<const Example> data) {
  std::vector<std::vector<double>> acts;
  acts.reserve(data.size());
  for (const auto& ex : data) acts.push_back(forward_example(net, ex).hidden_act);
  return acts;
}

inline std::vector<std::size_t> cluster_indices(const ActivationClustering& cl, std::span<const double> acts) {
  std::vector<std::size_t> idx(acts.size());
  for (std::size_t m = 0; m < acts.size(); ++m) idx[m] = cl.units[m].index_of(acts[m]);
  return idx;
}

inline std::size_t discretized_predict(const Network& net, const ActivationClustering& cl, const Example& ex) {
  const auto acts = forward_example(net, ex).hidden_act;
  std::vector<double> snapped(acts.size());
  for (std::size_t m = 0; m < acts.size(); ++m) snapped[m] = cl.units[m].centers[cl.units[m].index_of(acts[m])];
  return argmax_class(output_from_hidden(net, snapped));
}

inline double discretized_accuracy(const Network& net, const ActivationClustering& cl,
                                   std::span<const Example> data) {
  if (data.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& ex : data) ok += discretized_predict(net, cl, ex) == ex.target;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

inline ActivationClustering cluster_with_epsilon(const Network& net, std::span<const Example> train, double eps) {
  const auto acts = hidden_activations(net, train);
  ActivationClustering cl;
  cl.epsilon = eps;
  cl.assignment.assign(train.size(), std::vector<std::size_t>(net.hidden()));
  std::vector<double> column(train.size());
  std::vector<std::size_t> assign;
  for (std::size_t m = 0; m < net.hidden(); ++m) {
    for (std::size_t i = 0; i < train.size(); ++i) column[i] = acts[i][m];
    cl.units.push_back(greedy_cluster(column, eps, &assign));
    for (std::size_t i = 0; i < train.size(); ++i) cl.assignment[i][m] = assign[i];
  }
  cl.train_accuracy = discretized_accuracy(net, cl, train);
  return cl;
}

// Clusters every hidden unit and shrinks epsilon until the discretized
// network keeps the required training accuracy.
inline ActivationClustering cluster_activations(const Network& net, std::span<const Example> train,
                                                const ClusterConfig& cfg) {
  const double floor = cfg.accuracy_floor.value_or(accuracy(net, train));
  int attempts = 0;
  for (double eps = cfg.epsilon; eps >= cfg.min_epsilon; eps *= cfg.shrink_factor) {
    ++attempts;
    auto cl = cluster_with_epsilon(net, train, eps);
    if (cl.train_accuracy >= floor) {
      cl.accuracy_floor = floor;
      cl.attempts = attempts;
      return cl;
    }
  }
  throw DiscretizationError("no epsilon down to " + std::to_string(cfg.min_epsilon) +
                            " keeps the training accuracy at " + std::to_string(floor));
}

inline nlohmann::json to_json(const ActivationClustering& cl) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : cl.units)
    units.push_back({{"centers", u.centers}, {"counts", u.counts}, {"lo", u.lo}, {"hi", u.hi}});
  return {{"epsilon", cl.epsilon},
          {"train_accuracy", cl.train_accuracy},
          {"accuracy_floor", cl.accuracy_floor},
          {"attempts", cl.attempts},
          {"units", units},
          {"assignment", cl.assignment}};
}

inline ActivationClustering clustering_from_json(const nlohmann::json& j) {
  try {
    ActivationClustering cl;
    cl.epsilon = j.at("epsilon");
    cl.train_accuracy = j.at("train_accuracy");
    cl.accuracy_floor = j.at("accuracy_floor");
    cl.attempts = j.at("attempts");
    for (const auto& u : j.at("units")) {
      UnitClusters uc;
      uc.centers = u.at("centers").get<std::vector<double>>();
      uc.counts = u.at("counts").get<std::vector<std::size_t>>();
      uc.lo = u.at("lo").get<std::vector<double>>();
      uc.hi = u.at("hi").get<std::vector<double>>();
      if (uc.counts.size() != uc.size() || uc.lo.size() != uc.size() || uc.hi.size() != uc.size())
        throw SchemaError("clusters json: unit arrays differ in length");
      cl.units.push_back(std::move(uc));
    }
    cl.assignment = j.at("assignment").get<std::vector<std::vector<std::size_t>>>();
    return cl;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("clusters json: ") + e.what());
  }
}

}  // namespace reann
