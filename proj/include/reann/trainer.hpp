#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "reann/error.hpp"
#include "reann/network.hpp"

namespace reann {

// Seeded source for every random draw in a run. The mapping to doubles is
// spelled out so draws do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

struct TrainConfig {
  double learning_rate = 0.5;
  double init_range = 1.0;
  PenaltyConfig penalty;
  int max_epochs = 5000;   // per call of train_until_plateau
  int patience = 200;
  double target_accuracy = 0.93;
  int max_hidden = 10;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(learning_rate >= 0.1 && learning_rate <= 1.0))
      throw ConfigError("learning_rate must lie in [0.1, 1.0]");
    if (!(init_range > 0.0 && init_range <= 1.0)) throw ConfigError("init_range must lie in (0, 1]");
    penalty.validate();
    if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(target_accuracy > 0.0 && target_accuracy <= 1.0))
      throw ConfigError("target_accuracy must lie in (0, 1]");
    if (max_hidden < 1) throw ConfigError("max_hidden must be >= 1");
  }
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<double> objective;       // per epoch, measured before the update
  std::vector<double> train_accuracy;  // per epoch, after the update
  std::vector<std::size_t> hidden_count;
  std::vector<int> growth_epochs;      // epoch at which each unit beyond the first was added
  double final_train_accuracy = 0.0;
  bool reached_target = false;

  void append(const TrainReport& later) {
    for (std::size_t i = 0; i < later.objective.size(); ++i) {
      objective.push_back(later.objective[i]);
      train_accuracy.push_back(later.train_accuracy[i]);
      hidden_count.push_back(later.hidden_count[i]);
    }
    epochs_run += later.epochs_run;
    final_train_accuracy = later.final_train_accuracy;
    reached_target = later.reached_target;
  }
};

inline void write_training_curve(std::ostream& os, const TrainReport& r) {
  os << "epoch,objective,accuracy,hidden_count\n";
  os.precision(17);
  for (std::size_t i = 0; i < r.objective.size(); ++i)
    os << i + 1 << ',' << r.objective[i] << ',' << r.train_accuracy[i] << ',' << r.hidden_count[i] << '\n';
}

inline Network random_network(std::size_t n, std::size_t h, std::size_t o, double range, Rng& rng) {
  Network net(n, h, o);
  for (double& x : net.w.data()) x = rng.uniform(-range, range);
  for (double& x : net.hidden_bias) x = rng.uniform(-range, range);
  for (double& x : net.v.data()) x = rng.uniform(-range, range);
  for (double& x : net.output_bias) x = rng.uniform(-range, range);
  return net;
}

// Adds one hidden unit with fresh random weights; existing weights are kept.
inline void add_hidden_unit(Network& net, double range, Rng& rng) {
  std::vector<double> in(net.inputs());
  for (double& x : in) x = rng.uniform(-range, range);
  const double bias = rng.uniform(-range, range);
  std::vector<double> out(net.outputs());
  for (double& x : out) x = rng.uniform(-range, range);

  net.w.append_row(in);
  net.hidden_bias.push_back(bias);
  net.v.append_col(out);
  std::vector<unsigned char> in_mask(net.inputs(), 1), out_mask(net.outputs(), 1);
  net.mask_w.append_row(in_mask);
  net.mask_v.append_col(out_mask);
  net.mask_hidden_bias.push_back(1);
}

// One batch gradient-descent step over the full training set. The step is
// scaled by 1/k so the learning rate means the same thing for 11 rows as for
// 350; the fixed point is unchanged. Returns the objective before the step.
inline double train_epoch(Network& net, std::span<const Example> train, const TrainConfig& cfg) {
  const auto g = gradient(net, train, cfg.penalty);
  if (!std::isfinite(g.objective))
    throw DivergenceError("objective became non-finite; learning rate too high?");
  const double step = train.empty() ? 0.0 : cfg.learning_rate / static_cast<double>(train.size());
  for (std::size_t i = 0; i < net.w.size(); ++i) net.w.data()[i] -= step * g.w.data()[i];
  for (std::size_t i = 0; i < net.v.size(); ++i) net.v.data()[i] -= step * g.v.data()[i];
  for (std::size_t m = 0; m < net.hidden_bias.size(); ++m) net.hidden_bias[m] -= step * g.hidden_bias[m];
  for (std::size_t p = 0; p < net.output_bias.size(); ++p) net.output_bias[p] -= step * g.output_bias[p];
  net.apply_masks();
  return g.objective;
}

// Trains until the target accuracy is met, `patience` epochs pass without a
// new best training accuracy, or the epoch budget runs out. Returns the best
// snapshot; the initial network counts as a candidate.
inline Network train_until_plateau(Network net, std::span<const Example> train, const TrainConfig& cfg,
                                   TrainReport& report) {
  Network best = net;
  double best_acc = accuracy(net, train);
  int since_best = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double obj = train_epoch(net, train, cfg);
    const double acc = accuracy(net, train);
    report.objective.push_back(obj);
    report.train_accuracy.push_back(acc);
    report.hidden_count.push_back(net.hidden());
    ++report.epochs_run;
    if (acc > best_acc) {
      best_acc = acc;
      best = net;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (best_acc >= cfg.target_accuracy || since_best >= cfg.patience) break;
  }
  report.final_train_accuracy = best_acc;
  report.reached_target = best_acc >= cfg.target_accuracy;
  return best;
}

// Starts from a single hidden unit and grows the hidden layer one unit at a
// time, retraining from the previous weights, until the training accuracy
// reaches the target or max_hidden units are in place.
inline Network constructive_train(std::span<const Example> train, std::size_t n, std::size_t o,
                                  const TrainConfig& cfg, TrainReport& report) {
  Rng rng(cfg.seed);
  Network net = random_network(n, 1, o, cfg.init_range, rng);
  for (;;) {
    net = train_until_plateau(std::move(net), train, cfg, report);
    if (report.reached_target || net.hidden() >= static_cast<std::size_t>(cfg.max_hidden)) break;
    add_hidden_unit(net, cfg.init_range, rng);
    report.growth_epochs.push_back(report.epochs_run);
  }
  report.final_train_accuracy = accuracy(net, train);
  report.reached_target = report.final_train_accuracy >= cfg.target_accuracy;
  return net;
}

inline nlohmann::json to_json(const TrainReport& r) {
  return {{"epochs_run", r.epochs_run},
          {"final_train_accuracy", r.final_train_accuracy},
          {"reached_target", r.reached_target},
          {"growth_epochs", r.growth_epochs},
          {"final_hidden", r.hidden_count.empty() ? 0 : r.hidden_count.back()}};
}

}  // namespace reann
