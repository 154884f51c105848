#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "reann/error.hpp"
#include "reann/network.hpp"
#include "reann/trainer.hpp"

namespace reann {

struct PruneConfig {
  // Minimum training accuracy after every accepted removal; unset means the
  // accuracy of the network handed to prune_weights.
  std::optional<double> accuracy_floor;
  int retrain_epochs = 100;
  int max_passes = 5;

  void validate() const {
    if (accuracy_floor && !(*accuracy_floor > 0.0 && *accuracy_floor <= 1.0))
      throw ConfigError("prune accuracy_floor must lie in (0, 1]");
    if (retrain_epochs < 0) throw ConfigError("retrain_epochs must be >= 0");
    if (max_passes < 1) throw ConfigError("max_passes must be >= 1");
  }
};

enum class ParamKind { input_hidden, hidden_output, hidden_bias, output_bias };

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::input_hidden: return "w";
    case ParamKind::hidden_output: return "v";
    case ParamKind::hidden_bias: return "hidden_bias";
    case ParamKind::output_bias: return "output_bias";
  }
  return "?";
}

struct ParamRef {
  ParamKind kind;
  std::size_t row;  // hidden unit for w / hidden_bias, output unit for v / output_bias
  std::size_t col;  // input for w, hidden unit for v, 0 for biases
  friend auto operator<=>(const ParamRef&, const ParamRef&) = default;
};

struct Removal {
  ParamRef param;
  double weight = 0.0;    // value just before it was masked
  double accuracy = 0.0;  // training accuracy after removal and retraining
};

struct PruneReport {
  double accuracy_floor = 0.0;
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  std::size_t initial_connections = 0;
  std::size_t final_connections = 0;
  std::size_t attempts = 0;
  int passes = 0;
  std::vector<Removal> removals;
  std::vector<std::size_t> removed_inputs;  // encoded dataset columns
  std::vector<std::size_t> removed_hidden;  // hidden indices before node pruning
};

namespace detail {

inline double& param(Network& net, const ParamRef& r) {
  switch (r.kind) {
    case ParamKind::input_hidden: return net.w(r.row, r.col);
    case ParamKind::hidden_output: return net.v(r.row, r.col);
    case ParamKind::hidden_bias: return net.hidden_bias[r.row];
    case ParamKind::output_bias: return net.output_bias[r.row];
  }
  throw ContractViolation("bad parameter kind");
}

inline unsigned char& mask(Network& net, const ParamRef& r) {
  switch (r.kind) {
    case ParamKind::input_hidden: return net.mask_w(r.row, r.col);
    case ParamKind::hidden_output: return net.mask_v(r.row, r.col);
    case ParamKind::hidden_bias: return net.mask_hidden_bias[r.row];
    case ParamKind::output_bias: return net.mask_output_bias[r.row];
  }
  throw ContractViolation("bad parameter kind");
}

inline bool hidden_has_weights(const Network& net, std::size_t m) {
  for (std::size_t l = 0; l < net.inputs(); ++l)
    if (net.mask_w(m, l)) return true;
  for (std::size_t p = 0; p < net.outputs(); ++p)
    if (net.mask_v(p, m)) return true;
  return false;
}

inline bool output_has_weights(const Network& net, std::size_t p) {
  for (std::size_t m = 0; m < net.hidden(); ++m)
    if (net.mask_v(p, m)) return true;
  return false;
}

// Live parameters in a fixed order: w row-major, v row-major, then biases.
// A bias only becomes a candidate once its unit has no live weights left.
inline std::vector<ParamRef> prunable(const Network& net) {
  std::vector<ParamRef> out;
  for (std::size_t m = 0; m < net.hidden(); ++m)
    for (std::size_t l = 0; l < net.inputs(); ++l)
      if (net.mask_w(m, l)) out.push_back({ParamKind::input_hidden, m, l});
  for (std::size_t p = 0; p < net.outputs(); ++p)
    for (std::size_t m = 0; m < net.hidden(); ++m)
      if (net.mask_v(p, m)) out.push_back({ParamKind::hidden_output, p, m});
  for (std::size_t m = 0; m < net.hidden(); ++m)
    if (net.mask_hidden_bias[m] && !hidden_has_weights(net, m)) out.push_back({ParamKind::hidden_bias, m, 0});
  for (std::size_t p = 0; p < net.outputs(); ++p)
    if (net.mask_output_bias[p] && !output_has_weights(net, p)) out.push_back({ParamKind::output_bias, p, 0});
  return out;
}

}  // namespace detail

// Magnitude pruning: repeatedly masks the smallest live weight, retrains
// briefly, and keeps the removal only if training accuracy stays at or above
// the floor. A rejected weight is restored and skipped for the rest of the
// pass; a pass that accepted anything is followed by a fresh pass.
inline Network prune_weights(Network net, std::span<const Example> train, const TrainConfig& train_cfg,
                             const PruneConfig& cfg, PruneReport& report) {
  report.initial_accuracy = accuracy(net, train);
  report.accuracy_floor = cfg.accuracy_floor.value_or(report.initial_accuracy);
  report.initial_connections = net.connection_count();

  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    ++report.passes;
    std::set<ParamRef> untouchable;
    bool accepted_any = false;
    for (;;) {
      std::optional<ParamRef> pick;
      double smallest = 0.0;
      for (const auto& r : detail::prunable(net)) {
        if (untouchable.contains(r)) continue;
        const double mag = std::abs(detail::param(net, r));
        if (!pick || mag < smallest) {
          pick = r;
          smallest = mag;
        }
      }
      if (!pick) break;
      ++report.attempts;
      Network trial = net;
      const double before = detail::param(trial, *pick);
      detail::mask(trial, *pick) = 0;
      trial.apply_masks();
      for (int e = 0; e < cfg.retrain_epochs; ++e) train_epoch(trial, train, train_cfg);
      const double acc = accuracy(trial, train);
      if (acc >= report.accuracy_floor) {
        net = std::move(trial);
        report.removals.push_back({*pick, before, acc});
        accepted_any = true;
      } else {
        untouchable.insert(*pick);
      }
    }
    if (!accepted_any) break;
  }
  report.final_accuracy = accuracy(net, train);
  report.final_connections = net.connection_count();
  return net;
}

// Drops hidden units that lost all incoming or all outgoing connections, then
// inputs that feed nothing. A hidden unit with no inputs left is a constant;
// its contribution tanh(bias) * v is folded into the output biases first.
inline Network prune_nodes(Network net, PruneReport* report = nullptr) {
  std::vector<std::size_t> original_hidden(net.hidden());
  std::iota(original_hidden.begin(), original_hidden.end(), std::size_t{0});

  std::vector<std::size_t> dead;
  for (std::size_t m = 0; m < net.hidden(); ++m) {
    bool any_in = false, any_out = false;
    for (std::size_t l = 0; l < net.inputs(); ++l) any_in |= net.mask_w(m, l) != 0;
    for (std::size_t p = 0; p < net.outputs(); ++p) any_out |= net.mask_v(p, m) != 0;
    if (any_in && any_out) continue;
    if (!any_in && any_out) {
      const double a = tanh_act(net.hidden_bias[m]);
      for (std::size_t p = 0; p < net.outputs(); ++p)
        if (net.mask_v(p, m)) net.output_bias[p] += a * net.v(p, m);
    }
    dead.push_back(m);
  }
  if (dead.size() == net.hidden())
    throw ContractViolation("prune_nodes: every hidden unit is disconnected");
  for (auto it = dead.rbegin(); it != dead.rend(); ++it) {
    const std::size_t m = *it;
    net.w.erase_row(m);
    net.mask_w.erase_row(m);
    net.v.erase_col(m);
    net.mask_v.erase_col(m);
    net.hidden_bias.erase(net.hidden_bias.begin() + static_cast<std::ptrdiff_t>(m));
    net.mask_hidden_bias.erase(net.mask_hidden_bias.begin() + static_cast<std::ptrdiff_t>(m));
    if (report) report->removed_hidden.insert(report->removed_hidden.begin(), original_hidden[m]);
  }

  for (std::size_t l = net.inputs(); l-- > 0;) {
    bool live = false;
    for (std::size_t m = 0; m < net.hidden(); ++m) live |= net.mask_w(m, l) != 0;
    if (live) continue;
    if (net.inputs() == 1) break;  // keep the shape valid; the lone input is inert
    if (report) report->removed_inputs.insert(report->removed_inputs.begin(), net.input_columns[l]);
    net.w.erase_col(l);
    net.mask_w.erase_col(l);
    net.input_columns.erase(net.input_columns.begin() + static_cast<std::ptrdiff_t>(l));
  }
  if (report) report->final_connections = net.connection_count();
  return net;
}

inline nlohmann::json to_json(const PruneReport& r) {
  nlohmann::json removals = nlohmann::json::array();
  for (const auto& x : r.removals)
    removals.push_back({{"kind", to_string(x.param.kind)},
                        {"row", x.param.row},
                        {"col", x.param.col},
                        {"weight", x.weight},
                        {"accuracy", x.accuracy}});
  return {{"accuracy_floor", r.accuracy_floor},
          {"initial_accuracy", r.initial_accuracy},
          {"final_accuracy", r.final_accuracy},
          {"initial_connections", r.initial_connections},
          {"final_connections", r.final_connections},
          {"attempts", r.attempts},
          {"passes", r.passes},
          {"removals", removals},
          {"removed_inputs", r.removed_inputs},
          {"removed_hidden", r.removed_hidden}};
}

}  // namespace reann
