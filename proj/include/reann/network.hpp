#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "reann/dataset.hpp"
#include "reann/error.hpp"
#include "reann/grid.hpp"

namespace reann {

// Three-layer feedforward classifier: tanh hidden layer, logistic outputs,
// one bias per hidden and output unit. Pruned connections are masked and
// their weights held at exactly zero.
struct Network {
  Matrix w;                         // hidden x inputs
  Matrix v;                         // outputs x hidden
  std::vector<double> hidden_bias;  // h
  std::vector<double> output_bias;  // o
  Mask mask_w;
  Mask mask_v;
  std::vector<unsigned char> mask_hidden_bias;
  std::vector<unsigned char> mask_output_bias;
  // Dataset-encoding column feeding each network input; shrinks when inputs
  // are pruned away.
  std::vector<std::size_t> input_columns;

  Network() = default;
  Network(std::size_t n, std::size_t h, std::size_t o)
      : w(h, n), v(o, h), hidden_bias(h, 0.0), output_bias(o, 0.0), mask_w(h, n, 1),
        mask_v(o, h, 1), mask_hidden_bias(h, 1), mask_output_bias(o, 1), input_columns(n) {
    require(n >= 1 && h >= 1 && o >= 1, "network needs n, h, o >= 1");
    std::iota(input_columns.begin(), input_columns.end(), std::size_t{0});
  }

  std::size_t inputs() const noexcept { return w.cols(); }
  std::size_t hidden() const noexcept { return w.rows(); }
  std::size_t outputs() const noexcept { return v.rows(); }

  // Unmasked input->hidden plus hidden->output weights; biases not counted.
  std::size_t connection_count() const {
    std::size_t c = 0;
    for (auto m : mask_w.data()) c += m;
    for (auto m : mask_v.data()) c += m;
    return c;
  }

  // Re-zeroes every masked parameter.
  void apply_masks() {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!mask_w.data()[i]) w.data()[i] = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!mask_v.data()[i]) v.data()[i] = 0.0;
    for (std::size_t m = 0; m < hidden_bias.size(); ++m)
      if (!mask_hidden_bias[m]) hidden_bias[m] = 0.0;
    for (std::size_t p = 0; p < output_bias.size(); ++p)
      if (!mask_output_bias[p]) output_bias[p] = 0.0;
  }

  friend bool operator==(const Network&, const Network&) = default;
};

struct PenaltyConfig {
  double eps1 = 0.1;
  double eps2 = 1e-5;
  double beta = 10.0;

  void validate() const {
    if (!(eps1 >= 0.05 && eps1 <= 0.5)) throw ConfigError("eps1 must lie in [0.05, 0.5]");
    if (!(eps2 >= 1e-8 && eps2 <= 1e-4)) throw ConfigError("eps2 must lie in [1e-8, 1e-4]");
    if (!(beta > 0)) throw ConfigError("beta must be positive");
  }
};

struct ForwardTrace {
  std::vector<double> hidden_pre;
  std::vector<double> hidden_act;
  std::vector<double> output;
};

inline double tanh_act(double x) { return std::tanh(x); }

inline double sigmoid_act(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Picks the network's own inputs out of a full encoded example.
inline std::vector<double> project_inputs(const Network& net, std::span<const double> encoded) {
  std::vector<double> x(net.inputs());
  for (std::size_t l = 0; l < x.size(); ++l) {
    require(net.input_columns[l] < encoded.size(), "encoded example too short for network");
    x[l] = encoded[net.input_columns[l]];
  }
  return x;
}

// Output layer from already computed hidden activations.
inline std::vector<double> output_from_hidden(const Network& net, std::span<const double> act) {
  std::vector<double> out(net.outputs());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (std::size_t m = 0; m < act.size(); ++m) s += act[m] * net.v(p, m);
    out[p] = sigmoid_act(s + net.output_bias[p]);
  }
  return out;
}

inline ForwardTrace forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.inputs()) throw ContractViolation("forward: input length does not match n");
  ForwardTrace t;
  t.hidden_pre.resize(net.hidden());
  t.hidden_act.resize(net.hidden());
  for (std::size_t m = 0; m < net.hidden(); ++m) {
    double s = 0.0;
    auto row = net.w.row(m);
    for (std::size_t l = 0; l < x.size(); ++l) s += x[l] * row[l];
    t.hidden_pre[m] = s + net.hidden_bias[m];
    t.hidden_act[m] = tanh_act(t.hidden_pre[m]);
  }
  t.output = output_from_hidden(net, t.hidden_act);
  return t;
}

inline ForwardTrace forward_example(const Network& net, const Example& ex) {
  return forward(net, project_inputs(net, ex.inputs));
}

// Argmax with ties to the lowest index.
inline std::size_t argmax_class(std::span<const double> outputs) {
  return static_cast<std::size_t>(std::max_element(outputs.begin(), outputs.end()) - outputs.begin());
}

inline std::size_t predict(const Network& net, std::span<const double> x) {
  return argmax_class(forward(net, x).output);
}

inline std::size_t predict_example(const Network& net, const Example& ex) {
  return argmax_class(forward_example(net, ex).output);
}

inline std::size_t count_correct(const Network& net, std::span<const Example> data) {
  std::size_t ok = 0;
  for (const auto& ex : data) ok += predict_example(net, ex) == ex.target;
  return ok;
}

inline double accuracy(const Network& net, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  return static_cast<double>(count_correct(net, data)) / static_cast<double>(data.size());
}

inline constexpr double kLogClamp = 1e-12;

inline double cross_entropy_term(std::span<const double> out, std::span<const double> target) {
  double f = 0.0;
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double s = std::clamp(out[p], kLogClamp, 1.0 - kLogClamp);
    f -= target[p] * std::log(s) + (1.0 - target[p]) * std::log(1.0 - s);
  }
  return f;
}

inline double cross_entropy(const Network& net, std::span<const Example> data) {
  double f = 0.0;
  for (const auto& ex : data) f += cross_entropy_term(forward_example(net, ex).output, ex.target_vector);
  return f;
}

namespace detail {

inline double penalty_of(double z, const PenaltyConfig& cfg) {
  const double bz2 = cfg.beta * z * z;
  return cfg.eps1 * bz2 / (1.0 + bz2) + cfg.eps2 * z * z;
}

inline double penalty_slope(double z, const PenaltyConfig& cfg) {
  const double d = 1.0 + cfg.beta * z * z;
  return cfg.eps1 * 2.0 * cfg.beta * z / (d * d) + 2.0 * cfg.eps2 * z;
}

}  // namespace detail

inline double penalty(const Network& net, const PenaltyConfig& cfg) {
  double p = 0.0;
  for (std::size_t i = 0; i < net.w.size(); ++i)
    if (net.mask_w.data()[i]) p += detail::penalty_of(net.w.data()[i], cfg);
  for (std::size_t i = 0; i < net.v.size(); ++i)
    if (net.mask_v.data()[i]) p += detail::penalty_of(net.v.data()[i], cfg);
  return p;
}

inline double objective(const Network& net, std::span<const Example> data, const PenaltyConfig& cfg) {
  return cross_entropy(net, data) + penalty(net, cfg);
}

// Partial derivatives, laid out like the network's parameters.
struct NetworkGradient {
  Matrix w;
  Matrix v;
  std::vector<double> hidden_bias;
  std::vector<double> output_bias;
  double objective = 0.0;  // value of the objective at the evaluation point

  double max_abs() const {
    double m = 0.0;
    for (double g : w.data()) m = std::max(m, std::abs(g));
    for (double g : v.data()) m = std::max(m, std::abs(g));
    for (double g : hidden_bias) m = std::max(m, std::abs(g));
    for (double g : output_bias) m = std::max(m, std::abs(g));
    return m;
  }
};

// Backpropagation through the unclamped cross-entropy: with logistic outputs
// dF/du_p reduces to S_p - t_p. Masked entries come back as exactly zero.
inline NetworkGradient gradient(const Network& net, std::span<const Example> data,
                                const PenaltyConfig& cfg) {
  const std::size_t n = net.inputs(), h = net.hidden(), o = net.outputs();
  NetworkGradient g{Matrix(h, n), Matrix(o, h), std::vector<double>(h), std::vector<double>(o), 0.0};
  std::vector<double> delta_out(o), delta_hid(h);
  double f = 0.0;
  for (const auto& ex : data) {
    const auto x = project_inputs(net, ex.inputs);
    const auto t = forward(net, x);
    f += cross_entropy_term(t.output, ex.target_vector);
    for (std::size_t p = 0; p < o; ++p) delta_out[p] = t.output[p] - ex.target_vector[p];
    for (std::size_t m = 0; m < h; ++m) {
      double back = 0.0;
      for (std::size_t p = 0; p < o; ++p) {
        g.v(p, m) += delta_out[p] * t.hidden_act[m];
        back += delta_out[p] * net.v(p, m);
      }
      delta_hid[m] = back * (1.0 - t.hidden_act[m] * t.hidden_act[m]);
      g.hidden_bias[m] += delta_hid[m];
      auto row = g.w.row(m);
      for (std::size_t l = 0; l < n; ++l) row[l] += delta_hid[m] * x[l];
    }
    for (std::size_t p = 0; p < o; ++p) g.output_bias[p] += delta_out[p];
  }
  for (std::size_t i = 0; i < g.w.size(); ++i)
    g.w.data()[i] = net.mask_w.data()[i] ? g.w.data()[i] + detail::penalty_slope(net.w.data()[i], cfg) : 0.0;
  for (std::size_t i = 0; i < g.v.size(); ++i)
    g.v.data()[i] = net.mask_v.data()[i] ? g.v.data()[i] + detail::penalty_slope(net.v.data()[i], cfg) : 0.0;
  for (std::size_t m = 0; m < h; ++m)
    if (!net.mask_hidden_bias[m]) g.hidden_bias[m] = 0.0;
  for (std::size_t p = 0; p < o; ++p)
    if (!net.mask_output_bias[p]) g.output_bias[p] = 0.0;
  g.objective = f + penalty(net, cfg);
  return g;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const Network& net) {
  auto rows = [](const auto& grid) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t r = 0; r < grid.rows(); ++r) {
      auto row = grid.row(r);
      out.push_back(std::vector<typename std::decay_t<decltype(row)>::value_type>(row.begin(), row.end()));
    }
    return out;
  };
  nlohmann::json j;
  j["n"] = net.inputs();
  j["h"] = net.hidden();
  j["o"] = net.outputs();
  j["input_columns"] = net.input_columns;
  j["w"] = rows(net.w);
  j["v"] = rows(net.v);
  j["hidden_bias"] = net.hidden_bias;
  j["output_bias"] = net.output_bias;
  j["mask_w"] = rows(net.mask_w);
  j["mask_v"] = rows(net.mask_v);
  j["mask_hidden_bias"] = net.mask_hidden_bias;
  j["mask_output_bias"] = net.mask_output_bias;
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  try {
    const std::size_t n = j.at("n"), h = j.at("h"), o = j.at("o");
    Network net(n, h, o);
    auto fill = [](auto& grid, const nlohmann::json& rows) {
      if (rows.size() != grid.rows()) throw SchemaError("network json: matrix row count mismatch");
      for (std::size_t r = 0; r < grid.rows(); ++r) {
        if (rows[r].size() != grid.cols()) throw SchemaError("network json: matrix column count mismatch");
        for (std::size_t c = 0; c < grid.cols(); ++c)
          rows[r][c].get_to(grid(r, c));
      }
    };
    fill(net.w, j.at("w"));
    fill(net.v, j.at("v"));
    fill(net.mask_w, j.at("mask_w"));
    fill(net.mask_v, j.at("mask_v"));
    net.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
    net.output_bias = j.at("output_bias").get<std::vector<double>>();
    net.mask_hidden_bias = j.at("mask_hidden_bias").get<std::vector<unsigned char>>();
    net.mask_output_bias = j.at("mask_output_bias").get<std::vector<unsigned char>>();
    net.input_columns = j.at("input_columns").get<std::vector<std::size_t>>();
    if (net.hidden_bias.size() != h || net.output_bias.size() != o ||
        net.mask_hidden_bias.size() != h || net.mask_output_bias.size() != o ||
        net.input_columns.size() != n)
      throw SchemaError("network json: vector length mismatch");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("network json: ") + e.what());
  }
}

}  // namespace reann
