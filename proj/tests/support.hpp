#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "reann/reann.hpp"

namespace reann::testing {

inline std::filesystem::path source_dir() { return REANN_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string& name) {
  return source_dir() / "configs" / (name + ".json");
}

// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }

 private:
  std::mt19937_64 rng_;
};

inline Example make_example(std::vector<double> inputs, std::size_t target, std::size_t classes) {
  Example ex;
  ex.raw = inputs;
  ex.inputs = std::move(inputs);
  ex.target = target;
  ex.target_vector.assign(classes, 0.0);
  ex.target_vector[target] = 1.0;
  return ex;
}

inline std::vector<Example> random_examples(Gen& g, std::size_t k, std::size_t n, std::size_t o) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> x(n);
    for (auto& v : x) v = g.real(0.0, 1.0);
    out.push_back(make_example(std::move(x), g.index(o), o));
  }
  return out;
}

inline Network random_net(Gen& g, std::size_t n, std::size_t h, std::size_t o, double range = 1.0) {
  Network net(n, h, o);
  for (auto& x : net.w.data()) x = g.real(-range, range);
  for (auto& x : net.v.data()) x = g.real(-range, range);
  for (auto& x : net.hidden_bias) x = g.real(-range, range);
  for (auto& x : net.output_bias) x = g.real(-range, range);
  return net;
}

// Largest relative error |a - f| / max(|a|, |f|, 1) between the analytic
// gradient and central differences of the objective, over every parameter.
inline double gradient_check(Network net, std::span<const Example> data, const PenaltyConfig& cfg,
                             double step = 1e-6) {
  const auto g = gradient(net, data, cfg);
  double worst = 0.0;
  auto probe = [&](double& param, double analytic, bool live) {
    if (!live) {
      worst = std::max(worst, std::abs(analytic));
      return;
    }
    const double keep = param;
    param = keep + step;
    const double up = objective(net, data, cfg);
    param = keep - step;
    const double down = objective(net, data, cfg);
    param = keep;
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1.0}));
  };
  for (std::size_t i = 0; i < net.w.size(); ++i) probe(net.w.data()[i], g.w.data()[i], net.mask_w.data()[i]);
  for (std::size_t i = 0; i < net.v.size(); ++i) probe(net.v.data()[i], g.v.data()[i], net.mask_v.data()[i]);
  for (std::size_t m = 0; m < net.hidden(); ++m)
    probe(net.hidden_bias[m], g.hidden_bias[m], net.mask_hidden_bias[m]);
  for (std::size_t p = 0; p < net.outputs(); ++p)
    probe(net.output_bias[p], g.output_bias[p], net.mask_output_bias[p]);
  return worst;
}

// Table of discrete attributes; categories named "0", "1", ...
inline RuleTable discrete_table(std::vector<std::size_t> arity, std::vector<std::vector<double>> rows,
                                std::vector<std::size_t> labels, std::size_t classes) {
  RuleTable t;
  for (std::size_t a = 0; a < arity.size(); ++a) {
    TableAttribute at;
    at.name = "X" + std::to_string(a + 1);
    at.label = "A" + std::to_string(a + 1);
    at.kind = AttributeKind::discrete;
    for (std::size_t c = 0; c < arity[a]; ++c) at.categories.push_back(std::to_string(c));
    t.attributes.push_back(at);
  }
  t.rows = std::move(rows);
  t.labels = std::move(labels);
  for (std::size_t c = 0; c < classes; ++c) t.class_names.push_back("c" + std::to_string(c));
  return t;
}

inline RuleTable load_table(const std::string& csv, const std::string& schema) {
  const auto data = load_csv(source_dir() / "data" / csv, load_schema(source_dir() / "data" / schema));
  RuleTable t;
  for (const auto& m : data.meta) t.attributes.push_back({m.name, m.label, m.kind, m.categories, std::nullopt});
  t.class_names = data.class_names;
  for (const auto& ex : data.examples) {
    t.rows.push_back(ex.raw);
    t.labels.push_back(ex.target);
  }
  return t;
}

}  // namespace reann::testing
