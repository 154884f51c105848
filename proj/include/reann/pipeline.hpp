#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "reann/dataset.hpp"
#include "reann/discretizer.hpp"
#include "reann/error.hpp"
#include "reann/network.hpp"
#include "reann/pruner.hpp"
#include "reann/rex.hpp"
#include "reann/trainer.hpp"

namespace reann {

struct PipelineConfig {
  std::filesystem::path csv;
  std::filesystem::path schema;
  TrainConfig train;
  PruneConfig prune;
  ClusterConfig cluster;
  RexOptions rex;

  void validate() const {
    train.validate();
    prune.validate();
    cluster.validate();
    if (rex.dnf_cap == 0) throw ConfigError("dnf_cap must be positive");
  }
};

namespace detail {

// Reads `section` strictly: every key must be one of `known`.
inline const nlohmann::json& section(const nlohmann::json& root, const char* name,
                                     std::initializer_list<const char*> known) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!root.contains(name)) return empty;
  const auto& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  for (const auto& [key, _] : s.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown key '") + key + "' in config section '" + name + "'");
  }
  return s;
}

template <class T>
void read(const nlohmann::json& s, const char* key, T& out) {
  if (s.contains(key)) out = s.at(key).get<T>();
}

inline void read(const nlohmann::json& s, const char* key, std::optional<double>& out) {
  if (!s.contains(key)) return;
  if (s.at(key).is_null())
    out.reset();
  else
    out = s.at(key).get<double>();
}

}  // namespace detail

// Relative dataset paths are resolved against `base_dir` (the config file's
// directory).
inline PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (key != "dataset" && key != "seed" && key != "train" && key != "prune" && key != "cluster" &&
          key != "rex")
        throw ConfigError("unknown top-level config key '" + key + "'");
    const auto& ds = detail::section(j, "dataset", {"csv", "schema"});
    if (!ds.contains("csv") || !ds.contains("schema")) throw ConfigError("dataset needs 'csv' and 'schema'");
    c.csv = base_dir / ds.at("csv").get<std::string>();
    c.schema = base_dir / ds.at("schema").get<std::string>();
    detail::read(j, "seed", c.train.seed);

    const auto& t = detail::section(j, "train", {"learning_rate", "init_range", "eps1", "eps2", "beta", "max_epochs",
                                                 "patience", "target_accuracy", "max_hidden"});
    detail::read(t, "learning_rate", c.train.learning_rate);
    detail::read(t, "init_range", c.train.init_range);
    detail::read(t, "eps1", c.train.penalty.eps1);
    detail::read(t, "eps2", c.train.penalty.eps2);
    detail::read(t, "beta", c.train.penalty.beta);
    detail::read(t, "max_epochs", c.train.max_epochs);
    detail::read(t, "patience", c.train.patience);
    detail::read(t, "target_accuracy", c.train.target_accuracy);
    detail::read(t, "max_hidden", c.train.max_hidden);

    const auto& p = detail::section(j, "prune", {"accuracy_floor", "retrain_epochs", "max_passes"});
    detail::read(p, "accuracy_floor", c.prune.accuracy_floor);
    detail::read(p, "retrain_epochs", c.prune.retrain_epochs);
    detail::read(p, "max_passes", c.prune.max_passes);

    const auto& k = detail::section(j, "cluster", {"epsilon", "accuracy_floor", "shrink_factor", "min_epsilon"});
    detail::read(k, "epsilon", c.cluster.epsilon);
    detail::read(k, "accuracy_floor", c.cluster.accuracy_floor);
    detail::read(k, "shrink_factor", c.cluster.shrink_factor);
    detail::read(k, "min_epsilon", c.cluster.min_epsilon);

    const auto& r = detail::section(j, "rex", {"noise_threshold", "dnf_cap", "default_from_clusters"});
    detail::read(r, "noise_threshold", c.rex.noise_threshold);
    detail::read(r, "dnf_cap", c.rex.dnf_cap);
    detail::read(r, "default_from_clusters", c.rex.default_from_clusters);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  const auto floor = [](const std::optional<double>& f) { return f ? nlohmann::json(*f) : nlohmann::json(nullptr); };
  return {{"dataset", {{"csv", c.csv.string()}, {"schema", c.schema.string()}}},
          {"seed", c.train.seed},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"init_range", c.train.init_range},
            {"eps1", c.train.penalty.eps1},
            {"eps2", c.train.penalty.eps2},
            {"beta", c.train.penalty.beta},
            {"max_epochs", c.train.max_epochs},
            {"patience", c.train.patience},
            {"target_accuracy", c.train.target_accuracy},
            {"max_hidden", c.train.max_hidden}}},
          {"prune",
           {{"accuracy_floor", floor(c.prune.accuracy_floor)},
            {"retrain_epochs", c.prune.retrain_epochs},
            {"max_passes", c.prune.max_passes}}},
          {"cluster",
           {{"epsilon", c.cluster.epsilon},
            {"accuracy_floor", floor(c.cluster.accuracy_floor)},
            {"shrink_factor", c.cluster.shrink_factor},
            {"min_epsilon", c.cluster.min_epsilon}}},
          {"rex",
           {{"noise_threshold", c.rex.noise_threshold},
            {"dnf_cap", c.rex.dnf_cap},
            {"default_from_clusters", c.rex.default_from_clusters}}}};
}

// Load, split in halves, fit the encoding on the training half.
inline Dataset prepare_dataset(const PipelineConfig& cfg) {
  return encode_and_normalize(split_half(load_csv(cfg.csv, load_schema(cfg.schema))));
}

// ---- rule tables -------------------------------------------------------------

// Attributes with at least one live input->hidden weight; `unit` restricts to
// a single hidden unit.
inline std::vector<std::size_t> live_attributes(const Network& net, const Dataset& data,
                                                std::optional<std::size_t> unit = std::nullopt) {
  std::set<std::size_t> attrs;
  for (std::size_t m = 0; m < net.hidden(); ++m) {
    if (unit && m != *unit) continue;
    for (std::size_t l = 0; l < net.inputs(); ++l)
      if (net.mask_w(m, l)) attrs.insert(attribute_of_input(data, net.input_columns[l]));
  }
  return {attrs.begin(), attrs.end()};
}

inline std::vector<TableAttribute> input_attributes(const Dataset& data, std::span<const std::size_t> attrs) {
  std::vector<TableAttribute> out;
  for (auto a : attrs) {
    const auto& m = data.meta.at(a);
    out.push_back({m.name, m.label, m.kind, m.categories, a});
  }
  return out;
}

inline std::vector<double> table_row(const std::vector<TableAttribute>& attrs, const Example& ex) {
  std::vector<double> row;
  row.reserve(attrs.size());
  for (const auto& a : attrs) row.push_back(a.source ? ex.raw.at(*a.source) : std::nan(""));
  return row;
}

inline RuleTable input_table(const Dataset& data, std::span<const std::size_t> attrs,
                             std::span<const Example> rows, std::span<const std::size_t> labels,
                             std::vector<std::string> class_names) {
  RuleTable t;
  t.attributes = input_attributes(data, attrs);
  t.class_names = std::move(class_names);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.rows.push_back(table_row(t.attributes, rows[i]));
    t.labels.push_back(labels[i]);
  }
  return t;
}

inline std::vector<std::string> cluster_names(const UnitClusters& u) {
  std::vector<std::string> out;
  for (double c : u.centers) out.push_back(format_value(c));
  return out;
}

inline RuleTable hidden_table(const ActivationClustering& cl, std::span<const std::size_t> labels,
                              std::vector<std::string> class_names) {
  RuleTable t;
  for (std::size_t m = 0; m < cl.units.size(); ++m)
    t.attributes.push_back({"Hidden unit " + std::to_string(m + 1), "H" + std::to_string(m + 1),
                            AttributeKind::discrete, cluster_names(cl.units[m]), std::nullopt});
  t.class_names = std::move(class_names);
  for (std::size_t i = 0; i < cl.assignment.size(); ++i) {
    t.rows.emplace_back(cl.assignment[i].begin(), cl.assignment[i].end());
    t.labels.push_back(labels[i]);
  }
  return t;
}

// ---- rule extraction through the network ----------------------------------------

struct NetworkRules {
  RuleSet hidden_rules;              // network output in terms of hidden clusters
  std::vector<RuleSet> unit_rules;   // per hidden unit: cluster in terms of inputs
  std::vector<RuleTable> unit_tables;
  RuleTable hidden;
  RuleTable final_table;             // live inputs -> discretized network class
  RuleSet rules;                     // live inputs -> class
  MergeReport merge;
};

inline NetworkRules extract_network_rules(const Dataset& data, const Network& net, const ActivationClustering& cl,
                                          const RexOptions& opt) {
  const auto train = data.train_examples();
  require(cl.assignment.size() == train.size(), "clustering does not match the training split");
  std::vector<std::size_t> net_class(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) net_class[i] = discretized_predict(net, cl, train[i]);

  RexOptions inner = opt;
  inner.default_from_clusters = false;
  inner.noise_threshold = 0;

  NetworkRules out;
  out.hidden = hidden_table(cl, net_class, data.class_names);
  out.hidden_rules = rex(out.hidden, inner);

  for (std::size_t m = 0; m < net.hidden(); ++m) {
    std::vector<std::size_t> cluster(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) cluster[i] = cl.assignment[i][m];
    const auto attrs = live_attributes(net, data, m);
    // Table for unit m over the whole live input set, so merged conditions
    // index one shared attribute list.
    RuleTable t = input_table(data, live_attributes(net, data), train, cluster, cluster_names(cl.units[m]));
    std::vector<bool> keep(t.attributes.size());
    for (std::size_t a = 0; a < t.attributes.size(); ++a)
      keep[a] = std::find(attrs.begin(), attrs.end(), *t.attributes[a].source) != attrs.end();
    // Attributes that do not feed unit m cannot separate its clusters; blank
    // them out of this table by giving every row the same value.
    for (auto& row : t.rows)
      for (std::size_t a = 0; a < row.size(); ++a)
        if (!keep[a]) row[a] = 0.0;
    out.unit_rules.push_back(rex(t, inner));
    out.unit_tables.push_back(std::move(t));
  }

  out.final_table = input_table(data, live_attributes(net, data), train, net_class, data.class_names);
  auto merged = merge_rule_layers(out.hidden_rules, out.unit_rules, out.final_table, opt, &out.merge);
  out.rules = finalize_rules(std::move(merged), out.final_table, opt);
  return out;
}

// ---- evaluation ------------------------------------------------------------------

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
  double fraction() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

inline nlohmann::json to_json(const std::optional<Tally>& t) {
  if (!t) return nullptr;
  const double pct = std::round(t->fraction() * 10000.0) / 100.0;
  return {{"correct", t->correct}, {"total", t->total}, {"fraction", t->fraction()}, {"percent", pct}};
}

struct Evaluation {
  std::optional<Tally> net_train, net_test;
  std::optional<Tally> discretized_train;
  std::optional<Tally> rules_train, rules_test;
  std::optional<Tally> fidelity_train;  // rules agree with the discretized network
};

// Rule accuracy on raw attribute rows; an example a rule cannot evaluate (a
// missing value) is counted wrong.
inline Tally rule_tally(const RuleSet& rs, const std::vector<TableAttribute>& attrs,
                        std::span<const Example> data) {
  Tally t;
  for (const auto& ex : data) {
    const auto c = classify(rs, table_row(attrs, ex));
    t.correct += c && *c == ex.target;
    ++t.total;
  }
  return t;
}

inline Evaluation evaluate(const Network& net, const ActivationClustering& cl, const RuleSet& rs,
                           const std::vector<TableAttribute>& attrs, const Dataset& data) {
  Evaluation e;
  const auto train = data.train_examples();
  const auto test = data.test_examples();
  auto net_tally = [&](std::span<const Example> d) { return Tally{count_correct(net, d), d.size()}; };
  if (!train.empty()) {
    e.net_train = net_tally(train);
    e.rules_train = rule_tally(rs, attrs, train);
    Tally disc, fid;
    for (const auto& ex : train) {
      const auto d = discretized_predict(net, cl, ex);
      disc.correct += d == ex.target;
      const auto r = classify(rs, table_row(attrs, ex));
      fid.correct += r && *r == d;
      ++disc.total;
      ++fid.total;
    }
    e.discretized_train = disc;
    e.fidelity_train = fid;
  }
  if (!test.empty()) {
    e.net_test = net_tally(test);
    e.rules_test = rule_tally(rs, attrs, test);
  }
  return e;
}

inline nlohmann::json to_json(const Evaluation& e) {
  return {{"network_train", to_json(e.net_train)},   {"network_test", to_json(e.net_test)},
          {"discretized_train", to_json(e.discretized_train)}, {"rules_train", to_json(e.rules_train)},
          {"rules_test", to_json(e.rules_test)},     {"fidelity_train", to_json(e.fidelity_train)}};
}

// ---- the whole run ----------------------------------------------------------

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct RunResult {
  PipelineConfig config;
  Dataset data;
  TrainReport train;
  Network trained{1, 1, 1};
  PruneReport prune;
  Network pruned{1, 1, 1};
  ActivationClustering clusters;
  NetworkRules rules;
  Evaluation evaluation;
  std::vector<StageTime> timings;
};

// Thrown by run_pipeline when a stage fails; carries the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline nlohmann::json dataset_summary(const Dataset& d) {
  return {{"name", d.name},
          {"k", d.examples.size()},
          {"n", d.input_count()},
          {"attributes", d.meta.size()},
          {"o", d.class_count()},
          {"rows_read", d.rows_read},
          {"rows_dropped", d.rows_dropped},
          {"train", d.train.size()},
          {"test", d.test.size()}};
}

inline std::string rules_text(const NetworkRules& nr, const Dataset& data) {
  std::ostringstream os;
  write_rules_text(os, nr.rules, nr.final_table.attributes, data.class_names);
  return os.str();
}

inline nlohmann::json make_report(const RunResult& r, bool with_timings) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& u : r.clusters.units) clusters.push_back({{"centers", u.centers}, {"counts", u.counts}});
  nlohmann::json j{
      {"seed", r.config.train.seed},
      {"config", to_json(r.config)},
      {"dataset", dataset_summary(r.data)},
      {"training", to_json(r.train)},
      {"pruning", to_json(r.prune)},
      {"network", {{"hidden", r.pruned.hidden()}, {"connections", r.pruned.connection_count()},
                   {"input_columns", r.pruned.input_columns}}},
      {"clustering",
       {{"epsilon", r.clusters.epsilon}, {"attempts", r.clusters.attempts},
        {"train_accuracy", r.clusters.train_accuracy}, {"units", clusters}}},
      {"rules", to_json(r.rules.rules, r.rules.final_table.attributes, r.data.class_names)},
      {"rule_count", r.rules.rules.rules.size() + 1},
      {"average_conditions", r.rules.rules.average_conditions()},
      {"merge", {{"expanded", r.rules.merge.expanded}, {"warnings", r.rules.merge.warnings}}},
      {"accuracy", to_json(r.evaluation)}};
  if (with_timings) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& s : r.timings) t[s.stage] = s.seconds;
    j["wall_clock_seconds"] = t;
  }
  return j;
}

// Runs every stage in order. With `out_dir`, every intermediate artifact is
// written as soon as its stage finishes.
inline RunResult run_pipeline(const PipelineConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {}) {
  RunResult r;
  r.config = cfg;
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    r.timings.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  };
  auto emit = [&](const char* file, const auto& write) {
    if (out_dir) write(*out_dir / file);
  };

  r.data = prepare_dataset(cfg);  // data and schema errors propagate unchanged
  const auto train = r.data.train_examples();

  stage("train", [&] {
    r.trained = constructive_train(train, r.data.input_count(), r.data.class_count(), cfg.train, r.train);
    emit("network_trained.json", [&](const auto& p) { write_json(p, to_json(r.trained)); });
    emit("training_curve.csv", [&](const auto& p) {
      std::ostringstream os;
      write_training_curve(os, r.train);
      write_text(p, os.str());
    });
  });
  stage("prune", [&] {
    r.pruned = prune_nodes(prune_weights(r.trained, train, cfg.train, cfg.prune, r.prune), &r.prune);
    emit("network.json", [&](const auto& p) { write_json(p, to_json(r.pruned)); });
    emit("prune_report.json", [&](const auto& p) { write_json(p, to_json(r.prune)); });
  });
  stage("discretize", [&] {
    r.clusters = cluster_activations(r.pruned, train, cfg.cluster);
    emit("clusters.json", [&](const auto& p) { write_json(p, to_json(r.clusters)); });
  });
  stage("extract", [&] {
    r.rules = extract_network_rules(r.data, r.pruned, r.clusters, cfg.rex);
    emit("rules.txt", [&](const auto& p) { write_text(p, rules_text(r.rules, r.data)); });
    emit("rules.json", [&](const auto& p) {
      write_json(p, to_json(r.rules.rules, r.rules.final_table.attributes, r.data.class_names));
    });
  });
  stage("evaluate", [&] {
    r.evaluation = evaluate(r.pruned, r.clusters, r.rules.rules, r.rules.final_table.attributes, r.data);
  });
  emit("report.json", [&](const auto& p) { write_json(p, make_report(r, true)); });
  return r;
}

// Holds `<dir>/.reann.lock` for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".reann.lock") {
    std::filesystem::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw Error("output directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace reann
