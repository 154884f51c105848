// reann: train, prune, discretize and extract rules from the command line.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reann/reann.hpp"

namespace fs = std::filesystem;
using namespace reann;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(p.string() + ": " + e.what());
  }
}

std::string percent(const std::optional<Tally>& t) {
  if (!t) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu/%zu %.2f%%", t->correct, t->total, 100.0 * t->fraction());
  return buf;
}

void print_summary(std::ostream& os, const RunResult& r) {
  os << "dataset      " << r.data.name << "  k=" << r.data.examples.size() << " n=" << r.data.input_count()
     << " o=" << r.data.class_count() << "\n";
  os << "network      " << r.pruned.hidden() << " hidden, " << r.pruned.connection_count() << " connections ("
     << r.prune.initial_connections << " before pruning)\n";
  os << "clusters     eps=" << r.clusters.epsilon;
  for (const auto& u : r.clusters.units) os << "  [" << u.size() << "]";
  os << "\n";
  os << "net train    " << percent(r.evaluation.net_train) << "\n";
  os << "net test     " << percent(r.evaluation.net_test) << "\n";
  os << "rules train  " << percent(r.evaluation.rules_train) << "\n";
  os << "rules test   " << percent(r.evaluation.rules_test) << "\n";
  os << "fidelity     " << percent(r.evaluation.fidelity_train) << "\n\n";
  os << rules_text(r.rules, r.data);
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;

  PipelineConfig load() const {
    auto cfg = load_config(config);
    if (seed) cfg.train.seed = *seed;
    return cfg;
  }
};

int run_command(const Common& c, int repeat) {
  auto cfg = c.load();
  if (repeat <= 1) {
    DirectoryLock lock(c.out);
    const auto r = run_pipeline(cfg, fs::path(c.out));
    print_summary(std::cout, r);
    return 0;
  }
  DirectoryLock lock(c.out);
  nlohmann::json runs = nlohmann::json::array();
  std::vector<double> rules_test, net_test;
  const auto first = cfg.train.seed;
  for (int i = 0; i < repeat; ++i) {
    cfg.train.seed = first + static_cast<std::uint64_t>(i);
    const fs::path dir = fs::path(c.out) / ("seed_" + std::to_string(cfg.train.seed));
    fs::create_directories(dir);
    const auto r = run_pipeline(cfg, dir);
    const auto& e = r.evaluation;
    const auto& rt = e.rules_test ? e.rules_test : e.rules_train;
    const auto& nt = e.net_test ? e.net_test : e.net_train;
    rules_test.push_back(rt->fraction());
    net_test.push_back(nt->fraction());
    runs.push_back({{"seed", cfg.train.seed}, {"accuracy", to_json(e)}, {"rule_count", r.rules.rules.rules.size() + 1}});
    std::cout << "seed " << cfg.train.seed << ": rules " << percent(rt) << ", network " << percent(nt) << "\n";
  }
  auto stats = [](const std::vector<double>& xs) {
    double m = 0.0, s = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    for (double x : xs) s += (x - m) * (x - m);
    s = xs.size() > 1 ? std::sqrt(s / static_cast<double>(xs.size() - 1)) : 0.0;
    return nlohmann::json{{"mean", m}, {"sd", s}};
  };
  write_json(fs::path(c.out) / "summary.json",
             {{"runs", runs}, {"rules_test", stats(rules_test)}, {"network_test", stats(net_test)}});
  std::cout << "rules test mean " << stats(rules_test)["mean"] << " sd " << stats(rules_test)["sd"] << "\n";
  return 0;
}

Network load_network(const std::string& p) {
  try {
    return network_from_json(read_json(p));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(p + ": " + e.what());
  }
}

// Runs `body` as the named stage so failures exit with the stage name.
template <class F>
void as_stage(const char* name, F&& body) {
  try {
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const SchemaError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"REANN: rule extraction from constructively trained, pruned neural networks"};
  app.require_subcommand(1);

  Common common;
  int repeat = 1;
  std::string network_path, clusters_path, rules_path;

  auto add_common = [&](CLI::App* sub, bool seed) {
    sub->add_option("--config", common.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    if (seed) sub->add_option("--seed", common.seed, "overrides the config seed");
    sub->add_option("--out", common.out, "output directory")->required();
  };

  auto* run = app.add_subcommand("run", "all stages end to end");
  add_common(run, true);
  run->add_option("--repeat", repeat, "run N consecutive seeds and summarise")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "constructive training -> network_trained.json");
  add_common(train, true);

  auto* prune = app.add_subcommand("prune", "weight and node pruning -> network.json");
  add_common(prune, false);
  prune->add_option("--network", network_path, "network_trained.json")->required()->check(CLI::ExistingFile);

  auto* disc = app.add_subcommand("discretize", "activation clustering -> clusters.json");
  add_common(disc, false);
  disc->add_option("--network", network_path, "pruned network.json")->required()->check(CLI::ExistingFile);

  auto* extract = app.add_subcommand("extract", "rule extraction -> rules.txt, rules.json");
  add_common(extract, false);
  extract->add_option("--network", network_path, "pruned network.json")->required()->check(CLI::ExistingFile);
  extract->add_option("--clusters", clusters_path, "clusters.json")->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("evaluate", "accuracy and fidelity -> evaluation.json");
  add_common(eval, false);
  eval->add_option("--network", network_path, "pruned network.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--clusters", clusters_path, "clusters.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--rules", rules_path, "rules.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(common, repeat);

    const auto cfg = common.load();
    DirectoryLock lock(common.out);
    const fs::path out(common.out);
    const auto data = prepare_dataset(cfg);
    const auto rows = data.train_examples();

    if (train->parsed()) {
      as_stage("train", [&] {
        TrainReport report;
        const auto net = constructive_train(rows, data.input_count(), data.class_count(), cfg.train, report);
        write_json(out / "network_trained.json", to_json(net));
        std::ostringstream curve;
        write_training_curve(curve, report);
        write_text(out / "training_curve.csv", curve.str());
        write_json(out / "train_report.json", to_json(report));
        std::cout << "trained: " << net.hidden() << " hidden, train accuracy " << report.final_train_accuracy
                  << "\n";
      });
    } else if (prune->parsed()) {
      const auto net = load_network(network_path);
      as_stage("prune", [&] {
        PruneReport report;
        const auto pruned = prune_nodes(prune_weights(net, rows, cfg.train, cfg.prune, report), &report);
        write_json(out / "network.json", to_json(pruned));
        write_json(out / "prune_report.json", to_json(report));
        std::cout << "pruned: " << pruned.hidden() << " hidden, " << pruned.connection_count() << " connections\n";
      });
    } else if (disc->parsed()) {
      const auto net = load_network(network_path);
      as_stage("discretize", [&] {
        const auto cl = cluster_activations(net, rows, cfg.cluster);
        write_json(out / "clusters.json", to_json(cl));
        std::cout << "clustered at eps " << cl.epsilon << ", discretized train accuracy " << cl.train_accuracy
                  << "\n";
      });
    } else if (extract->parsed()) {
      const auto net = load_network(network_path);
      const auto cl = clustering_from_json(read_json(clusters_path));
      as_stage("extract", [&] {
        const auto nr = extract_network_rules(data, net, cl, cfg.rex);
        write_text(out / "rules.txt", rules_text(nr, data));
        write_json(out / "rules.json", to_json(nr.rules, nr.final_table.attributes, data.class_names));
        for (const auto& w : nr.merge.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << rules_text(nr, data);
      });
    } else if (eval->parsed()) {
      const auto net = load_network(network_path);
      const auto cl = clustering_from_json(read_json(clusters_path));
      const auto parsed = rules_from_json(read_json(rules_path));
      as_stage("evaluate", [&] {
        const auto e = evaluate(net, cl, parsed.rules, parsed.attributes, data);
        write_json(out / "evaluation.json", to_json(e));
        std::cout << "net train    " << percent(e.net_train) << "\nnet test     " << percent(e.net_test)
                  << "\nrules train  " << percent(e.rules_train) << "\nrules test   " << percent(e.rules_test)
                  << "\nfidelity     " << percent(e.fidelity_train) << "\n";
      });
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const StageError& e) {
    std::cerr << "stage '" << e.stage() << "' failed: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
}
