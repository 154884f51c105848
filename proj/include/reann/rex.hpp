#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "reann/dataset.hpp"
#include "reann/error.hpp"

namespace reann {

// ---- tables ----------------------------------------------------------------

struct TableAttribute {
  std::string name;
  std::string label;
  AttributeKind kind = AttributeKind::discrete;
  std::vector<std::string> categories;  // discrete only
  // Dataset attribute the column was taken from, when there is one.
  std::optional<std::size_t> source;

  std::string display() const { return label.empty() ? name : name + " (" + label + ")"; }
};

// A finite example table for rule induction. Discrete cells hold the category
// code; continuous cells hold the value in its original units. NaN = missing.
struct RuleTable {
  std::vector<TableAttribute> attributes;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t class_count() const noexcept { return class_names.size(); }
};

// ---- rules -----------------------------------------------------------------

enum class Test { equals, at_most, at_least, within };

inline const char* to_string(Test t) {
  switch (t) {
    case Test::equals: return "equals";
    case Test::at_most: return "at_most";
    case Test::at_least: return "at_least";
    case Test::within: return "within";
  }
  return "?";
}

inline Test test_from_string(const std::string& s) {
  if (s == "equals") return Test::equals;
  if (s == "at_most") return Test::at_most;
  if (s == "at_least") return Test::at_least;
  if (s == "within") return Test::within;
  throw SchemaError("unknown condition test '" + s + "'");
}

struct Condition {
  std::size_t attribute = 0;
  Test test = Test::equals;
  std::size_t category = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static Condition equals(std::size_t a, std::size_t cat) { return {a, Test::equals, cat}; }
  static Condition at_most(std::size_t a, double t) {
    return {a, Test::at_most, 0, -std::numeric_limits<double>::infinity(), t};
  }
  static Condition at_least(std::size_t a, double t) {
    return {a, Test::at_least, 0, t, std::numeric_limits<double>::infinity()};
  }
  static Condition within(std::size_t a, double lo, double hi) { return {a, Test::within, 0, lo, hi}; }

  // Builds the tightest condition from a pair of optional bounds.
  static Condition bounds(std::size_t a, double lo, double hi) {
    const bool has_lo = std::isfinite(lo), has_hi = std::isfinite(hi);
    if (has_lo && has_hi) return within(a, lo, hi);
    if (has_hi) return at_most(a, hi);
    return at_least(a, lo);
  }

  bool holds(double value) const {
    switch (test) {
      case Test::equals: return value == static_cast<double>(category);
      case Test::at_most: return value <= upper;
      case Test::at_least: return value >= lower;
      case Test::within: return value >= lower && value <= upper;
    }
    return false;
  }

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Rule {
  std::vector<Condition> conditions;  // at most one per attribute, sorted by attribute
  std::size_t consequent = 0;
  std::size_t support = 0;   // training rows matched
  std::size_t misfires = 0;  // matched rows of another class

  bool matches(std::span<const double> row) const {
    for (const auto& c : conditions)
      if (!c.holds(row[c.attribute])) return false;
    return true;
  }

  const Condition* on(std::size_t attribute) const {
    for (const auto& c : conditions)
      if (c.attribute == attribute) return &c;
    return nullptr;
  }

  bool same_logic(const Rule& o) const { return consequent == o.consequent && conditions == o.conditions; }
};

// Decision list: the first matching rule fires, otherwise default_class.
struct RuleSet {
  std::vector<Rule> rules;
  std::size_t default_class = 0;

  double average_conditions() const {
    if (rules.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& r : rules) c += r.conditions.size();
    return static_cast<double>(c) / static_cast<double>(rules.size());
  }
};

// Adds `c` to the conjunction, intersecting with an existing condition on the
// same attribute. Returns false when the two contradict.
inline bool conjoin(Rule& rule, const Condition& c) {
  for (auto& have : rule.conditions) {
    if (have.attribute != c.attribute) continue;
    if (have.test == Test::equals || c.test == Test::equals) {
      if (have.test != c.test) throw ContractViolation("mixed discrete and threshold tests on one attribute");
      return have.category == c.category;
    }
    const double lo = std::max(have.lower, c.lower);
    const double hi = std::min(have.upper, c.upper);
    if (lo > hi) return false;
    have = Condition::bounds(c.attribute, lo, hi);
    return true;
  }
  rule.conditions.push_back(c);
  std::sort(rule.conditions.begin(), rule.conditions.end(),
            [](const Condition& a, const Condition& b) { return a.attribute < b.attribute; });
  return true;
}

// First matching rule, else the default. An unset (NaN) value on an
// attribute a rule needs makes the example unclassifiable.
inline std::optional<std::size_t> classify(const RuleSet& rs, std::span<const double> row) {
  for (const auto& r : rs.rules) {
    for (const auto& c : r.conditions)
      if (std::isnan(row[c.attribute])) return std::nullopt;
    if (r.matches(row)) return r.consequent;
  }
  return rs.default_class;
}

inline std::size_t count_correct(const RuleSet& rs, const RuleTable& table) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto c = classify(rs, table.rows[i]);
    ok += c && *c == table.labels[i];
  }
  return ok;
}

inline void compute_stats(Rule& r, const RuleTable& table) {
  r.support = r.misfires = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!r.matches(table.rows[i])) continue;
    ++r.support;
    r.misfires += table.labels[i] != r.consequent;
  }
}

inline void compute_stats(RuleSet& rs, const RuleTable& table) {
  for (auto& r : rs.rules) compute_stats(r, table);
}

// Rows each rule decides when the list is read first-match-wins.
inline std::vector<std::size_t> first_match_support(const RuleSet& rs, const RuleTable& table) {
  std::vector<std::size_t> n(rs.rules.size(), 0);
  for (const auto& row : table.rows)
    for (std::size_t i = 0; i < rs.rules.size(); ++i)
      if (rs.rules[i].matches(row)) {
        ++n[i];
        break;
      }
  return n;
}

// ---- scoring ---------------------------------------------------------------

struct ConditionScore {
  std::size_t target = 0;  // matched rows of the target class
  std::size_t other = 0;   // matched rows of other classes
  double value() const { return static_cast<double>(target) - static_cast<double>(other); }
};

// First-order discriminating power of `candidate` restricted to `rows`.
inline ConditionScore condition_score(const RuleTable& table, std::span<const std::size_t> rows,
                                      const Condition& candidate, std::size_t target_class) {
  ConditionScore s;
  for (auto i : rows) {
    if (!candidate.holds(table.rows[i][candidate.attribute])) continue;
    if (table.labels[i] == target_class)
      ++s.target;
    else
      ++s.other;
  }
  return s;
}

inline double condition_score(const RuleTable& table, const Condition& candidate, std::size_t target_class) {
  std::vector<std::size_t> all(table.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return condition_score(table, all, candidate, target_class).value();
}

// Midpoints between adjacent distinct values of a continuous column where the
// class changes: a pair qualifies unless both sides carry one and the same
// single class.
inline std::vector<double> boundary_thresholds(const RuleTable& table, std::size_t attribute) {
  std::map<double, std::vector<std::size_t>> by_value;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double v = table.rows[i][attribute];
    if (std::isnan(v)) continue;
    auto& labels = by_value[v];
    if (std::find(labels.begin(), labels.end(), table.labels[i]) == labels.end())
      labels.push_back(table.labels[i]);
  }
  std::vector<double> out;
  for (auto it = by_value.begin(); it != by_value.end(); ++it) {
    auto next = std::next(it);
    if (next == by_value.end()) break;
    const bool same_pure = it->second.size() == 1 && next->second.size() == 1 && it->second[0] == next->second[0];
    if (!same_pure) out.push_back(0.5 * (it->first + next->first));
  }
  return out;
}

// ---- extraction ------------------------------------------------------------

struct ExtractionReport {
  std::vector<std::size_t> noise_rows;  // undifferentiable rows left to the default
};

namespace detail {

struct Candidate {
  Condition condition;
  ConditionScore score;
  int kind_rank = 0;    // equals < at_most < at_least
  double looseness = 0; // larger = admits more values
};

inline bool better(const Candidate& a, const Candidate& b) {
  if (a.score.value() != b.score.value()) return a.score.value() > b.score.value();
  if (a.score.other != b.score.other) return a.score.other < b.score.other;
  if (a.condition.attribute != b.condition.attribute) return a.condition.attribute < b.condition.attribute;
  if (a.kind_rank != b.kind_rank) return a.kind_rank < b.kind_rank;
  return a.looseness > b.looseness;
}

inline bool identical_rows(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

// Covering loop: the first unmarked row seeds a rule; the condition with the
// best first-order score (target matches minus other matches among the rows
// the partial rule still covers) is added until no row of another class is
// covered. Rows the rule covers are marked; marked rows still count when
// scoring later rules.
inline std::vector<Rule> extract_rules(const RuleTable& table, ExtractionReport* report = nullptr) {
  const std::size_t k = table.size();
  std::vector<std::vector<double>> thresholds(table.attributes.size());
  std::vector<double> column_min(table.attributes.size(), std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < table.attributes.size(); ++a) {
    if (table.attributes[a].kind != AttributeKind::continuous) continue;
    thresholds[a] = boundary_thresholds(table, a);
    for (const auto& row : table.rows) column_min[a] = std::min(column_min[a], row[a]);
  }

  std::vector<bool> marked(k, false);
  std::vector<Rule> rules;
  for (std::size_t seed = 0; seed < k; ++seed) {
    if (marked[seed]) continue;
    const auto& pattern = table.rows[seed];
    const std::size_t target = table.labels[seed];
    Rule rule;
    rule.consequent = target;

    std::vector<std::size_t> covered(k);
    std::iota(covered.begin(), covered.end(), std::size_t{0});
    auto others_in = [&](std::span<const std::size_t> rows) {
      return static_cast<std::size_t>(
          std::count_if(rows.begin(), rows.end(), [&](auto i) { return table.labels[i] != target; }));
    };
    std::size_t others = others_in(covered);
    const bool single_class = others == 0;

    for (;;) {
      if (others == 0 && !rule.conditions.empty()) break;
      std::optional<detail::Candidate> best;
      auto consider = [&](const Condition& c, int rank, double looseness) {
        detail::Candidate cand{c, condition_score(table, covered, c, target), rank, looseness};
        if (!single_class && cand.score.other >= others) return;
        if (!best || detail::better(cand, *best)) best = cand;
      };
      for (std::size_t a = 0; a < table.attributes.size(); ++a) {
        const double x = pattern[a];
        const Condition* have = rule.on(a);
        if (table.attributes[a].kind == AttributeKind::discrete) {
          if (!have) consider(Condition::equals(a, static_cast<std::size_t>(x)), 0, 0.0);
          continue;
        }
        const double lo = have ? have->lower : -std::numeric_limits<double>::infinity();
        const double hi = have ? have->upper : std::numeric_limits<double>::infinity();
        for (double t : thresholds[a]) {
          if (t > x && t < hi) consider(Condition::bounds(a, lo, t), 1, t);
          if (t < x && t > lo) consider(Condition::bounds(a, t, hi), 2, -t);
        }
        if (single_class && !have) consider(Condition::at_least(a, column_min[a]), 2, -column_min[a]);
      }
      if (!best) break;
      if (!conjoin(rule, best->condition)) throw ContractViolation("candidate contradicted its own rule");
      std::erase_if(covered, [&](auto i) { return !rule.matches(table.rows[i]); });
      others = others_in(covered);
      if (single_class) break;
    }

    if (others > 0 || rule.conditions.empty()) {
      // Only rows identical to the seed are left; keep the rule when the seed's
      // class is the plurality among its duplicates, otherwise it is noise.
      std::vector<std::size_t> votes(std::max<std::size_t>(table.class_count(), target + 1), 0);
      for (std::size_t i = 0; i < k; ++i)
        if (detail::identical_rows(table.rows[i], pattern)) ++votes[table.labels[i]];
      const auto plurality = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
      if (plurality != target || rule.conditions.empty()) {
        marked[seed] = true;
        if (report) report->noise_rows.push_back(seed);
        continue;
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      if (rule.matches(table.rows[i])) marked[i] = true;
    compute_stats(rule, table);
    rules.push_back(std::move(rule));
  }
  return rules;
}

// ---- clustering, default, pruning ------------------------------------------

// Stable partition by consequent; groups appear in order of first occurrence.
inline RuleSet cluster_rules(std::vector<Rule> rules) {
  RuleSet rs;
  std::vector<std::size_t> order;
  for (const auto& r : rules)
    if (std::find(order.begin(), order.end(), r.consequent) == order.end()) order.push_back(r.consequent);
  for (auto cls : order)
    for (auto& r : rules)
      if (r.consequent == cls) rs.rules.push_back(r);
  return rs;
}

// Majority class among rows no rule matches; with every row matched, the
// majority class of the whole table. Ties go to the lower class index.
inline std::size_t choose_default(const RuleSet& rs, const RuleTable& table) {
  std::vector<std::size_t> unmatched(table.class_count(), 0), all(table.class_count(), 0);
  bool any = false;
  for (std::size_t i = 0; i < table.size(); ++i) {
    ++all[table.labels[i]];
    const bool hit = std::any_of(rs.rules.begin(), rs.rules.end(),
                                 [&](const Rule& r) { return r.matches(table.rows[i]); });
    if (!hit) {
      ++unmatched[table.labels[i]];
      any = true;
    }
  }
  const auto& votes = any ? unmatched : all;
  if (votes.empty()) return 0;
  return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

struct RexOptions {
  std::size_t noise_threshold = 0;  // rules with support <= this are dropped; 0 = off
  std::size_t dnf_cap = 10000;
  bool default_from_clusters = true;
};

namespace detail {

inline std::size_t correct_with_default(RuleSet& rs, const RuleTable& table) {
  rs.default_class = choose_default(rs, table);
  return count_correct(rs, table);
}

inline std::vector<bool> cover_of(const Rule& r, const RuleTable& table) {
  std::vector<bool> c(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) c[i] = r.matches(table.rows[i]);
  return c;
}

inline bool subset(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

}  // namespace detail

// Within each class group, rules by descending support (stable).
inline void order_rules(RuleSet& rs) {
  std::vector<std::size_t> groups;
  for (const auto& r : rs.rules)
    if (std::find(groups.begin(), groups.end(), r.consequent) == groups.end()) groups.push_back(r.consequent);
  std::stable_sort(rs.rules.begin(), rs.rules.end(), [&](const Rule& a, const Rule& b) {
    const auto ga = std::find(groups.begin(), groups.end(), a.consequent) - groups.begin();
    const auto gb = std::find(groups.begin(), groups.end(), b.consequent) - groups.begin();
    if (ga != gb) return ga < gb;
    return a.support > b.support;
  });
}

// Noise: removes rules that decide at most `threshold` rows when the list is
// read in its current order. These go even when a few rows change class.
inline void drop_noise_rules(RuleSet& rs, const RuleTable& table, std::size_t threshold) {
  for (bool dropped = threshold > 0; dropped;) {
    dropped = false;
    const auto decided = first_match_support(rs, table);
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
      if (decided[i] > threshold) continue;
      rs.rules.erase(rs.rules.begin() + static_cast<std::ptrdiff_t>(i));
      dropped = true;
      break;
    }
  }
  compute_stats(rs, table);
}

// Generalises rules (drops conditions, or one bound of an interval, while the
// rule's misfires do not grow), removes rules whose cover is contained in a
// same-class rule's cover, then drops noise rules that decide few rows. A
// generalisation or redundancy drop is rolled back if training accuracy of the
// list (default re-chosen each time) falls.
inline RuleSet prune_rules(RuleSet rs, const RuleTable& table, const RexOptions& opt = {}) {
  compute_stats(rs, table);
  std::size_t baseline = detail::correct_with_default(rs, table);

  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    bool changed = true;
    while (changed) {
      changed = false;
      const std::size_t nconds = rs.rules[i].conditions.size();
      for (std::size_t j = 0; j < nconds && !changed; ++j) {
        const Condition c = rs.rules[i].conditions[j];
        std::vector<Rule> variants;
        if (c.test == Test::within) {
          Rule a = rs.rules[i];
          a.conditions[j] = Condition::at_most(c.attribute, c.upper);
          Rule b = rs.rules[i];
          b.conditions[j] = Condition::at_least(c.attribute, c.lower);
          variants.push_back(std::move(a));
          variants.push_back(std::move(b));
        }
        if (nconds > 1) {
          Rule d = rs.rules[i];
          d.conditions.erase(d.conditions.begin() + static_cast<std::ptrdiff_t>(j));
          variants.insert(variants.begin(), std::move(d));
        }
        for (auto& v : variants) {
          compute_stats(v, table);
          if (v.misfires > rs.rules[i].misfires) continue;
          RuleSet trial = rs;
          trial.rules[i] = v;
          const std::size_t ok = detail::correct_with_default(trial, table);
          if (ok < baseline) continue;
          rs = std::move(trial);
          baseline = ok;
          changed = true;
          break;
        }
      }
    }
  }

  for (std::size_t i = rs.rules.size(); i-- > 0;) {
    const auto mine = detail::cover_of(rs.rules[i], table);
    bool redundant = false;
    for (std::size_t j = 0; j < rs.rules.size() && !redundant; ++j) {
      if (j == i || rs.rules[j].consequent != rs.rules[i].consequent) continue;
      redundant = detail::subset(mine, detail::cover_of(rs.rules[j], table));
    }
    if (!redundant) continue;
    RuleSet trial = rs;
    trial.rules.erase(trial.rules.begin() + static_cast<std::ptrdiff_t>(i));
    const std::size_t ok = detail::correct_with_default(trial, table);
    if (ok < baseline) continue;
    rs = std::move(trial);
    baseline = ok;
  }

  if (opt.noise_threshold > 0) {
    order_rules(rs);
    drop_noise_rules(rs, table, opt.noise_threshold);
  }

  rs.default_class = choose_default(rs, table);
  return rs;
}

namespace detail {

inline std::size_t total_conditions(const RuleSet& rs) {
  std::size_t n = 0;
  for (const auto& r : rs.rules) n += r.conditions.size();
  return n;
}

// Fewer conditions in total; at equal totals, fewer conditions per rule.
inline bool simpler(const RuleSet& a, const RuleSet& b) {
  const std::size_t ca = total_conditions(a), cb = total_conditions(b);
  if (ca != cb) return ca < cb;
  return ca * b.rules.size() < cb * a.rules.size();
}

inline RuleSet finish(RuleSet rs, const RuleTable& table, const RexOptions& opt) {
  compute_stats(rs, table);
  order_rules(rs);
  drop_noise_rules(rs, table, opt.noise_threshold);
  rs.default_class = choose_default(rs, table);
  return rs;
}

}  // namespace detail

// Default rule and final order. With default_from_clusters, each class in
// turn gives up its rule group to become the default; candidates that lower
// training accuracy are skipped, and the smallest resulting list wins (ties go
// to the lower class index). Noise rules are dropped last.
inline RuleSet finalize_rules(RuleSet rs, const RuleTable& table, const RexOptions& opt) {
  RuleSet best = detail::finish(rs, table, opt);
  if (!opt.default_from_clusters) return best;
  RuleSet whole = rs;
  const std::size_t baseline = detail::correct_with_default(whole, table);
  std::optional<RuleSet> pick;
  for (std::size_t c = 0; c < table.class_count(); ++c) {
    RuleSet trial = rs;
    std::erase_if(trial.rules, [&](const Rule& r) { return r.consequent == c; });
    if (trial.rules.size() == rs.rules.size()) continue;
    if (detail::correct_with_default(trial, table) < baseline) continue;
    trial = detail::finish(std::move(trial), table, opt);
    if (!pick || detail::simpler(trial, *pick)) pick = std::move(trial);
  }
  return pick ? *pick : best;
}

// Extraction, clustering by class, pruning and the default rule.
inline RuleSet rex(const RuleTable& table, const RexOptions& opt = {}, ExtractionReport* report = nullptr) {
  RexOptions structural = opt;
  structural.noise_threshold = 0;
  auto rs = prune_rules(cluster_rules(extract_rules(table, report)), table, structural);
  return finalize_rules(std::move(rs), table, opt);
}

// ---- two-layer composition -------------------------------------------------

struct MergeReport {
  std::size_t expanded = 0;  // conjunctions generated before pruning
  std::vector<std::string> warnings;
};

// `hidden_rules` speak about hidden units (attribute m of its table = unit m,
// category c = cluster c); `input_rules[m]` describe unit m's clusters in
// terms of input attributes. Every "unit m in cluster c" condition is
// replaced by the disjunction of the input rules concluding c, the result is
// multiplied out into conjunctions, and the merged list is pruned against
// `table`.
inline RuleSet merge_rule_layers(const RuleSet& hidden_rules, std::span<const RuleSet> input_rules,
                                 const RuleTable& table, const RexOptions& opt = {},
                                 MergeReport* report = nullptr) {
  RuleSet merged;
  merged.default_class = hidden_rules.default_class;
  std::size_t expanded = 0;
  for (std::size_t ri = 0; ri < hidden_rules.rules.size(); ++ri) {
    const auto& hr = hidden_rules.rules[ri];
    std::vector<Rule> partial(1);
    partial[0].consequent = hr.consequent;
    bool reachable = true;
    for (const auto& cond : hr.conditions) {
      if (cond.test != Test::equals || cond.attribute >= input_rules.size())
        throw ContractViolation("hidden rule conditions must be cluster equalities");
      std::vector<const Rule*> alts;
      for (const auto& ir : input_rules[cond.attribute].rules)
        if (ir.consequent == cond.category) alts.push_back(&ir);
      if (alts.empty()) {
        reachable = false;
        if (report)
          report->warnings.push_back("hidden rule " + std::to_string(ri + 1) + ": unit " +
                                     std::to_string(cond.attribute + 1) + " cluster " +
                                     std::to_string(cond.category + 1) + " has no input rule; dropped");
        break;
      }
      std::vector<Rule> next;
      for (const auto& p : partial) {
        for (const Rule* alt : alts) {
          Rule r = p;
          bool ok = true;
          for (const auto& c : alt->conditions) ok = ok && conjoin(r, c);
          if (!ok) continue;
          if (next.size() + expanded >= opt.dnf_cap)
            throw RuleError("rule merge exceeded " + std::to_string(opt.dnf_cap) + " conjunctions");
          next.push_back(std::move(r));
        }
      }
      partial = std::move(next);
    }
    if (!reachable) continue;
    for (auto& r : partial) {
      if (r.conditions.empty()) continue;
      const bool dup = std::any_of(merged.rules.begin(), merged.rules.end(),
                                   [&](const Rule& m) { return m.same_logic(r); });
      if (!dup) merged.rules.push_back(std::move(r));
      ++expanded;
    }
  }
  if (report) report->expanded = expanded;
  RexOptions structural = opt;
  structural.noise_threshold = 0;
  return prune_rules(cluster_rules(std::move(merged.rules)), table, structural);
}

// ---- rendering -------------------------------------------------------------

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string describe(const Condition& c, const std::vector<TableAttribute>& attrs) {
  const auto& a = attrs.at(c.attribute);
  const std::string who = a.display();
  switch (c.test) {
    case Test::equals: return who + " = " + a.categories.at(c.category);
    case Test::at_most: return who + " ≤ " + format_value(c.upper);
    case Test::at_least: return who + " ≥ " + format_value(c.lower);
    case Test::within:
      return who + " within [" + format_value(c.lower) + ", " + format_value(c.upper) + "]";
  }
  return who;
}

inline void write_rules_text(std::ostream& os, const RuleSet& rs, const std::vector<TableAttribute>& attrs,
                             const std::vector<std::string>& class_names) {
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    const auto& r = rs.rules[i];
    os << "Rule " << i + 1 << ": If ";
    for (std::size_t j = 0; j < r.conditions.size(); ++j) {
      if (j) os << " and ";
      os << describe(r.conditions[j], attrs);
    }
    os << " then " << class_names.at(r.consequent) << '\n';
  }
  os << "Default Rule: " << class_names.at(rs.default_class) << '\n';
}

inline nlohmann::json to_json(const TableAttribute& a) {
  nlohmann::json j{{"name", a.name}, {"label", a.label}, {"kind", to_string(a.kind)}};
  if (a.kind == AttributeKind::discrete) j["categories"] = a.categories;
  if (a.source) j["source"] = *a.source;
  return j;
}

inline TableAttribute table_attribute_from_json(const nlohmann::json& j) {
  TableAttribute a;
  a.name = j.at("name");
  a.label = j.value("label", "");
  a.kind = j.at("kind") == "discrete" ? AttributeKind::discrete : AttributeKind::continuous;
  if (a.kind == AttributeKind::discrete) a.categories = j.at("categories").get<std::vector<std::string>>();
  if (j.contains("source")) a.source = j.at("source").get<std::size_t>();
  return a;
}

inline nlohmann::json to_json(const RuleSet& rs, const std::vector<TableAttribute>& attrs,
                              const std::vector<std::string>& class_names) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : rs.rules) {
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : r.conditions) {
      nlohmann::json jc{{"attribute", c.attribute}, {"label", attrs.at(c.attribute).label},
                        {"test", to_string(c.test)}};
      if (c.test == Test::equals) {
        jc["category"] = c.category;
        jc["value"] = attrs.at(c.attribute).categories.at(c.category);
      }
      if (c.test == Test::at_least || c.test == Test::within) jc["lower"] = c.lower;
      if (c.test == Test::at_most || c.test == Test::within) jc["upper"] = c.upper;
      conds.push_back(std::move(jc));
    }
    rules.push_back({{"conditions", conds},
                     {"consequent", r.consequent},
                     {"class", class_names.at(r.consequent)},
                     {"support", r.support},
                     {"misfires", r.misfires}});
  }
  nlohmann::json ja = nlohmann::json::array();
  for (const auto& a : attrs) ja.push_back(to_json(a));
  return {{"attributes", ja},
          {"class_names", class_names},
          {"rules", rules},
          {"default_class", rs.default_class},
          {"default", class_names.at(rs.default_class)}};
}

struct ParsedRules {
  RuleSet rules;
  std::vector<TableAttribute> attributes;
  std::vector<std::string> class_names;
};

inline ParsedRules rules_from_json(const nlohmann::json& j) {
  try {
    ParsedRules out;
    for (const auto& a : j.at("attributes")) out.attributes.push_back(table_attribute_from_json(a));
    out.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rules")) {
      Rule r;
      r.consequent = jr.at("consequent");
      r.support = jr.value("support", std::size_t{0});
      r.misfires = jr.value("misfires", std::size_t{0});
      for (const auto& jc : jr.at("conditions")) {
        Condition c;
        c.attribute = jc.at("attribute");
        c.test = test_from_string(jc.at("test"));
        if (c.test == Test::equals) c.category = jc.at("category");
        if (jc.contains("lower")) c.lower = jc.at("lower");
        if (jc.contains("upper")) c.upper = jc.at("upper");
        r.conditions.push_back(c);
      }
      out.rules.rules.push_back(std::move(r));
    }
    out.rules.default_class = j.at("default_class");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("rules json: ") + e.what());
  }
}

}  // namespace reann
