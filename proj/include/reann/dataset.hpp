#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <locale>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reann/error.hpp"

namespace reann {

enum class AttributeKind { continuous, discrete };

inline const char* to_string(AttributeKind k) {
  return k == AttributeKind::continuous ? "continuous" : "discrete";
}

struct AttributeMeta {
  std::string name;
  std::string label;  // short tag used in rule text, e.g. "A1"
  AttributeKind kind = AttributeKind::continuous;
  std::vector<std::string> categories;  // discrete only, in code order
  double min = 0.0;                     // continuous only, fitted on the training split
  double max = 0.0;
  bool degenerate = false;   // max == min on the training split; encodes to 0
  std::size_t offset = 0;    // first encoded input column

  std::size_t width() const noexcept {
    return kind == AttributeKind::discrete ? categories.size() : 1;
  }
  std::string display() const { return name + " (" + label + ")"; }
};

// Column layout of a CSV file, read from the JSON sidecar next to it.
struct Schema {
  enum class Role { attribute, ignore, target };
  struct Column {
    std::string name;
    std::string label;
    Role role = Role::attribute;
    AttributeKind kind = AttributeKind::continuous;
    std::vector<std::string> categories;
  };

  std::string name;
  bool header = false;
  std::vector<Column> columns;
  std::vector<std::string> class_labels;  // spelling in the file; index = class code
  std::vector<std::string> class_names;   // spelling in reports

  std::size_t target_column() const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].role == Role::target) return i;
    throw SchemaError("schema has no class column");
  }

  static Schema from_json(const nlohmann::json& j);
};

inline Schema Schema::from_json(const nlohmann::json& j) {
  Schema s;
  try {
    s.name = j.value("name", "");
    s.header = j.value("header", false);
    std::size_t attr_no = 0;
    std::size_t targets = 0;
    for (const auto& c : j.at("columns")) {
      Column col;
      col.name = c.value("name", "");
      const std::string role = c.value("role", "attribute");
      if (role == "class") {
        col.role = Role::target;
        ++targets;
      } else if (role == "ignore") {
        col.role = Role::ignore;
      } else if (role == "attribute") {
        col.role = Role::attribute;
        ++attr_no;
        col.label = c.value("label", "A" + std::to_string(attr_no));
        const std::string kind = c.value("kind", "continuous");
        if (kind == "discrete") {
          col.kind = AttributeKind::discrete;
          col.categories = c.at("categories").get<std::vector<std::string>>();
          if (col.categories.size() < 2)
            throw SchemaError("discrete attribute '" + col.name + "' needs at least 2 categories");
          auto sorted = col.categories;
          std::sort(sorted.begin(), sorted.end());
          if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw SchemaError("discrete attribute '" + col.name + "' repeats a category");
        } else if (kind != "continuous") {
          throw SchemaError("unknown attribute kind '" + kind + "'");
        }
      } else {
        throw SchemaError("unknown column role '" + role + "'");
      }
      s.columns.push_back(std::move(col));
    }
    if (targets != 1) throw SchemaError("schema needs exactly one class column");
    if (attr_no == 0) throw SchemaError("schema has no attribute columns");
    s.class_labels = j.at("classes").get<std::vector<std::string>>();
    s.class_names = j.value("class_names", s.class_labels);
    if (s.class_labels.empty() || s.class_names.size() != s.class_labels.size())
      throw SchemaError("class list is empty or class_names has the wrong length");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad schema: ") + e.what());
  }
  return s;
}

inline Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema " + path.string());
  try {
    return Schema::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema " + path.string() + ": " + e.what());
  }
}

struct Example {
  std::vector<double> raw;     // one value per attribute; discrete = category code
  std::vector<double> inputs;  // encoded network inputs
  std::size_t target = 0;      // 0-based class code
  std::vector<double> target_vector;
  std::size_t line = 0;        // source line in the CSV
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end == begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct Dataset {
  std::string name;
  std::vector<AttributeMeta> meta;
  std::vector<Example> examples;
  std::vector<std::string> class_names;
  IndexRange train;
  IndexRange test;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  bool encoded = false;

  std::size_t input_count() const {
    std::size_t n = 0;
    for (const auto& m : meta) n += m.width();
    return n;
  }
  std::size_t class_count() const noexcept { return class_names.size(); }
  std::span<const Example> train_examples() const {
    return std::span(examples).subspan(train.begin, train.size());
  }
  std::span<const Example> test_examples() const {
    return std::span(examples).subspan(test.begin, test.size());
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  is >> out;
  return !is.fail() && is.eof() && std::isfinite(out);
}

}  // namespace detail

// Reads every row; rows containing "?" are dropped and counted. Attribute
// metadata min/max are filled from all retained rows here and refitted on the
// training split by encode_and_normalize.
inline Dataset parse_csv(std::istream& in, const Schema& schema) {
  Dataset ds;
  ds.name = schema.name;
  ds.class_names = schema.class_names;
  const std::size_t target_col = schema.target_column();
  for (const auto& c : schema.columns) {
    if (c.role != Schema::Role::attribute) continue;
    AttributeMeta m;
    m.name = c.name;
    m.label = c.label;
    m.kind = c.kind;
    m.categories = c.categories;
    ds.meta.push_back(std::move(m));
  }

  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    ++ds.rows_read;
    auto fields = detail::split_fields(line);
    if (fields.size() != schema.columns.size())
      throw ParseError("expected " + std::to_string(schema.columns.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    if (std::find(fields.begin(), fields.end(), "?") != fields.end()) {
      ++ds.rows_dropped;
      continue;
    }
    Example ex;
    ex.line = line_no;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& col = schema.columns[c];
      if (c == target_col) {
        auto it = std::find(schema.class_labels.begin(), schema.class_labels.end(), fields[c]);
        if (it == schema.class_labels.end())
          throw SchemaError("line " + std::to_string(line_no) + ": unknown class label '" +
                            fields[c] + "'");
        ex.target = static_cast<std::size_t>(it - schema.class_labels.begin());
        continue;
      }
      if (col.role != Schema::Role::attribute) continue;
      if (col.kind == AttributeKind::discrete) {
        auto it = std::find(col.categories.begin(), col.categories.end(), fields[c]);
        if (it == col.categories.end())
          throw SchemaError("line " + std::to_string(line_no) + ": unknown category '" +
                            fields[c] + "' for " + col.name);
        ex.raw.push_back(static_cast<double>(it - col.categories.begin()));
      } else {
        double v = 0;
        if (!detail::parse_real(fields[c], v))
          throw ParseError("'" + fields[c] + "' is not a number (" + col.name + ")", line_no);
        ex.raw.push_back(v);
      }
    }
    ex.target_vector.assign(ds.class_count(), 0.0);
    ex.target_vector[ex.target] = 1.0;
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) throw ParseError("no data rows", 0);

  for (std::size_t a = 0; a < ds.meta.size(); ++a) {
    auto& m = ds.meta[a];
    if (m.kind != AttributeKind::continuous) continue;
    m.min = std::numeric_limits<double>::infinity();
    m.max = -std::numeric_limits<double>::infinity();
    for (const auto& ex : ds.examples) {
      m.min = std::min(m.min, ex.raw[a]);
      m.max = std::max(m.max, ex.raw[a]);
    }
  }
  ds.train = {0, ds.examples.size()};
  ds.test = {0, 0};
  return ds;
}

inline Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_csv(in, schema);
}

// Positional split: first ceil(k/2) rows train, the rest test. Datasets of at
// most 14 rows are too small to halve and use every row for both.
inline constexpr std::size_t kTinyDatasetRows = 14;

inline Dataset split_half(Dataset data) {
  const std::size_t k = data.examples.size();
  if (k <= kTinyDatasetRows) {
    data.train = {0, k};
    data.test = {0, k};
  } else {
    const std::size_t half = (k + 1) / 2;
    data.train = {0, half};
    data.test = {half, k};
  }
  data.encoded = false;
  return data;
}

// Fits min/max on the training range, then encodes every example:
// continuous -> (a - min) / (max - min) clamped to [0, 1], discrete -> one-of-c.
inline Dataset encode_and_normalize(Dataset data) {
  std::size_t offset = 0;
  for (std::size_t a = 0; a < data.meta.size(); ++a) {
    auto& m = data.meta[a];
    m.offset = offset;
    offset += m.width();
    if (m.kind != AttributeKind::continuous) continue;
    m.min = std::numeric_limits<double>::infinity();
    m.max = -std::numeric_limits<double>::infinity();
    for (const auto& ex : data.train_examples()) {
      m.min = std::min(m.min, ex.raw[a]);
      m.max = std::max(m.max, ex.raw[a]);
    }
    m.degenerate = !(m.max > m.min);
  }
  for (auto& ex : data.examples) {
    ex.inputs.assign(offset, 0.0);
    for (std::size_t a = 0; a < data.meta.size(); ++a) {
      const auto& m = data.meta[a];
      if (m.kind == AttributeKind::discrete) {
        ex.inputs[m.offset + static_cast<std::size_t>(ex.raw[a])] = 1.0;
      } else if (!m.degenerate) {
        ex.inputs[m.offset] = std::clamp((ex.raw[a] - m.min) / (m.max - m.min), 0.0, 1.0);
      }
    }
  }
  data.encoded = true;
  return data;
}

inline double decode_continuous(const AttributeMeta& m, double encoded) {
  return m.min + encoded * (m.max - m.min);
}

inline std::size_t decode_discrete(const AttributeMeta& m, std::span<const double> inputs) {
  auto code = inputs.subspan(m.offset, m.width());
  return static_cast<std::size_t>(std::max_element(code.begin(), code.end()) - code.begin());
}

// Which attribute owns encoded input column `col`.
inline std::size_t attribute_of_input(const Dataset& data, std::size_t col) {
  for (std::size_t a = 0; a < data.meta.size(); ++a)
    if (col >= data.meta[a].offset && col < data.meta[a].offset + data.meta[a].width()) return a;
  throw ContractViolation("input column outside the encoding");
}

}  // namespace reann
