#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace reann;
using reann::testing::source_dir;

namespace {

Schema two_column_schema() {
  return Schema::from_json(nlohmann::json::parse(R"({
    "name": "tiny",
    "columns": [
      {"name": "id", "role": "ignore"},
      {"name": "size"},
      {"name": "colour", "kind": "discrete", "categories": ["red", "green", "blue"]},
      {"name": "class", "role": "class"}
    ],
    "classes": ["2", "4"],
    "class_names": ["benign", "malignant"]
  })"));
}

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, two_column_schema());
}

Dataset synthetic(std::size_t k) {
  std::ostringstream os;
  for (std::size_t i = 0; i < k; ++i) os << i << ',' << (i % 10 + 1) << ",red," << (i % 2 ? 4 : 2) << '\n';
  return parse(os.str());
}

}  // namespace

TEST(Schema, LabelsAttributesInOrder) {
  const auto s = two_column_schema();
  ASSERT_EQ(s.columns.size(), 4u);
  EXPECT_EQ(s.columns[1].label, "A1");
  EXPECT_EQ(s.columns[2].label, "A2");
  EXPECT_EQ(s.target_column(), 3u);
}

TEST(Schema, RejectsMissingClassColumn) {
  EXPECT_THROW(Schema::from_json(nlohmann::json::parse(R"({"columns": [{"name": "x"}], "classes": ["a"]})")),
               SchemaError);
}

TEST(Schema, RejectsRepeatedCategory) {
  EXPECT_THROW(Schema::from_json(nlohmann::json::parse(R"({
    "columns": [{"name": "x", "kind": "discrete", "categories": ["a", "a"]}, {"name": "y", "role": "class"}],
    "classes": ["p", "q"]})")),
               SchemaError);
}

TEST(ParseCsv, ReadsRawValuesAndClasses) {
  const auto d = parse("7,3.5,blue,4\n8,1,red,2\n");
  ASSERT_EQ(d.examples.size(), 2u);
  EXPECT_DOUBLE_EQ(d.examples[0].raw[0], 3.5);
  EXPECT_DOUBLE_EQ(d.examples[0].raw[1], 2.0);
  EXPECT_EQ(d.examples[0].target, 1u);
  EXPECT_EQ(d.examples[1].target, 0u);
  EXPECT_EQ(d.examples[1].target_vector, (std::vector<double>{1.0, 0.0}));
}

TEST(ParseCsv, DropsRowsWithMissingValues) {
  const auto d = parse("1,2,red,2\n2,?,red,4\n3,5,green,4\n");
  EXPECT_EQ(d.rows_read, 3u);
  EXPECT_EQ(d.rows_dropped, 1u);
  ASSERT_EQ(d.examples.size(), 2u);
  EXPECT_EQ(d.examples[1].line, 3u);
}

TEST(ParseCsv, NonNumericFieldReportsLine) {
  try {
    parse("1,2,red,2\n2,abc,red,4\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseCsv, WrongFieldCountIsParseError) { EXPECT_THROW(parse("1,2,2\n"), ParseError); }

TEST(ParseCsv, UnknownClassIsSchemaError) { EXPECT_THROW(parse("1,2,red,3\n"), SchemaError); }

TEST(ParseCsv, UnknownCategoryIsSchemaError) { EXPECT_THROW(parse("1,2,purple,2\n"), SchemaError); }

TEST(ParseCsv, EmptyInputIsParseError) { EXPECT_THROW(parse(""), ParseError); }

TEST(ParseCsv, WisconsinFileKeeps683Rows) {
  const auto d = load_csv(source_dir() / "data/breast-cancer-wisconsin.csv",
                          load_schema(source_dir() / "data/breast-cancer-wisconsin.schema.json"));
  EXPECT_EQ(d.rows_read, 699u);
  EXPECT_EQ(d.rows_dropped, 16u);
  EXPECT_EQ(d.examples.size(), 683u);
  EXPECT_EQ(d.meta.size(), 9u);
  EXPECT_EQ(d.meta[5].name, "Bare nuclei");
}

TEST(SplitHalf, OddCountPutsExtraRowInTraining) {
  const auto d = split_half(synthetic(699));
  EXPECT_EQ(d.train.size(), 350u);
  EXPECT_EQ(d.test.size(), 349u);
  EXPECT_EQ(d.test.begin, 350u);
}

TEST(SplitHalf, TinyDatasetsUseEveryRowTwice) {
  for (std::size_t k : {2u, 11u, 14u}) {
    const auto d = split_half(synthetic(k));
    EXPECT_EQ(d.train.size(), k);
    EXPECT_EQ(d.test.size(), k);
  }
}

TEST(SplitHalf, FifteenRowsAreHalved) {
  const auto d = split_half(synthetic(15));
  EXPECT_EQ(d.train.size(), 8u);
  EXPECT_EQ(d.test.size(), 7u);
}

TEST(SplitHalf, PartitionIsDisjointAndComplete) {
  for (std::size_t k = 15; k < 60; ++k) {
    const auto d = split_half(synthetic(k));
    EXPECT_EQ(d.train.begin, 0u);
    EXPECT_EQ(d.train.end, d.test.begin);
    EXPECT_EQ(d.test.end, k);
  }
}

TEST(Encode, ClumpThicknessSixMapsToFiveNinths) {
  // Values 1..10 on the training split: (6 - 1) / (10 - 1).
  const auto d = encode_and_normalize(split_half(synthetic(40)));
  const auto& ex = d.examples[5];
  ASSERT_DOUBLE_EQ(ex.raw[0], 6.0);
  EXPECT_DOUBLE_EQ(ex.inputs[0], 5.0 / 9.0);
}

TEST(Encode, DiscreteIsOneOfC) {
  const auto d = encode_and_normalize(split_half(parse("1,1,red,2\n2,2,blue,4\n3,3,green,2\n")));
  EXPECT_EQ(d.input_count(), 4u);
  EXPECT_EQ(std::vector<double>(d.examples[1].inputs.begin() + 1, d.examples[1].inputs.end()),
            (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_EQ(decode_discrete(d.meta[1], d.examples[2].inputs), 1u);
  EXPECT_EQ(attribute_of_input(d, 3), 1u);
}

TEST(Encode, FitsOnTrainingSplitAndClampsTest) {
  std::ostringstream os;
  for (int i = 0; i < 8; ++i) os << i << ',' << 2 + i % 3 << ",red,2\n";  // training rows: 2..4
  for (int i = 0; i < 7; ++i) os << i << ',' << 10 << ",red,4\n";         // test rows lie outside
  const auto d = encode_and_normalize(split_half(parse(os.str())));
  EXPECT_DOUBLE_EQ(d.meta[0].min, 2.0);
  EXPECT_DOUBLE_EQ(d.meta[0].max, 4.0);
  for (const auto& ex : d.test_examples()) EXPECT_DOUBLE_EQ(ex.inputs[0], 1.0);
  EXPECT_DOUBLE_EQ(decode_continuous(d.meta[0], 0.5), 3.0);
}

TEST(Encode, ConstantColumnEncodesToZero) {
  const auto d = encode_and_normalize(split_half(parse("1,5,red,2\n2,5,red,4\n")));
  EXPECT_TRUE(d.meta[0].degenerate);
  for (const auto& ex : d.examples) EXPECT_EQ(ex.inputs[0], 0.0);
}

TEST(Encode, InputsStayInUnitInterval) {
  reann::testing::Gen g(11);
  std::ostringstream os;
  for (int i = 0; i < 200; ++i) os << i << ',' << g.real(-50, 50) << ",green," << (g.coin() ? 2 : 4) << '\n';
  const auto d = encode_and_normalize(split_half(parse(os.str())));
  for (const auto& ex : d.examples)
    for (double x : ex.inputs) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
}
