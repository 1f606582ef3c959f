#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "hql/dataset.hpp"
#include "hql/errors.hpp"

using namespace hql;
using namespace hql::data;
namespace fs = std::filesystem;

namespace {

const fs::path kData = HQL_TEST_DATA_DIR;

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "hql_dataset_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << content;
  return p;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Datasets, RealFilesMatchExpectedShapes) {
  for (auto n : {DatasetName::Parity, DatasetName::Cancer, DatasetName::Wines, DatasetName::Mnist}) {
    const auto ds = load_named(n, kData);
    const auto s = spec_for(n);
    EXPECT_EQ(ds.size(), s.samples) << to_string(n);
    EXPECT_EQ(ds.n_features, s.features) << to_string(n);
    EXPECT_EQ(ds.class_count(), s.classes) << to_string(n);
  }
  EXPECT_EQ(spec_for(DatasetName::Cancer).samples, 569u);
  EXPECT_EQ(spec_for(DatasetName::Wines).samples, 178u);
  EXPECT_EQ(spec_for(DatasetName::Mnist).samples, 1797u);
  EXPECT_EQ(load_named(DatasetName::Cancer, kData).classes(), (std::vector<int>{-1, 1}));
}

TEST(Datasets, DigitsAreRescaledAndCropped) {
  const auto ds = load_named(DatasetName::Mnist, kData);
  EXPECT_EQ(ds.n_features, 56u);
  EXPECT_EQ(*std::max_element(ds.features.begin(), ds.features.end()), 1.0);
  EXPECT_GE(*std::min_element(ds.features.begin(), ds.features.end()), 0.0);
  // right crop drops the last pixel column of each row
  const auto raw = load_csv(kData / "digits.csv");
  const double peak = *std::max_element(raw.features.begin(), raw.features.end());
  EXPECT_EQ(peak, 16.0);
  for (std::size_t i : {0u, 100u, 1796u})
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 7; ++c) EXPECT_EQ(ds.row(i)[r * 7 + c], raw.row(i)[r * 8 + c] / peak);
  const auto left = load_named(DatasetName::Mnist, kData, ColumnCrop::Left);
  EXPECT_EQ(left.row(5)[0], raw.row(5)[1] / peak);
}

TEST(Parity, LabelsFollowBitCount) {
  const auto ds = gen_parity(4);
  ASSERT_EQ(ds.size(), 16u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = ds.row(i);
    const double ones = std::accumulate(r.begin(), r.end(), 0.0);
    EXPECT_EQ(ds.labels[i], static_cast<int>(ones) % 2 ? 1 : -1);
  }
  // rows enumerate binary numbers with the most significant bit first
  EXPECT_EQ(std::vector<double>(ds.row(5).begin(), ds.row(5).end()), (std::vector<double>{0, 1, 0, 1}));
  EXPECT_EQ(gen_parity(3).size(), 8u);
  EXPECT_THROW(gen_parity(0), std::invalid_argument);
}

TEST(LoadCsv, TruncatedFileReportsCountMismatch) {
  const auto path = temp_file("short.csv", "a,b,label\n1,2,0\n3,4,1\n");
  const auto msg = error_of([&] { load_csv(path, spec_for(DatasetName::Wines)); });
  EXPECT_NE(msg.find("sample count mismatch, expected 178, got 2"), std::string::npos) << msg;
}

TEST(LoadCsv, MalformedCellNamesRowAndColumn) {
  const auto path = temp_file("bad.csv", "a,b,label\n1,2,0\n3,oops,1\n");
  const auto msg = error_of([&] { load_csv(path); });
  EXPECT_NE(msg.find("'oops'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 'b'"), std::string::npos) << msg;
}

TEST(LoadCsv, OtherErrors) {
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), DataError);
  EXPECT_THROW(load_csv(temp_file("nolabel.csv", "a,b\n1,2\n")), DataError);
  EXPECT_THROW(load_csv(temp_file("ragged.csv", "a,label\n1,2,3\n")), DataError);
  EXPECT_THROW(load_csv(temp_file("frac.csv", "a,label\n1,0.5\n")), DataError);
  EXPECT_THROW(load_named(DatasetName::Cancer, "/nonexistent"), DataError);
}

TEST(LoadCsv, RoundTrip) {
  auto ds = gen_parity(3);
  ds.features[1] = 0.1;  // a value that needs full precision
  ds.features[2] = -1.0 / 3.0;
  const auto path = temp_file("rt.csv", "");
  write_csv(path, ds);
  const auto back = load_csv(path);
  EXPECT_EQ(back.columns, ds.columns);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(to_csv(back), to_csv(ds));
}

TEST(Split, ParityHalvesPerClass) {
  const auto ds = gen_parity(4);
  const auto [train, test] = split(ds, 0.5, 1);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(test.size(), 8u);
  EXPECT_EQ(std::count(train.labels.begin(), train.labels.end(), 1), 4);
}

TEST(Split, PerClassRoundingOracle) {
  for (auto n : {DatasetName::Cancer, DatasetName::Wines, DatasetName::Mnist}) {
    const auto ds = load_named(n, kData);
    std::map<int, std::size_t> counts;
    for (int y : ds.labels) ++counts[y];
    std::size_t expected_train = 0;
    for (const auto& [y, c] : counts) expected_train += static_cast<std::size_t>(std::llround(c * 2.0 / 3.0));
    const auto [tr, te] = split_indices(ds, 2.0 / 3.0, 7);
    EXPECT_EQ(tr.size(), expected_train) << to_string(n);
    EXPECT_EQ(tr.size() + te.size(), ds.size());
  }
  const auto cancer = load_named(DatasetName::Cancer, kData);
  EXPECT_EQ(split_indices(cancer, 2.0 / 3.0, 1).first.size(), 141u + 238u);
}

TEST(Split, DisjointExhaustiveDeterministic) {
  const auto ds = load_named(DatasetName::Wines, kData);
  const auto [tr, te] = split_indices(ds, 2.0 / 3.0, 42);
  std::vector<std::size_t> all = tr;
  all.insert(all.end(), te.begin(), te.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(split_indices(ds, 2.0 / 3.0, 42), std::make_pair(tr, te));
  EXPECT_NE(split_indices(ds, 2.0 / 3.0, 43).first, tr);
}

TEST(Split, RejectsDegenerateInput) {
  const auto ds = gen_parity(4);
  EXPECT_THROW(split(ds, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(split(ds, 1.0, 1), std::invalid_argument);
  LabeledDataset one;
  one.n_features = 1;
  one.append(std::vector<double>{1.0}, 1);
  EXPECT_THROW(split(one, 0.5, 1), DataError);
}

TEST(Ratio, Parses) {
  EXPECT_DOUBLE_EQ(parse_ratio("2:1"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(parse_ratio("1:1"), 0.5);
  EXPECT_DOUBLE_EQ(parse_ratio("0.25"), 0.25);
  EXPECT_THROW(parse_ratio("2:0"), ConfigError);
  EXPECT_THROW(parse_ratio("abc"), ConfigError);
  EXPECT_THROW(parse_ratio("1.5"), ConfigError);
}

TEST(Names, ParseAndPrint) {
  EXPECT_EQ(parse_dataset_name("digits"), DatasetName::Mnist);
  EXPECT_EQ(to_string(parse_dataset_name("wines")), "wines");
  EXPECT_THROW(parse_dataset_name("iris"), ConfigError);
}

TEST(OneVsRest, Relabels) {
  auto ds = load_named(DatasetName::Wines, kData);
  const auto b = one_vs_rest(ds, 2);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(b.labels[i], ds.labels[i] == 2 ? 1 : -1);
}
