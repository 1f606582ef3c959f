#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "hql/encoding.hpp"
#include "hql/errors.hpp"

using namespace hql;
using namespace hql::enc;

namespace {

data::LabeledDataset toy(std::vector<std::vector<double>> rows, std::vector<int> labels,
                         std::vector<std::string> cols = {}) {
  data::LabeledDataset ds;
  ds.n_features = rows.front().size();
  ds.columns = std::move(cols);
  for (std::size_t i = 0; i < rows.size(); ++i) ds.append(rows[i], labels[i]);
  return ds;
}

std::vector<double> random_image(RandomStream& rng, int n = 56) {
  std::vector<double> img(n);
  for (auto& p : img) p = rng.uniform();
  return img;
}

}  // namespace

TEST(Preprocess, MeanMapsToZeroAndUnitToQuarterPi) {
  auto ds = toy({{1.0, 10.0}, {3.0, 10.0}, {5.0, 10.0}}, {1, -1, 1}, {"a", "b"});
  const auto sel = select_named(ds, {"a", "b"});
  const auto st = Standardizer::fit(ds, sel);
  EXPECT_DOUBLE_EQ(st.means[0], 3.0);
  EXPECT_EQ(st.scales[1], 1.0);  // zero variance keeps unit scale
  const auto mid = preprocess_simple(std::vector<double>{3.0, 10.0}, sel, st);
  EXPECT_EQ(mid[0], 0.0);
  EXPECT_EQ(mid[1], 0.0);
  const double sd = std::sqrt(8.0 / 3.0);
  const auto one = preprocess_simple(std::vector<double>{3.0 + sd, 11.0}, sel, st);
  EXPECT_NEAR(one[0], std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(one[1], std::numbers::pi / 4, 1e-15);
}

TEST(Preprocess, MonotoneAndBounded) {
  auto ds = toy({{-2.0}, {0.0}, {7.0}}, {1, -1, 1}, {"a"});
  const auto sel = select_named(ds, {"a"});
  const auto st = Standardizer::fit(ds, sel);
  double prev = -10;
  for (double x = -1e6; x <= 1e6; x = x < 0 ? x / 3 + 1 : x * 3 + 1) {
    const double a = preprocess_simple(std::vector<double>{x}, sel, st)[0];
    EXPECT_GT(a, -std::numbers::pi / 2);
    EXPECT_LT(a, std::numbers::pi / 2);
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(Selector, NamedColumnsAndErrors) {
  auto ds = toy({{1, 2, 3}}, {1}, {"x", "worst radius", "z"});
  const auto sel = select_named(ds, {"z", "worst radius"});
  EXPECT_EQ(sel.indices, (std::vector<std::size_t>{2, 1}));
  EXPECT_THROW(select_named(ds, {"nope"}), ConfigError);
  EXPECT_EQ(default_columns(data::DatasetName::Cancer),
            (std::vector<std::string>{"worst radius", "worst concave points", "worst texture",
                                      "mean texture"}));
  EXPECT_EQ(default_columns(data::DatasetName::Wines),
            (std::vector<std::string>{"proline", "flavanoids", "color intensity", "alcohol"}));
}

TEST(Selector, StumpRanksPerfectSeparatorFirst) {
  RandomStream rng(2);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2 ? 1 : -1;
    rows.push_back({rng.uniform(), rng.uniform(), y > 0 ? 1.0 + rng.uniform() : -rng.uniform(), rng.uniform()});
    labels.push_back(y);
  }
  const auto ds = toy(rows, labels);
  EXPECT_EQ(stump_importance(ds, 1).indices.front(), 2u);
  const auto all = stump_importance(ds, 4);
  EXPECT_EQ(std::set<std::size_t>(all.indices.begin(), all.indices.end()).size(), 4u);
  EXPECT_THROW(stump_importance(ds, 5), std::invalid_argument);
}

TEST(Selector, StumpTiesGoToLowerIndex) {
  const auto ds = toy({{0, 0, 0}, {1, 1, 1}}, {-1, 1});
  EXPECT_EQ(stump_importance(ds, 3).indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(ConvSpec, DefaultTiling) {
  const ConvSpec s;
  EXPECT_EQ(s.padded_rows(), 9);
  EXPECT_EQ(s.padded_cols(), 7);
  EXPECT_EQ(s.row_placements(), 4);
  EXPECT_EQ(s.col_placements(), 3);
  EXPECT_EQ(s.kernel_count(), 24);
  EXPECT_EQ(KernelSet::zeros(s).scalar_count(), 240u);
  EXPECT_EQ(describe(s), "3x3/2 pad=1,0 passes=2 image=8x7");
  EXPECT_EQ(parse_conv_spec(describe(s)), s);
  EXPECT_THROW(parse_conv_spec("3x3 stride 2"), ConfigError);
}

TEST(ConvSpec, PlacementFormula) {
  for (int lrf = 1; lrf <= 4; ++lrf)
    for (int stride = 1; stride <= 3; ++stride)
      for (int pad = 0; pad <= 1; ++pad) {
        ConvSpec s;
        s.lrf_rows = s.lrf_cols = lrf;
        s.stride = stride;
        s.pad_bottom_rows = pad;
        s.passes = 1;
        const int rows = 8 + pad, cols = 7;
        const int er = static_cast<int>(std::ceil(double(rows - lrf) / stride)) + 1;
        const int ec = static_cast<int>(std::ceil(double(cols - lrf) / stride)) + 1;
        EXPECT_EQ(s.row_placements(), er);
        EXPECT_EQ(s.col_placements(), ec);
        if (stride > lrf) continue;
        // every padded pixel is covered at least once
        std::set<std::pair<int, int>> covered;
        for (const auto& p : pad_and_tile(std::vector<double>(56, 1.0), s))
          for (int r = 0; r < lrf; ++r)
            for (int c = 0; c < lrf; ++c) covered.insert({p.row + r, p.col + c});
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) EXPECT_TRUE(covered.count({r, c})) << r << "," << c;
      }
}

TEST(PadAndTile, DefaultOrderAndPadding) {
  std::vector<double> img(56);
  for (int i = 0; i < 56; ++i) img[i] = i + 1;  // pixel (r, c) = 7r + c + 1
  const ConvSpec s;
  const auto patches = pad_and_tile(img, s);
  ASSERT_EQ(patches.size(), 24u);
  // enumerate placements independently
  std::size_t k = 0;
  for (int pass = 0; pass < 2; ++pass)
    for (int r : {0, 2, 4, 6})
      for (int c : {0, 2, 4}) {
        const auto& p = patches[k++];
        EXPECT_EQ(p.pass, pass);
        EXPECT_EQ(p.row, r);
        EXPECT_EQ(p.col, c);
        for (int dr = 0; dr < 3; ++dr)
          for (int dc = 0; dc < 3; ++dc) {
            const int rr = r + dr, cc = c + dc;
            const double expect = rr < 8 ? 7 * rr + cc + 1 : 0.0;
            EXPECT_EQ(p.pixels[dr * 3 + dc], expect);
          }
      }
  // the (6, 4) patch reaches into the zero padding row
  EXPECT_EQ(patches[11].pixels[6], 0.0);
  EXPECT_EQ(patches[11].pixels[8], 0.0);
  EXPECT_THROW(pad_and_tile(std::vector<double>(55), s), std::invalid_argument);
}

TEST(PadAndTile, ZeroImage) {
  for (const auto& p : pad_and_tile(std::vector<double>(56, 0.0), ConvSpec{}))
    for (double v : p.pixels) EXPECT_EQ(v, 0.0);
}

TEST(ConvEncode, BiasesOnlyAndOneHot) {
  const ConvSpec s;
  RandomStream rng(4);
  auto k = KernelSet::zeros(s);
  for (auto& b : k.biases) b = rng.uniform(-1, 1);
  const auto img = random_image(rng);
  const auto a = conv_encode(img, s, k);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], k.biases[i]);

  k = KernelSet::zeros(s);
  for (std::size_t i = 0; i < k.kernel_count(); ++i) k.weights[i * 9 + 4] = 1.0;  // centre pixel
  const auto patches = pad_and_tile(img, s);
  const auto c = conv_encode(img, s, k);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], patches[i].pixels[4]);
}

TEST(ConvEncode, MatchesDenseMatrixOracle) {
  const ConvSpec s;
  RandomStream rng(derive_seed(3, "conv-oracle"));
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = random_image(rng);
    const auto k = KernelSet::uniform(s, 1.0, rng);
    // dense 24 x 63 matrix acting on the padded image
    std::vector<double> padded(63, 0.0);
    for (int i = 0; i < 56; ++i) padded[i] = img[i];
    std::vector<double> dense(24 * 63, 0.0);
    int row = 0;
    for (int pass = 0; pass < 2; ++pass)
      for (int r = 0; r < 9 - 2; r += 2)
        for (int c = 0; c < 7 - 2; c += 2, ++row)
          for (int dr = 0; dr < 3; ++dr)
            for (int dc = 0; dc < 3; ++dc) dense[row * 63 + (r + dr) * 7 + c + dc] = k.weights[row * 9 + dr * 3 + dc];
    const auto got = conv_encode(img, s, k);
    for (int i = 0; i < 24; ++i) {
      double expect = k.biases[i];
      for (int j = 0; j < 63; ++j) expect += dense[i * 63 + j] * padded[j];
      EXPECT_NEAR(got[i], expect, 1e-12);
    }
  }
}

TEST(ConvEncode, LinearInImage) {
  const ConvSpec s;
  RandomStream rng(6);
  const auto img = random_image(rng);
  const auto k = KernelSet::uniform(s, 1.0, rng);
  auto scaled = img;
  for (auto& p : scaled) p *= 2.5;
  const auto a = conv_encode(img, s, k), b = conv_encode(scaled, s, k);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2.5 * a[i], 1e-12);
  EXPECT_THROW(conv_encode(img, s, KernelSet::zeros(ConvSpec{8, 7, 0, 0, 2, 2, 2, 1})), std::invalid_argument);
}

TEST(Preprocessor, ImagesPassThrough) {
  auto ds = toy({{0.1, 0.2}, {0.3, 0.4}}, {0, 1});
  const auto p = Preprocessor::fit(ds, std::nullopt);
  const auto out = p.transform(ds);
  EXPECT_EQ(out.features, ds.features);
}
