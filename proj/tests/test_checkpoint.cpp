#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hql/checkpoint.hpp"
#include "hql/errors.hpp"

using namespace hql;
using namespace hql::ckpt;

namespace {

const std::filesystem::path kData = HQL_TEST_DATA_DIR;

Checkpoint sample_checkpoint(const pqc::CircuitTemplate& t) {
  const auto raw = data::load_named(data::DatasetName::Wines, kData);
  Checkpoint c;
  c.template_description = t.describe();
  c.dataset = data::DatasetName::Wines;
  c.preprocessor = mc::fit_preprocessor(raw, data::DatasetName::Wines,
                                        mc::default_task_config(data::DatasetName::Wines));
  RandomStream rng(3);
  c.ensemble.classes = {0, 1, 2};
  for (int k = 0; k < 3; ++k) {
    auto flat = train::ModelParams::zeros(t).flatten();
    for (auto& x : flat) x = rng.normal();
    c.ensemble.models.push_back(train::ModelParams::unflatten(t, flat));
  }
  return c;
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Checkpoint, TextRoundTripIsExact) {
  const auto t = pqc::build_template(pqc::ArchId::SimpleC);
  const auto c = sample_checkpoint(t);
  const auto text = to_text(c);
  EXPECT_EQ(text.rfind("hql-checkpoint v1\n", 0), 0u);
  const auto back = parse(text);
  EXPECT_EQ(back.template_description, c.template_description);
  EXPECT_EQ(back.dataset, c.dataset);
  EXPECT_EQ(back.ensemble.classes, c.ensemble.classes);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_EQ(back.ensemble.models[k].flatten(), c.ensemble.models[k].flatten());
  EXPECT_EQ(back.preprocessor.selector->indices, c.preprocessor.selector->indices);
  EXPECT_EQ(back.preprocessor.standardizer->means, c.preprocessor.standardizer->means);
  EXPECT_EQ(back.preprocessor.standardizer->scales, c.preprocessor.standardizer->scales);
  EXPECT_EQ(to_text(back), text);
}

TEST(Checkpoint, ConvModelRoundTripThroughFile) {
  const auto t = pqc::build_template(pqc::ArchId::MnistC, pqc::default_conv_spec(pqc::ArchId::MnistC));
  Checkpoint c;
  c.template_description = t.describe();
  c.dataset = data::DatasetName::Mnist;
  c.preprocessor = enc::Preprocessor{};
  RandomStream rng(8);
  c.ensemble.classes = {0, 1};
  for (int k = 0; k < 2; ++k) {
    auto flat = train::ModelParams::zeros(t).flatten();
    for (auto& x : flat) x = rng.uniform(-1, 1);
    c.ensemble.models.push_back(train::ModelParams::unflatten(t, flat));
  }
  const auto path = std::filesystem::temp_directory_path() / "hql_ckpt_test.txt";
  save(path, c);
  const auto back = load(path);
  EXPECT_FALSE(back.preprocessor.selector.has_value());
  EXPECT_EQ(back.ensemble.models[1].flatten(), c.ensemble.models[1].flatten());
  EXPECT_NO_THROW(require_template(back, t));
}

TEST(Checkpoint, RejectsBadMagicAndVersion) {
  const auto t = pqc::build_template(pqc::ArchId::SimpleA);
  auto text = to_text(sample_checkpoint(t));
  auto v2 = text;
  v2.replace(0, std::string("hql-checkpoint v1").size(), "hql-checkpoint v2");
  EXPECT_NE(error_of(v2).find("unsupported checkpoint version"), std::string::npos);
  EXPECT_NE(error_of("hello world\n").find("not a checkpoint"), std::string::npos);
  EXPECT_THROW(parse(""), DataError);
}

TEST(Checkpoint, RejectsMalformedBodies) {
  const auto t = pqc::build_template(pqc::ArchId::SimpleA);
  const auto text = to_text(sample_checkpoint(t));
  // truncate in the middle of the last model line
  EXPECT_THROW(parse(text.substr(0, text.size() - 20)), DataError);
  // wrong parameter count for the template
  auto bad = text;
  const auto pos = bad.find("model 0 15 ");
  ASSERT_NE(pos, std::string::npos);
  bad.replace(pos, 11, "model 0 14 ");
  EXPECT_THROW(parse(bad), DataError);
  auto junk = text;
  junk.replace(junk.find("dataset wines"), 13, "dataset nope!");
  EXPECT_THROW(parse(junk), DataError);
  EXPECT_THROW(load("/nonexistent/ckpt.txt"), DataError);
}

TEST(Checkpoint, TemplateMismatchIsAConfigError) {
  const auto c = sample_checkpoint(pqc::build_template(pqc::ArchId::SimpleA));
  EXPECT_THROW(require_template(c, pqc::build_template(pqc::ArchId::SimpleB)), ConfigError);
  EXPECT_THROW(require_template(c, pqc::build_template(pqc::ArchId::SimpleA, std::nullopt, {0.3, 0.0})),
               ConfigError);
}
