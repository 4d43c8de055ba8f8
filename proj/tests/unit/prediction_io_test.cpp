// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "regnas/errors.hpp"
#include "regnas/prediction_io.hpp"

namespace regnas {
namespace {

using testing::TempDir;

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::vector<NamedCorrectness> sample_models() {
  return {{"alpha", CorrectnessVector::from_string("1011001110")},
          {"beta", CorrectnessVector::from_string("0000011111")}};
}

TEST(PredictionIo, BinaryRoundTrip) {
  const TempDir dir("pio");
  const auto models = sample_models();
  write_predictions_binary(dir / "p.bin", models);
  const auto back = read_predictions(dir / "p.bin");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "alpha");
  EXPECT_EQ(back[0].bits, models[0].bits);
  EXPECT_EQ(back[1].bits, models[1].bits);
}

TEST(PredictionIo, BinaryHeaderLayout) {
  const TempDir dir("pio");
  write_predictions_binary(dir / "p.bin", {{"m", CorrectnessVector::from_string("101")}});
  std::ifstream f(dir / "p.bin", std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(f), {}};
  ASSERT_EQ(bytes.size(), 8u + 4u + 4u + 8u + 4u + 1u + 1u);
  EXPECT_EQ(bytes.substr(0, 8), "RGNSPRED");
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[16], 3);
  EXPECT_EQ(bytes[24], 1);
  EXPECT_EQ(bytes[28], 'm');
  EXPECT_EQ(static_cast<unsigned char>(bytes[29]), 0x05);
}

TEST(PredictionIo, CsvRoundTrip) {
  const TempDir dir("pio");
  write_predictions_csv(dir / "p.csv", sample_models());
  const auto back = read_predictions(dir / "p.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].name, "beta");
  EXPECT_EQ(back[1].bits, sample_models()[1].bits);
}

TEST(PredictionIo, SingleColumnCsvIsNamedAfterFile) {
  const auto models = read_predictions(testing::fixture("audit/ref.csv"));
  ASSERT_EQ(models.size(), 1u);
  EXPECT_EQ(models[0].name, "ref");
  EXPECT_EQ(models[0].bits, CorrectnessVector::from_string("1110"));
}

TEST(PredictionIo, LabelPredictionCsvReducesToCorrectness) {
  const auto models = read_predictions(testing::fixture("audit/m1.csv"));
  ASSERT_EQ(models.size(), 1u);
  EXPECT_EQ(models[0].bits, CorrectnessVector::from_string("1011"));
}

TEST(PredictionIo, RowsMayArriveInAnyOrder) {
  const auto models = read_predictions(testing::fixture("audit/m2.csv"));
  EXPECT_EQ(models[0].bits, CorrectnessVector::from_string("0100"));
}

TEST(PredictionIo, MalformedCsvIsRejected) {
  const TempDir dir("pio");
  const std::vector<std::string> bad = {
      "sample_id,correct\n0,1\n0,1\n",  // duplicate id
      "sample_id,correct\n0,1\n2,1\n",  // gap
      "sample_id,correct\n0,2\n",       // not a bit
      "id,correct\n0,1\n",              // wrong header
      "sample_id,correct\n0\n",         // short row
      ""};
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const auto p = dir / ("bad" + std::to_string(i) + ".csv");
    write_text(p, bad[i]);
    EXPECT_THROW(read_predictions(p), ConfigError) << bad[i];
  }
}

TEST(PredictionIo, TruncatedBinaryIsRejected) {
  const TempDir dir("pio");
  write_predictions_binary(dir / "p.bin", sample_models());
  std::ifstream f(dir / "p.bin", std::ios::binary);
  std::string bytes{std::istreambuf_iterator<char>(f), {}};
  write_text(dir / "cut.bin", bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_predictions(dir / "cut.bin"), ConfigError);
}

}  // namespace
}  // namespace regnas
