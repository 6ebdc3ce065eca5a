#include "nngs/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace nngs {
namespace {

using io::Json;

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no nngs::Error thrown";
  return ErrorCode::InvalidArgument;
}

TEST(Glove, ParsesTokensInOrder) {
  std::istringstream in("cat 1.0 2.0\ndog 3.0 4.0\n");
  const auto c = io::read_glove_text(in);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_EQ(c.ids(), (std::vector<std::string>{"cat", "dog"}));
  EXPECT_EQ(c.data()(1, 0), 3.0);
}

TEST(Glove, InconsistentDimensionNamesLine) {
  std::istringstream in("cat 1.0 2.0\ndog 3.0 4.0 5.0\n");
  try {
    io::read_glove_text(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentDimension);
    EXPECT_NE(e.detail().find("line 2"), std::string::npos);
  }
}

TEST(Glove, DuplicateKeepsFirst) {
  std::istringstream in("cat 1 2\ndog 3 4\ncat 5 6\n");
  Warnings w;
  const auto c = io::read_glove_text(in, &w);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.data()(0, 0), 1.0);
  EXPECT_EQ(w.count(), 1u);
}

TEST(Glove, BadFloatAndLimit) {
  std::istringstream bad("cat 1 2\ndog 3 x4\n");
  EXPECT_EQ(code_of([&] { io::read_glove_text(bad); }), ErrorCode::UnparsableFloat);
  std::istringstream many("a 1\nb 2\nc 3\nd 4\n");
  EXPECT_EQ(io::read_glove_text(many, nullptr, 3).size(), 3u);
  std::istringstream empty("\n\n");
  EXPECT_EQ(code_of([&] { io::read_glove_text(empty); }), ErrorCode::EmptyFile);
}

TEST(Glove, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  const auto c = testing::random_cloud(20, 7, rng);
  std::stringstream s;
  io::write_glove_text(c, s);
  const auto back = io::read_glove_text(s);
  EXPECT_EQ(back.ids(), c.ids());
  EXPECT_EQ(back.data(), c.data());
}

TEST(Csv, CloudWithHeader) {
  std::istringstream in("id,x0,x1\na,1,2\nb,3,4\n");
  const auto c = io::read_csv_cloud(in);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_EQ(c.data()(1, 1), 4.0);
}

TEST(Csv, ExporterLayoutGivesLabeledItems) {
  std::ostringstream text;
  text << "id,label";
  for (int j = 0; j < 512; ++j) text << ",x" << j;
  text << '\n';
  for (int i = 0; i < 3; ++i) {
    text << "img" << i << ",class" << i % 2;
    for (int j = 0; j < 512; ++j) text << ',' << (i + 1) * 0.001 * j;
    text << '\n';
  }
  std::istringstream in(text.str());
  const auto v = io::read_csv_embeddings(in, {"id", "label", std::nullopt});
  ASSERT_TRUE(std::holds_alternative<LabeledEmbeddings>(v));
  const auto& e = std::get<LabeledEmbeddings>(v);
  EXPECT_EQ(e.dim(), 512u);
  EXPECT_EQ(e.classes(), (std::vector<std::string>{"class0", "class1"}));
}

TEST(Csv, Errors) {
  std::istringstream no_id("name,x0\na,1\nb,2\n");
  EXPECT_EQ(code_of([&] { io::read_csv_cloud(no_id); }), ErrorCode::MissingColumn);
  std::istringstream dup("id,x0\na,1\na,2\n");
  EXPECT_EQ(code_of([&] { io::read_csv_cloud(dup); }), ErrorCode::DuplicateId);
  std::istringstream bad("id,x0\na,1\nb,two\n");
  EXPECT_EQ(code_of([&] { io::read_csv_cloud(bad); }), ErrorCode::UnparsableFloat);
  std::istringstream ragged("id,x0,x1\na,1,2\nb,2\n");
  EXPECT_EQ(code_of([&] { io::read_csv_cloud(ragged); }), ErrorCode::InconsistentDimension);
  std::istringstream no_label("id,x0\na,1\nb,2\n");
  EXPECT_EQ(code_of([&] { io::read_csv_labeled(no_label); }), ErrorCode::MissingColumn);
}

TEST(Csv, QuotedFieldsAndCrlf) {
  std::istringstream in("id,x0\r\n\"a, \"\"b\"\"\",1\r\nplain,2\r\n");
  const auto c = io::read_csv_cloud(in);
  EXPECT_EQ(c.ids()[0], "a, \"b\"");
  EXPECT_EQ(c.data()(1, 0), 2.0);
}

TEST(Csv, GroupColumnSplitsClouds) {
  std::istringstream in("id,template,x0\nx,\"t 1\",1\ny,\"t 1\",2\nx,t2,3\ny,t2,4\n");
  const auto groups = io::read_csv_grouped(in, "template");
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].first, "t 1");
  EXPECT_EQ(groups[1].second.data()(1, 0), 4.0);
  EXPECT_EQ(groups[1].second.ids(), (std::vector<std::string>{"x", "y"}));
}

TEST(Csv, RoundTripIsExactAndKeepsOrder) {
  std::mt19937_64 rng(2);
  const PointCloud c({"z", "a,b", "m\"q"}, testing::random_matrix(3, 4, rng) * 1e-7);
  std::stringstream s;
  io::write_csv_cloud(c, s);
  const auto back = io::read_csv_cloud(s);
  EXPECT_EQ(back.ids(), c.ids());
  EXPECT_EQ(back.data(), c.data());
}

TEST(BlobSpecJson, RoundTripAndBroadcast) {
  const auto spec = blob_preset("noise-within");
  const auto back = io::blob_spec_from_json(io::to_json(spec));
  EXPECT_EQ(back.n_items, spec.n_items);
  EXPECT_EQ(back.noise, spec.noise);
  const auto j = Json::parse(R"({"n_dim":3,"n_items":[4,5],"mu1":[0,1],"sigma1":[1,1],
                                 "mu2":[0,1],"sigma2":[1,1],"noise":0.25})");
  EXPECT_EQ(io::blob_spec_from_json(j).noise, (std::vector<double>{0.25, 0.25}));
  const auto bad = Json::parse(R"({"n_dim":3,"n_items":[4,5],"mu1":[0],"sigma1":[1,1],
                                   "mu2":[0,1],"sigma2":[1,1],"noise":0})");
  EXPECT_EQ(code_of([&] { io::blob_spec_from_json(bad); }), ErrorCode::SpecShapeMismatch);
  EXPECT_EQ(code_of([&] { io::blob_spec_from_json(Json::parse(R"({"n_dim":3})")); }),
            ErrorCode::SpecShapeMismatch);
}

SimilarityCurve three_point_curve() {
  SimilarityCurve c;
  c.n_trials = 4;
  c.samples = {{1, 0.1, 0.3, 0.01, 0.05}, {2, 0.2, 0.4, 0.02, 0.1}, {5, 0.5, 1.0 / 3.0, 0.03, 0.3}};
  return c;
}

TEST(Reports, CurveCsv) {
  std::ostringstream out;
  io::write_report(three_point_curve(), io::ReportFormat::Csv, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "k,c,mean,std,baseline");
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Reports, JsonRoundTripWithin1e12) {
  const auto curve = three_point_curve();
  std::ostringstream out;
  io::write_report(curve, io::ReportFormat::Json, out, Json{{"seed", 0}});
  const auto j = Json::parse(out.str());
  EXPECT_EQ(j.begin().key(), "config");
  EXPECT_EQ(j["n_trials"], 4);
  ASSERT_EQ(j["samples"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = j["samples"][i];
    EXPECT_EQ(s["k"].get<std::size_t>(), curve.samples[i].k);
    EXPECT_NEAR(s["mean"].get<double>(), curve.samples[i].mean, 1e-12);
    EXPECT_NEAR(s["std"].get<double>(), curve.samples[i].std, 1e-12);
    EXPECT_NEAR(s["baseline"].get<double>(), curve.samples[i].baseline, 1e-12);
  }
}

TEST(Reports, CorrelationHasRhoAndPValue) {
  const auto rep = correlate("nngs", {{"a", 0.1, 0.2}, {"b", 0.5, 0.4}, {"c", 0.9, 0.95}, {"d", 0.3, 0.2}});
  std::ostringstream out;
  io::write_report(rep, io::ReportFormat::Json, out);
  const auto j = Json::parse(out.str());
  EXPECT_TRUE(j.contains("rho"));
  EXPECT_TRUE(j.contains("p_value"));
  EXPECT_NEAR(j["rho"].get<double>(), *rep.rho, 1e-12);
  std::ostringstream csv;
  io::write_report(rep, io::ReportFormat::Csv, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "name,similarity,accuracy");
}

TEST(Reports, MissingRhoIsNull) {
  const auto rep = correlate("nngs", {{"a", 0.1, 0.2}});
  std::ostringstream out;
  io::write_report(rep, io::ReportFormat::Json, out);
  const auto j = Json::parse(out.str());
  EXPECT_TRUE(j["rho"].is_null());
}

TEST(Reports, SimilarityReportCsvPerPoint) {
  std::mt19937_64 rng(3);
  const auto x = testing::random_cloud(6, 2, rng);
  const auto r = nngs(validate_paired(x, x), 2, Metric::minkowski(2));
  std::ostringstream out;
  io::write_report(r, io::ReportFormat::Csv, out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "id,jaccard,k,c,baseline");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST(Reports, SweepCsvNamesAxis) {
  const auto r = noise_sweep(20, 3, {1, 2}, {0, INFINITY}, 2, Seed{0});
  std::ostringstream out;
  io::write_report(r, io::ReportFormat::Csv, out);
  std::istringstream lines(out.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header, "axis,n,d,snr_db,k,c,mean,std,band_lo,band_hi,baseline,n_trials");
  EXPECT_EQ(first.substr(0, 15), "snr_db,20,3,0,1");
  std::ostringstream js;
  io::write_report(r, io::ReportFormat::Json, js);
  EXPECT_EQ(Json::parse(js.str())["entries"][1]["snr_db"], "inf");
}

TEST(Reports, NumbersHaveTwelveDigits) {
  EXPECT_EQ(io::format_double(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::num(1.0 / 3.0).dump(), "0.333333333333");
  EXPECT_TRUE(io::num(NAN).is_null());
}

}  // namespace
}  // namespace nngs
