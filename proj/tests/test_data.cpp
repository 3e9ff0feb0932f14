#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fairbound/data.hpp"
#include "fairbound/metrics.hpp"

using namespace fairbound;

namespace {

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

ColumnSchema basic_schema() {
  ColumnSchema schema;
  schema.columns = {{"age", ColumnRole::FeatureNumeric},
                    {"job", ColumnRole::FeatureCategorical},
                    {"sex", ColumnRole::Sensitive},
                    {"hired", ColumnRole::Target}};
  return schema;
}

}  // namespace

TEST_CASE("csv load with one-hot and standardization") {
  TempFile f("data_test_basic.csv",
             "age,job,sex,hired\n"
             "30,clerk,0,1\n"
             "40,tech,1,0\n"
             "50,clerk,0,1\n"
             "40,tech,1,0\n");
  const auto loaded = load_csv(f.path, basic_schema());
  const Dataset& d = loaded.dataset;
  CHECK(d.rows() == 4);
  CHECK(d.features.cols() == 3);  // 1 numeric + 2 one-hot
  CHECK(d.features.col(0).mean() == doctest::Approx(0.0).scale(1.0));
  CHECK(d.features(0, 1) == 1.0);  // clerk
  CHECK(d.features(1, 2) == 1.0);  // tech
  CHECK(d.sensitive == std::vector<int>{0, 1, 0, 1});
  CHECK(d.target("hired") == std::vector<int>{1, 0, 1, 0});
  CHECK(loaded.category_values.at("job") ==
        std::vector<std::string>{"clerk", "tech"});
}

TEST_CASE("numeric class labels keep their own order") {
  TempFile f("data_test_order.csv",
             "age,job,sex,hired\n"
             "30,a,1,1\n"  // "1" appears first in both class columns
             "40,b,0,0\n");
  const auto loaded = load_csv(f.path, basic_schema());
  CHECK(loaded.dataset.sensitive == std::vector<int>{1, 0});
  CHECK(loaded.dataset.target("hired") == std::vector<int>{1, 0});
}

TEST_CASE("quoted fields and embedded separators") {
  TempFile f("data_test_quoted.csv",
             "age,job,sex,hired\n"
             "30,\"sales, retail\",0,1\n"
             "40,\"he said \"\"hi\"\"\",1,0\n");
  const auto loaded = load_csv(f.path, basic_schema());
  CHECK(loaded.category_values.at("job")[0] == "sales, retail");
  CHECK(loaded.category_values.at("job")[1] == "he said \"hi\"");
}

TEST_CASE("missing values and schema mismatches are reported by line") {
  TempFile missing("data_test_missing.csv",
                   "age,job,sex,hired\n30,clerk,0,1\n,tech,1,0\n");
  try {
    load_csv(missing.path, basic_schema());
    FAIL("expected MalformedData");
  } catch (const MalformedData& e) {
    CHECK(e.row() == 3);  // 1-based file line
  }
  TempFile header("data_test_header.csv", "age,job,sex\n30,clerk,0\n");
  CHECK_THROWS_AS(load_csv(header.path, basic_schema()), MalformedData);
  ColumnSchema no_sensitive;
  no_sensitive.columns = {{"age", ColumnRole::FeatureNumeric},
                          {"hired", ColumnRole::Target}};
  CHECK_THROWS_AS(load_csv("irrelevant.csv", no_sensitive), FairboundError);
}

TEST_CASE("standardization statistics restricted to the training prefix") {
  TempFile f("data_test_stats.csv",
             "age,job,sex,hired\n"
             "10,a,0,0\n20,a,1,1\n1000,b,0,1\n2000,b,1,0\n");
  const auto loaded = load_csv(f.path, basic_schema(), 2);
  // mean/std from rows {10, 20}: mean 15, sd 5
  CHECK(loaded.dataset.features(0, 0) == doctest::Approx(-1.0));
  CHECK(loaded.dataset.features(1, 0) == doctest::Approx(1.0));
  CHECK(loaded.dataset.features(2, 0) == doctest::Approx(197.0));
}

TEST_CASE("predictions csv loader") {
  TempFile f("data_test_preds.csv",
             "s,y,score,yhat\n0,1,0.9,1\n1,0,0.2,0\n");
  const auto recs = load_predictions_csv(f.path);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].score == 0.9);
  CHECK(recs[0].hard == 1);
  TempFile noscore("data_test_noscore.csv", "s,y\n0,1\n");
  try {
    load_predictions_csv(noscore.path);
    FAIL("expected MalformedData");
  } catch (const MalformedData& e) {
    CHECK(std::string(e.what()).find("score") != std::string::npos);
  }
}

TEST_CASE("muc generator population properties") {
  const auto out = synth_muc_counterexample(50000, 0.01, 77);
  CHECK(muc(out.records).value == doctest::Approx(1.0));
  CHECK(balanced_accuracy(out.records) >= 0.99);

  // per-group representation marginals should be indistinguishable
  long n0 = 0;
  for (const auto& r : out.records) n0 += r.s == 0 ? 1 : 0;
  Eigen::MatrixXd z0(n0, 1), z1(out.representation.size() - n0, 1);
  long i0 = 0, i1 = 0;
  for (long i = 0; i < out.representation.size(); ++i) {
    if (out.records[static_cast<size_t>(i)].s == 0) {
      z0(i0++, 0) = out.representation(i);
    } else {
      z1(i1++, 0) = out.representation(i);
    }
  }
  CHECK(tvd_histogram(z0, z1, 20) <= 0.02);
  CHECK_THROWS_AS(synth_muc_counterexample(50, 0.01, 0), FairboundError);
  CHECK_THROWS_AS(synth_muc_counterexample(1000, 0.5, 0), FairboundError);
}

TEST_CASE("correlated generator reproduces requested rates") {
  const long n = 10000;
  const Dataset d = synth_correlated(n, 0.7, 0.3, 0.4, 99);
  CHECK(d.features.cols() == 16);
  const BaseRates rates = base_rates(d, "t1");
  const double se_r = std::sqrt(0.4 * 0.6 / n);
  CHECK(std::abs(rates.r - 0.4) <= 3 * se_r);
  CHECK(std::abs(rates.a - 0.7) <= 3 * std::sqrt(0.7 * 0.3 / (n * 0.6)));
  CHECK(std::abs(rates.b - 0.3) <= 3 * std::sqrt(0.3 * 0.7 / (n * 0.4)));

  // uncorrelated setting: a and b agree within sampling noise
  const Dataset u = synth_correlated(n, 0.5, 0.5, 0.5, 13);
  const BaseRates ur = base_rates(u, "t1");
  CHECK(std::abs(ur.a - ur.b) <= 6 * std::sqrt(0.25 / (n / 2.0)));
  // seed determinism
  const Dataset again = synth_correlated(100, 0.7, 0.3, 0.4, 99);
  const Dataset ref = synth_correlated(100, 0.7, 0.3, 0.4, 99);
  CHECK((again.features - ref.features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extreme correlation pins the target to the group") {
  // p1 -> 1, p2 -> 0 under p1 + p2 = 1: T1 = 1 - S almost surely
  const Dataset d = synth_correlated(2000, 1.0 - 1e-12, 1e-12, 0.5, 7);
  const auto& t1 = d.target("t1");
  for (long i = 0; i < d.rows(); ++i) {
    CHECK(t1[static_cast<size_t>(i)] == 1 - d.sensitive[static_cast<size_t>(i)]);
  }
}

TEST_CASE("exact generator yields fair yet informative representation") {
  const auto out = synth_exact(100000, 0.5, 0.4, 3);
  const auto& y = out.dataset.target("y");
  // downstream threshold predictor on the representation column
  std::vector<PredictionRecord> recs;
  for (long i = 0; i < out.dataset.rows(); ++i) {
    const int pred = out.representation(i) > 0.7 ? 1 : 0;
    recs.push_back({out.dataset.sensitive[static_cast<size_t>(i)],
                    y[static_cast<size_t>(i)], static_cast<double>(pred),
                    pred});
  }
  const auto rep = fairness_report(recs, {});
  CHECK(rep.sp <= 0.02);
  CHECK(rep.dopp <= 0.02);
  CHECK(rep.dr <= 0.02);
  CHECK(rep.dodds <= 0.02);
  CHECK(rep.dpc <= 0.02);
  CHECK(rep.dnc <= 0.02);
  CHECK(rep.dc <= 0.02);
  CHECK(balanced_accuracy(recs) == doctest::Approx(1.0));

  // swapping group labels leaves the metrics unchanged
  auto swapped = recs;
  for (auto& r : swapped) r.s = 1 - r.s;
  const auto rep2 = fairness_report(swapped, {});
  CHECK(rep2.sp == doctest::Approx(rep.sp));
  CHECK(rep2.dodds == doctest::Approx(rep.dodds));
  CHECK(rep2.dc == doctest::Approx(rep.dc));
}
