#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairbound/core.hpp"

using namespace fairbound;

namespace {

std::vector<PredictionRecord> mixed_records() {
  // s=0: 2 of 5 positive -> a=.4; s=1: 3 of 4 positive -> b=.75; r=4/9
  std::vector<PredictionRecord> recs;
  for (int i = 0; i < 3; ++i) recs.push_back({0, 0, 0.1, std::nullopt});
  for (int i = 0; i < 2; ++i) recs.push_back({0, 1, 0.9, std::nullopt});
  for (int i = 0; i < 1; ++i) recs.push_back({1, 0, 0.2, std::nullopt});
  for (int i = 0; i < 3; ++i) recs.push_back({1, 1, 0.8, std::nullopt});
  return recs;
}

}  // namespace

TEST_CASE("base rates from records") {
  const auto rates = base_rates(mixed_records());
  CHECK(rates.r == doctest::Approx(4.0 / 9.0));
  CHECK(rates.a == doctest::Approx(0.4));
  CHECK(rates.b == doctest::Approx(0.75));
}

TEST_CASE("base rates require both classes in both groups") {
  auto recs = mixed_records();
  for (auto& r : recs) {
    if (r.s == 1) r.y = 1;  // s=1 group loses its negatives
  }
  CHECK_THROWS_AS(base_rates(recs), EmptyGroup);
  recs.clear();
  recs.push_back({0, 0, 0.0, std::nullopt});
  recs.push_back({0, 1, 1.0, std::nullopt});
  CHECK_THROWS_AS(base_rates(recs), EmptyGroup);  // no s=1 at all
}

TEST_CASE("base rates reject non-binary labels") {
  auto recs = mixed_records();
  recs.push_back({2, 0, 0.5, std::nullopt});
  CHECK_THROWS_AS(base_rates(recs), MalformedData);
}

TEST_CASE("rate clamping keeps rates inside the open interval") {
  const auto rates = clamp_rates({0.0, 1.0, 0.5});
  CHECK(rates.r == kRateClamp);
  CHECK(rates.a == 1.0 - kRateClamp);
  CHECK(rates.b == 0.5);
}

TEST_CASE("dataset validation reports structure and failures") {
  Dataset d;
  d.features = Eigen::MatrixXd::Random(6, 3);
  d.sensitive = {0, 0, 0, 1, 1, 1};
  d.targets.emplace_back("y", std::vector<int>{0, 1, 0, 1, 0, 1});
  const auto diag = validate_dataset(d);
  CHECK(diag.rows == 6);
  CHECK(diag.sensitive_counts == std::vector<long>{3, 3});
  REQUIRE(diag.target_counts.size() == 1);
  CHECK(diag.target_counts[0].second == std::vector<long>{3, 3});

  SUBCASE("non-finite feature names the row") {
    d.features(4, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
      validate_dataset(d);
      FAIL("expected MalformedData");
    } catch (const MalformedData& e) {
      CHECK(e.row() == 4);
    }
  }
  SUBCASE("single sensitive class rejected") {
    d.sensitive = {0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(validate_dataset(d), EmptyGroup);
  }
  SUBCASE("column length mismatch rejected") {
    d.sensitive.pop_back();
    CHECK_THROWS_AS(validate_dataset(d), MalformedData);
  }
  SUBCASE("single-class target rejected") {
    d.targets[0].second = {1, 1, 1, 1, 1, 1};
    CHECK_THROWS_AS(validate_dataset(d), EmptyGroup);
  }
}

TEST_CASE("dataset target lookup") {
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(2, 1);
  d.sensitive = {0, 1};
  d.targets.emplace_back("task", std::vector<int>{0, 1});
  CHECK(d.target("task")[1] == 1);
  CHECK_THROWS_AS(d.target("missing"), FairboundError);
}
