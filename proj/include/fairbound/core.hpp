#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairbound/errors.hpp"

namespace fairbound {

// One evaluation unit: sensitive class, target class, prediction score in
// [0,1] and an optional sampled hard prediction.
struct PredictionRecord {
  int s = 0;
  int y = 0;
  double score = 0.0;
  std::optional<int> hard;
};

// Population base rates: r = P(S=1), a = P(Y=1|S=0), b = P(Y=1|S=1).
// All strictly inside (0,1); see clamp_rates().
struct BaseRates {
  double r = 0.5;
  double a = 0.5;
  double b = 0.5;
};

// Bound formulas divide by expressions that vanish at {0,1}; rates are
// clamped into [kRateClamp, 1-kRateClamp] before any bound is built.
inline constexpr double kRateClamp = 1e-9;

BaseRates clamp_rates(BaseRates rates);

// In-memory tabular dataset: n x d feature matrix, one sensitive label per
// row and one or more named target label columns.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> sensitive;
  std::vector<std::pair<std::string, std::vector<int>>> targets;
  std::vector<std::string> feature_names;

  long rows() const { return features.rows(); }
  const std::vector<int>& target(const std::string& name) const;
};

struct DatasetDiagnostics {
  long rows = 0;
  std::vector<long> sensitive_counts;
  std::vector<std::pair<std::string, std::vector<long>>> target_counts;
  std::vector<double> feature_min;
  std::vector<double> feature_max;
};

// Empirical base rates from records. Requires binary s and y, both sensitive
// classes present and both target classes present within each sensitive
// class; throws EmptyGroup otherwise.
BaseRates base_rates(const std::vector<PredictionRecord>& records);
BaseRates base_rates(const Dataset& d, const std::string& target_name);

// Structural checks; throws MalformedData on NaN/Inf features (naming the
// row) and EmptyGroup on empty sensitive or target classes.
DatasetDiagnostics validate_dataset(const Dataset& d);

}  // namespace fairbound
