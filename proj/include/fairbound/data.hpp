#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairbound/core.hpp"

namespace fairbound {

enum class ColumnRole {
  FeatureNumeric,
  FeatureCategorical,
  Sensitive,
  Target,
  Ignore,
};

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::Ignore;
};

struct ColumnSchema {
  std::vector<ColumnSpec> columns;

  void validate() const;  // exactly one sensitive, >= 1 target
};

// Parses a role string from a config file ("numeric", "categorical",
// "sensitive", "target", "ignore").
ColumnRole parse_column_role(const std::string& text);

struct CsvLoadResult {
  Dataset dataset;
  // Class-label <-> index mapping for sensitive/target/categorical columns.
  std::map<std::string, std::vector<std::string>> category_values;
};

// RFC-4180 CSV with a header row. Categorical features are one-hot encoded;
// numeric features standardized to zero mean / unit variance. `stats_rows`
// limits the rows used for the standardization statistics (the training
// split, assumed to be a prefix); <= 0 means all rows.
CsvLoadResult load_csv(const std::string& path, const ColumnSchema& schema,
                       long stats_rows = -1);

// Prediction file: columns s, y, score and optionally yhat (hard labels).
// Throws MalformedData naming any missing required column.
std::vector<PredictionRecord> load_predictions_csv(const std::string& path);

// Discrete analog of the MUC pathology: per-group representation marginals
// identical (population alpha = 0) yet one shared score bin carries fully
// disparate outcomes (MUC = 1) while the score nearly determines y.
struct MucSynth {
  std::vector<PredictionRecord> records;  // s, y, score per row
  Eigen::VectorXd representation;         // 1-d, grid over [0,1]
};
MucSynth synth_muc_counterexample(long n, double delta, unsigned seed);

// S ~ Bernoulli(r); T1 correlated with S via P(T1=1|S=0)=p1, P(T1=1|S=1)=p2;
// T2, T3 ~ Bernoulli(.5) independent. Features: noisy one-hot embeddings of
// the four attributes plus 8 Gaussian nuisance dimensions (sigma = .1).
Dataset synth_correlated(long n, double p1, double p2, double r,
                         unsigned seed);

// a = b = common_rate; the extra representation column is identically
// distributed across groups yet pins down y (y + uniform noise on [0,.4]).
struct ExactSynth {
  Dataset dataset;
  Eigen::VectorXd representation;
};
ExactSynth synth_exact(long n, double r, double common_rate, unsigned seed);

}  // namespace fairbound
