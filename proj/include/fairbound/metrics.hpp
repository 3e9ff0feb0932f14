#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairbound/core.hpp"

namespace fairbound {

// Discretization of the prediction score for the calibration metrics and
// MUC. Grid mode rounds scores onto a uniform B-point grid over [0,1]
// (B=101 is two-decimal rounding); distinct mode keys on exact values.
struct ScoreBinning {
  enum class Mode { UniformGrid, DistinctValues };
  Mode mode = Mode::UniformGrid;
  int grid_size = 101;

  void validate() const;
};

struct FairnessReport {
  double sp = 0, dopp = 0, dr = 0, dodds = 0;
  double dpc = 0, dnc = 0, dc = 0;
  double muc = 0;
  bool muc_defined = true;  // false when no score bin is shared by groups
  int muc_skipped_bins = 0;
  int bins_used = 0;
};

struct MucResult {
  double value = 0.0;
  bool no_shared_bins = false;
  int shared_bins = 0;
  int skipped_bins = 0;  // bins occupied by exactly one group
};

enum class FairnessNotion { SP, DOpp, DR, DOdds, DPC, DNC, DC };

const char* notion_name(FairnessNotion notion);

// 0.5 * (P(yhat=0|y=0) + P(yhat=1|y=1)). When hard predictions are absent
// the Bernoulli expectation form is used: 0.5*(E[1-score|y=0]+E[score|y=1]).
// `against_sensitive` scores the prediction against s instead of y.
double balanced_accuracy(const std::vector<PredictionRecord>& records,
                         bool against_sensitive = false);

double statistical_parity(const std::vector<PredictionRecord>& records);
double disparity_opportunity(const std::vector<PredictionRecord>& records);
double disparity_regret(const std::vector<PredictionRecord>& records);
double disparity_odds(const std::vector<PredictionRecord>& records);

struct CalibrationDisparities {
  double dpc = 0, dnc = 0, dc = 0;
  int bins_used = 0;
};
CalibrationDisparities calibration_disparities(
    const std::vector<PredictionRecord>& records,
    const ScoreBinning& binning = {});

MucResult muc(const std::vector<PredictionRecord>& records,
              const ScoreBinning& binning = {});

// Categorical generalization: each notion becomes the max over target
// classes and sensitive-class pairs. For binary S and Y this dispatches to
// the binary operation so the two paths agree exactly.
double categorical_fairness(const std::vector<PredictionRecord>& records,
                            FairnessNotion notion,
                            const ScoreBinning& binning = {});

// Empirical TVD between two samples on a shared uniform histogram.
// Dimension is capped at 4.
double tvd_histogram(const Eigen::MatrixXd& samples_a,
                     const Eigen::MatrixXd& samples_b, int bins_per_dim);

FairnessReport fairness_report(const std::vector<PredictionRecord>& records,
                               const ScoreBinning& binning = {});

}  // namespace fairbound
