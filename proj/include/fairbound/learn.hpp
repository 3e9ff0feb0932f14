#pragma once

#include "fairbound/core.hpp"
#include "fairbound/mmd.hpp"
#include "fairbound/nn.hpp"

namespace fairbound {

struct TrainConfig {
  long rep_dim = 16;
  KernelSpec kernel;  // rational quadratic, shape 2, l = 2*sqrt(2)
  long rounds = 8;
  long epochs_per_round = 4;
  long batch_size = 256;
  LrSchedule lr{0.05, {}};
  double lambda_init = 1.0;
  double epsilon = 0.0;
  double lambda_min = 1e-3;
  double lambda_max = 1e6;
  bool seven_net = false;  // otherwise 3 hidden layers of width 64
  unsigned seed = 0;

  void validate() const;
};

struct RoundStats {
  long round = 0;
  double pretext_loss = 0.0;
  double mmd2 = 0.0;
  double lambda = 0.0;
};

struct EncoderModel {
  NetworkSpec enc_spec, dec_spec;
  NetworkParams enc, dec;
  std::vector<RoundStats> history;
};

// Coarse-to-fine line search over the regularization weight: multiply while
// the constraint is violated, divide once satisfied, shrinking the factor on
// each flip.
struct RegulatorState {
  double factor = 10.0;
  int prev_sign = 0;  // sign of (mmd2 - epsilon) last round; 0 = none yet
};
double regulator_update(double lambda, double mmd2_value, double epsilon,
                        RegulatorState& state, double lambda_min,
                        double lambda_max);

// Two-player game: SGD on reconstruction + lambda * MMD^2 (learner), lambda
// line search on the full-dataset MMD^2 at round end (regulator). Batches
// are drawn stratified by sensitive group so the unbiased estimator is
// always defined.
EncoderModel train_fair_encoder(const Dataset& dataset,
                                const TrainConfig& config);

Eigen::MatrixXd encode(const EncoderModel& model, const Eigen::MatrixXd& X);

void write_history_csv(const std::string& path,
                       const std::vector<RoundStats>& history);

struct CoefficientEstimate {
  double coefficient = 0.0;  // alpha_hat or beta_hat
  double ba = 0.0;           // held-out balanced accuracy of the probe
};

struct ProbeConfig {
  long epochs = 60;
  long batch_size = 128;
  LrSchedule lr{0.05, {40}};
  unsigned seed = 0;
};

// Trains an adversary on a seeded 50/50 split with class-balanced loss;
// alpha_hat = clamp(2*BA - 1, 0, 1).
CoefficientEstimate estimate_alpha(const Eigen::MatrixXd& representations,
                                   const std::vector<int>& sensitive,
                                   const ProbeConfig& probe = {});

// Task-classifier analog; beta_hat = clamp(2*(1 - BA), 0, 1).
CoefficientEstimate estimate_beta(const Eigen::MatrixXd& representations,
                                  const std::vector<int>& labels,
                                  const ProbeConfig& probe = {});

// Balanced accuracy of a freshly trained probe classifier on the held-out
// half, plus its hard predictions on ALL rows (used for downstream metric
// evaluation). Shared machinery of the two estimators.
struct ProbeResult {
  double test_ba = 0.0;
  std::vector<int> hard;          // 0/1 per row
  std::vector<double> scores;     // sigmoid outputs per row
  std::vector<char> in_test;      // split membership per row
};
ProbeResult train_probe(const Eigen::MatrixXd& representations,
                        const std::vector<int>& labels,
                        const ProbeConfig& probe);

}  // namespace fairbound
