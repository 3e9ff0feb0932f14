#pragma once

#include <vector>

#include "fairbound/core.hpp"
#include "fairbound/lp.hpp"
#include "fairbound/metrics.hpp"

namespace fairbound {

// Four subpopulation distributions of a discrete representation, indexed by
// (sensitive group, target class). Atom count is free: the reduced programs
// use 8 (3-bit) or 16 (4-bit) atoms, the brute-force oracle any size.
struct SubpopQuad {
  Eigen::VectorXd z00;  // s=0, y=0
  Eigen::VectorXd z01;  // s=0, y=1
  Eigen::VectorXd z10;  // s=1, y=0
  Eigen::VectorXd z11;  // s=1, y=1
  BaseRates rates;

  void validate() const;
};

struct OracleResult {
  double alpha_prime = 0.0;
  double beta_prime = 0.0;
  double value = 0.0;
};

struct GuaranteeReport {
  double alpha = 0.0, beta = 0.0;
  BaseRates rates;
  double sp = 0, dopp = 0, dr = 0, dodds = 0, dpc = 0, dnc = 0, dc = 0;
  double calibration_lower = 0.0;
  double tradeoff_beta_lower = 0.0;
  bool monotone_ok = true;  // self-check: bounds at (alpha+.01, beta+.01)
                            // did not decrease

  double bound(FairnessNotion notion) const;
};

struct BoundCurve {
  struct Row {
    double alpha, beta, value;
  };
  std::vector<Row> rows;
  double slope_estimate = 0.0;  // max over diagonal of guarantee(t,t)/t
};

double sp_guarantee(double alpha);

// Reduced program over 3-bit atoms (i,j,k), h = i. One program per sign
// assignment of the absolute values in the objective: 2 for DOpp/DR, 4 for
// DOdds. The guarantee is the max optimum over the set.
std::vector<LinearProgram> build_rp1(FairnessNotion obj, const BaseRates& rates,
                                     double alpha, double beta);

// Reduced program over 4-bit atoms (i,j,k,l); the calibration objectives are
// linear outright, so a single program suffices.
LinearProgram build_rp2(FairnessNotion obj, const BaseRates& rates,
                        double alpha, double beta);

// Tight upper bound on the notion over all representations with fairness
// alpha and discriminativeness beta at the given base rates.
double guarantee(FairnessNotion obj, const BaseRates& rates, double alpha,
                 double beta, const SimplexOptions& opts = {});

// Brute-force best-predictor objective for a concrete quad, with the quad's
// own (alpha', beta'). Used to certify the LP bounds from below.
OracleResult oracle_objective(FairnessNotion obj, const SubpopQuad& quad);

double calibration_lower_bound(const BaseRates& rates);  // |a-b|/2

// Smallest beta compatible with fairness alpha at the given rates.
double tradeoff_beta_lower_bound(const BaseRates& rates, double alpha);

GuaranteeReport guarantee_report(const BaseRates& rates, double alpha,
                                 double beta);

BoundCurve bound_curve(FairnessNotion obj, const BaseRates& rates,
                       const std::vector<std::pair<double, double>>& grid);

}  // namespace fairbound
