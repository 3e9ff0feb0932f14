#pragma once

#include <Eigen/Dense>

#include "fairbound/errors.hpp"

namespace fairbound {

// Characteristic kernel for the two-sample regularizer. "shape" is the
// rational-quadratic exponent (only read for that family).
struct KernelSpec {
  enum class Family { Gaussian, RationalQuadratic };
  Family family = Family::RationalQuadratic;
  double lengthscale = 2.0 * 1.4142135623730951;  // 2*sqrt(2)
  double shape = 2.0;

  void validate() const;
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

// U-statistic estimator of squared MMD between the row-samples of X and Y;
// unbiased, may be negative. Requires at least 2 rows per side.
double mmd2_unbiased(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     const KernelSpec& spec);

// V-statistic (diagonal included, 1/m^2 and 1/n^2 normalizers); nonnegative.
double mmd2_biased(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                   const KernelSpec& spec);

// Unbiased estimate plus its gradient with respect to every sample
// coordinate, for backpropagation through an encoder.
struct Mmd2WithGrad {
  double value = 0.0;
  Eigen::MatrixXd grad_X;
  Eigen::MatrixXd grad_Y;
};
Mmd2WithGrad mmd2_unbiased_grad(const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y,
                                const KernelSpec& spec);

}  // namespace fairbound
