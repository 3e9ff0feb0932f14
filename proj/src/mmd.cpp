#include "fairbound/mmd.hpp"

#include <cmath>

namespace fairbound {

void KernelSpec::validate() const {
  if (!(lengthscale > 0)) throw FairboundError("kernel lengthscale must be > 0");
  if (family == Family::RationalQuadratic && !(shape > 0)) {
    throw FairboundError("rational-quadratic shape must be > 0");
  }
}

namespace {

double kernel_sq(const KernelSpec& spec, double d2) {
  const double l2 = spec.lengthscale * spec.lengthscale;
  if (spec.family == KernelSpec::Family::Gaussian) {
    return std::exp(-d2 / (2.0 * l2));
  }
  return std::pow(1.0 + d2 / (2.0 * spec.shape * l2), -spec.shape);
}

// d k / d x = scale * (y - x); shared by both families.
double kernel_grad_scale(const KernelSpec& spec, double d2) {
  const double l2 = spec.lengthscale * spec.lengthscale;
  if (spec.family == KernelSpec::Family::Gaussian) {
    return std::exp(-d2 / (2.0 * l2)) / l2;
  }
  const double base = 1.0 + d2 / (2.0 * spec.shape * l2);
  return std::pow(base, -spec.shape - 1.0) / l2;
}

void check_dims(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.cols() != Y.cols()) throw FairboundError("sample dimensions differ");
}

double sqdist(const Eigen::MatrixXd& A, long i, const Eigen::MatrixXd& B,
              long j) {
  return (A.row(i) - B.row(j)).squaredNorm();
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  spec.validate();
  if (x.size() != y.size()) throw FairboundError("kernel input dimensions differ");
  return kernel_sq(spec, (x - y).squaredNorm());
}

double mmd2_unbiased(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     const KernelSpec& spec) {
  spec.validate();
  check_dims(X, Y);
  const long m = X.rows(), n = Y.rows();
  if (m < 2 || n < 2) {
    throw TooFewSamples("unbiased MMD^2 needs at least 2 samples per side");
  }
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j)
      if (i != j) kxx += kernel_sq(spec, sqdist(X, i, X, j));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      if (i != j) kyy += kernel_sq(spec, sqdist(Y, i, Y, j));
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) kxy += kernel_sq(spec, sqdist(X, i, Y, j));
  return kxx / (static_cast<double>(m) * (m - 1)) +
         kyy / (static_cast<double>(n) * (n - 1)) -
         2.0 * kxy / (static_cast<double>(m) * n);
}

double mmd2_biased(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                   const KernelSpec& spec) {
  spec.validate();
  check_dims(X, Y);
  const long m = X.rows(), n = Y.rows();
  if (m < 1 || n < 1) throw TooFewSamples("biased MMD^2 needs samples on both sides");
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j) kxx += kernel_sq(spec, sqdist(X, i, X, j));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) kyy += kernel_sq(spec, sqdist(Y, i, Y, j));
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) kxy += kernel_sq(spec, sqdist(X, i, Y, j));
  const double v = kxx / (static_cast<double>(m) * m) +
                   kyy / (static_cast<double>(n) * n) -
                   2.0 * kxy / (static_cast<double>(m) * n);
  return v < 0.0 ? 0.0 : v;  // clip roundoff; the V-statistic is >= 0
}

Mmd2WithGrad mmd2_unbiased_grad(const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y,
                                const KernelSpec& spec) {
  spec.validate();
  check_dims(X, Y);
  const long m = X.rows(), n = Y.rows();
  if (m < 2 || n < 2) {
    throw TooFewSamples("unbiased MMD^2 needs at least 2 samples per side");
  }
  Mmd2WithGrad out;
  out.grad_X = Eigen::MatrixXd::Zero(m, X.cols());
  out.grad_Y = Eigen::MatrixXd::Zero(n, Y.cols());

  const double wxx = 1.0 / (static_cast<double>(m) * (m - 1));
  const double wyy = 1.0 / (static_cast<double>(n) * (n - 1));
  const double wxy = 2.0 / (static_cast<double>(m) * n);

  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d2 = sqdist(X, i, X, j);
      out.value += wxx * kernel_sq(spec, d2);
      // d/dx_i of k(x_i,x_j) + k(x_j,x_i) handled by symmetric double count
      out.grad_X.row(i) +=
          wxx * kernel_grad_scale(spec, d2) * (X.row(j) - X.row(i)) * 2.0;
    }
  }
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d2 = sqdist(Y, i, Y, j);
      out.value += wyy * kernel_sq(spec, d2);
      out.grad_Y.row(i) +=
          wyy * kernel_grad_scale(spec, d2) * (Y.row(j) - Y.row(i)) * 2.0;
    }
  }
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) {
      const double d2 = sqdist(X, i, Y, j);
      out.value -= wxy * kernel_sq(spec, d2);
      const double g = kernel_grad_scale(spec, d2);
      out.grad_X.row(i) -= wxy * g * (Y.row(j) - X.row(i));
      out.grad_Y.row(j) -= wxy * g * (X.row(i) - Y.row(j));
    }
  }
  return out;
}

}  // namespace fairbound
