#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fairbound/mmd.hpp"

using namespace fairbound;

namespace {

KernelSpec gauss(double l) {
  return {KernelSpec::Family::Gaussian, l, 0.0};
}

KernelSpec rq(double l, double shape) {
  return {KernelSpec::Family::RationalQuadratic, l, shape};
}

Eigen::MatrixXd scalars(std::initializer_list<double> vals) {
  Eigen::MatrixXd m(static_cast<long>(vals.size()), 1);
  long i = 0;
  for (double v : vals) m(i++, 0) = v;
  return m;
}

}  // namespace

TEST_CASE("kernel values") {
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 2.0;
  y = x;
  CHECK(kernel_eval(gauss(1.0), x, y) == doctest::Approx(1.0));
  CHECK(kernel_eval(rq(1.0, 2.0), x, y) == doctest::Approx(1.0));
  y << 1.0, 3.0;  // distance 1
  CHECK(kernel_eval(gauss(1.0), x, y) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // large shape: rational quadratic converges to the Gaussian
  CHECK(std::abs(kernel_eval(rq(1.0, 1e6), x, y) -
                 kernel_eval(gauss(1.0), x, y)) < 1e-4);
  CHECK_THROWS_AS(kernel_eval(gauss(-1.0), x, y), FairboundError);
}

TEST_CASE("unbiased estimate hand evaluation") {
  const auto X = scalars({0.0, 0.0});
  const auto Y = scalars({1.0, 1.0});
  const double expected = 1.0 + 1.0 - 2.0 * std::exp(-0.5);
  CHECK(mmd2_unbiased(X, Y, gauss(1.0)) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(mmd2_unbiased(X, X, gauss(1.0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(mmd2_unbiased(scalars({0.0}), Y, gauss(1.0)), TooFewSamples);
}

TEST_CASE("symmetry") {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(6, 3), Y(9, 3);
  for (long i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  for (long i = 0; i < Y.size(); ++i) Y.data()[i] = g(rng);
  const auto spec = rq(2.0, 2.0);
  // summation order differs when the arguments swap, so exact equality is
  // not guaranteed; 1e-15 relative is
  CHECK(mmd2_unbiased(X, Y, spec) ==
        doctest::Approx(mmd2_unbiased(Y, X, spec)).epsilon(1e-13));
}

TEST_CASE("biased estimate hand evaluation and nonnegativity") {
  const auto X = scalars({0.0, 0.0});
  const auto Y = scalars({1.0, 1.0});
  // kxx = kyy = 1; kxy = e^{-1/2}; V-statistic: 1 + 1 - 2 e^{-1/2}
  const double expected = 2.0 - 2.0 * std::exp(-0.5);
  CHECK(mmd2_biased(X, Y, gauss(1.0)) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(mmd2_biased(X, X, gauss(1.0)) == doctest::Approx(0.0));
}

TEST_CASE("unbiasedness and upward bias of the V-statistic") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  const auto spec = rq(1.0, 2.0);
  const int resamples = 200;
  double mean_u = 0.0, m2_u = 0.0, mean_gap = 0.0;
  for (int t = 0; t < resamples; ++t) {
    Eigen::MatrixXd X(8, 1), Y(8, 1);
    for (long i = 0; i < 8; ++i) {
      X(i, 0) = g(rng);
      Y(i, 0) = g(rng);
    }
    const double u = mmd2_unbiased(X, Y, spec);
    const double b = mmd2_biased(X, Y, spec);
    mean_u += u;
    m2_u += u * u;
    mean_gap += b - u;
  }
  mean_u /= resamples;
  mean_gap /= resamples;
  const double var = m2_u / resamples - mean_u * mean_u;
  const double se = std::sqrt(var / resamples);
  CHECK(std::abs(mean_u) < 3.0 * se);  // unbiased around 0
  CHECK(mean_gap > 0.0);               // V-statistic biased upward
}

TEST_CASE("estimators converge to each other at large samples") {
  std::mt19937 rng(17);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(2000, 1), Y(2000, 1);
  for (long i = 0; i < 2000; ++i) {
    X(i, 0) = g(rng);
    Y(i, 0) = 0.5 + g(rng);
  }
  const auto spec = rq(1.0, 2.0);
  CHECK(std::abs(mmd2_unbiased(X, Y, spec) - mmd2_biased(X, Y, spec)) < 0.01);
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937 rng(23);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(4, 2), Y(5, 2);
  for (long i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  for (long i = 0; i < Y.size(); ++i) Y.data()[i] = g(rng);
  for (const auto& spec : {gauss(1.3), rq(0.8, 2.0)}) {
    const auto res = mmd2_unbiased_grad(X, Y, spec);
    CHECK(res.value ==
          doctest::Approx(mmd2_unbiased(X, Y, spec)).epsilon(1e-12));
    const double h = 1e-6;
    for (long i = 0; i < X.rows(); ++i) {
      for (long j = 0; j < X.cols(); ++j) {
        Eigen::MatrixXd Xp = X, Xm = X;
        Xp(i, j) += h;
        Xm(i, j) -= h;
        const double fd =
            (mmd2_unbiased(Xp, Y, spec) - mmd2_unbiased(Xm, Y, spec)) /
            (2 * h);
        CHECK(res.grad_X(i, j) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      }
    }
    for (long j = 0; j < Y.cols(); ++j) {
      Eigen::MatrixXd Yp = Y, Ym = Y;
      Yp(2, j) += h;
      Ym(2, j) -= h;
      const double fd =
          (mmd2_unbiased(X, Yp, spec) - mmd2_unbiased(X, Ym, spec)) / (2 * h);
      CHECK(res.grad_Y(2, j) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}
