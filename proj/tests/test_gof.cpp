#include <doctest.h>

#include <cmath>
#include <vector>

#include "loglin/errors.hpp"
#include "loglin/gof.hpp"
#include "loglin/rng.hpp"

using namespace loglin;

namespace {

// Quadrature oracle for the central chi-square CDF, independent of the
// incomplete-gamma implementation. For k = 1 the integrable singularity at
// zero is removed with the substitution x = t^2.
double chi2_density(double x, double k) {
  return std::exp((0.5 * k - 1.0) * std::log(x) - 0.5 * x -
                  0.5 * k * std::log(2.0) - std::lgamma(0.5 * k));
}

double simpson(double (*f)(double, double), double a, double b, double k,
               int n) {
  const double h = (b - a) / n;
  double s = f(a, k) + f(b, k);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h, k);
  return s * h / 3.0;
}

double sub_density(double t, double k) {
  // chi2_1 CDF integrand after x = t^2
  return 2.0 * t * chi2_density(t * t, k);
}

double cdf_oracle(double x, double k) {
  if (x <= 0.0) return 0.0;
  if (k == 1.0) return simpson(sub_density, 1e-12, std::sqrt(x), k, 20000);
  return simpson(chi2_density, 1e-300, x, k, 20000);
}

double quantile_oracle(double p, double k) {
  double lo = 0.0, hi = 400.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf_oracle(mid, k) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("chi-square quantiles match a quadrature oracle") {
  CHECK(chi2_quantile(0.95, 2) ==
        doctest::Approx(quantile_oracle(0.95, 2)).epsilon(1e-7));
  CHECK(chi2_quantile(0.95, 1) ==
        doctest::Approx(quantile_oracle(0.95, 1)).epsilon(1e-7));
  CHECK(chi2_quantile(0.95, 2) == doctest::Approx(5.991464547).epsilon(1e-8));
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.841458821).epsilon(1e-8));
  CHECK(chi2_quantile(0.80, 5) ==
        doctest::Approx(quantile_oracle(0.80, 5)).epsilon(1e-7));
}

TEST_CASE("chi-square CDF endpoints") {
  CHECK(chi2_cdf(0.0, 3) == 0.0);
  CHECK(chi2_cdf(-1.0, 3) == 0.0);
  CHECK(chi2_cdf(1e4, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quantile and CDF round-trip across df and levels") {
  for (int k = 1; k <= 20; ++k)
    for (double p : {0.5, 0.9, 0.95, 0.99}) {
      const double q = chi2_quantile(p, k);
      CHECK(std::abs(chi2_cdf(q, k) - p) < 1e-10);
    }
}

TEST_CASE("pearson statistic on the published 2x2 tables") {
  // independence fit is the margins product; oracle computed directly
  auto fitted_indep = [](const std::vector<double>& y) {
    const double n = y[0] + y[1] + y[2] + y[3];
    const double r0 = y[0] + y[1], r1 = y[2] + y[3];
    const double c0 = y[0] + y[2], c1 = y[1] + y[3];
    return std::vector<double>{r0 * c0 / n, r0 * c1 / n, r1 * c0 / n,
                               r1 * c1 / n};
  };
  std::vector<double> y1 = {1, 9, 9, 33};
  std::vector<double> y2 = {3, 7, 7, 35};
  CHECK(pearson_x2(y1, fitted_indep(y1)) ==
        doctest::Approx(0.68).epsilon(0.015));
  CHECK(pearson_x2(y2, fitted_indep(y2)) ==
        doctest::Approx(0.92).epsilon(0.01));
  CHECK(pearson_x2(y1, y1) == 0.0);
}

TEST_CASE("vaccine study statistics from the closed-form fit") {
  const double th0 = 308.0 / 428.0, th1 = 120.0 / 428.0;
  std::vector<double> y = {80, 12, 44, 64};
  std::vector<double> yhat = {200 * th0 * th0 * th0, 200 * th0 * th0 * th1,
                              200 * th0 * th1, 200 * th1};
  CHECK(pearson_x2(y, yhat) == doctest::Approx(11.85).epsilon(0.001));
  CHECK(deviance_g2(y, yhat) == doctest::Approx(14.65).epsilon(0.001));
  GofReport rep = gof_report(y, yhat, 2);
  CHECK(rep.phi == doctest::Approx(rep.x2 / 200.0));
  CHECK(rep.w == doctest::Approx(std::sqrt(rep.phi)));
  CHECK(rep.p_value == doctest::Approx(1.0 - chi2_cdf(rep.x2, 2)));
}

TEST_CASE("deviance keeps the linear correction term") {
  std::vector<double> y = {2.0};
  std::vector<double> yhat = {1.0};
  CHECK(deviance_g2(y, yhat) ==
        doctest::Approx(2.0 * (2.0 * std::log(2.0) - 1.0)).epsilon(1e-12));
  CHECK(deviance_g2(yhat, yhat) == 0.0);
  // 0 log 0 = 0
  std::vector<double> yz = {0.0, 4.0};
  std::vector<double> yhz = {1.0, 3.0};
  CHECK(std::isfinite(deviance_g2(yz, yhz)));
}

TEST_CASE("noncentrality and effect size") {
  CHECK(noncentrality(0.68, 52) == doctest::Approx(0.68 / 52.0));
  CHECK(noncentrality(0.92, 52) == doctest::Approx(0.92 / 52.0));
  CHECK(noncentrality(0.0, 10) == 0.0);
}

TEST_CASE("noncentral chi-square degenerates to the central one") {
  for (double x : {0.5, 2.0, 5.99, 20.0})
    for (double k : {1.0, 2.0, 7.0})
      CHECK(noncentral_chi2_cdf(x, k, 0.0) ==
            doctest::Approx(chi2_cdf(x, k)).epsilon(1e-12));
}

TEST_CASE("noncentral chi-square monotonicity") {
  for (double k : {1.0, 2.0, 5.0}) {
    double prev = 1.0;
    for (double lam : {0.0, 0.5, 1.0, 2.0, 5.0, 11.85, 30.0}) {
      const double v = noncentral_chi2_cdf(5.99, k, lam);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
    double prev_x = 0.0;
    for (double x : {0.1, 1.0, 3.0, 6.0, 12.0, 30.0}) {
      const double v = noncentral_chi2_cdf(x, k, 2.0);
      CHECK(v >= prev_x - 1e-12);
      prev_x = v;
    }
  }
}

TEST_CASE("noncentral chi-square against a Monte-Carlo oracle") {
  // k = 2, lambda = 1: (Z1 + 1)^2 + Z2^2
  RngStream rng(31337, 0);
  const long n = 1000000;
  const double x = 5.991464547;
  long below = 0;
  for (long i = 0; i < n; ++i) {
    const double z1 = rng.next_normal() + 1.0;
    const double z2 = rng.next_normal();
    if (z1 * z1 + z2 * z2 <= x) ++below;
  }
  const double mc = static_cast<double>(below) / n;
  const double se = std::sqrt(mc * (1.0 - mc) / n);
  const double v = noncentral_chi2_cdf(x, 2, 1.0);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(std::abs(v - mc) < 3.0 * se);
}

TEST_CASE("classical power properties and published values") {
  CHECK(classical_power(0.0, 2, 0.05) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(classical_power(0.0, 1, 0.10) == doctest::Approx(0.10).epsilon(1e-9));
  double prev = 0.0;
  for (double lam : {0.1, 0.5, 1.0, 3.0, 11.85, 25.0}) {
    const double p = classical_power(lam, 2, 0.05);
    CHECK(p > prev);
    prev = p;
  }
  CHECK(classical_power(11.85, 2, 0.05) == doctest::Approx(0.88).epsilon(0.012));

  // df = 1 values for the small 2x2 statistics, checked against a direct
  // normal-tail oracle P(|Z + sqrt(l)| > z_{0.975})
  auto tail_oracle = [](double lam) {
    const double z = 1.959963985;
    const double mu = std::sqrt(lam);
    auto phi = [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
    return phi(-z - mu) + 1.0 - phi(z - mu);
  };
  CHECK(classical_power(0.68, 1, 0.05) ==
        doctest::Approx(tail_oracle(0.68)).epsilon(1e-6));
  CHECK(classical_power(0.92, 1, 0.05) ==
        doctest::Approx(tail_oracle(0.92)).epsilon(1e-6));
  CHECK(classical_power(0.68, 1, 0.05) == doctest::Approx(0.13).epsilon(0.01));
  CHECK(classical_power(0.92, 1, 0.05) == doctest::Approx(0.16).epsilon(0.01));
}

TEST_CASE("pearson statistic is invariant under cell permutation") {
  RngStream rng(5, 5);
  std::vector<double> y(6), yhat(6);
  for (int i = 0; i < 6; ++i) {
    y[i] = 1.0 + 10.0 * rng.next_double();
    yhat[i] = 1.0 + 10.0 * rng.next_double();
  }
  const double base = pearson_x2(y, yhat);
  std::vector<int> perm = {3, 1, 4, 0, 5, 2};
  std::vector<double> yp(6), yhp(6);
  for (int i = 0; i < 6; ++i) {
    yp[i] = y[perm[i]];
    yhp[i] = yhat[perm[i]];
  }
  CHECK(pearson_x2(yp, yhp) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("gof error paths") {
  std::vector<double> y = {1.0, 2.0};
  CHECK_THROWS_AS(pearson_x2(y, std::vector<double>{1.0, 0.0}), Error);
  CHECK_THROWS_AS(deviance_g2(y, std::vector<double>{1.0, -2.0}), Error);
  CHECK_THROWS_AS(pearson_x2(y, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(chi2_quantile(0.0, 2), Error);
  CHECK_THROWS_AS(chi2_quantile(0.5, 0), Error);
  CHECK_THROWS_AS(noncentral_chi2_cdf(1.0, 2, -0.5), Error);
  CHECK_THROWS_AS(noncentrality(-1.0, 10), Error);
}
