// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "loglin/gof.hpp"

#include <cmath>
#include <limits>

#include "loglin/errors.hpp"
#include "loglin/rng.hpp"

namespace loglin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series expansion of P(a, x), valid and fast for x < a + 1.
double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), for x >= a + 1
// (modified Lentz).
double upper_gamma_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_pdf(double x, double k) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * k;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) -
                  std::lgamma(a));
}

}  // namespace

double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0)) raise(Errc::invalid_argument, "gamma shape must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_gamma_series(a, x);
  return 1.0 - upper_gamma_cf(a, x);
}

double chi2_cdf(double x, double k) {
  if (!(k > 0.0)) raise(Errc::invalid_argument, "df must be positive");
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * k, 0.5 * x);
}

double chi2_quantile(double p, double k) {
  if (!(k > 0.0)) raise(Errc::invalid_argument, "df must be positive");
  if (!(p > 0.0 && p < 1.0))
    raise(Errc::invalid_argument, "quantile needs p in (0,1)");

  // Wilson-Hilferty start, then safeguarded Newton on the CDF.
  const double z = inverse_normal_cdf(p);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  double x = k * t * t * t;
  if (!(x > 0.0)) x = 0.5;

  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double f = chi2_cdf(x, k) - p;
    if (std::abs(f) < 1e-14) break;
    if (f > 0.0) hi = x;
    else lo = x;
    const double dens = chi2_pdf(x, k);
    double next = dens > 0.0 ? x - f / dens : -1.0;
    if (!(next > lo && (next < hi))) {
      // fall back to bisection (expand the bracket when hi is open)
      next = std::isinf(hi) ? 2.0 * x + 1.0 : 0.5 * (lo + hi);
    }
    if (next == x) break;
    x = next;
  }
  return x;
}

double noncentral_chi2_cdf(double x, double k, double lambda) {
  if (!(k > 0.0)) raise(Errc::invalid_argument, "df must be positive");
  if (lambda < 0.0)
    raise(Errc::invalid_argument, "noncentrality must be non-negative");
  if (x <= 0.0) return 0.0;
  if (lambda == 0.0) return chi2_cdf(x, k);

  const double half_lambda = 0.5 * lambda;
  const double z = 0.5 * x;
  const double a0 = 0.5 * k;

  // centre of the Poisson weights
  const long m0 = static_cast<long>(std::floor(half_lambda));

  // w(m) = exp(-l) l^m / m!, C(m) = P(a0 + m, z); both via stable
  // recurrences from the central term.
  const double log_w0 = -half_lambda + m0 * std::log(half_lambda) -
                        std::lgamma(static_cast<double>(m0) + 1.0);
  const double w0 = std::exp(log_w0);
  const double c0 = reg_lower_gamma(a0 + m0, z);
  // t(m) = z^(a0+m) e^(-z) / Gamma(a0+m+1), so C(m+1) = C(m) - t(m)
  double t0 = std::exp((a0 + m0) * std::log(z) - z -
                       std::lgamma(a0 + m0 + 1.0));

  double sum = w0 * c0;
  double mass = w0;

  // upward pass
  {
    double w = w0, c = c0, tt = t0;
    long m = m0;
    while (mass < 1.0 - 1e-12 && m - m0 < 100000) {
      w *= half_lambda / static_cast<double>(m + 1);
      c -= tt;
      if (c < 0.0) c = 0.0;
      tt *= z / (a0 + m + 1.0);
      ++m;
      sum += w * c;
      mass += w;
      if (c == 0.0 && w < 1e-300) break;
    }
  }
  // downward pass
  {
    double w = w0, c = c0, tt = t0;
    for (long m = m0; m > 0 && mass < 1.0 - 1e-12; --m) {
      w *= static_cast<double>(m) / half_lambda;
      tt *= (a0 + m) / z;
      c += tt;
      if (c > 1.0) c = 1.0;
      sum += w * c;
      mass += w;
    }
  }
  if (sum < 0.0) sum = 0.0;
  if (sum > 1.0) sum = 1.0;
  return sum;
}

double classical_power(double lambda, double k, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    raise(Errc::invalid_argument, "alpha must be in (0,1)");
  const double crit = chi2_quantile(1.0 - alpha, k);
  return 1.0 - noncentral_chi2_cdf(crit, k, lambda);
}

double pearson_x2(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    raise(Errc::dimension_mismatch, "observed/fitted length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(yhat[i] > 0.0))
      raise(Errc::non_positive_fitted, "fitted value must be positive");
    const double r = y[i] - yhat[i];
    s += r * r / yhat[i];
  }
  return s;
}

double deviance_g2(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    raise(Errc::dimension_mismatch, "observed/fitted length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(yhat[i] > 0.0))
      raise(Errc::non_positive_fitted, "fitted value must be positive");
    if (y[i] < 0.0)
      raise(Errc::non_positive_input, "observed count must be non-negative");
    const double term = y[i] > 0.0 ? y[i] * std::log(y[i] / yhat[i]) : 0.0;
    s += term - (y[i] - yhat[i]);
  }
  return 2.0 * s;
}

double noncentrality(double x2, double n) {
  if (x2 < 0.0) raise(Errc::invalid_argument, "statistic must be >= 0");
  if (!(n >= 1.0)) raise(Errc::invalid_argument, "total must be >= 1");
  return x2 / n;
}

GofReport gof_report(std::span<const double> y, std::span<const double> yhat,
                     long df) {
  GofReport r;
  r.x2 = pearson_x2(y, yhat);
  r.g2 = deviance_g2(y, yhat);
  r.df = df;
  double total = 0.0;
  for (double v : y) total += v;
  r.phi = total >= 1.0 ? r.x2 / total : r.x2;
  r.w = std::sqrt(r.phi);
  r.p_value = df > 0 ? 1.0 - chi2_cdf(r.x2, static_cast<double>(df)) : 1.0;
  return r;
}

}  // namespace loglin
