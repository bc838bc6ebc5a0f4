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

#ifndef LOGLIN_GOF_HPP
#define LOGLIN_GOF_HPP

#include <span>

namespace loglin {

/// Pearson statistic sum (y_i - yhat_i)^2 / yhat_i.
/// Throws Errc::non_positive_fitted unless yhat > 0.
double pearson_x2(std::span<const double> y, std::span<const double> yhat);

/// Deviance 2 sum [ y_i log(y_i/yhat_i) - (y_i - yhat_i) ], with 0 log 0 = 0.
/// The linear correction term is kept even when the totals match.
double deviance_g2(std::span<const double> y, std::span<const double> yhat);

/// Noncentrality phi = x2 / n.
double noncentrality(double x2, double n);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// Central chi-square CDF with k degrees of freedom.
double chi2_cdf(double x, double k);

/// Quantile of the central chi-square; |CDF(quantile(p)) - p| < 1e-12.
double chi2_quantile(double p, double k);

/// Noncentral chi-square CDF via the Poisson mixture of central CDFs,
/// truncated when the remaining Poisson mass is below 1e-12.
double noncentral_chi2_cdf(double x, double k, double lambda);

/// Classical power: P(X > chi2_quantile(1-alpha, k)) for X noncentral
/// chi-square with k df and noncentrality lambda.
double classical_power(double lambda, double k, double alpha);

struct GofReport {
  double x2 = 0.0;
  double g2 = 0.0;
  long df = 0;
  double phi = 0.0;      // x2 / N
  double w = 0.0;        // sqrt(phi)
  double p_value = 1.0;  // 1 - chi2_cdf(x2, df)
};

/// Report for observed y against fitted yhat on df degrees of freedom;
/// N is taken as the total of y.
GofReport gof_report(std::span<const double> y, std::span<const double> yhat,
                     long df);

}  // namespace loglin

#endif  // LOGLIN_GOF_HPP
