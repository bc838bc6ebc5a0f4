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

#include "loglin/sampling.hpp"

#include <cmath>

namespace loglin {

Distribution dirichlet_draw(const DirichletParams& params, RngStream& rng) {
  const std::size_t n = params.alpha.size();
  if (n == 0) raise(Errc::invalid_argument, "empty Dirichlet parameter");
  for (double a : params.alpha)
    if (!(a > 0.0))
      raise(Errc::non_positive_input, "Dirichlet parameters must be positive");

  std::vector<double> out(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = rng.next_gamma(params.alpha[i]);
      total += out[i];
    }
    if (!(total > 0.0)) continue;
    double mn = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] /= total;
      mn = std::min(mn, out[i]);
    }
    if (mn >= 1e-12) {
      Distribution d;
      d.values = out;
      d.kind = Kind::probability;
      return d;
    }
  }
  raise(Errc::degenerate_draw,
        "Dirichlet draw kept hitting the simplex boundary");
}

std::int64_t binomial_draw(std::int64_t n, double p, RngStream& rng) {
  if (n < 0) raise(Errc::invalid_argument, "binomial needs n >= 0");
  if (n == 0) return 0;
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial_draw(n, 1.0 - p, rng);

  const double u = rng.next_double();

  // quantile inversion from the mode: pmf recurrences outward, cumulative
  // intervals assigned in a fixed order (mode, mode+1, mode-1, ...)
  const double nd = static_cast<double>(n);
  std::int64_t mode = static_cast<std::int64_t>((nd + 1.0) * p);
  if (mode > n) mode = n;
  const double log_pmf_mode = std::lgamma(nd + 1.0) -
                              std::lgamma(static_cast<double>(mode) + 1.0) -
                              std::lgamma(nd - static_cast<double>(mode) + 1.0) +
                              static_cast<double>(mode) * std::log(p) +
                              (nd - static_cast<double>(mode)) * std::log1p(-p);
  const double pmf_mode = std::exp(log_pmf_mode);

  double cum = pmf_mode;
  if (u < cum) return mode;

  const double odds = p / (1.0 - p);
  double up_pmf = pmf_mode;
  double down_pmf = pmf_mode;
  std::int64_t up = mode, down = mode;
  while (up < n || down > 0) {
    if (up < n) {
      up_pmf *= odds * static_cast<double>(n - up) /
                static_cast<double>(up + 1);
      ++up;
      cum += up_pmf;
      if (u < cum) return up;
    }
    if (down > 0) {
      down_pmf *= static_cast<double>(down) /
                  (odds * static_cast<double>(n - down + 1));
      --down;
      cum += down_pmf;
      if (u < cum) return down;
    }
  }
  // u fell into the rounding slack beyond the accumulated mass
  return mode;
}

std::vector<std::int64_t> multinomial_draw(std::int64_t n,
                                           std::span<const double> p,
                                           RngStream& rng) {
  if (n < 1) raise(Errc::invalid_argument, "multinomial needs n >= 1");
  if (p.empty()) raise(Errc::invalid_argument, "empty probability vector");
  std::vector<std::int64_t> out(p.size(), 0);
  std::int64_t remaining = n;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (remaining == 0) break;
    if (!(p[i] >= 0.0))
      raise(Errc::non_positive_input, "probabilities must be >= 0");
    double cond = mass > 0.0 ? p[i] / mass : 1.0;
    if (cond > 1.0) cond = 1.0;
    out[i] = binomial_draw(remaining, cond, rng);
    remaining -= out[i];
    mass -= p[i];
  }
  out[p.size() - 1] = remaining;
  return out;
}

std::vector<double> sample_from_alternative(const ModelSpec& model,
                                            const DirichletParams& params,
                                            RngStream& rng,
                                            const ScalingConfig& cfg) {
  if (params.alpha.size() != model.design.cell_count())
    raise(Errc::dimension_mismatch,
          "Dirichlet dimension does not match the model");
  Distribution p = dirichlet_draw(params, rng);
  FitResult fit =
      gipf_solve(model.design, model.kernel, p.values, model.offset, cfg);
  return std::move(fit.fitted);
}

}  // namespace loglin
