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

#ifndef LOGLIN_SAMPLING_HPP
#define LOGLIN_SAMPLING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "loglin/design.hpp"
#include "loglin/rng.hpp"
#include "loglin/scaling.hpp"

namespace loglin {

struct DirichletParams {
  std::vector<double> alpha;  // all > 0

  static DirichletParams symmetric(double a, std::size_t n) {
    return DirichletParams{std::vector<double>(n, a)};
  }
};

/// Draw from Dir(alpha) via normalized gamma variates. Draws with any
/// component below 1e-12 are rejected and redrawn (the open simplex excludes
/// the boundary); throws Errc::degenerate_draw after 100 retries.
Distribution dirichlet_draw(const DirichletParams& params, RngStream& rng);

/// Multinomial frequencies by the sequential conditional-binomial chain;
/// the output always sums to n.
std::vector<std::int64_t> multinomial_draw(std::int64_t n,
                                           std::span<const double> p,
                                           RngStream& rng);

/// Single binomial draw by quantile inversion (walks outward from the mode,
/// one uniform per draw; robust for large n).
std::int64_t binomial_draw(std::int64_t n, double p, RngStream& rng);

/// Two-step draw from the log-affine alternative: a Dirichlet point supplies
/// the mean-value parameters, and the two-loop scaling solve projects it
/// onto the model surface (this is the MLE of the drawn point under the
/// model). The result is a probability vector with D log pi = D log xi.
std::vector<double> sample_from_alternative(const ModelSpec& model,
                                            const DirichletParams& params,
                                            RngStream& rng,
                                            const ScalingConfig& cfg = {});

}  // namespace loglin

#endif  // LOGLIN_SAMPLING_HPP
