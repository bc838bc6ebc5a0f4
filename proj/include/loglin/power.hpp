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

#ifndef LOGLIN_POWER_HPP
#define LOGLIN_POWER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loglin/design.hpp"
#include "loglin/sampling.hpp"
#include "loglin/scaling.hpp"

namespace loglin {

enum class PowerMode { geometric, cumulative };

/// Monte-Carlo rejection rate with a normal-approximation 95% interval.
/// Replicates whose null MLE fails (zero sufficient statistics under small
/// samples) are counted in n_failed and excluded from the denominator.
struct PowerEstimate {
  double rate = 0.0;
  long n_sim = 0;
  long n_failed = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  PowerMode mode = PowerMode::cumulative;
};

/// A labelled offset defining one alternative surface against the null.
struct OffsetSpec {
  std::string label;
  std::vector<double> offset;
};

struct PowerCell {
  long long n = 0;          // sample size (1 in geometric mode)
  double alpha = 0.0;       // level (acceptance radius in geometric mode)
  std::string offset_label;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  long n_sim = 0;
  long n_failed = 0;
};

struct PowerTable {
  PowerMode mode = PowerMode::cumulative;
  std::vector<PowerCell> cells;
  std::uint64_t seed = 0;
  long n_sim = 0;
  double dirichlet_alpha = 1.0;
  std::string model_name;
  std::string model_hash;
};

/// Geometric power: fraction of alternative-surface points whose Pearson
/// distance to the null surface (computed on probability vectors, total
/// mass one) reaches epsilon. All epsilons are evaluated on one shared
/// replicate set, which makes the estimates exactly non-increasing in
/// epsilon for a fixed seed.
std::vector<PowerEstimate> geometric_power_mc(
    const ModelSpec& null_model, const ModelSpec& alt_model,
    std::span<const double> epsilons, long n_sim, const DirichletParams& dir,
    std::uint64_t seed, std::uint64_t stream_base = 0, int jobs = 1,
    const ScalingConfig& cfg = {});

PowerEstimate geometric_power_mc(const ModelSpec& null_model,
                                 const ModelSpec& alt_model, double epsilon,
                                 long n_sim, const DirichletParams& dir,
                                 std::uint64_t seed,
                                 std::uint64_t stream_base = 0, int jobs = 1,
                                 const ScalingConfig& cfg = {});

/// Cumulative geometric power: replicates draw a surface point, realize a
/// multinomial sample of size n from it, fit the null MLE and apply the
/// chi-square test at each alpha (shared draws across alphas).
std::vector<PowerEstimate> cumulative_power_mc(
    const ModelSpec& null_model, const ModelSpec& alt_model, std::int64_t n,
    std::span<const double> alphas, long n_sim, const DirichletParams& dir,
    std::uint64_t seed, std::uint64_t stream_base = 0, int jobs = 1,
    const ScalingConfig& cfg = {});

PowerEstimate cumulative_power_mc(const ModelSpec& null_model,
                                  const ModelSpec& alt_model, std::int64_t n,
                                  double alpha, long n_sim,
                                  const DirichletParams& dir,
                                  std::uint64_t seed,
                                  std::uint64_t stream_base = 0, int jobs = 1,
                                  const ScalingConfig& cfg = {});

/// Posteriori analysis of observed counts f0: the offset is the observed
/// probability vector itself (only its log contrasts matter) and the sample
/// size is the observed total. Throws Errc::non_positive_cell on zero cells.
std::vector<PowerEstimate> posteriori_cumulative(
    const ModelSpec& null_model, std::span<const double> f0,
    std::span<const double> alphas, long n_sim, const DirichletParams& dir,
    std::uint64_t seed, int jobs = 1, const ScalingConfig& cfg = {});

/// One cumulative cell per (alternative, N, alpha) grid point; replicate
/// streams are assigned per (alternative, N) so results are independent of
/// the number of workers.
PowerTable power_table(const ModelSpec& null_model,
                       const std::vector<OffsetSpec>& alternatives,
                       const std::vector<long long>& sample_sizes,
                       const std::vector<double>& alphas, long n_sim,
                       double dirichlet_alpha, std::uint64_t seed,
                       int jobs = 1, const ScalingConfig& cfg = {});

/// Smallest N in the table with rate >= target for the given alternative
/// label and alpha; nullopt when the target is not reached.
std::optional<long long> smallest_n_reaching(const PowerTable& table,
                                             const std::string& label,
                                             double alpha, double target);

}  // namespace loglin

#endif  // LOGLIN_POWER_HPP
