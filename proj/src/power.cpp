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

#include "loglin/power.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "loglin/gof.hpp"

namespace loglin {

namespace {

PowerEstimate make_estimate(long rejected, long n_sim, long n_failed,
                            PowerMode mode) {
  PowerEstimate e;
  e.n_sim = n_sim;
  e.n_failed = n_failed;
  e.mode = mode;
  const long effective = n_sim - n_failed;
  e.rate = effective > 0 ? static_cast<double>(rejected) /
                               static_cast<double>(effective)
                         : 0.0;
  const double half =
      1.96 * std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(n_sim));
  e.ci_lo = std::max(0.0, e.rate - half);
  e.ci_hi = std::min(1.0, e.rate + half);
  return e;
}

// Runs `body(u, rng)` for every replicate u with a per-replicate stream;
// bodies return the replicate's Pearson statistic or NaN on failure.
// Aggregation against the thresholds happens in integer counters, so the
// result does not depend on the thread schedule.
template <typename Body>
std::vector<PowerEstimate> run_replicates(std::span<const double> thresholds,
                                          long n_sim, std::uint64_t seed,
                                          std::uint64_t stream_base, int jobs,
                                          PowerMode mode, const Body& body) {
  if (n_sim < 1) raise(Errc::invalid_argument, "n_sim must be >= 1");
  const std::size_t t = thresholds.size();
  jobs = std::max(1, jobs);

  std::vector<std::vector<long>> counts(jobs, std::vector<long>(t, 0));
  std::vector<long> failed(jobs, 0);

  auto worker = [&](int w, long lo, long hi) {
    for (long u = lo; u < hi; ++u) {
      RngStream rng(seed, stream_base + static_cast<std::uint64_t>(u));
      double x2;
      try {
        x2 = body(u, rng);
      } catch (const Error&) {
        ++failed[w];
        continue;
      }
      if (std::isnan(x2)) {
        ++failed[w];
        continue;
      }
      for (std::size_t k = 0; k < t; ++k)
        if (x2 >= thresholds[k]) ++counts[w][k];
    }
  };

  if (jobs == 1) {
    worker(0, 0, n_sim);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n_sim + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const long lo = w * chunk;
      const long hi = std::min<long>(n_sim, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, w, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  long total_failed = 0;
  for (long f : failed) total_failed += f;
  std::vector<PowerEstimate> out;
  out.reserve(t);
  for (std::size_t k = 0; k < t; ++k) {
    long rejected = 0;
    for (int w = 0; w < jobs; ++w) rejected += counts[w][k];
    out.push_back(make_estimate(rejected, n_sim, total_failed, mode));
  }
  return out;
}

void check_pair(const ModelSpec& null_model, const ModelSpec& alt_model) {
  if (null_model.design.a != alt_model.design.a ||
      null_model.kernel.d != alt_model.kernel.d)
    raise(Errc::invalid_argument,
          "null and alternative must share design and kernel");
  if (null_model.kernel.dof() == 0)
    raise(Errc::invalid_argument,
          "saturated model has no goodness-of-fit test");
}

}  // namespace

std::vector<PowerEstimate> geometric_power_mc(
    const ModelSpec& null_model, const ModelSpec& alt_model,
    std::span<const double> epsilons, long n_sim, const DirichletParams& dir,
    std::uint64_t seed, std::uint64_t stream_base, int jobs,
    const ScalingConfig& cfg) {
  check_pair(null_model, alt_model);
  for (double e : epsilons)
    if (!(e > 0.0))
      raise(Errc::invalid_argument, "acceptance radius must be positive");

  auto body = [&](long, RngStream& rng) {
    std::vector<double> pi = sample_from_alternative(alt_model, dir, rng, cfg);
    FitResult fit = fit_mle(null_model, pi, SamplingKind::multinomial, cfg);
    return pearson_x2(pi, fit.fitted);
  };
  return run_replicates(epsilons, n_sim, seed, stream_base, jobs,
                        PowerMode::geometric, body);
}

PowerEstimate geometric_power_mc(const ModelSpec& null_model,
                                 const ModelSpec& alt_model, double epsilon,
                                 long n_sim, const DirichletParams& dir,
                                 std::uint64_t seed, std::uint64_t stream_base,
                                 int jobs, const ScalingConfig& cfg) {
  const double eps[1] = {epsilon};
  return geometric_power_mc(null_model, alt_model, eps, n_sim, dir, seed,
                            stream_base, jobs, cfg)[0];
}

std::vector<PowerEstimate> cumulative_power_mc(
    const ModelSpec& null_model, const ModelSpec& alt_model, std::int64_t n,
    std::span<const double> alphas, long n_sim, const DirichletParams& dir,
    std::uint64_t seed, std::uint64_t stream_base, int jobs,
    const ScalingConfig& cfg) {
  check_pair(null_model, alt_model);
  if (n < 1) raise(Errc::invalid_argument, "sample size must be >= 1");
  const double dof = static_cast<double>(null_model.kernel.dof());
  std::vector<double> thresholds(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] > 0.0 && alphas[k] < 1.0))
      raise(Errc::invalid_argument, "alpha must be in (0,1)");
    thresholds[k] = chi2_quantile(1.0 - alphas[k], dof);
  }

  auto body = [&](long, RngStream& rng) {
    std::vector<double> pi = sample_from_alternative(alt_model, dir, rng, cfg);
    std::vector<std::int64_t> f = multinomial_draw(n, pi, rng);
    std::vector<double> y(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
      y[i] = static_cast<double>(f[i]);
    FitResult fit = fit_mle(null_model, y, SamplingKind::multinomial, cfg);
    std::vector<double> yhat(fit.fitted.size());
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < yhat.size(); ++i)
      yhat[i] = nd * fit.fitted[i];
    return pearson_x2(y, yhat);
  };
  return run_replicates(thresholds, n_sim, seed, stream_base, jobs,
                        PowerMode::cumulative, body);
}

PowerEstimate cumulative_power_mc(const ModelSpec& null_model,
                                  const ModelSpec& alt_model, std::int64_t n,
                                  double alpha, long n_sim,
                                  const DirichletParams& dir,
                                  std::uint64_t seed,
                                  std::uint64_t stream_base, int jobs,
                                  const ScalingConfig& cfg) {
  const double a[1] = {alpha};
  return cumulative_power_mc(null_model, alt_model, n, a, n_sim, dir, seed,
                             stream_base, jobs, cfg)[0];
}

std::vector<PowerEstimate> posteriori_cumulative(
    const ModelSpec& null_model, std::span<const double> f0,
    std::span<const double> alphas, long n_sim, const DirichletParams& dir,
    std::uint64_t seed, int jobs, const ScalingConfig& cfg) {
  if (f0.size() != null_model.design.cell_count())
    raise(Errc::dimension_mismatch, "data length does not match design");
  double total = 0.0;
  for (double v : f0) {
    if (!(v > 0.0))
      raise(Errc::non_positive_cell,
            "posteriori analysis needs strictly positive observed counts");
    total += v;
  }
  std::vector<double> p0(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i) p0[i] = f0[i] / total;
  // p0 itself represents the offset class: D log xi = D log p0 exactly
  ModelSpec alt = with_offset(null_model, p0);
  return cumulative_power_mc(null_model, alt,
                             static_cast<std::int64_t>(std::llround(total)),
                             alphas, n_sim, dir, seed, /*stream_base=*/0, jobs,
                             cfg);
}

PowerTable power_table(const ModelSpec& null_model,
                       const std::vector<OffsetSpec>& alternatives,
                       const std::vector<long long>& sample_sizes,
                       const std::vector<double>& alphas, long n_sim,
                       double dirichlet_alpha, std::uint64_t seed, int jobs,
                       const ScalingConfig& cfg) {
  if (alternatives.empty() || sample_sizes.empty() || alphas.empty())
    raise(Errc::invalid_argument, "power table needs non-empty grids");
  PowerTable table;
  table.mode = PowerMode::cumulative;
  table.seed = seed;
  table.n_sim = n_sim;
  table.dirichlet_alpha = dirichlet_alpha;
  table.model_name = null_model.name;

  const DirichletParams dir =
      DirichletParams::symmetric(dirichlet_alpha, null_model.design.cell_count());

  for (std::size_t a = 0; a < alternatives.size(); ++a) {
    ModelSpec alt = with_offset(null_model, alternatives[a].offset);
    for (std::size_t s = 0; s < sample_sizes.size(); ++s) {
      const std::uint64_t base =
          (static_cast<std::uint64_t>(a) * sample_sizes.size() + s) *
          static_cast<std::uint64_t>(n_sim);
      std::vector<PowerEstimate> ests =
          cumulative_power_mc(null_model, alt, sample_sizes[s], alphas, n_sim,
                              dir, seed, base, jobs, cfg);
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        PowerCell cell;
        cell.n = sample_sizes[s];
        cell.alpha = alphas[k];
        cell.offset_label = alternatives[a].label;
        cell.rate = ests[k].rate;
        cell.ci_lo = ests[k].ci_lo;
        cell.ci_hi = ests[k].ci_hi;
        cell.n_sim = ests[k].n_sim;
        cell.n_failed = ests[k].n_failed;
        table.cells.push_back(std::move(cell));
      }
    }
  }
  return table;
}

std::optional<long long> smallest_n_reaching(const PowerTable& table,
                                             const std::string& label,
                                             double alpha, double target) {
  std::optional<long long> best;
  for (const auto& cell : table.cells) {
    if (cell.offset_label != label) continue;
    if (std::abs(cell.alpha - alpha) > 1e-12) continue;
    if (cell.rate >= target && (!best || cell.n < *best)) best = cell.n;
  }
  return best;
}

}  // namespace loglin
