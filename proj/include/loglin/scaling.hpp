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

#ifndef LOGLIN_SCALING_HPP
#define LOGLIN_SCALING_HPP

#include <functional>
#include <span>
#include <vector>

#include "loglin/design.hpp"

namespace loglin {

struct ScalingConfig {
  double tol_mean = 1e-10;   // residual tolerance on mean-value parameters
  double tol_total = 1e-9;   // tolerance on |1'delta - 1| in the outer loop
  long max_inner_iters = 1000000;
  long max_outer_iters = 200;
};

/// Outcome of a scaling solve. `fitted` is strictly positive;
/// residual_total is meaningful for probability fits only.
struct FitResult {
  std::vector<double> fitted;
  Kind kind = Kind::intensity;
  double gamma = 1.0;
  long inner_iters = 0;
  long outer_iters = 0;
  double residual_mean = 0.0;   // max_j |A_j' fitted - gamma A_j' q|
  double residual_dual = 0.0;   // max_k |D log fitted - D log xi|_k
  double residual_total = 0.0;  // |1' fitted - 1|
};

/// Thrown when an iteration cap is hit; carries the best iterate so the
/// caller can inspect how far the solve got.
class MaxItersError : public Error {
 public:
  MaxItersError(FitResult best, const std::string& what)
      : Error(Errc::max_iters_exceeded, what), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

/// Per-iteration diagnostics hook (CSV trace, property tests).
using IterationTrace = std::function<void(
    long iter, double residual_mean, double residual_dual, double bregman)>;

/// Bregman divergence sum t_i log(t_i/u_i) - (sum t_i - sum u_i).
/// Requires strictly positive inputs of equal length; >= 0, and zero
/// exactly when t = u.
double bregman_divergence(std::span<const double> t, std::span<const double> u);

/// One multiplicative scaling step:
///   delta_i' = delta_i * prod_j [gamma (A_j'q) / (A_j'delta)]^(a_ij / l1)
/// where a_norm holds the L1-normalized design entries.
std::vector<double> ipf_step(std::span<const double> delta,
                             std::span<const double> q, double gamma,
                             const RealMat& a_norm);

/// Iterates the multiplicative scaling from delta = xi (or `start`, which
/// must satisfy the same dual constraint) until A' delta = gamma A' q within
/// cfg.tol_mean. The limit additionally satisfies D log delta = D log xi,
/// which the update preserves at every iterate.
FitResult ipf_solve(const DesignMatrix& design, const KernelBasis& kernel,
                    std::span<const double> q, double gamma,
                    std::span<const double> xi, const ScalingConfig& cfg = {},
                    const IterationTrace& trace = {},
                    std::span<const double> start = {});

/// Two-loop solver for probability targets: alternates the core scaling
/// solve with a gamma adjustment (multiplicative bracketing, then bisection
/// in log gamma) until |1' delta - 1| <= cfg.tol_total. Models whose column
/// span contains the all-ones vector never need adjustment and return
/// gamma = 1 exactly.
FitResult gipf_solve(const DesignMatrix& design, const KernelBasis& kernel,
                     std::span<const double> q, std::span<const double> xi,
                     const ScalingConfig& cfg = {},
                     const IterationTrace& trace = {});

enum class SamplingKind { poisson, multinomial };

/// Maximum likelihood fit of `y` under the model:
///   poisson                     -> core solve with gamma = 1, q = y
///   multinomial, overall effect -> core solve with gamma = 1, q = y/N
///   multinomial, no overall     -> two-loop solve with q = y/N
/// Throws Errc::zero_sufficient_statistic when some A_j'y = 0 (the MLE may
/// not exist in that case).
FitResult fit_mle(const ModelSpec& model, std::span<const double> y,
                  SamplingKind kind, const ScalingConfig& cfg = {},
                  const IterationTrace& trace = {});

}  // namespace loglin

#endif  // LOGLIN_SCALING_HPP
