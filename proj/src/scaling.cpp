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

#include "loglin/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace loglin {

namespace {

constexpr double kLogGuard = 690.0;  // ~log(1e300)

double bregman_nonneg(std::span<const double> t, std::span<const double> u) {
  // 0 log 0 := 0; assumes u > 0
  double s = 0.0, ts = 0.0, us = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0) s += t[i] * std::log(t[i] / u[i]);
    ts += t[i];
    us += u[i];
  }
  return s - (ts - us);
}

void suff_stats(const IntMat& a, std::span<const double> v, double* out) {
  for (std::size_t j = 0; j < a.cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const std::int64_t* row = &a.data[i * a.cols];
    for (std::size_t j = 0; j < a.cols; ++j)
      out[j] += static_cast<double>(row[j]) * v[i];
  }
}

double dual_residual(const KernelBasis& kernel,
                     std::span<const double> log_delta,
                     std::span<const double> log_xi) {
  double worst = 0.0;
  for (std::size_t k = 0; k < kernel.dof(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < kernel.cell_count(); ++i)
      s += static_cast<double>(kernel.d(k, i)) * (log_delta[i] - log_xi[i]);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

// Column-wise sparse view of log(a_ij) for the log-space slow path.
struct LogColumns {
  std::vector<std::vector<std::pair<std::size_t, double>>> cols;
  void build(const IntMat& a) {
    cols.assign(a.cols, {});
    for (std::size_t j = 0; j < a.cols; ++j)
      for (std::size_t i = 0; i < a.rows; ++i)
        if (a(i, j) > 0)
          cols[j].emplace_back(i, std::log(static_cast<double>(a(i, j))));
  }
};

struct InnerState {
  std::vector<double> delta;      // exp(log_delta); valid in linear mode
  std::vector<double> log_delta;  // primary representation
  bool log_mode = false;
};

void validate_inputs(const DesignMatrix& design, const KernelBasis& kernel,
                     std::span<const double> q, double gamma,
                     std::span<const double> xi) {
  const std::size_t icount = design.cell_count();
  if (q.size() != icount || xi.size() != icount)
    raise(Errc::dimension_mismatch, "vector length does not match design");
  if (kernel.cell_count() != icount)
    raise(Errc::dimension_mismatch, "kernel does not match design");
  if (!(gamma > 0.0))
    raise(Errc::non_positive_input, "gamma must be positive");
  for (double v : q)
    if (v < 0.0) raise(Errc::non_positive_input, "q must be non-negative");
  for (double v : xi)
    if (!(v > 0.0)) raise(Errc::non_positive_cell, "xi must be positive");
}

}  // namespace

double bregman_divergence(std::span<const double> t,
                          std::span<const double> u) {
  if (t.size() != u.size())
    raise(Errc::dimension_mismatch, "vectors of unequal length");
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!(t[i] > 0.0) || !(u[i] > 0.0))
      raise(Errc::non_positive_input, "divergence needs positive inputs");
  return bregman_nonneg(t, u);
}

std::vector<double> ipf_step(std::span<const double> delta,
                             std::span<const double> q, double gamma,
                             const RealMat& a_norm) {
  const std::size_t icount = a_norm.rows, jcount = a_norm.cols;
  if (delta.size() != icount || q.size() != icount)
    raise(Errc::dimension_mismatch, "vector length does not match design");
  if (!(gamma > 0.0))
    raise(Errc::non_positive_input, "gamma must be positive");

  std::vector<double> sq(jcount, 0.0), sd(jcount, 0.0);
  for (std::size_t i = 0; i < icount; ++i)
    for (std::size_t j = 0; j < jcount; ++j) {
      sq[j] += a_norm(i, j) * q[i];
      sd[j] += a_norm(i, j) * delta[i];
    }
  std::vector<double> lr(jcount);
  for (std::size_t j = 0; j < jcount; ++j) {
    if (!(sq[j] > 0.0))
      raise(Errc::zero_sufficient_statistic,
            "sufficient statistic of q vanishes");
    lr[j] = std::log(gamma * sq[j] / sd[j]);
  }
  std::vector<double> out(icount);
  for (std::size_t i = 0; i < icount; ++i) {
    double inc = 0.0;
    for (std::size_t j = 0; j < jcount; ++j) inc += a_norm(i, j) * lr[j];
    out[i] = delta[i] * std::exp(inc);
  }
  return out;
}

namespace {

// Core multiplicative solve used by ipf_solve and the outer loop. Iterates
// in the linear domain and falls back to log-space sums when the iterate
// leaves [1e-300, 1e300].
FitResult inner_solve(const DesignMatrix& design, const KernelBasis& kernel,
                      std::span<const double> q, double gamma,
                      std::span<const double> xi, double tol_mean,
                      long max_iters, const IterationTrace& trace,
                      InnerState& st, std::span<const double> log_xi_in) {
  const IntMat& a = design.a;
  const std::size_t icount = a.rows, jcount = a.cols;
  const double inv_l1 = 1.0 / static_cast<double>(design.l1);

  std::vector<double> target(jcount), log_target(jcount);
  suff_stats(a, q, target.data());
  double max_target = 0.0;
  for (std::size_t j = 0; j < jcount; ++j) {
    if (!(target[j] > 0.0))
      raise(Errc::zero_sufficient_statistic,
            "sufficient statistic of q vanishes");
    target[j] *= gamma;
    log_target[j] = std::log(target[j]);
    max_target = std::max(max_target, target[j]);
  }
  // absolute residuals below ~64 ulp of the target scale are not
  // representable; keeps extreme-gamma probes during bracketing finite
  tol_mean = std::max(
      tol_mean, 64.0 * std::numeric_limits<double>::epsilon() * max_target);

  std::vector<double> log_xi;
  std::span<const double> log_xi_view = log_xi_in;
  if (log_xi_view.empty()) {
    log_xi.resize(icount);
    for (std::size_t i = 0; i < icount; ++i) log_xi[i] = std::log(xi[i]);
    log_xi_view = log_xi;
  }

  LogColumns log_cols;
  bool log_cols_ready = false;

  std::vector<double> s(jcount), log_s(jcount), lr(jcount);
  std::vector<double> q_scaled;
  if (trace) {
    q_scaled.assign(q.begin(), q.end());
    for (auto& v : q_scaled) v *= gamma;
  }

  FitResult res;
  res.gamma = gamma;

  long iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (;; ++iter) {
    // statistics of the current iterate
    if (!st.log_mode) {
      suff_stats(a, st.delta, s.data());
      residual = 0.0;
      for (std::size_t j = 0; j < jcount; ++j) {
        log_s[j] = std::log(s[j]);
        residual = std::max(residual, std::abs(s[j] - target[j]));
      }
    } else {
      if (!log_cols_ready) {
        log_cols.build(a);
        log_cols_ready = true;
      }
      residual = 0.0;
      for (std::size_t j = 0; j < jcount; ++j) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& [i, la] : log_cols.cols[j])
          m = std::max(m, la + st.log_delta[i]);
        double acc = 0.0;
        for (const auto& [i, la] : log_cols.cols[j])
          acc += std::exp(la + st.log_delta[i] - m);
        log_s[j] = m + std::log(acc);
        residual = std::max(residual, std::abs(std::expm1(log_s[j] -
                                                          log_target[j])) *
                                          target[j]);
      }
    }

    if (trace) {
      const double rd = dual_residual(kernel, st.log_delta, log_xi_view);
      const double br =
          st.log_mode ? std::numeric_limits<double>::quiet_NaN()
                      : bregman_nonneg(q_scaled.empty()
                                           ? std::span<const double>(q)
                                           : std::span<const double>(q_scaled),
                                       st.delta);
      trace(iter, residual, rd, br);
    }

    if (residual < tol_mean) break;
    if (iter >= max_iters) {
      res.fitted = st.log_mode ? std::vector<double>() : st.delta;
      if (st.log_mode) {
        res.fitted.resize(icount);
        for (std::size_t i = 0; i < icount; ++i)
          res.fitted[i] = std::exp(st.log_delta[i]);
      }
      res.inner_iters = iter;
      res.residual_mean = residual;
      res.residual_dual = dual_residual(kernel, st.log_delta, log_xi_view);
      throw MaxItersError(res, "inner scaling loop exceeded max_inner_iters");
    }

    // multiplicative update, computed through its logarithm
    for (std::size_t j = 0; j < jcount; ++j)
      lr[j] = (log_target[j] - log_s[j]) * inv_l1;
    bool out_of_range = false;
    for (std::size_t i = 0; i < icount; ++i) {
      double inc = 0.0;
      const std::int64_t* row = &a.data[i * jcount];
      for (std::size_t j = 0; j < jcount; ++j)
        inc += static_cast<double>(row[j]) * lr[j];
      st.log_delta[i] += inc;
      if (std::abs(st.log_delta[i]) > kLogGuard) out_of_range = true;
    }
    if (out_of_range) {
      st.log_mode = true;
    } else if (!st.log_mode) {
      for (std::size_t i = 0; i < icount; ++i)
        st.delta[i] = std::exp(st.log_delta[i]);
    } else {
      // try to return to the fast path
      bool ok = true;
      for (std::size_t i = 0; i < icount; ++i)
        if (std::abs(st.log_delta[i]) > kLogGuard - 10.0) ok = false;
      if (ok) {
        st.log_mode = false;
        st.delta.resize(icount);
        for (std::size_t i = 0; i < icount; ++i)
          st.delta[i] = std::exp(st.log_delta[i]);
      }
    }
  }

  if (st.log_mode || st.delta.size() != icount) {
    st.delta.resize(icount);
    for (std::size_t i = 0; i < icount; ++i)
      st.delta[i] = std::exp(st.log_delta[i]);
  }
  res.fitted = st.delta;
  res.inner_iters = iter;
  res.residual_mean = residual;
  res.residual_dual = dual_residual(kernel, st.log_delta, log_xi_view);
  double total = 0.0;
  for (double v : res.fitted) total += v;
  res.residual_total = std::abs(total - 1.0);
  return res;
}

InnerState make_state(std::span<const double> from) {
  InnerState st;
  st.delta.assign(from.begin(), from.end());
  st.log_delta.resize(from.size());
  for (std::size_t i = 0; i < from.size(); ++i)
    st.log_delta[i] = std::log(from[i]);
  for (double l : st.log_delta)
    if (std::abs(l) > kLogGuard) st.log_mode = true;
  return st;
}

}  // namespace

FitResult ipf_solve(const DesignMatrix& design, const KernelBasis& kernel,
                    std::span<const double> q, double gamma,
                    std::span<const double> xi, const ScalingConfig& cfg,
                    const IterationTrace& trace,
                    std::span<const double> start) {
  validate_inputs(design, kernel, q, gamma, xi);
  std::span<const double> init = start.empty() ? xi : start;
  if (init.size() != xi.size())
    raise(Errc::dimension_mismatch, "start vector length mismatch");
  if (!start.empty()) {
    // a custom start must carry the same canonical parameters as xi
    std::vector<double> c0 = canonical_params(start, kernel);
    std::vector<double> c1 = canonical_params(xi, kernel);
    for (std::size_t k = 0; k < c0.size(); ++k)
      if (std::abs(c0[k] - c1[k]) > 1e-6)
        raise(Errc::invalid_argument,
              "start vector violates the dual constraint of xi");
  }
  InnerState st = make_state(init);
  FitResult res = inner_solve(design, kernel, q, gamma, xi, cfg.tol_mean,
                              cfg.max_inner_iters, trace, st, {});
  res.outer_iters = 1;
  return res;
}

FitResult gipf_solve(const DesignMatrix& design, const KernelBasis& kernel,
                     std::span<const double> q, std::span<const double> xi,
                     const ScalingConfig& cfg, const IterationTrace& trace) {
  validate_inputs(design, kernel, q, 1.0, xi);
  double qtotal = 0.0;
  for (double v : q) qtotal += v;
  if (std::abs(qtotal - 1.0) > 1e-6)
    raise(Errc::invalid_argument, "gipf_solve needs a probability vector q");

  // cells not covered by any column stay fixed at their offset value, so
  // the fixed mass bounds every achievable total from below
  double fixed_mass = 0.0;
  for (std::size_t i = 0; i < design.cell_count(); ++i) {
    bool covered = false;
    for (std::size_t j = 0; j < design.param_count(); ++j)
      if (design.a(i, j) != 0) covered = true;
    if (!covered) fixed_mass += xi[i];
  }
  if (fixed_mass >= 1.0 - 1e-9)
    raise(Errc::bracket_failure,
          "offset mass on cells without parameters reaches one; no "
          "normalizable solution exists");

  std::vector<double> log_xi(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) log_xi[i] = std::log(xi[i]);

  InnerState st = make_state(xi);
  long outer = 0;
  long inner_total = 0;

  // residual tolerance schedule: coarse for the first couple of outer
  // steps, full precision afterwards
  auto inner_tol = [&](long d) {
    return cfg.tol_mean * std::max(1.0, std::pow(10.0, 2.0 - double(d)));
  };

  FitResult best;
  best.residual_total = std::numeric_limits<double>::infinity();

  auto evaluate = [&](double gamma) -> FitResult {
    const double tol = inner_tol(outer);
    FitResult r = inner_solve(design, kernel, q, gamma, xi, tol,
                              cfg.max_inner_iters, trace, st, log_xi);
    ++outer;
    inner_total += r.inner_iters;
    // a coarse-tolerance total near one may be acceptance noise; refine at
    // full tolerance before judging (cheap thanks to the warm start)
    if (tol > cfg.tol_mean &&
        r.residual_total <= std::max(cfg.tol_total, 100.0 * tol)) {
      r = inner_solve(design, kernel, q, gamma, xi, cfg.tol_mean,
                      cfg.max_inner_iters, trace, st, log_xi);
      ++outer;
      inner_total += r.inner_iters;
    }
    if (r.residual_total < best.residual_total) best = r;
    return r;
  };

  auto finish = [&](FitResult r) {
    r.kind = Kind::probability;
    r.outer_iters = outer;
    r.inner_iters = inner_total;
    return r;
  };

  auto total_of = [](const FitResult& r) {
    double t = 0.0;
    for (double v : r.fitted) t += v;
    return t;
  };

  FitResult cur = evaluate(1.0);
  if (cur.residual_total <= cfg.tol_total) return finish(cur);
  const bool start_above = total_of(cur) > 1.0;

  // Expand a multiplicative bracket gamma * 2^(+-k) until the total crosses
  // 1. The likely direction (down when the total started above 1) is probed
  // first at each k, but both rays are walked so correctness does not rest
  // on monotonicity of the total in gamma.
  double gamma_neg = 0.0, gamma_pos = 0.0;  // totals < 1 / > 1
  (start_above ? gamma_pos : gamma_neg) = 1.0;
  {
    double last_down = 1.0, last_up = 1.0;
    bool found = false;
    for (int k = 1; k <= 60 && !found && outer < cfg.max_outer_iters; ++k) {
      const double step = std::ldexp(1.0, k);  // 2^k
      const double cand[2] = {start_above ? 1.0 / step : step,
                              start_above ? step : 1.0 / step};
      for (double g : cand) {
        FitResult r = evaluate(g);
        if (r.residual_total <= cfg.tol_total) return finish(r);
        const bool above = total_of(r) > 1.0;
        double& same_ray_prev = g < 1.0 ? last_down : last_up;
        if (above != start_above) {
          gamma_neg = above ? same_ray_prev : g;
          gamma_pos = above ? g : same_ray_prev;
          found = true;
          break;
        }
        same_ray_prev = g;
        if (outer >= cfg.max_outer_iters) break;
      }
    }
    if (!found) {
      if (outer >= cfg.max_outer_iters)
        throw MaxItersError(finish(best),
                            "outer adjustment loop exceeded max_outer_iters");
      raise(Errc::bracket_failure,
            "no gamma bracket with totals straddling 1 was found");
    }
  }

  // bisection in log gamma; each step halves the bracket, so the total of
  // the accepted iterate moves strictly closer to 1
  while (outer < cfg.max_outer_iters) {
    const double mid =
        std::exp(0.5 * (std::log(gamma_neg) + std::log(gamma_pos)));
    FitResult r = evaluate(mid);
    if (r.residual_total <= cfg.tol_total) return finish(r);
    (total_of(r) > 1.0 ? gamma_pos : gamma_neg) = mid;
    const double ratio = std::max(gamma_neg, gamma_pos) /
                         std::min(gamma_neg, gamma_pos);
    if (ratio - 1.0 < 8.0 * std::numeric_limits<double>::epsilon()) break;
  }

  throw MaxItersError(finish(best),
                      "outer adjustment loop exceeded max_outer_iters");
}

FitResult fit_mle(const ModelSpec& model, std::span<const double> y,
                  SamplingKind kind, const ScalingConfig& cfg,
                  const IterationTrace& trace) {
  const std::size_t icount = model.design.cell_count();
  if (y.size() != icount)
    raise(Errc::dimension_mismatch, "data length does not match design");
  for (double v : y)
    if (v < 0.0) raise(Errc::non_positive_input, "counts must be >= 0");

  std::vector<double> suff = mean_value_params(y, model.design);
  for (double s : suff)
    if (!(s > 0.0))
      raise(Errc::zero_sufficient_statistic,
            "a sufficient statistic of the data is zero; the MLE may not "
            "exist");

  if (kind == SamplingKind::poisson) {
    FitResult r = ipf_solve(model.design, model.kernel, y, 1.0, model.offset,
                            cfg, trace);
    r.kind = Kind::intensity;
    return r;
  }

  double n = 0.0;
  for (double v : y) n += v;
  std::vector<double> q(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) q[i] = y[i] / n;

  if (model.design.has_overall) {
    FitResult r = ipf_solve(model.design, model.kernel, q, 1.0, model.offset,
                            cfg, trace);
    r.kind = Kind::probability;
    return r;
  }
  return gipf_solve(model.design, model.kernel, q, model.offset, cfg, trace);
}

}  // namespace loglin
