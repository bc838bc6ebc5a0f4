#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "loglin/gof.hpp"
#include "loglin/model_io.hpp"
#include "loglin/power.hpp"

using namespace loglin;

namespace {
std::vector<double> normalizedv(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  return v;
}
}  // namespace

TEST_CASE("geometric power of the null against itself is zero") {
  ModelSpec vac = builtin_model("vaccine");
  auto est = geometric_power_mc(vac, vac, 1e-5, 500,
                                DirichletParams::symmetric(1.0, 4), 4242);
  CHECK(est.rate <= 0.001);
  CHECK(est.n_failed == 0);
  CHECK(est.mode == PowerMode::geometric);
}

TEST_CASE("geometric power is exactly monotone over a shared replicate set") {
  ModelSpec ind = builtin_model("indep2x2");
  ModelSpec alt =
      with_offset(ind, offset_from_odds(ind, std::vector<double>{5.0}));
  std::vector<double> eps = {0.05, 0.1, 0.2, 0.3, 0.4, 1e6};
  auto ests = geometric_power_mc(ind, alt, eps, 2000,
                                 DirichletParams::symmetric(1.0, 4), 4242);
  for (std::size_t e = 1; e < ests.size(); ++e)
    CHECK(ests[e].rate <= ests[e - 1].rate);
  CHECK(ests.back().rate == 0.0);  // empty rejection region
  CHECK(ests.front().rate > 0.3);
}

TEST_CASE("larger effects reject more often") {
  ModelSpec ind = builtin_model("indep2x2");
  std::vector<double> eps = {0.1, 0.2};
  std::vector<double> r5, r50;
  for (double odds : {5.0, 50.0}) {
    ModelSpec alt =
        with_offset(ind, offset_from_odds(ind, std::vector<double>{odds}));
    auto ests = geometric_power_mc(ind, alt, eps, 2000,
                                   DirichletParams::symmetric(1.0, 4), 4242);
    (odds == 5.0 ? r5 : r50) = {ests[0].rate, ests[1].rate};
  }
  CHECK(r50[0] >= r5[0]);
  CHECK(r50[1] >= r5[1]);
}

TEST_CASE("cumulative power is monotone in alpha over shared draws") {
  ModelSpec vac = builtin_model("vaccine");
  ModelSpec alt =
      with_offset(vac, offset_from_odds(vac, std::vector<double>{1.0, 2.0}));
  std::vector<double> alphas = {0.05, 0.10};
  auto ests = cumulative_power_mc(vac, alt, 300, alphas, 1500,
                                  DirichletParams::symmetric(1.0, 4), 4242);
  CHECK(ests[1].rate >= ests[0].rate);
  CHECK(ests[0].ci_lo <= ests[0].rate);
  CHECK(ests[0].ci_hi >= ests[0].rate);
}

TEST_CASE("type-I error stays near the level under the null") {
  ModelSpec vac = builtin_model("vaccine");
  auto est = cumulative_power_mc(vac, vac, 500, 0.05, 2000,
                                 DirichletParams::symmetric(1.0, 4), 4242);
  CHECK(est.rate > 0.05 - 4.0 * std::sqrt(0.05 * 0.95 / 2000.0));
  CHECK(est.rate < 0.05 + 4.0 * std::sqrt(0.05 * 0.95 / 2000.0));
}

TEST_CASE("posteriori analysis needs positive counts") {
  ModelSpec vac = builtin_model("vaccine");
  std::vector<double> bad = {80, 0, 44, 64};
  CHECK_THROWS_AS(
      posteriori_cumulative(vac, bad, std::vector<double>{0.05}, 100,
                            DirichletParams::symmetric(1.0, 4), 1),
      Error);
}

TEST_CASE("posteriori rate lands near the published study value") {
  ModelSpec vac = builtin_model("vaccine");
  std::vector<double> y = {80, 12, 44, 64};
  auto est =
      posteriori_cumulative(vac, y, std::vector<double>{0.05}, 2000,
                            DirichletParams::symmetric(1.0, 4), 4242);
  CHECK(est[0].rate == doctest::Approx(0.903).epsilon(0.03));
}

TEST_CASE("replicates with vanishing sufficient statistics are excluded") {
  // with N = 1 a realization in the first or last cell zeroes one of the
  // two sufficient statistics, so a sizable share of replicates must be
  // excluded rather than crash the estimator
  ModelSpec vac = builtin_model("vaccine");
  auto est = cumulative_power_mc(vac, vac, 1, 0.05, 50,
                                 DirichletParams::symmetric(1.0, 4), 4242);
  CHECK(est.n_failed > 0);
  CHECK(est.n_failed < 50);
  CHECK(est.rate >= 0.0);
  CHECK(est.rate <= 1.0);
}

TEST_CASE("power table layout, metadata and target search") {
  ModelSpec vac = builtin_model("vaccine");
  std::vector<OffsetSpec> alts = {
      {"k=2", offset_from_odds(vac, std::vector<double>{1.0, 2.0})},
      {"k=3", offset_from_odds(vac, std::vector<double>{1.0, 3.0})}};
  PowerTable table = power_table(vac, alts, {100, 200}, {0.05, 0.10}, 300,
                                 1.0, 4242);
  table.model_hash = model_hash(vac);
  REQUIRE(table.cells.size() == 8);
  CHECK(table.cells[0].offset_label == "k=2");
  CHECK(table.cells[0].n == 100);
  CHECK(table.cells[0].alpha == 0.05);
  CHECK(table.cells[1].alpha == 0.10);
  CHECK(table.cells[4].offset_label == "k=3");

  PowerTable synth;
  synth.cells = {PowerCell{200, 0.05, "k", 0.70, 0, 0, 10, 0},
                 PowerCell{300, 0.05, "k", 0.82, 0, 0, 10, 0},
                 PowerCell{400, 0.05, "k", 0.85, 0, 0, 10, 0}};
  CHECK(smallest_n_reaching(synth, "k", 0.05, 0.80) == 300);
  CHECK(!smallest_n_reaching(synth, "k", 0.05, 0.99).has_value());
  CHECK(!smallest_n_reaching(synth, "other", 0.05, 0.5).has_value());
}

TEST_CASE("power csv round-trips losslessly") {
  ModelSpec ind = builtin_model("indep2x2");
  // the comma-bearing label exercises the CSV quoting path
  std::vector<OffsetSpec> alts = {
      {"odds=5,0", offset_from_odds(ind, std::vector<double>{5.0})}};
  PowerTable table =
      power_table(ind, alts, {50, 100}, {0.05}, 200, 1.0, 99);
  table.model_hash = model_hash(ind);
  const std::string first = power_csv_string(table);
  std::istringstream is(first);
  PowerTable parsed = read_power_csv(is);
  CHECK(parsed.seed == table.seed);
  CHECK(parsed.n_sim == table.n_sim);
  CHECK(parsed.model_hash == table.model_hash);
  REQUIRE(parsed.cells.size() == table.cells.size());
  CHECK(parsed.cells[0].offset_label == "odds=5,0");
  const std::string second = power_csv_string(parsed);
  CHECK(first == second);
}

TEST_CASE("estimates are identical across runs and worker counts") {
  ModelSpec vac = builtin_model("vaccine");
  std::vector<OffsetSpec> alts = {
      {"k=2", offset_from_odds(vac, std::vector<double>{1.0, 2.0})}};
  PowerTable a = power_table(vac, alts, {150, 250}, {0.05}, 400, 1.0, 4242, 1);
  PowerTable b = power_table(vac, alts, {150, 250}, {0.05}, 400, 1.0, 4242, 1);
  PowerTable c = power_table(vac, alts, {150, 250}, {0.05}, 400, 1.0, 4242, 4);
  a.model_hash = b.model_hash = c.model_hash = model_hash(vac);
  CHECK(power_csv_string(a) == power_csv_string(b));
  CHECK(power_csv_string(a) == power_csv_string(c));
}

TEST_CASE("pearson statistics of a correct model follow the chi-square law") {
  // simulate from a point on the null surface, fit, and compare the
  // empirical X2 distribution with chi-square via Kolmogorov-Smirnov
  ModelSpec vac = builtin_model("vaccine");
  const double th0 = 0.7, th1 = 0.3;
  std::vector<double> truth = {th0 * th0 * th0, th0 * th0 * th1, th0 * th1,
                               th1};
  const long reps = 10000;
  const std::int64_t n = 10000;
  std::vector<double> stats;
  stats.reserve(reps);
  for (long u = 0; u < reps; ++u) {
    RngStream rng(777, static_cast<std::uint64_t>(u));
    auto f = multinomial_draw(n, truth, rng);
    std::vector<double> y(4);
    for (int i = 0; i < 4; ++i) y[i] = static_cast<double>(f[i]);
    FitResult fit = fit_mle(vac, y, SamplingKind::multinomial);
    std::vector<double> yhat(4);
    for (int i = 0; i < 4; ++i)
      yhat[i] = static_cast<double>(n) * fit.fitted[i];
    stats.push_back(pearson_x2(y, yhat));
  }
  std::sort(stats.begin(), stats.end());
  double ks = 0.0;
  for (long i = 0; i < reps; ++i) {
    const double f = chi2_cdf(stats[i], 2.0);
    ks = std::max(ks, std::abs(f - (i + 1.0) / reps));
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / reps));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("trace csv round-trips losslessly") {
  std::vector<TraceRow> rows;
  ModelSpec vac = builtin_model("vaccine");
  std::vector<double> q = normalizedv({80, 12, 44, 64});
  auto capture = [&rows](long it, double rm, double rd, double br) {
    rows.push_back(TraceRow{it, rm, rd, br});
  };
  ipf_solve(vac.design, vac.kernel, q, 1.0, vac.offset, {}, capture);
  REQUIRE(rows.size() > 5);
  std::ostringstream os;
  write_trace_csv(os, rows);
  const std::string first = os.str();
  std::istringstream is(first);
  auto parsed = read_trace_csv(is);
  REQUIRE(parsed.size() == rows.size());
  std::ostringstream os2;
  write_trace_csv(os2, parsed);
  CHECK(first == os2.str());
  // bregman trace is non-increasing for gamma = 1 (divergence descent)
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].bregman <= rows[i - 1].bregman + 1e-12);
}

TEST_CASE("power input validation") {
  ModelSpec vac = builtin_model("vaccine");
  ModelSpec ind = builtin_model("indep2x2");
  CHECK_THROWS_AS(cumulative_power_mc(vac, ind, 100, 0.05, 10,
                                      DirichletParams::symmetric(1.0, 4), 1),
                  Error);
  CHECK_THROWS_AS(geometric_power_mc(vac, vac, -0.1, 10,
                                     DirichletParams::symmetric(1.0, 4), 1),
                  Error);
  CHECK_THROWS_AS(cumulative_power_mc(vac, vac, 100, 1.5, 10,
                                      DirichletParams::symmetric(1.0, 4), 1),
                  Error);
  CHECK_THROWS_AS(
      power_table(vac, {}, {100}, {0.05}, 10, 1.0, 1), Error);
}
