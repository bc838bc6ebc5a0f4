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

// Command-line front end: model loading, MLE and goodness-of-fit reports,
// Monte-Carlo power estimation (geometric / cumulative / posteriori /
// table), alternative-surface sampling and scripted reproduction of the
// published analyses bundled with the built-in models.
//
// Exit codes: 0 ok; 1 input error; 2 solver failure; 3 more than 1% of
// power cells failed; 4 reproduction mismatch against reference values.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loglin/gof.hpp"
#include "loglin/model_io.hpp"
#include "loglin/power.hpp"
#include "loglin/repro.hpp"
#include "loglin/sampling.hpp"
#include "loglin/scaling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace loglin;

namespace {

constexpr std::uint64_t kDefaultSeed = 4242;
constexpr long kDefaultNsim = 10000;

struct CommonOpts {
  std::string model = "vaccine";
  std::string xi_csv;
  std::string odds_csv;
  bool emit_kernel = false;
};

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  // lo:hi:step ranges or comma lists
  if (text.find(':') != std::string::npos) {
    double lo, hi, step;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        step <= 0)
      raise(Errc::invalid_argument, "cannot parse range: " + text);
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      raise(Errc::invalid_argument, "cannot parse number: " + tok);
    }
  }
  if (out.empty()) raise(Errc::invalid_argument, "empty list: " + text);
  return out;
}

std::vector<long long> parse_sizes(const std::string& text) {
  std::vector<long long> out;
  for (double v : parse_real_list(text)) {
    const long long n = static_cast<long long>(std::llround(v));
    if (n < 1 || std::abs(v - static_cast<double>(n)) > 1e-9)
      raise(Errc::invalid_argument, "sample sizes must be positive integers");
    out.push_back(n);
  }
  return out;
}

ModelSpec load_with_offset(const CommonOpts& opts) {
  ModelSpec model = load_model(opts.model);
  if (!opts.xi_csv.empty() && !opts.odds_csv.empty())
    raise(Errc::invalid_argument, "--xi and --odds are mutually exclusive");
  if (!opts.xi_csv.empty())
    model = with_offset(model, parse_real_list(opts.xi_csv));
  if (!opts.odds_csv.empty())
    model = with_offset(model,
                        offset_from_odds(model, parse_real_list(opts.odds_csv)));
  if (opts.emit_kernel) {
    json rows = json::array();
    for (std::size_t k = 0; k < model.kernel.dof(); ++k) {
      json row = json::array();
      for (std::size_t i = 0; i < model.kernel.cell_count(); ++i)
        row.push_back(model.kernel.d(k, i));
      rows.push_back(row);
    }
    std::cout << "kernel: " << rows.dump() << "\n";
  }
  return model;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::invalid_argument, "cannot write " + path.string());
  out << content;
}

// running-index trace writer for --trace
struct TraceFile {
  std::ofstream out;
  long row = 0;
  explicit TraceFile(const std::string& path) : out(path, std::ios::binary) {
    if (!out) raise(Errc::invalid_argument, "cannot write " + path);
    out << "iter,residual_mean,residual_dual,bregman\n";
  }
  IterationTrace callback() {
    return [this](long, double rm, double rd, double br) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%ld,%.9e,%.9e,%.9e\n", row++, rm, rd,
                    br);
      out << buf;
    };
  }
};

void print_fit(const FitResult& fit, bool as_json) {
  if (as_json) {
    json j;
    j["fitted"] = fit.fitted;
    j["kind"] = fit.kind == Kind::probability ? "probability" : "intensity";
    j["gamma"] = fit.gamma;
    j["inner_iters"] = fit.inner_iters;
    j["outer_iters"] = fit.outer_iters;
    j["residual_mean"] = fit.residual_mean;
    j["residual_dual"] = fit.residual_dual;
    j["residual_total"] = fit.residual_total;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "fitted:";
  for (double v : fit.fitted) std::printf(" %.6f", v);
  std::printf("\ngamma: %.6f\n", fit.gamma);
  std::printf("inner_iters: %ld\nouter_iters: %ld\n", fit.inner_iters,
              fit.outer_iters);
  std::printf(
      "residual_mean: %.3e\nresidual_dual: %.3e\nresidual_total: %.3e\n",
      fit.residual_mean, fit.residual_dual, fit.residual_total);
}

SamplingKind kind_from_string(const std::string& kind) {
  if (kind == "poisson") return SamplingKind::poisson;
  if (kind == "multinomial") return SamplingKind::multinomial;
  raise(Errc::invalid_argument, "kind must be multinomial or poisson");
}

// explicit --kind wins; otherwise intensity-kind model files mean poisson
SamplingKind resolve_kind(const CommonOpts& common, const std::string& kind,
                          bool kind_given) {
  if (kind_given) return kind_from_string(kind);
  return model_kind(common.model) == Kind::intensity ? SamplingKind::poisson
                                                     : SamplingKind::multinomial;
}

int run_mle(const CommonOpts& common, const std::string& data,
            const std::string& kind, bool kind_given,
            const std::string& trace_path, bool as_json) {
  ModelSpec model = load_with_offset(common);
  std::vector<double> y = read_counts(data);
  const SamplingKind sk = resolve_kind(common, kind, kind_given);
  FitResult fit;
  if (!trace_path.empty()) {
    TraceFile trace(trace_path);
    fit = fit_mle(model, y, sk, {}, trace.callback());
  } else {
    fit = fit_mle(model, y, sk);
  }
  print_fit(fit, as_json);
  return 0;
}

int run_gof(const CommonOpts& common, const std::string& data,
            const std::string& kind, bool kind_given, bool as_json) {
  ModelSpec model = load_with_offset(common);
  std::vector<double> y = read_counts(data);
  const SamplingKind sk = resolve_kind(common, kind, kind_given);
  FitResult fit = fit_mle(model, y, sk);
  double total = 0.0;
  for (double v : y) total += v;
  std::vector<double> yhat(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    yhat[i] = sk == SamplingKind::multinomial ? total * fit.fitted[i]
                                              : fit.fitted[i];
  GofReport rep = gof_report(y, yhat, static_cast<long>(model.kernel.dof()));

  // observed odds per kernel row (defined only for strictly positive data)
  bool positive = true;
  for (double v : y) positive = positive && v > 0.0;
  std::vector<double> odds;
  if (positive && model.kernel.dof() > 0) {
    std::vector<double> p0(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) p0[i] = y[i] / total;
    for (double c : canonical_params(p0, model.kernel))
      odds.push_back(std::exp(c));
  }

  if (as_json) {
    json j;
    j["x2"] = rep.x2;
    j["g2"] = rep.g2;
    j["df"] = rep.df;
    j["phi"] = rep.phi;
    j["w"] = rep.w;
    j["p_value"] = rep.p_value;
    j["fitted"] = yhat;
    j["gamma"] = fit.gamma;
    if (!odds.empty()) j["observed_odds"] = odds;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::printf(
      "X2: %.6f\nG2: %.6f\ndf: %ld\nphi: %.6f\nw: %.6f\np_value: %.6g\n",
      rep.x2, rep.g2, rep.df, rep.phi, rep.w, rep.p_value);
  std::printf("gamma: %.6f\n", fit.gamma);
  std::cout << "fitted:";
  for (double v : yhat) std::printf(" %.6f", v);
  std::printf("\n");
  if (!odds.empty()) {
    std::cout << "observed_odds:";
    for (double v : odds) std::printf(" %.6f (1/odds %.6f)", v, 1.0 / v);
    std::printf("\n");
  }
  return 0;
}

// marks cells whose failed-replicate share exceeds 1%
int power_exit_code(const PowerTable& table) {
  long bad = 0;
  for (const auto& cell : table.cells)
    if (cell.n_failed * 100 > cell.n_sim) ++bad;
  const double frac =
      table.cells.empty()
          ? 0.0
          : static_cast<double>(bad) / static_cast<double>(table.cells.size());
  return frac > 0.01 ? 3 : 0;
}

std::string label_for(const std::string& odds_csv, const std::string& xi_csv) {
  if (!odds_csv.empty()) return "odds=" + odds_csv;
  if (!xi_csv.empty()) return "xi=" + xi_csv;
  return "null";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative-scaling solvers and Monte-Carlo power analysis for "
               "general log-linear models"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string data, kind = "multinomial", trace_path, out_dir = ".";
  std::string alpha_list = "0.05", epsilon_list = "0.1:0.4:0.05";
  std::string n_list = "200:500:20", odds_list, xi_list;
  std::uint64_t seed = kDefaultSeed;
  long n_sim = kDefaultNsim;
  double dirichlet_alpha = 1.0;
  double target = 0.0;
  int jobs = 1;
  long sample_count = 1;
  bool as_json = false;

  auto add_model_opts = [&](CLI::App* cmd) {
    cmd->add_option("--model", common.model,
                    "builtin name (vaccine, indep2x2) or JSON model path");
    cmd->add_option("--xi", common.xi_csv, "offset vector, comma separated");
    cmd->add_option("--odds", common.odds_csv,
                    "target odds per kernel row, comma separated");
    cmd->add_flag("--emit-kernel", common.emit_kernel,
                  "print the kernel basis rows");
  };
  auto add_mc_opts = [&](CLI::App* cmd) {
    cmd->add_option("--nsim", n_sim, "Monte-Carlo replications");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--dirichlet-alpha", dirichlet_alpha,
                    "symmetric Dirichlet parameter for the simplex draws");
    cmd->add_option("--jobs", jobs, "worker threads");
    cmd->add_option("--out", out_dir, "output directory for CSV files");
  };

  auto* mle_cmd = app.add_subcommand("mle", "maximum likelihood fit");
  add_model_opts(mle_cmd);
  mle_cmd->add_option("--data", data, "counts: CSV path or inline list")
      ->required();
  mle_cmd->add_option("--kind", kind, "multinomial or poisson");
  mle_cmd->add_option("--trace", trace_path, "write iteration trace CSV");
  mle_cmd->add_flag("--json", as_json, "print JSON instead of key-value lines");

  auto* gof_cmd = app.add_subcommand("gof", "goodness-of-fit report");
  add_model_opts(gof_cmd);
  gof_cmd->add_option("--data", data, "counts: CSV path or inline list")
      ->required();
  gof_cmd->add_option("--kind", kind, "multinomial or poisson");
  gof_cmd->add_flag("--json", as_json, "print JSON instead of key-value lines");

  auto* power_cmd = app.add_subcommand("power", "Monte-Carlo power analysis");
  power_cmd->require_subcommand(1);

  auto* geo = power_cmd->add_subcommand("geometric",
                                        "surface rejection rate vs epsilon");
  add_model_opts(geo);
  add_mc_opts(geo);
  geo->add_option("--epsilon", epsilon_list, "acceptance radii");
  geo->add_option("--odds-list", odds_list,
                  "alternative family: odds groups separated by ';'");
  geo->add_option("--xi-list", xi_list,
                  "alternative family: offset vectors separated by ';'");

  auto* cum = power_cmd->add_subcommand("cumulative",
                                        "chi-square rejection rate at size N");
  add_model_opts(cum);
  add_mc_opts(cum);
  cum->add_option("--n", n_list, "sample sizes (list or lo:hi:step)");
  cum->add_option("--alpha", alpha_list, "significance levels");

  auto* post = power_cmd->add_subcommand(
      "posteriori", "cumulative power at the observed data");
  add_model_opts(post);
  add_mc_opts(post);
  post->add_option("--data", data, "observed counts")->required();
  post->add_option("--alpha", alpha_list, "significance levels");

  auto* tab = power_cmd->add_subcommand("table", "power table over a grid");
  add_model_opts(tab);
  add_mc_opts(tab);
  tab->add_option("--n", n_list, "sample sizes (list or lo:hi:step)");
  tab->add_option("--alpha", alpha_list, "significance levels");
  tab->add_option("--odds-list", odds_list,
                  "alternative family: odds groups separated by ';'");
  tab->add_option("--xi-list", xi_list,
                  "alternative family: offset vectors separated by ';'");
  tab->add_option("--target", target, "report smallest N reaching this rate");

  auto* repro_cmd = app.add_subcommand(
      "repro", "reproduce the published analyses for the bundled models");
  std::string item;
  repro_cmd
      ->add_option("item", item,
                   "one of: table1, table2, example3, section5, table3")
      ->required();
  repro_cmd->add_option("--nsim", n_sim, "Monte-Carlo replications");
  repro_cmd->add_option("--seed", seed, "RNG seed");
  repro_cmd->add_option("--jobs", jobs, "worker threads");
  repro_cmd->add_option("--out", out_dir, "output directory");

  auto* sample_cmd =
      app.add_subcommand("sample-alt", "draw distributions from the model");
  add_model_opts(sample_cmd);
  sample_cmd->add_option("--nsim", sample_count, "number of draws");
  sample_cmd->add_option("--seed", seed, "RNG seed");
  sample_cmd->add_option("--dirichlet-alpha", dirichlet_alpha,
                         "symmetric Dirichlet parameter");
  sample_cmd->add_option("--out", out_dir, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*mle_cmd)
      return run_mle(common, data, kind, mle_cmd->count("--kind") > 0,
                     trace_path, as_json);
    if (*gof_cmd)
      return run_gof(common, data, kind, gof_cmd->count("--kind") > 0,
                     as_json);

    if (*sample_cmd) {
      ModelSpec model = load_with_offset(common);
      std::ostringstream os;
      for (long u = 0; u < sample_count; ++u) {
        RngStream rng(seed, static_cast<std::uint64_t>(u));
        auto pi = sample_from_alternative(
            model,
            DirichletParams::symmetric(dirichlet_alpha,
                                       model.design.cell_count()),
            rng);
        for (std::size_t i = 0; i < pi.size(); ++i) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.12f", pi[i]);
          os << (i ? "," : "") << buf;
        }
        os << "\n";
      }
      if (sample_cmd->count("--out")) {
        write_file(out_dir, os.str());
      } else {
        std::cout << os.str();
      }
      return 0;
    }

    if (*repro_cmd) {
      repro::ItemReport rep;
      if (item == "table1")
        rep = repro::run_table1();
      else if (item == "table2")
        rep = repro::run_table2();
      else if (item == "example3")
        rep = repro::run_example3(seed, n_sim, jobs);
      else if (item == "section5")
        rep = repro::run_section5(seed, n_sim, jobs);
      else if (item == "table3")
        rep = repro::run_table3(seed, n_sim, jobs);
      else {
        std::cerr << "unknown repro item: " << item << "\n";
        return 1;
      }
      fs::create_directories(out_dir);
      for (const auto& [name, content] : rep.artifacts)
        write_file(fs::path(out_dir) / name, content);
      const std::string text = repro::format_report(rep);
      std::cout << text;
      write_file(fs::path(out_dir) / (rep.item + "_report.txt"), text);
      return rep.all_pass() ? 0 : 4;
    }

    // power subcommands
    ModelSpec null_model = load_with_offset(common);
    fs::create_directories(out_dir);
    const DirichletParams dir = DirichletParams::symmetric(
        dirichlet_alpha, null_model.design.cell_count());

    auto alternatives = [&]() {
      std::vector<OffsetSpec> alts;
      auto split = [](const std::string& text) {
        std::vector<std::string> groups;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ';'))
          if (!tok.empty()) groups.push_back(tok);
        return groups;
      };
      if (!odds_list.empty() && !xi_list.empty())
        raise(Errc::invalid_argument,
              "--odds-list and --xi-list are mutually exclusive");
      for (const auto& g : split(odds_list))
        alts.push_back(OffsetSpec{
            "odds=" + g, offset_from_odds(null_model, parse_real_list(g))});
      for (const auto& g : split(xi_list))
        alts.push_back(OffsetSpec{"xi=" + g, parse_real_list(g)});
      if (alts.empty()) {
        // single alternative taken from --odds/--xi (already folded into
        // the model offset by load_with_offset)
        alts.push_back(OffsetSpec{
            label_for(common.odds_csv, common.xi_csv), null_model.offset});
      }
      return alts;
    };

    if (*geo) {
      std::vector<double> epsilons = parse_real_list(epsilon_list);
      std::vector<OffsetSpec> alts = alternatives();
      PowerTable table;
      table.mode = PowerMode::geometric;
      table.seed = seed;
      table.n_sim = n_sim;
      table.dirichlet_alpha = dirichlet_alpha;
      table.model_name = null_model.name;
      table.model_hash = model_hash(null_model);
      ModelSpec base = with_offset(null_model, {});  // all-ones null
      for (std::size_t a = 0; a < alts.size(); ++a) {
        ModelSpec alt = with_offset(null_model, alts[a].offset);
        auto ests = geometric_power_mc(base, alt, epsilons, n_sim, dir, seed,
                                       a * static_cast<std::uint64_t>(n_sim),
                                       jobs);
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
          PowerCell cell;
          cell.n = 1;
          cell.alpha = epsilons[e];
          cell.offset_label = alts[a].label;
          cell.rate = ests[e].rate;
          cell.ci_lo = ests[e].ci_lo;
          cell.ci_hi = ests[e].ci_hi;
          cell.n_sim = ests[e].n_sim;
          cell.n_failed = ests[e].n_failed;
          table.cells.push_back(cell);
        }
      }
      const fs::path path = fs::path(out_dir) / "power_geometric.csv";
      write_file(path, power_csv_string(table));
      std::cout << "wrote " << path.string() << " (" << table.cells.size()
                << " cells)\n";
      return power_exit_code(table);
    }

    if (*cum || *tab) {
      std::vector<long long> sizes = parse_sizes(n_list);
      std::vector<double> alphas = parse_real_list(alpha_list);
      std::vector<OffsetSpec> alts = alternatives();
      ModelSpec base = with_offset(null_model, {});
      PowerTable table = power_table(base, alts, sizes, alphas, n_sim,
                                     dirichlet_alpha, seed, jobs);
      table.model_hash = model_hash(null_model);
      const char* name = *cum ? "power_cumulative.csv" : "power_table.csv";
      const fs::path path = fs::path(out_dir) / name;
      write_file(path, power_csv_string(table));
      std::cout << "wrote " << path.string() << " (" << table.cells.size()
                << " cells)\n";
      if (target > 0.0) {
        for (const auto& alt : alts)
          for (double a : alphas) {
            auto n80 = smallest_n_reaching(table, alt.label, a, target);
            if (n80)
              std::printf(
                  "smallest N with rate >= %.4f (%s, alpha=%g): %lld\n",
                  target, alt.label.c_str(), a, *n80);
            else
              std::printf("target %.4f not reached (%s, alpha=%g)\n", target,
                          alt.label.c_str(), a);
          }
      }
      return power_exit_code(table);
    }

    if (*post) {
      std::vector<double> alphas = parse_real_list(alpha_list);
      std::vector<double> f0 = read_counts(data);
      // the null hypothesis is the unshifted model; the offset class comes
      // from the observed table itself
      ModelSpec base = with_offset(null_model, {});
      auto ests =
          posteriori_cumulative(base, f0, alphas, n_sim, dir, seed, jobs);
      double total = 0.0;
      for (double v : f0) total += v;
      PowerTable table;
      table.mode = PowerMode::cumulative;
      table.seed = seed;
      table.n_sim = n_sim;
      table.dirichlet_alpha = dirichlet_alpha;
      table.model_name = null_model.name;
      table.model_hash = model_hash(null_model);
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        PowerCell cell;
        cell.n = static_cast<long long>(std::llround(total));
        cell.alpha = alphas[k];
        cell.offset_label = "posteriori";
        cell.rate = ests[k].rate;
        cell.ci_lo = ests[k].ci_lo;
        cell.ci_hi = ests[k].ci_hi;
        cell.n_sim = ests[k].n_sim;
        cell.n_failed = ests[k].n_failed;
        table.cells.push_back(cell);
        std::printf("alpha=%g rate=%.4f ci=(%.4f,%.4f) n_failed=%ld\n",
                    alphas[k], cell.rate, cell.ci_lo, cell.ci_hi,
                    cell.n_failed);
      }
      const fs::path path = fs::path(out_dir) / "power_posteriori.csv";
      write_file(path, power_csv_string(table));
      std::cout << "wrote " << path.string() << "\n";
      return power_exit_code(table);
    }
  } catch (const MaxItersError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::zero_sufficient_statistic:
      case Errc::bracket_failure:
      case Errc::max_iters_exceeded:
      case Errc::degenerate_draw:
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
      default:
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
