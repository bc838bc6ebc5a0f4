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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "loglin/design.hpp"
#include "loglin/gof.hpp"
#include "loglin/model_io.hpp"
#include "loglin/power.hpp"
#include "loglin/rng.hpp"
#include "loglin/sampling.hpp"
#include "loglin/scaling.hpp"

namespace py = pybind11;
using namespace loglin;

namespace {

IntMat to_int_mat(const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty()) raise(Errc::invalid_argument, "empty matrix");
  IntMat m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols)
      raise(Errc::dimension_mismatch, "ragged matrix");
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<std::int64_t>> kernel_rows(const ModelSpec& m) {
  std::vector<std::vector<std::int64_t>> rows(m.kernel.dof());
  for (std::size_t k = 0; k < m.kernel.dof(); ++k) {
    rows[k].resize(m.kernel.cell_count());
    for (std::size_t i = 0; i < m.kernel.cell_count(); ++i)
      rows[k][i] = m.kernel.d(k, i);
  }
  return rows;
}

py::dict fit_to_dict(const FitResult& fit) {
  py::dict d;
  d["fitted"] = fit.fitted;
  d["kind"] = fit.kind == Kind::probability ? "probability" : "intensity";
  d["gamma"] = fit.gamma;
  d["inner_iters"] = fit.inner_iters;
  d["outer_iters"] = fit.outer_iters;
  d["residual_mean"] = fit.residual_mean;
  d["residual_dual"] = fit.residual_dual;
  d["residual_total"] = fit.residual_total;
  return d;
}

py::dict estimate_to_dict(const PowerEstimate& e) {
  py::dict d;
  d["rate"] = e.rate;
  d["n_sim"] = e.n_sim;
  d["n_failed"] = e.n_failed;
  d["ci"] = py::make_tuple(e.ci_lo, e.ci_hi);
  return d;
}

SamplingKind parse_kind(const std::string& kind) {
  if (kind == "poisson") return SamplingKind::poisson;
  if (kind == "multinomial") return SamplingKind::multinomial;
  raise(Errc::invalid_argument, "kind must be multinomial or poisson");
}

}  // namespace

PYBIND11_MODULE(loglin, m) {
  m.doc() = "Iterative-scaling solvers and Monte-Carlo power analysis for "
            "general log-linear models";

  py::register_exception<Error>(m, "LoglinError");

  py::class_<ModelSpec>(m, "Model")
      .def(py::init([](const std::vector<std::vector<std::int64_t>>& design,
                       std::vector<double> offset) {
             return make_model(validate_design(to_int_mat(design)),
                               std::move(offset));
           }),
           py::arg("design"), py::arg("offset") = std::vector<double>{})
      .def_static("builtin", &builtin_model, py::arg("name"))
      .def_static("load", &load_model, py::arg("path_or_name"))
      .def_property_readonly("cells",
                             [](const ModelSpec& m) {
                               return m.design.cell_count();
                             })
      .def_property_readonly("params",
                             [](const ModelSpec& m) {
                               return m.design.param_count();
                             })
      .def_property_readonly("dof",
                             [](const ModelSpec& m) { return m.kernel.dof(); })
      .def_property_readonly("has_overall_effect",
                             [](const ModelSpec& m) {
                               return m.design.has_overall;
                             })
      .def_property_readonly(
          "offset", [](const ModelSpec& m) { return m.offset; })
      .def_property_readonly("kernel", &kernel_rows)
      .def("with_offset",
           [](const ModelSpec& m, std::vector<double> offset) {
             return with_offset(m, std::move(offset));
           },
           py::arg("offset"))
      .def("with_odds",
           [](const ModelSpec& m, const std::vector<double>& odds) {
             return with_offset(m, offset_from_odds(m, odds));
           },
           py::arg("odds"),
           "model whose kernel contrasts of the offset equal log(odds)")
      .def("canonical_params",
           [](const ModelSpec& m, const std::vector<double>& p) {
             return canonical_params(p, m.kernel);
           },
           py::arg("p"))
      .def("mean_value_params",
           [](const ModelSpec& m, const std::vector<double>& p) {
             return mean_value_params(p, m.design);
           },
           py::arg("p"))
      .def("__repr__", [](const ModelSpec& m) {
        return "<loglin.Model cells=" + std::to_string(m.design.cell_count()) +
               " params=" + std::to_string(m.design.param_count()) +
               " dof=" + std::to_string(m.kernel.dof()) + ">";
      });

  m.def("mle",
        [](const ModelSpec& model, const std::vector<double>& y,
           const std::string& kind) {
          return fit_to_dict(fit_mle(model, y, parse_kind(kind)));
        },
        py::arg("model"), py::arg("y"), py::arg("kind") = "multinomial");

  m.def("bregman_divergence",
        [](const std::vector<double>& t, const std::vector<double>& u) {
          return bregman_divergence(t, u);
        },
        py::arg("t"), py::arg("u"));

  m.def("pearson_x2",
        [](const std::vector<double>& y, const std::vector<double>& yhat) {
          return pearson_x2(y, yhat);
        },
        py::arg("y"), py::arg("yhat"));
  m.def("deviance_g2",
        [](const std::vector<double>& y, const std::vector<double>& yhat) {
          return deviance_g2(y, yhat);
        },
        py::arg("y"), py::arg("yhat"));
  m.def("chi2_cdf", &chi2_cdf, py::arg("x"), py::arg("df"));
  m.def("chi2_quantile", &chi2_quantile, py::arg("p"), py::arg("df"));
  m.def("noncentral_chi2_cdf", &noncentral_chi2_cdf, py::arg("x"),
        py::arg("df"), py::arg("lam"));
  m.def("classical_power", &classical_power, py::arg("lam"), py::arg("df"),
        py::arg("alpha"));

  m.def("dirichlet_draw",
        [](double alpha, std::size_t n, std::uint64_t seed,
           std::uint64_t stream) {
          RngStream rng(seed, stream);
          return dirichlet_draw(DirichletParams::symmetric(alpha, n), rng)
              .values;
        },
        py::arg("alpha"), py::arg("n"), py::arg("seed"),
        py::arg("stream") = 0);

  m.def("multinomial_draw",
        [](std::int64_t n, const std::vector<double>& p, std::uint64_t seed,
           std::uint64_t stream) {
          RngStream rng(seed, stream);
          return multinomial_draw(n, p, rng);
        },
        py::arg("n"), py::arg("p"), py::arg("seed"), py::arg("stream") = 0);

  m.def("sample_alternative",
        [](const ModelSpec& model, double dirichlet_alpha, std::uint64_t seed,
           std::uint64_t stream) {
          RngStream rng(seed, stream);
          return sample_from_alternative(
              model,
              DirichletParams::symmetric(dirichlet_alpha,
                                         model.design.cell_count()),
              rng);
        },
        py::arg("model"), py::arg("dirichlet_alpha") = 1.0, py::arg("seed"),
        py::arg("stream") = 0);

  m.def("geometric_power",
        [](const ModelSpec& null_model, const ModelSpec& alt_model,
           const std::vector<double>& epsilons, long n_sim,
           double dirichlet_alpha, std::uint64_t seed, int jobs) {
          auto ests = geometric_power_mc(
              null_model, alt_model, epsilons, n_sim,
              DirichletParams::symmetric(dirichlet_alpha,
                                         null_model.design.cell_count()),
              seed, 0, jobs);
          py::list out;
          for (const auto& e : ests) out.append(estimate_to_dict(e));
          return out;
        },
        py::arg("null_model"), py::arg("alt_model"), py::arg("epsilons"),
        py::arg("n_sim"), py::arg("dirichlet_alpha") = 1.0,
        py::arg("seed") = 4242, py::arg("jobs") = 1);

  m.def("cumulative_power",
        [](const ModelSpec& null_model, const ModelSpec& alt_model,
           std::int64_t n, const std::vector<double>& alphas, long n_sim,
           double dirichlet_alpha, std::uint64_t seed, int jobs) {
          auto ests = cumulative_power_mc(
              null_model, alt_model, n, alphas, n_sim,
              DirichletParams::symmetric(dirichlet_alpha,
                                         null_model.design.cell_count()),
              seed, 0, jobs);
          py::list out;
          for (const auto& e : ests) out.append(estimate_to_dict(e));
          return out;
        },
        py::arg("null_model"), py::arg("alt_model"), py::arg("n"),
        py::arg("alphas"), py::arg("n_sim"), py::arg("dirichlet_alpha") = 1.0,
        py::arg("seed") = 4242, py::arg("jobs") = 1);

  m.def("posteriori_power",
        [](const ModelSpec& null_model, const std::vector<double>& f0,
           const std::vector<double>& alphas, long n_sim,
           double dirichlet_alpha, std::uint64_t seed, int jobs) {
          auto ests = posteriori_cumulative(
              null_model, f0, alphas, n_sim,
              DirichletParams::symmetric(dirichlet_alpha,
                                         null_model.design.cell_count()),
              seed, jobs);
          py::list out;
          for (const auto& e : ests) out.append(estimate_to_dict(e));
          return out;
        },
        py::arg("null_model"), py::arg("f0"), py::arg("alphas"),
        py::arg("n_sim"), py::arg("dirichlet_alpha") = 1.0,
        py::arg("seed") = 4242, py::arg("jobs") = 1);

  m.def("power_table",
        [](const ModelSpec& null_model,
           const std::vector<std::pair<std::string, std::vector<double>>>&
               alternatives,
           const std::vector<long long>& sample_sizes,
           const std::vector<double>& alphas, long n_sim,
           double dirichlet_alpha, std::uint64_t seed, int jobs) {
          std::vector<OffsetSpec> alts;
          for (const auto& [label, offset] : alternatives)
            alts.push_back(OffsetSpec{label, offset});
          PowerTable t = power_table(null_model, alts, sample_sizes, alphas,
                                     n_sim, dirichlet_alpha, seed, jobs);
          t.model_hash = model_hash(null_model);
          py::list rows;
          for (const auto& cell : t.cells) {
            py::dict d;
            d["n"] = cell.n;
            d["alpha"] = cell.alpha;
            d["offset_label"] = cell.offset_label;
            d["rate"] = cell.rate;
            d["ci"] = py::make_tuple(cell.ci_lo, cell.ci_hi);
            d["n_sim"] = cell.n_sim;
            d["n_failed"] = cell.n_failed;
            rows.append(d);
          }
          return rows;
        },
        py::arg("null_model"), py::arg("alternatives"),
        py::arg("sample_sizes"), py::arg("alphas"), py::arg("n_sim"),
        py::arg("dirichlet_alpha") = 1.0, py::arg("seed") = 4242,
        py::arg("jobs") = 1);
}
