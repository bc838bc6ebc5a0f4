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

#ifndef LOGLIN_MODEL_IO_HPP
#define LOGLIN_MODEL_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "loglin/design.hpp"
#include "loglin/power.hpp"

namespace loglin {

/// Ships with the binary: "vaccine" (stop-at-first-success treatment model,
/// no overall effect, curated kernel contrasts) and "indep2x2" (two-way
/// independence on a 2x2 table).
bool is_builtin_model(const std::string& name);
ModelSpec builtin_model(const std::string& name);

/// JSON model file: {"design": [[...],...], "offset": [...], "kind": "..."}.
/// The kernel basis is always computed, never read.
ModelSpec load_model_json(const std::string& path);

/// Builtin name or JSON path.
ModelSpec load_model(const std::string& path_or_name);

Kind model_kind(const std::string& path_or_name);  // kind field, default probability

/// Offset xi with D log xi = c (least-norm exact solve of the K x K system).
std::vector<double> offset_from_log_contrasts(const ModelSpec& model,
                                              std::span<const double> c);

/// Offset matching target odds per kernel row: D log xi = log(odds).
std::vector<double> offset_from_odds(const ModelSpec& model,
                                     std::span<const double> odds);

/// FNV-1a over the design entries, offset and kind; stable across runs.
std::string model_hash(const ModelSpec& model);

/// Counts: path to a CSV with one integer per line, or an inline
/// comma-separated list.
std::vector<double> read_counts(const std::string& path_or_inline);

/// Power table CSV with the fixed header
/// N,alpha,offset_label,rate,ci_lo,ci_hi,n_sim,n_failed and '#' metadata
/// comment lines. Serialization is deterministic; rates carry 4 decimals.
void write_power_csv(std::ostream& os, const PowerTable& table);
std::string power_csv_string(const PowerTable& table);
PowerTable read_power_csv(std::istream& is);

/// Iteration trace CSV (header iter,residual_mean,residual_dual,bregman).
struct TraceRow {
  long iter = 0;
  double residual_mean = 0.0;
  double residual_dual = 0.0;
  double bregman = 0.0;
};
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(std::istream& is);

}  // namespace loglin

#endif  // LOGLIN_MODEL_IO_HPP
