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

// Scripted reproduction of the published analyses that ship with the
// built-in models: the two 2x2 worked tables, the geometric-power example,
// the vaccination study summary and its sample-size/power table. Each item
// recomputes the published quantities with the bundled models and compares
// them against the reference values at a stated tolerance.

#ifndef LOGLIN_REPRO_HPP
#define LOGLIN_REPRO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace loglin::repro {

struct Check {
  std::string name;
  double computed = 0.0;
  double expected = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct ItemReport {
  std::string item;
  std::vector<Check> checks;
  std::vector<std::string> notes;  // informational lines, not pass/fail
  // artifact filename -> file content, written by the CLI under --out
  std::vector<std::pair<std::string, std::string>> artifacts;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

Check make_check(const std::string& name, double computed, double expected,
                 double tol);

ItemReport run_table1();
ItemReport run_table2();
ItemReport run_example3(std::uint64_t seed, long n_sim, int jobs);
ItemReport run_section5(std::uint64_t seed, long n_sim, int jobs);
ItemReport run_table3(std::uint64_t seed, long n_sim, int jobs);

/// Sample sizes of the published power table (200..500 step 20).
const std::vector<long long>& table3_sample_sizes();

/// Published rejection rate for (dirichlet_alpha in {1, 0.5}, k in {2, 3},
/// alpha in {0.05, 0.10}, N in the published grid).
double table3_reference(double dirichlet_alpha, double k, double alpha,
                        long long n);

std::string format_report(const ItemReport& report);

}  // namespace loglin::repro

#endif  // LOGLIN_REPRO_HPP
