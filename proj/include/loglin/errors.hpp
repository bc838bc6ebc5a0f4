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

#ifndef LOGLIN_ERRORS_HPP
#define LOGLIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace loglin {

enum class Errc {
  negative_entry,
  rank_deficient,
  dimension_mismatch,
  non_positive_cell,
  non_positive_input,
  non_positive_fitted,
  zero_sufficient_statistic,
  max_iters_exceeded,
  bracket_failure,
  degenerate_draw,
  invalid_argument,
};

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace loglin

#endif  // LOGLIN_ERRORS_HPP
