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

#ifndef LOGLIN_DESIGN_HPP
#define LOGLIN_DESIGN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loglin/matrix.hpp"

namespace loglin {

/// Validated I x J design matrix of a log-linear model: non-negative integer
/// entries and linearly independent columns. Rank, the overall-effect test
/// and the L1 norm (maximal row sum) are established with exact rational
/// arithmetic at construction; the integer entries are kept unscaled and
/// normalization is applied on demand.
struct DesignMatrix {
  IntMat a;                   // I x J
  std::int64_t l1 = 0;        // maximal row sum, > 0
  bool has_overall = false;   // all-ones vector lies in the column span

  std::size_t cell_count() const { return a.rows; }    // I
  std::size_t param_count() const { return a.cols; }   // J
};

/// Integer basis of the kernel of A' (rows d satisfy d·A_j = 0 for every
/// column A_j, exactly). K = I - J rows; K = 0 for a saturated model.
struct KernelBasis {
  IntMat d;  // K x I

  std::size_t dof() const { return d.rows; }           // K
  std::size_t cell_count() const { return d.cols; }    // I
};

enum class Kind { probability, intensity };

/// Strictly positive vector over cells, tagged as a probability vector
/// (sums to one) or a vector of intensities.
struct Distribution {
  std::vector<double> values;
  Kind kind = Kind::probability;
};

/// Null/alternative model pair container: a design matrix with its kernel
/// basis and the offset vector xi (all ones for the null model).
struct ModelSpec {
  DesignMatrix design;
  KernelBasis kernel;
  std::vector<double> offset;  // xi, strictly positive, length I
  std::string name;            // label used in CLI output and CSV metadata
};

/// Validates raw integer entries as a design matrix.
/// Throws Errc::negative_entry / Errc::rank_deficient / Errc::invalid_argument.
DesignMatrix validate_design(const IntMat& raw);

/// Entries divided by the L1 norm; every row of the result sums to <= 1.
RealMat l1_normalize(const DesignMatrix& a);

/// Integer kernel basis computed by exact rational elimination of A', each
/// basis row scaled to primitive integers. D·A = 0 holds exactly.
KernelBasis kernel_basis(const DesignMatrix& a);

/// Wraps caller-supplied kernel rows after verifying them exactly
/// (integer D·A = 0, independent rows, K = I - J).
KernelBasis kernel_from_rows(const DesignMatrix& a, IntMat rows);

/// D log p; throws Errc::non_positive_cell on any p_i <= 0.
std::vector<double> canonical_params(std::span<const double> p,
                                     const KernelBasis& kernel);

/// A' p.
std::vector<double> mean_value_params(std::span<const double> p,
                                      const DesignMatrix& design);

/// Distribution with validation: positive entries, and for probabilities a
/// total within `sum_tol` of one.
Distribution make_distribution(std::vector<double> values, Kind kind,
                               double sum_tol = 1e-12);

/// Model with computed kernel basis; empty offset means all ones.
ModelSpec make_model(DesignMatrix design, std::vector<double> offset = {},
                     std::string name = {});

/// Model with a curated kernel basis (verified against the design).
ModelSpec make_model_with_kernel(DesignMatrix design, IntMat kernel_rows,
                                 std::vector<double> offset = {},
                                 std::string name = {});

/// Same design and kernel, different offset.
ModelSpec with_offset(const ModelSpec& model, std::vector<double> offset);

}  // namespace loglin

#endif  // LOGLIN_DESIGN_HPP
