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

#include "loglin/design.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "rational.hpp"

namespace loglin {

namespace {

using detail::Rat;
using detail::i128;
using detail::i64;

constexpr std::size_t kMaxCells = 10000;

struct RatMat {
  std::size_t rows = 0, cols = 0;
  std::vector<Rat> data;
  RatMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  Rat& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Rat& operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

// In-place reduced row echelon form; returns the pivot column of each
// pivot row, in order.
std::vector<std::size_t> rref(RatMat& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
    std::size_t pr = row;
    while (pr < m.rows && m(pr, col).is_zero()) ++pr;
    if (pr == m.rows) continue;
    if (pr != row)
      for (std::size_t j = 0; j < m.cols; ++j)
        std::swap(m(pr, j), m(row, j));
    Rat inv = Rat(1) / m(row, col);
    for (std::size_t j = col; j < m.cols; ++j) m(row, j) = m(row, j) * inv;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == row || m(i, col).is_zero()) continue;
      Rat f = m(i, col);
      for (std::size_t j = col; j < m.cols; ++j)
        m(i, j) = m(i, j) - f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

RatMat transpose_of(const IntMat& a) {
  RatMat m(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(j, i) = Rat(a(i, j));
  return m;
}

// Exact consistency of A x = 1: eliminate the augmented system.
bool ones_in_colspan(const IntMat& a) {
  RatMat m(a.rows, a.cols + 1);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) m(i, j) = Rat(a(i, j));
    m(i, a.cols) = Rat(1);
  }
  auto pivots = rref(m);
  for (std::size_t p : pivots)
    if (p == a.cols) return false;  // pivot in the augmented column
  return true;
}

// Exact rank over the rationals.
std::size_t rank_of(const IntMat& a) {
  RatMat m = transpose_of(a);
  return rref(m).size();
}

void check_kernel_product(const IntMat& d, const IntMat& a) {
  for (std::size_t k = 0; k < d.rows; ++k)
    for (std::size_t j = 0; j < a.cols; ++j) {
      i128 s = 0;
      for (std::size_t i = 0; i < a.rows; ++i)
        s += i128(d(k, i)) * a(i, j);
      if (s != 0)
        raise(Errc::invalid_argument, "kernel rows do not annihilate A");
    }
}

}  // namespace

DesignMatrix validate_design(const IntMat& raw) {
  if (raw.empty()) raise(Errc::invalid_argument, "empty design matrix");
  if (raw.rows > kMaxCells)
    raise(Errc::invalid_argument, "design matrix exceeds the cell limit");
  if (raw.cols > raw.rows)
    raise(Errc::rank_deficient, "more columns than cells");
  i64 l1 = 0;
  for (std::size_t i = 0; i < raw.rows; ++i) {
    i64 row_sum = 0;
    for (std::size_t j = 0; j < raw.cols; ++j) {
      if (raw(i, j) < 0)
        raise(Errc::negative_entry, "design matrix entry is negative");
      row_sum += raw(i, j);
    }
    l1 = std::max(l1, row_sum);
  }
  if (l1 == 0) raise(Errc::invalid_argument, "design matrix is all zeros");
  if (rank_of(raw) < raw.cols)
    raise(Errc::rank_deficient, "design matrix columns are dependent");
  DesignMatrix out;
  out.a = raw;
  out.l1 = l1;
  out.has_overall = ones_in_colspan(raw);
  return out;
}

RealMat l1_normalize(const DesignMatrix& a) {
  RealMat out(a.a.rows, a.a.cols);
  const double inv = 1.0 / static_cast<double>(a.l1);
  for (std::size_t i = 0; i < a.a.rows; ++i)
    for (std::size_t j = 0; j < a.a.cols; ++j)
      out(i, j) = static_cast<double>(a.a(i, j)) * inv;
  return out;
}

KernelBasis kernel_basis(const DesignMatrix& a) {
  const std::size_t icount = a.a.rows;
  RatMat m = transpose_of(a.a);  // J x I, solve m v = 0
  auto pivots = rref(m);

  std::vector<bool> is_pivot(icount, false);
  for (std::size_t p : pivots) is_pivot[p] = true;

  IntMat d(icount - pivots.size(), icount, 0);
  std::size_t out_row = 0;
  for (std::size_t f = 0; f < icount; ++f) {
    if (is_pivot[f]) continue;
    // v_f = 1, v_pivot = -m(pivot_row, f)
    std::vector<Rat> v(icount);
    v[f] = Rat(1);
    for (std::size_t pr = 0; pr < pivots.size(); ++pr)
      v[pivots[pr]] = Rat(0) - m(pr, f);
    // clear denominators, reduce to a primitive integer vector
    i64 l = 1;
    for (const Rat& r : v) l = detail::lcm_i64(l == 0 ? 1 : l, r.den);
    i64 g = 0;
    std::vector<i64> iv(icount);
    for (std::size_t i = 0; i < icount; ++i) {
      iv[i] = detail::checked_i64(i128(v[i].num) * (l / v[i].den));
      g = detail::gcd_i64(g, iv[i]);
    }
    if (g > 1)
      for (auto& x : iv) x /= g;
    for (std::size_t i = 0; i < icount; ++i) d(out_row, i) = iv[i];
    ++out_row;
  }

  check_kernel_product(d, a.a);
  KernelBasis out;
  out.d = std::move(d);
  return out;
}

KernelBasis kernel_from_rows(const DesignMatrix& a, IntMat rows) {
  if (rows.cols != a.a.rows)
    raise(Errc::dimension_mismatch, "kernel rows do not match cell count");
  if (rows.rows != a.a.rows - a.a.cols)
    raise(Errc::invalid_argument, "kernel row count must equal I - J");
  check_kernel_product(rows, a.a);
  if (rows.rows > 0 && rank_of(rows) < rows.rows)
    raise(Errc::rank_deficient, "kernel rows are dependent");
  KernelBasis out;
  out.d = std::move(rows);
  return out;
}

std::vector<double> canonical_params(std::span<const double> p,
                                     const KernelBasis& kernel) {
  if (p.size() != kernel.cell_count())
    raise(Errc::dimension_mismatch, "vector length does not match kernel");
  std::vector<double> logs(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0))
      raise(Errc::non_positive_cell, "non-positive cell in distribution");
    logs[i] = std::log(p[i]);
  }
  std::vector<double> out(kernel.dof(), 0.0);
  for (std::size_t k = 0; k < kernel.dof(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      s += static_cast<double>(kernel.d(k, i)) * logs[i];
    out[k] = s;
  }
  return out;
}

std::vector<double> mean_value_params(std::span<const double> p,
                                      const DesignMatrix& design) {
  if (p.size() != design.cell_count())
    raise(Errc::dimension_mismatch, "vector length does not match design");
  std::vector<double> out(design.param_count(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < design.param_count(); ++j)
      out[j] += static_cast<double>(design.a(i, j)) * p[i];
  return out;
}

Distribution make_distribution(std::vector<double> values, Kind kind,
                               double sum_tol) {
  if (values.empty()) raise(Errc::invalid_argument, "empty distribution");
  double total = 0.0;
  for (double v : values) {
    if (!(v > 0.0))
      raise(Errc::non_positive_cell, "non-positive cell in distribution");
    total += v;
  }
  if (kind == Kind::probability && std::abs(total - 1.0) > sum_tol)
    raise(Errc::invalid_argument, "probability vector does not sum to one");
  Distribution out;
  out.values = std::move(values);
  out.kind = kind;
  return out;
}

namespace {
std::vector<double> offset_or_ones(std::vector<double> offset,
                                   std::size_t icount) {
  if (offset.empty()) return std::vector<double>(icount, 1.0);
  if (offset.size() != icount)
    raise(Errc::dimension_mismatch, "offset length does not match design");
  for (double x : offset)
    if (!(x > 0.0)) raise(Errc::non_positive_cell, "offset must be positive");
  return offset;
}
}  // namespace

ModelSpec make_model(DesignMatrix design, std::vector<double> offset,
                     std::string name) {
  ModelSpec m;
  m.offset = offset_or_ones(std::move(offset), design.cell_count());
  m.kernel = kernel_basis(design);
  m.design = std::move(design);
  m.name = std::move(name);
  return m;
}

ModelSpec make_model_with_kernel(DesignMatrix design, IntMat kernel_rows,
                                 std::vector<double> offset,
                                 std::string name) {
  ModelSpec m;
  m.offset = offset_or_ones(std::move(offset), design.cell_count());
  m.kernel = kernel_from_rows(design, std::move(kernel_rows));
  m.design = std::move(design);
  m.name = std::move(name);
  return m;
}

ModelSpec with_offset(const ModelSpec& model, std::vector<double> offset) {
  ModelSpec m = model;
  m.offset = offset_or_ones(std::move(offset), model.design.cell_count());
  return m;
}

}  // namespace loglin
