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

#ifndef LOGLIN_MATRIX_HPP
#define LOGLIN_MATRIX_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "loglin/errors.hpp"

namespace loglin {

/// Dense row-major matrix, sized at runtime. Small and allocation-friendly;
/// everything in this library is desk-scale.
template <typename T>
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;  // row-major, rows*cols entries

  Mat() = default;
  Mat(std::size_t r, std::size_t c, T fill = T{})
      : rows(r), cols(c), data(r * c, fill) {}

  Mat(std::initializer_list<std::initializer_list<T>> lst) {
    rows = lst.size();
    cols = rows ? lst.begin()->size() : 0;
    data.reserve(rows * cols);
    for (const auto& row : lst) {
      if (row.size() != cols)
        raise(Errc::dimension_mismatch, "ragged matrix initializer");
      data.insert(data.end(), row.begin(), row.end());
    }
  }

  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }

  bool empty() const { return rows == 0 || cols == 0; }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
  }
};

using IntMat = Mat<std::int64_t>;
using RealMat = Mat<double>;

}  // namespace loglin

#endif  // LOGLIN_MATRIX_HPP
