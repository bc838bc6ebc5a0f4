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

#ifndef LOGLIN_RNG_HPP
#define LOGLIN_RNG_HPP

#include <cstdint>

namespace loglin {

/// Seedable stream of random deviates: xoshiro256++ whose state is derived
/// from (seed, stream_id) by bit-mixing, so that
///   * the same (seed, stream_id) always reproduces the same sequence, and
///   * distinct stream_ids give statistically independent streams without
///     any coordination (one stream per Monte-Carlo replicate).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double next_double();

  /// Standard normal via inverse-CDF (one uniform per deviate).
  double next_normal();

  /// Gamma(shape, 1), shape > 0. Marsaglia-Tsang squeeze method; shapes
  /// below one use the boost G(a) = G(a+1) U^(1/a).
  double next_gamma(double shape);

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

/// Inverse of the standard normal CDF, accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double p);

}  // namespace loglin

#endif  // LOGLIN_RNG_HPP
