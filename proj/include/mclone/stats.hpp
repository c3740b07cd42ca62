// Copyright 2026 The mclone Authors
//
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

#pragma once

// Goodness-of-fit for sampled histograms against Born-rule probabilities.

#include <cstdint>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mclone/operator.hpp"

namespace mclone {

struct ChiSquaredResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson test of `counts` against `probs`. Bins with zero probability must
/// be empty (otherwise p = 0) and do not count towards the degrees of freedom.
inline ChiSquaredResult chi_squared_test(const std::vector<std::uint64_t>& counts,
                                         const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw InvalidInput("chi_squared_test: size mismatch");
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  if (total == 0) throw InvalidInput("chi_squared_test: empty histogram");
  ChiSquaredResult r;
  std::size_t bins = 0;
  for (std::size_t n = 0; n < counts.size(); ++n) {
    const double expected = probs[n] * static_cast<double>(total);
    if (probs[n] <= 1e-15) {
      if (counts[n] > 0) {
        r.p_value = 0.0;
        r.statistic = std::numeric_limits<double>::infinity();
        return r;
      }
      continue;
    }
    const double diff = static_cast<double>(counts[n]) - expected;
    r.statistic += diff * diff / expected;
    ++bins;
  }
  if (bins < 2) return r;
  r.dof = bins - 1;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

}  // namespace mclone
