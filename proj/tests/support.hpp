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

// Shared fixtures for the test suites. Oracles live next to the tests that
// use them; this file only holds generators.

#include <cstdint>

#include "catch_amalgamated.hpp"
#include "mclone/mclone.hpp"

namespace mclone::testing {

inline Matrix random_matrix(Eigen::Index n, Rng& rng) { return ginibre(n, n, rng); }

inline Matrix random_hermitian(Eigen::Index n, Rng& rng) {
  const Matrix z = ginibre(n, n, rng);
  return 0.5 * (z + z.adjoint());
}

inline Matrix random_density(Eigen::Index n, Rng& rng) {
  Matrix r = random_psd(n, n, rng);
  return r / r.trace();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace mclone::testing
