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

// Seeded random streams. A master seed derives independent streams by index,
// so a sampling loop gives the same answer under any sharding or schedule.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "mclone/operator.hpp"

namespace mclone {

using Rng = std::mt19937_64;

inline Rng derive_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6d636c6fu};
  return Rng(seq);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

/// Matrix of i.i.d. standard complex Gaussians (real and imaginary parts N(0, 1/2)).
inline Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix z(rows, cols);
  const double s = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      z(i, j) = Complex(s * re, s * im);
    }
  }
  return z;
}

/// Random PSD matrix B^dagger B with B of shape rank x n.
inline Matrix random_psd(Eigen::Index n, Eigen::Index rank, Rng& rng) {
  const Matrix b = ginibre(rank, n, rng);
  return b.adjoint() * b;
}

/// Runs fn(shard) for shard in [0, count) on up to hardware_concurrency
/// threads. Callers write into per-shard slots, so results do not depend on
/// the schedule.
inline void parallel_shards(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace mclone
