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

/**
 * @file realization.hpp
 * @brief Circuit for the optimal cloning network.
 *
 * A qubit L prepared in |+> controls a SWAP of the inputs: branch |0> sends
 * A to the device port C and B to the memory K, branch |1> the other way
 * round. The device outcome k is read on D, K is discarded, L is measured
 * with a three-outcome POVM P, and (k, n) is mapped to the guess (i, j) by a
 * randomized function f.
 */

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "mclone/comb.hpp"
#include "mclone/measurement.hpp"
#include "mclone/random.hpp"

namespace mclone {

struct ControlSwapGate {
  std::size_t dim = 2;
  Matrix unitary;  ///< A B L_in -> C K L, index (x * d + y) * 2 + l on both sides
};

inline ControlSwapGate control_swap_gate(std::size_t d) {
  if (d < 2) throw DimensionError("control_swap_gate: d must be >= 2");
  const auto n = static_cast<Eigen::Index>(d);
  Matrix u = Matrix::Zero(2 * n * n, 2 * n * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      u((a * n + b) * 2 + 0, (a * n + b) * 2 + 0) = 1.0;  // A -> C, B -> K
      u((b * n + a) * 2 + 1, (a * n + b) * 2 + 1) = 1.0;  // A -> K, B -> C
    }
  }
  return ControlSwapGate{d, std::move(u)};
}

inline Signature control_swap_inputs(std::size_t d) {
  return Signature{{"A", d}, {"B", d}, {"L_in", 2}};
}
inline Signature control_swap_outputs(std::size_t d) { return Signature{{"C", d}, {"K", d}, {"L", 2}}; }

inline ChoiOperator control_swap_choi(std::size_t d) {
  return choi_of_unitary(control_swap_gate(d).unitary, control_swap_inputs(d), control_swap_outputs(d));
}

inline Vector plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}
inline Vector minus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

/// |+><+| - |-><-| on L: the image of sigma_z on the (+, -) multiplicity
/// space under the control-SWAP.
inline Matrix control_sigma_z() { return outer(plus_state(), plus_state()) - outer(minus_state(), minus_state()); }

/// P_1 = (1 - 2w)|+><+|, P_2 = |psi><psi|, P_3 = Z P_2 Z with
/// |psi> = sqrt(w)|+> + sqrt(1/2)|->.
struct ControlPovm {
  double weight = 1.0 / 18.0;
  std::array<Matrix, 3> elements;

  Povm povm(const Label& label = "L") const {
    Povm p;
    for (const Matrix& e : elements) p.elements.emplace_back(Signature{{label, 2}}, e);
    return p;
  }
};

inline ControlPovm control_povm_with_weight(double w) {
  if (w < 0.0 || w > 0.5) throw InvalidInput("control_povm: weight outside [0, 1/2]");
  const Vector psi = std::sqrt(w) * plus_state() + std::sqrt(0.5) * minus_state();
  const Matrix z = control_sigma_z();
  ControlPovm p;
  p.weight = w;
  p.elements[0] = (1.0 - 2.0 * w) * outer(plus_state(), plus_state());
  p.elements[1] = outer(psi, psi);
  p.elements[2] = z * p.elements[1] * z;
  return p;
}

/// Weight 1/18: the network then realizes optimal_cloning_blocks(d).
inline ControlPovm control_povm(std::size_t d) {
  if (d < 2) throw DimensionError("control_povm: d must be >= 2");
  return control_povm_with_weight(1.0 / 18.0);
}

/// Weight 1/(9d(d+1)) as printed; realizes printed_cloning_blocks(d).
inline ControlPovm printed_control_povm(std::size_t d) {
  if (d < 2) throw DimensionError("printed_control_povm: d must be >= 2");
  const double x = static_cast<double>(d);
  return control_povm_with_weight(1.0 / (9.0 * x * (x + 1.0)));
}

/// f(k, n): n = 0 -> (k, k); n = 1 -> (k, j); n = 2 -> (j, k); j != k uniform.
struct ClassicalProcessing {
  std::size_t dim = 2;

  std::pair<std::size_t, std::size_t> operator()(std::size_t k, std::size_t n, Rng& rng) const {
    if (k >= dim || n > 2) throw InvalidInput("ClassicalProcessing: input out of range");
    if (n == 0) return {k, k};
    std::uniform_int_distribution<std::size_t> pick(0, dim - 2);
    std::size_t j = pick(rng);
    if (j >= k) ++j;
    return n == 1 ? std::make_pair(k, j) : std::make_pair(j, k);
  }

  double probability(std::size_t k, std::size_t n, std::size_t i, std::size_t j) const {
    const double other = 1.0 / static_cast<double>(dim - 1);
    if (n == 0) return (i == k && j == k) ? 1.0 : 0.0;
    if (n == 1) return (i == k && j != k) ? other : 0.0;
    return (j == k && i != k) ? other : 0.0;
  }
};

/// Q_ii = |i><i| (x) P_1;  Q_ij = |i><i| (x) P_2/(d-1) + |j><j| (x) P_3/(d-1).
/// Elements act on D (x) L and are stored at i * d + j.
inline Povm bipartite_q_povm(std::size_t d, const ControlPovm& p) {
  if (d < 2) throw DimensionError("bipartite_q_povm: d must be >= 2");
  const Signature sig{{"D", d}, {"L", 2}};
  const double other = 1.0 / static_cast<double>(d - 1);
  Povm q;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Matrix m = i == j ? detail::kron(basis_projector(d, i), p.elements[0])
                        : Matrix(other * detail::kron(basis_projector(d, i), p.elements[1]) +
                                 other * detail::kron(basis_projector(d, j), p.elements[2]));
      q.elements.emplace_back(sig, std::move(m));
    }
  }
  return q;
}

inline Povm bipartite_q_povm(std::size_t d) { return bipartite_q_povm(d, control_povm(d)); }

/// Q built from "measure P, then apply f": sum_{k,n} Pr[f(k,n) = (i,j)] |k><k| (x) P_n.
inline Povm composed_q_povm(std::size_t d, const ControlPovm& p) {
  const ClassicalProcessing f{d};
  const Signature sig{{"D", d}, {"L", 2}};
  Povm q;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Matrix m = Matrix::Zero(static_cast<Eigen::Index>(2 * d), static_cast<Eigen::Index>(2 * d));
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t n = 0; n < 3; ++n) {
          const double w = f.probability(k, n, i, j);
          if (w != 0.0) m += w * detail::kron(basis_projector(d, k), p.elements[n]);
        }
      }
      q.elements.emplace_back(sig, std::move(m));
    }
  }
  return q;
}

/// R_ij = |+><+|_{L_in} * U_CS * (Q_ij (x) I_K), by link products only.
inline GeneralizedInstrument realization_instrument(std::size_t d, const ControlPovm& p) {
  const ChoiOperator plus = state_choi(Operator(Signature{{"L_in", 2}}, outer(plus_state(), plus_state())));
  const Operator network = link(plus.op, control_swap_choi(d).op);
  const Povm q = bipartite_q_povm(d, p);
  const Operator id_k = Operator::identity(Signature{{"K", d}});
  const Signature target = instrument_signature(d);
  GeneralizedInstrument g = GeneralizedInstrument::zeros(d, Task::Cloning);
  for (std::size_t n = 0; n < q.outcomes(); ++n) {
    g.elements[n] = align_to(link(network, effect_choi(tensor(q.elements[n], id_k)).op), target);
  }
  return g;
}

inline GeneralizedInstrument realization_instrument(std::size_t d) {
  return realization_instrument(d, control_povm(d));
}

/// The measurement device E^(U) on C. Each instance can be used once.
class MeasurementDevice {
 public:
  explicit MeasurementDevice(const Matrix& u) : u_(u) {}

  /// Measures C of a state on C (x) rest (C leading) and returns the outcome
  /// and the normalized post-measurement state on rest.
  std::pair<std::size_t, Matrix> measure(const Matrix& state, Rng& rng) {
    if (used_) throw InvalidInput("MeasurementDevice: device already used");
    used_ = true;
    const Eigen::Index d = u_.rows();
    const Eigen::Index rest = state.rows() / d;
    std::vector<Matrix> branches;
    std::vector<double> probs;
    for (Eigen::Index k = 0; k < d; ++k) {
      // (<u_k| (x) I) state (|u_k> (x) I)
      Matrix b = Matrix::Zero(rest, rest);
      for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index cp = 0; cp < d; ++cp) {
          const Complex w = std::conj(u_(c, k)) * u_(cp, k);
          if (w == Complex(0.0, 0.0)) continue;
          b += w * state.block(c * rest, cp * rest, rest, rest);
        }
      }
      probs.push_back(std::max(0.0, b.trace().real()));
      branches.push_back(std::move(b));
    }
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    const std::size_t k = pick(rng);
    return {k, branches[k] / probs[k]};
  }

  bool used() const { return used_; }

 private:
  Matrix u_;
  bool used_ = false;
};

struct SimulationResult {
  std::size_t dim = 2;
  std::uint64_t shots = 0;
  std::vector<std::uint64_t> counts;  ///< index i * d + j
  std::vector<double> born;           ///< Tr[G_ij^(U) rho]
  std::uint64_t device_uses = 0;
};

inline void require_density_operator(const Operator& rho, double tol = 1e-9) {
  if (!is_hermitian(rho, tol) || !is_psd(rho, tol) || std::abs(rho.trace() - Complex(1.0, 0.0)) > tol) {
    throw InvalidInput("simulate_run: invalid state");
  }
}

/// Samples `shots` runs of the network on input rho (on A, B). Shots are split
/// over a fixed number of shards, shard s drawing from derive_stream(seed, s).
inline SimulationResult simulate_run(std::size_t d, const Matrix& u, const Operator& rho, std::uint64_t shots,
                                     std::uint64_t seed, const ControlPovm& povm) {
  if (d < 2) throw DimensionError("simulate_run: d must be >= 2");
  if (u.rows() != static_cast<Eigen::Index>(d) || !is_isometry(u)) throw InvalidInput("simulate_run: bad unitary");
  const Signature ab{{"A", d}, {"B", d}};
  if (!rho.signature().same_label_set(ab) || rho.signature().dim_of("A") != d || rho.signature().dim_of("B") != d) {
    throw InvalidInput("simulate_run: invalid state");
  }
  const Operator state = align_to(rho, ab);
  require_density_operator(state);

  const Matrix gate = control_swap_gate(d).unitary;
  const Matrix in = detail::kron(state.matrix(), outer(plus_state(), plus_state()));
  const Matrix evolved = gate * in * gate.adjoint();  // on C K L
  const ClassicalProcessing f{d};
  const auto n = static_cast<Eigen::Index>(d);

  constexpr std::uint64_t kShards = 16;
  std::vector<std::vector<std::uint64_t>> partial(kShards, std::vector<std::uint64_t>(d * d, 0));
  std::vector<std::uint64_t> uses(kShards, 0);
  parallel_shards(kShards, [&](std::size_t s) {
    Rng rng = derive_stream(seed, s);
    const std::uint64_t begin = shots * s / kShards;
    const std::uint64_t end = shots * (s + 1) / kShards;
    for (std::uint64_t t = begin; t < end; ++t) {
      MeasurementDevice device(u);
      auto [k, post] = device.measure(evolved, rng);  // post on K L
      uses[s] += device.used() ? 1 : 0;
      Matrix rho_l = Matrix::Zero(2, 2);  // discard K
      for (Eigen::Index kk = 0; kk < n; ++kk) rho_l += post.block(kk * 2, kk * 2, 2, 2);
      std::array<double, 3> pn{};
      for (std::size_t m = 0; m < 3; ++m) {
        pn[m] = std::max(0.0, (povm.elements[m].cwiseProduct(rho_l.transpose())).sum().real());
      }
      std::discrete_distribution<std::size_t> pick(pn.begin(), pn.end());
      const auto [i, j] = f(k, pick(rng), rng);
      ++partial[s][i * d + j];
    }
  });

  SimulationResult r;
  r.dim = d;
  r.shots = shots;
  r.counts.assign(d * d, 0);
  for (std::uint64_t s = 0; s < kShards; ++s) {
    for (std::size_t b = 0; b < d * d; ++b) r.counts[b] += partial[s][b];
    r.device_uses += uses[s];
  }
  const Povm g = replicated_povm(realization_instrument(d, povm), u);
  for (const Operator& e : g.elements) {
    r.born.push_back((align_to(e, ab).matrix().cwiseProduct(state.matrix().transpose())).sum().real());
  }
  return r;
}

inline SimulationResult simulate_run(std::size_t d, const Matrix& u, const Operator& rho, std::uint64_t shots,
                                     std::uint64_t seed) {
  return simulate_run(d, u, rho, shots, seed, control_povm(d));
}

}  // namespace mclone
