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
 * @file measurement.hpp
 * @brief POVMs, the POVM fidelity, measure-and-prepare channels and
 * Haar-averaged figures of merit for replicating networks.
 */

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mclone/comb.hpp"
#include "mclone/random.hpp"

namespace mclone {

struct Povm {
  std::vector<Operator> elements;

  std::size_t outcomes() const { return elements.size(); }
  const Signature& signature() const { return elements.at(0).signature(); }

  Operator sum() const {
    Operator s = Operator::zero(signature());
    for (const Operator& e : elements) s += align_to(e, signature());
    return s;
  }

  /// Every element PSD and the elements sum to the identity.
  bool is_valid(double tol = 1e-9) const {
    if (elements.empty()) return false;
    for (const Operator& e : elements) {
      if (!is_hermitian(e, tol) || !is_psd(e, tol)) return false;
    }
    const Matrix s = sum().matrix();
    return (s - Matrix::Identity(s.rows(), s.cols())).norm() <= tol * std::max(1.0, s.norm());
  }
};

/// E_i = U|i><i|U^dagger on a single system.
struct VonNeumannPovm {
  Matrix unitary;
  Label label = "X";

  Povm povm() const {
    const auto d = static_cast<std::size_t>(unitary.rows());
    Povm p;
    for (std::size_t i = 0; i < d; ++i) {
      const Vector v = unitary.col(static_cast<Eigen::Index>(i));
      p.elements.emplace_back(Signature{{label, d}}, outer(v, v));
    }
    return p;
  }
};

/// Rank-one orthogonal projectors, one per dimension of the space.
inline bool is_von_neumann(const Povm& p, double tol = 1e-9) {
  if (!p.is_valid(tol) || p.outcomes() != p.signature().total_dim()) return false;
  for (const Operator& e : p.elements) {
    if ((e.matrix() * e.matrix() - e.matrix()).norm() > tol) return false;
    if (std::abs(e.trace() - Complex(1.0, 0.0)) > tol) return false;
  }
  return true;
}

/// Outcome (i, j) of the product is stored at i * q.outcomes() + j.
inline Povm product_povm(const Povm& p, const Povm& q) {
  Povm out;
  out.elements.reserve(p.outcomes() * q.outcomes());
  for (const Operator& a : p.elements) {
    for (const Operator& b : q.elements) out.elements.push_back(tensor(a, b));
  }
  return out;
}

/// (1/n) sum_i Tr[P_i Q_i]. Bounded by 1, with equality iff P = Q, whenever
/// one side is a von Neumann measurement. The value is computed for any pair.
inline double povm_fidelity(const Povm& p, const Povm& q) {
  if (p.outcomes() != q.outcomes() || p.outcomes() == 0) {
    throw InvalidInput("povm_fidelity: outcome counts differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.outcomes(); ++i) {
    const Matrix& a = p.elements[i].matrix();
    const Matrix b = align_to(q.elements[i], p.elements[i].signature()).matrix();
    acc += (a.cwiseProduct(b.transpose())).sum().real();
  }
  return acc / static_cast<double>(p.outcomes());
}

/// Choi operator sum_i |i><i|_out (x) U*|i><i|U^T_in of the channel that
/// measures {U|i><i|U^dagger} and writes the outcome on `out`.
inline ChoiOperator mp_channel_choi(const Matrix& u, const Label& out_label, const Label& in_label) {
  if (u.rows() != u.cols() || !is_isometry(u)) {
    throw InvalidInput("mp_channel_choi: matrix is not unitary");
  }
  const auto d = static_cast<std::size_t>(u.rows());
  Matrix m = Matrix::Zero(u.rows() * u.rows(), u.rows() * u.rows());
  for (std::size_t i = 0; i < d; ++i) {
    const Vector v = u.col(static_cast<Eigen::Index>(i)).conjugate();
    m += detail::kron(basis_projector(d, i), outer(v, v));
  }
  return make_choi(Operator(Signature{{out_label, d}, {in_label, d}}, std::move(m)),
                   {{out_label, Role::Output}, {in_label, Role::Input}});
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of diag(R)
/// divided out.
inline Matrix haar_sample(std::size_t d, Rng& rng) {
  if (d < 1) throw DimensionError("haar_sample: d must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  const Matrix z = ginibre(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex rii = r(i, i);
    const double mag = std::abs(rii);
    q.col(i) *= (mag > 0.0 ? rii / mag : Complex(1.0, 0.0));
  }
  return q;
}

/// G_ij^(U) = [R_ij * E^(U)_{CD}]^T, a POVM on A (x) B with d^2 outcomes.
inline Povm replicated_povm(const GeneralizedInstrument& g, const Matrix& u) {
  require_instrument_shape(g);
  if (u.rows() != static_cast<Eigen::Index>(g.dim)) {
    throw DimensionError("replicated_povm: unitary dimension differs from the instrument");
  }
  const ChoiOperator device = mp_channel_choi(u, "D", "C");
  Povm out;
  out.elements.reserve(g.elements.size());
  for (const Operator& r : g.elements) out.elements.push_back(link(r, device.op).transpose());
  return out;
}

struct HaarEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of the Haar average of F(G^(U), E^(U) (x) E^(U)).
/// Sample n draws its unitary from derive_stream(seed, n).
inline HaarEstimate haar_average_fidelity(const GeneralizedInstrument& g, std::size_t samples,
                                          std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("haar_average_fidelity: need at least one sample");
  require_instrument_shape(g);
  std::vector<double> values(samples, 0.0);
  parallel_shards(samples, [&](std::size_t n) {
    Rng rng = derive_stream(seed, n);
    const Matrix u = haar_sample(g.dim, rng);
    const Povm target_a = VonNeumannPovm{u, "A"}.povm();
    const Povm target_b = VonNeumannPovm{u, "B"}.povm();
    values[n] = povm_fidelity(replicated_povm(g, u), product_povm(target_a, target_b));
  });
  HaarEstimate est;
  est.samples = samples;
  est.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(samples);
  if (samples > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples));
  }
  return est;
}

/// |estimate - exact| within 3 standard errors, with an absolute floor of
/// `floor` for estimators whose per-sample variance vanishes.
inline bool within_three_sigma(const HaarEstimate& est, double exact, double floor = 1e-9) {
  return std::abs(est.mean - exact) <= 3.0 * est.std_error + floor;
}

}  // namespace mclone
