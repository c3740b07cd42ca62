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

#include <numeric>
#include <vector>

#include "support.hpp"

using namespace mclone;
using mclone::testing::max_abs;
using mclone::testing::random_density;
using mclone::testing::random_hermitian;

namespace {

Matrix permutation_matrix(const std::vector<std::size_t>& sigma) {
  const auto n = static_cast<Eigen::Index>(sigma.size());
  Matrix t = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) t(static_cast<Eigen::Index>(sigma[i]), i) = 1.0;
  return t;
}

Matrix hadamard() {
  Matrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

TEST_CASE("von Neumann POVMs are valid", "[measurement]") {
  Rng rng = derive_stream(31, 0);
  for (std::size_t d = 1; d <= 5; ++d) {
    const Matrix u = haar_sample(d, rng);
    CHECK(max_abs(u.adjoint() * u - Matrix::Identity(d, d)) < 1e-10);
    const Povm p = VonNeumannPovm{u, "A"}.povm();
    CHECK(p.is_valid());
    CHECK(is_von_neumann(p));
  }
}

TEST_CASE("fidelity of a POVM with itself is one", "[measurement]") {
  Rng rng = derive_stream(31, 1);
  for (std::size_t d = 2; d <= 5; ++d) {
    const Povm p = VonNeumannPovm{haar_sample(d, rng), "A"}.povm();
    CHECK(std::abs(povm_fidelity(p, p) - 1.0) < 1e-12);
  }
}

TEST_CASE("computational versus Hadamard basis gives one half", "[measurement]") {
  const Povm z = VonNeumannPovm{Matrix::Identity(2, 2), "A"}.povm();
  const Povm x = VonNeumannPovm{hadamard(), "A"}.povm();
  CHECK(std::abs(povm_fidelity(z, x) - 0.5) < 1e-15);
  const Povm xb = VonNeumannPovm{hadamard(), "B"}.povm();
  CHECK_THROWS_AS(povm_fidelity(z, product_povm(z, xb)), InvalidInput);
}

TEST_CASE("fidelity one forces equality against a von Neumann POVM", "[measurement][property]") {
  Rng rng = derive_stream(31, 2);
  for (std::size_t d = 2; d <= 4; ++d) {
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix u = haar_sample(d, rng);
      const Povm p = VonNeumannPovm{u, "A"}.povm();
      // Perturb: mix elements 0 and 1 by a random amount, keeping a valid POVM.
      const double t = 0.01 + 0.5 * uniform01(rng);
      Povm q = p;
      q.elements[0] = (1.0 - t) * p.elements[0] + t * p.elements[1];
      q.elements[1] = t * p.elements[0] + (1.0 - t) * p.elements[1];
      REQUIRE(q.is_valid());
      const double f = povm_fidelity(p, q);
      CHECK(f < 1.0 - 1e-6);
      CHECK(f >= 0.0);
      CHECK(std::abs(f - (1.0 - 2.0 * t / static_cast<double>(d))) < 1e-12);
      // Any other von Neumann measurement also stays below one.
      const Povm r = VonNeumannPovm{haar_sample(d, rng), "A"}.povm();
      CHECK(povm_fidelity(p, r) < 1.0);
      CHECK(povm_fidelity(r, p) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("measure-and-prepare channel", "[measurement]") {
  const std::size_t d = 3;
  const ChoiOperator id = mp_channel_choi(Matrix::Identity(d, d), "D", "C");
  Matrix expect = Matrix::Zero(9, 9);
  for (std::size_t i = 0; i < d; ++i) expect += detail::kron(basis_projector(d, i), basis_projector(d, i));
  CHECK(max_abs(id.op.matrix() - expect) == 0.0);

  Rng rng = derive_stream(31, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix u = haar_sample(d, rng);
    const ChoiOperator c = mp_channel_choi(u, "D", "C");
    CHECK(is_psd(c.op));
    CHECK(is_channel(c));
    const Matrix rho = random_density(d, rng);
    Matrix born = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      const Vector v = u.col(static_cast<Eigen::Index>(i));
      born(i, i) = (v.adjoint() * rho * v)(0, 0);
    }
    CHECK(max_abs(apply_channel(c, Operator(Signature{{"C", d}}, rho)).matrix() - born) < 1e-13);
  }
  Matrix bad = Matrix::Identity(d, d);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(mp_channel_choi(bad, "D", "C"), InvalidInput);
}

TEST_CASE("composing with the classical identity leaves the device unchanged", "[measurement][property]") {
  Rng rng = derive_stream(31, 4);
  for (std::size_t d = 2; d <= 4; ++d) {
    const Matrix u = haar_sample(d, rng);
    const ChoiOperator copy = mp_channel_choi(Matrix::Identity(d, d), "D", "K");
    const ChoiOperator dev = mp_channel_choi(u, "K", "C");
    const ChoiOperator composed = link(copy, dev);
    const ChoiOperator direct = mp_channel_choi(u, "D", "C");
    CHECK(distance(composed.op, align_to(direct.op, composed.op.signature())) < 1e-12);
  }
}

TEST_CASE("Haar first moment", "[measurement]") {
  constexpr std::size_t kSamples = 10000;
  const double tol = 5.0 / std::sqrt(static_cast<double>(kSamples));
  for (std::size_t d : {2u, 3u}) {
    Rng rng = derive_stream(31, 5);
    const Matrix a = random_hermitian(d, rng);
    const Matrix p0 = basis_projector(d, 0);
    Matrix mean_a = Matrix::Zero(d, d);
    Matrix mean_p = Matrix::Zero(d, d);
    for (std::size_t n = 0; n < kSamples; ++n) {
      Rng r = derive_stream(32, n);
      const Matrix u = haar_sample(d, r);
      mean_a += u * a * u.adjoint();
      mean_p += u * p0 * u.adjoint();
    }
    mean_a /= static_cast<double>(kSamples);
    mean_p /= static_cast<double>(kSamples);
    const Matrix id = Matrix::Identity(d, d);
    CHECK(spectral_norm(mean_a - a.trace() / static_cast<double>(d) * id) < tol * spectral_norm(a));
    CHECK(spectral_norm(mean_p - id / static_cast<double>(d)) < tol);
  }
}

TEST_CASE("Haar measure is left invariant in distribution", "[measurement]") {
  // E|U_00|^4 = 2/(d(d+1)) for U and for V U with V fixed.
  constexpr std::size_t kSamples = 10000;
  for (std::size_t d : {2u, 3u}) {
    Rng rv = derive_stream(31, 6);
    const Matrix v = haar_sample(d, rv);
    const double exact = 2.0 / (static_cast<double>(d) * (d + 1.0));
    for (bool shifted : {false, true}) {
      std::vector<double> x(kSamples);
      for (std::size_t n = 0; n < kSamples; ++n) {
        Rng r = derive_stream(33, n);
        const Matrix u = shifted ? Matrix(v * haar_sample(d, r)) : haar_sample(d, r);
        x[n] = std::pow(std::norm(u(0, 0)), 2);
      }
      const double mean = std::accumulate(x.begin(), x.end(), 0.0) / kSamples;
      double ss = 0.0;
      for (double y : x) ss += (y - mean) * (y - mean);
      const double se = std::sqrt(ss / (kSamples - 1) / kSamples);
      CHECK(std::abs(mean - exact) < 4.0 * se);
    }
  }
}

TEST_CASE("replicated POVM of the optimal cloning instrument", "[measurement]") {
  const std::size_t d = 2;
  const GeneralizedInstrument g = assemble_instrument(optimal_cloning_blocks(d));
  Rng rng = derive_stream(31, 7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix u = haar_sample(d, rng);
    const Povm p = replicated_povm(g, u);
    CHECK(p.outcomes() == d * d);
    CHECK(p.signature() == (Signature{{"A", d}, {"B", d}}));
    CHECK(p.is_valid(1e-10));
  }
}

TEST_CASE("replicated POVM closed forms at U = I", "[measurement]") {
  for (std::size_t d = 2; d <= 4; ++d) {
    const Matrix id = Matrix::Identity(d, d);
    const double x = static_cast<double>(d);
    // Printed coefficient 1 - 2/(9d(d+1)) belongs to the printed blocks.
    const double printed_w = 1.0 / (9.0 * x * (x + 1.0));
    const Povm printed = replicated_povm(assemble_instrument(printed_cloning_blocks(d)), id);
    CHECK(povm_distance(printed, cloning_replicated_closed(d, id, printed_w)) < 1e-12);
    // The optimal blocks carry weight 1/18.
    const Povm optimal = replicated_povm(assemble_instrument(optimal_cloning_blocks(d)), id);
    CHECK(povm_distance(optimal, cloning_replicated_closed(d, id, 1.0 / 18.0)) < 1e-12);
    if (d == 2) {
      const IrrepProjectors& p = projectors(d);
      const Matrix e0 = detail::kron(basis_projector(d, 0), id);
      CHECK(max_abs(printed.elements[0].matrix() - (1.0 - 1.0 / 27.0) * p.sym * e0 * p.sym) < 1e-12);
    }
  }
  for (std::size_t d = 3; d <= 4; ++d) {
    const Matrix id = Matrix::Identity(d, d);
    const Povm learn = replicated_povm(assemble_instrument(optimal_learning_blocks(d).blocks), id);
    CHECK(povm_distance(learn, learning_replicated_closed(d, id)) < 1e-12);
  }
}

TEST_CASE("replicated POVM covariance under unitaries and relabelling", "[measurement]") {
  Rng rng = derive_stream(31, 8);
  for (std::size_t d = 2; d <= 3; ++d) {
    const GeneralizedInstrument g = assemble_instrument(optimal_cloning_blocks(d));
    const Povm base = replicated_povm(g, Matrix::Identity(d, d));
    for (int trial = 0; trial < 3; ++trial) {
      const Matrix u = haar_sample(d, rng);
      std::vector<std::size_t> sigma(d);
      std::iota(sigma.begin(), sigma.end(), 0);
      std::shuffle(sigma.begin(), sigma.end(), rng);
      const Matrix ut = u * permutation_matrix(sigma);
      const Matrix w = detail::kron(ut, ut);
      const Povm rotated = replicated_povm(g, u);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const Matrix lhs = rotated.elements[sigma[i] * d + sigma[j]].matrix();
          const Matrix rhs = w * base.elements[i * d + j].matrix() * w.adjoint();
          CHECK(max_abs(lhs - rhs) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("replicated POVM is linear in the instrument", "[measurement][property]") {
  const std::size_t d = 3;
  const OptimizationResult res = cloning_extremal_search(d);
  REQUIRE(res.winners.size() >= 2);
  const GeneralizedInstrument g1 = assemble_instrument(blocks_of(res.certificate[res.winners[0]], d, Task::Cloning));
  const GeneralizedInstrument g2 = assemble_instrument(blocks_of(res.certificate[res.winners[1]], d, Task::Cloning));
  Rng rng = derive_stream(31, 9);
  const Matrix u = haar_sample(d, rng);
  for (double t : {0.0, 0.3, 0.5, 1.0}) {
    const Povm mixed = replicated_povm(mix(g1, g2, t), u);
    const Povm a = replicated_povm(g1, u);
    const Povm b = replicated_povm(g2, u);
    for (std::size_t k = 0; k < d * d; ++k) {
      const Matrix expect = t * a.elements[k].matrix() + (1.0 - t) * b.elements[k].matrix();
      CHECK(max_abs(mixed.elements[k].matrix() - expect) < 1e-12);
    }
  }
}

TEST_CASE("Monte-Carlo fidelity of the optimal instruments", "[measurement]") {
  const HaarEstimate clone = haar_average_fidelity(assemble_instrument(optimal_cloning_blocks(2)), 10000, 7);
  CHECK(within_three_sigma(clone, 2.0 / 3.0));
  const HaarEstimate learn = haar_average_fidelity(assemble_instrument(optimal_learning_blocks(2).blocks), 10000, 7);
  CHECK(within_three_sigma(learn, 7.0 / 12.0));
  CHECK(clone.mean >= 0.0);
  CHECK(clone.mean <= 1.0);
}

TEST_CASE("Monte-Carlo fidelity of random instruments lies in [0, 1]", "[measurement]") {
  Rng rng = derive_stream(31, 10);
  for (Task task : {Task::Cloning, Task::Learning}) {
    const GeneralizedInstrument g = random_instrument(2, task, rng);
    REQUIRE(check_instrument(g).ok());
    const HaarEstimate est = haar_average_fidelity(g, 200, 3);
    CHECK(est.mean >= 0.0);
    CHECK(est.mean <= 1.0);
  }
  CHECK_THROWS_AS(haar_average_fidelity(assemble_instrument(optimal_cloning_blocks(2)), 0, 1), InvalidInput);
}

TEST_CASE("Monte-Carlo estimate is reproducible for a fixed seed", "[measurement]") {
  const GeneralizedInstrument g = assemble_instrument(optimal_cloning_blocks(2));
  const HaarEstimate a = haar_average_fidelity(g, 100, 42);
  const HaarEstimate b = haar_average_fidelity(g, 100, 42);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}
