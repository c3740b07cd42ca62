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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using namespace mclone;
using mclone::testing::max_abs;
using mclone::testing::random_density;

namespace {

Vector random_state(std::size_t d, Rng& rng) {
  Vector v = ginibre(static_cast<Eigen::Index>(d), 1, rng).col(0);
  return v / v.norm();
}

Vector kron_vec(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

double instrument_distance(const GeneralizedInstrument& a, const GeneralizedInstrument& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n < a.elements.size(); ++n) worst = std::max(worst, distance(a.elements[n], b.elements[n]));
  return worst;
}

}  // namespace

TEST_CASE("control-SWAP routes the inputs in superposition", "[realization]") {
  Rng rng = derive_stream(61, 0);
  for (std::size_t d = 2; d <= 3; ++d) {
    const Matrix u = control_swap_gate(d).unitary;
    const Vector chi = random_state(d, rng);
    const Vector xi = random_state(d, rng);
    const Vector out = u * kron_vec(kron_vec(chi, xi), plus_state());
    const Vector expect = (kron_vec(kron_vec(chi, xi), basis_vector(2, 0)) +
                           kron_vec(kron_vec(xi, chi), basis_vector(2, 1))) /
                          std::sqrt(2.0);
    CHECK(max_abs(out - expect) < 1e-14);
  }
}

TEST_CASE("control-SWAP is unitary and matches the permutation oracle", "[realization]") {
  Rng rng = derive_stream(61, 1);
  for (std::size_t d = 2; d <= 4; ++d) {
    const Matrix u = control_swap_gate(d).unitary;
    const auto n = static_cast<Eigen::Index>(2 * d * d);
    CHECK(max_abs(u.adjoint() * u - Matrix::Identity(n, n)) < 1e-15);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector chi = random_state(d, rng);
      const Vector xi = random_state(d, rng);
      const Vector c = random_state(2, rng);
      const Vector oracle = c(0) * kron_vec(kron_vec(chi, xi), basis_vector(2, 0)) +
                            c(1) * kron_vec(kron_vec(xi, chi), basis_vector(2, 1));
      CHECK(max_abs(u * kron_vec(kron_vec(chi, xi), c) - oracle) < 1e-14);
    }
    const ChoiOperator choi = control_swap_choi(d);
    CHECK(is_channel(choi));
    const Matrix rho = random_density(2 * d * d, rng);
    const Operator out = apply_channel(choi, Operator(control_swap_inputs(d), rho));
    CHECK(out.signature() == control_swap_outputs(d));
    CHECK(max_abs(out.matrix() - u * rho * u.adjoint()) < 1e-13);
  }
  CHECK_THROWS_AS(control_swap_gate(1), DimensionError);
}

TEST_CASE("control POVM", "[realization]") {
  const Matrix plus = outer(plus_state(), plus_state());
  const Matrix z = control_sigma_z();
  for (std::size_t d = 2; d <= 8; ++d) {
    for (const ControlPovm& p : {control_povm(d), printed_control_povm(d)}) {
      CHECK(max_abs(p.elements[0] + p.elements[1] + p.elements[2] - Matrix::Identity(2, 2)) < 1e-12);
      CHECK(max_abs(p.elements[0] - p.elements[0](0, 0) * 2.0 * plus) < 1e-15);
      CHECK(max_abs(p.elements[2] - z * p.elements[1] * z) < 1e-15);
      for (const Matrix& e : p.elements) {
        const Eigen::VectorXd ev = eigenvalues_hermitian(e);
        CHECK(ev.minCoeff() >= -1e-15);
        CHECK(ev.maxCoeff() <= 1.0 + 1e-15);
      }
      CHECK(p.povm().is_valid(1e-12));
    }
  }
  CHECK(max_abs(printed_control_povm(2).elements[0] - (52.0 / 54.0) * plus) < 1e-15);
  CHECK(max_abs(control_povm(2).elements[0] - (8.0 / 9.0) * plus) < 1e-15);
  CHECK_THROWS_AS(control_povm_with_weight(0.6), InvalidInput);
}

TEST_CASE("classical processing", "[realization]") {
  const std::size_t d = 4;
  const ClassicalProcessing f{d};
  Rng rng = derive_stream(61, 2);
  std::vector<std::uint64_t> hist(d, 0);
  for (int t = 0; t < 30000; ++t) {
    CHECK(f(2, 0, rng) == std::make_pair<std::size_t, std::size_t>(2, 2));
    const auto [i, j] = f(2, 1, rng);
    CHECK(i == 2);
    CHECK(j != 2);
    ++hist[j];
    const auto [a, b] = f(1, 2, rng);
    CHECK(b == 1);
    CHECK(a != 1);
  }
  std::vector<double> probs(d, 1.0 / 3.0);
  probs[2] = 0.0;
  CHECK(chi_squared_test(hist, probs).p_value > 1e-3);
  CHECK_THROWS_AS(f(4, 0, rng), InvalidInput);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t n = 0; n < 3; ++n) {
      double total = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) total += f.probability(k, n, i, j);
      CHECK(std::abs(total - 1.0) < 1e-15);
    }
}

TEST_CASE("bipartite Q POVM", "[realization]") {
  for (std::size_t d = 2; d <= 5; ++d) {
    const Povm q = bipartite_q_povm(d);
    CHECK(q.outcomes() == d * d);
    CHECK(max_abs(q.sum().matrix() - Matrix::Identity(2 * d, 2 * d)) < 1e-10);
    CHECK(q.is_valid(1e-10));
    for (std::size_t i = 0; i < d; ++i) {
      const Eigen::VectorXd ev = eigenvalues_hermitian(q.elements[i * d + i].matrix());
      CHECK(std::count_if(ev.data(), ev.data() + ev.size(), [](double x) { return x > 1e-12; }) == 1);
    }
    // Measuring P and post-processing with f gives the same POVM.
    const Povm composed = composed_q_povm(d, control_povm(d));
    CHECK(povm_distance(q, composed) < 1e-14);
  }
  CHECK(max_abs(bipartite_q_povm(3).sum().matrix() - Matrix::Identity(6, 6)) < 1e-10);
}

TEST_CASE("sampling f after P reproduces the Q Born rule", "[realization]") {
  const std::size_t d = 2;
  constexpr std::uint64_t kShots = 100000;
  Rng rng = derive_stream(61, 3);
  const Matrix rho_l = random_density(2, rng);
  const ControlPovm p = control_povm(d);
  const ClassicalProcessing f{d};
  const Povm q = bipartite_q_povm(d, p);
  for (std::size_t k = 0; k < d; ++k) {
    std::array<double, 3> pn{};
    for (std::size_t n = 0; n < 3; ++n) pn[n] = (p.elements[n] * rho_l).trace().real();
    std::discrete_distribution<std::size_t> pick(pn.begin(), pn.end());
    std::vector<std::uint64_t> counts(d * d, 0);
    for (std::uint64_t t = 0; t < kShots; ++t) {
      const auto [i, j] = f(k, pick(rng), rng);
      ++counts[i * d + j];
    }
    const Matrix input = detail::kron(basis_projector(d, k), rho_l);
    std::vector<double> born;
    for (const Operator& e : q.elements) born.push_back((e.matrix() * input).trace().real());
    CHECK(chi_squared_test(counts, born).p_value > 1e-3);
  }
}

TEST_CASE("realization identity", "[realization]") {
  for (std::size_t d = 2; d <= 4; ++d) {
    const GeneralizedInstrument net = realization_instrument(d);
    CHECK(instrument_distance(net, assemble_instrument(optimal_cloning_blocks(d))) <= 1e-9);
    CHECK(check_instrument(net).ok());
    CHECK(check_comb(net.total(), cloning_shape()));
    // The published control weight realizes the published blocks.
    const GeneralizedInstrument pub = realization_instrument(d, printed_control_povm(d));
    CHECK(instrument_distance(pub, assemble_instrument(printed_cloning_blocks(d))) <= 1e-9);
  }
}

TEST_CASE("Monte-Carlo fidelity of the realized network", "[realization]") {
  const HaarEstimate est = haar_average_fidelity(realization_instrument(2), 10000, 11);
  CHECK(within_three_sigma(est, 2.0 / 3.0));
}

TEST_CASE("measurement device can be used once", "[realization]") {
  Rng rng = derive_stream(61, 4);
  MeasurementDevice dev(Matrix::Identity(2, 2));
  const Matrix state = random_density(4, rng);
  CHECK_FALSE(dev.used());
  const auto [k, post] = dev.measure(state, rng);
  CHECK(k < 2);
  CHECK(std::abs(post.trace() - Complex(1.0, 0.0)) < 1e-12);
  CHECK(dev.used());
  CHECK_THROWS_AS(dev.measure(state, rng), InvalidInput);
}

TEST_CASE("simulated runs follow the Born rule", "[realization]") {
  const std::size_t d = 2;
  const Operator mixed(Signature{{"A", d}, {"B", d}}, Matrix::Identity(4, 4) / 4.0);
  const SimulationResult r = simulate_run(d, Matrix::Identity(d, d), mixed, 100000, 7);
  std::uint64_t total = 0;
  for (std::uint64_t c : r.counts) total += c;
  CHECK(total == 100000);
  CHECK(r.device_uses == 100000);
  double born_total = 0.0;
  for (double b : r.born) born_total += b;
  CHECK(std::abs(born_total - 1.0) < 1e-12);
  CHECK(chi_squared_test(r.counts, r.born).p_value > 1e-3);

  Rng rng = derive_stream(61, 5);
  const Matrix u = haar_sample(3, rng);
  const Operator rho(Signature{{"B", 3}, {"A", 3}}, random_density(9, rng));
  const SimulationResult r3 = simulate_run(3, u, rho, 50000, 9);
  CHECK(chi_squared_test(r3.counts, r3.born).p_value > 1e-3);
}

TEST_CASE("eigenstate inputs make (i, i) the modal outcome", "[realization]") {
  Rng rng = derive_stream(61, 6);
  for (std::size_t d = 2; d <= 3; ++d) {
    const Matrix u = haar_sample(d, rng);
    for (std::size_t i = 0; i < d; ++i) {
      const Matrix phi = outer(u.col(static_cast<Eigen::Index>(i)), u.col(static_cast<Eigen::Index>(i)));
      const Operator rho(Signature{{"A", d}, {"B", d}}, detail::kron(phi, phi));
      const SimulationResult r = simulate_run(d, u, rho, 20000, 3 + i);
      const auto modal = std::max_element(r.counts.begin(), r.counts.end()) - r.counts.begin();
      CHECK(static_cast<std::size_t>(modal) == i * d + i);
      const auto modal_born = std::max_element(r.born.begin(), r.born.end()) - r.born.begin();
      CHECK(static_cast<std::size_t>(modal_born) == i * d + i);
    }
  }
}

TEST_CASE("simulate_run is deterministic and validates its input", "[realization]") {
  const std::size_t d = 2;
  const Operator mixed(Signature{{"A", d}, {"B", d}}, Matrix::Identity(4, 4) / 4.0);
  const Matrix id = Matrix::Identity(d, d);
  CHECK(simulate_run(d, id, mixed, 1000, 5).counts == simulate_run(d, id, mixed, 1000, 5).counts);
  const SimulationResult one = simulate_run(d, id, mixed, 1, 5);
  CHECK(std::count(one.counts.begin(), one.counts.end(), 1u) == 1);

  CHECK_THROWS_AS(simulate_run(d, id, Operator(mixed.signature(), Matrix::Identity(4, 4)), 10, 1), InvalidInput);
  Matrix neg = Matrix::Identity(4, 4) / 2.0;
  neg(0, 0) = -0.5;
  CHECK_THROWS_AS(simulate_run(d, id, Operator(mixed.signature(), neg), 10, 1), InvalidInput);
  CHECK_THROWS_AS(simulate_run(d, id, Operator(Signature{{"A", d}, {"Q", d}}, Matrix::Identity(4, 4) / 4.0), 10, 1),
                  InvalidInput);
}

TEST_CASE("discarding K commutes with measuring the control", "[realization]") {
  Rng rng = derive_stream(61, 7);
  for (std::size_t d = 2; d <= 3; ++d) {
    const Matrix u = haar_sample(d, rng);
    const Matrix gate = control_swap_gate(d).unitary;
    const Matrix in = detail::kron(random_density(d * d, rng), outer(plus_state(), plus_state()));
    const Operator sigma(control_swap_outputs(d), gate * in * gate.adjoint());
    const ControlPovm p = control_povm(d);
    for (std::size_t k = 0; k < d; ++k) {
      const Vector uk = u.col(static_cast<Eigen::Index>(k));
      const Operator ek(Signature{{"C", d}}, outer(uk, uk));
      for (std::size_t n = 0; n < 3; ++n) {
        const Operator pn(Signature{{"L", 2}}, p.elements[n]);
        // Measure P on L with K still present.
        const Operator full = tensor(tensor(ek, Operator::identity(Signature{{"K", d}})), pn);
        const Complex with_k = (full.matrix() * sigma.matrix()).trace();
        // Discard K first.
        const Operator reduced = partial_trace(sigma, {"K"});
        const Complex without_k = (tensor(ek, pn).matrix() * reduced.matrix()).trace();
        CHECK(std::abs(with_k - without_k) < 1e-13);
      }
    }
  }
}

TEST_CASE("chi-squared p-values match the two-dof closed form", "[realization]") {
  // Three equiprobable bins: statistic x gives p = exp(-x / 2).
  const std::vector<double> probs(3, 1.0 / 3.0);
  const std::vector<std::uint64_t> counts = {120, 90, 90};
  const ChiSquaredResult r = chi_squared_test(counts, probs);
  CHECK(r.dof == 2);
  CHECK(std::abs(r.statistic - 6.0) < 1e-12);
  CHECK(std::abs(r.p_value - std::exp(-3.0)) < 1e-12);
  CHECK(chi_squared_test({0, 5}, {0.0, 1.0}).p_value == 1.0);
  CHECK(chi_squared_test({1, 5}, {0.0, 1.0}).p_value == 0.0);
  CHECK_THROWS_AS(chi_squared_test({1}, {0.5, 0.5}), InvalidInput);
}
