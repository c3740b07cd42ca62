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

#include <set>
#include <string>
#include <vector>

#include "support.hpp"

using namespace mclone;

namespace {

double block_distance(const ReducedBlocks& a, const ReducedBlocks& b) {
  double worst = 0.0;
  for (const auto& [c, blk] : a.blocks) {
    const ClassBlock& o = b[c];
    worst = std::max(worst, (blk.alpha - o.alpha).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(blk.beta - o.beta));
    worst = std::max(worst, std::abs(blk.gamma - o.gamma));
  }
  return worst;
}

std::set<std::string> winning_supports(const OptimizationResult& r) {
  std::set<std::string> out;
  for (std::size_t n : r.winners) out.insert(r.certificate[n].support());
  return out;
}

double learning_formula(double d) { return (9.0 * d * d + 16.0 * d - 17.0) / (6.0 * d * d * (d * d - 1.0)); }

}  // namespace

TEST_CASE("extremal search reaches 4/(3d) with the two tied supports", "[optimize]") {
  for (std::size_t d = 2; d <= 6; ++d) {
    const OptimizationResult r = cloning_extremal_search(d);
    const double target = 4.0 / (3.0 * static_cast<double>(d));
    CHECK(std::abs(r.fidelity.total() - target) < 1e-9);
    CHECK(std::abs(reduced_fidelity(r.blocks).total() - r.fidelity.total()) < 1e-12);
    CHECK(winning_supports(r) == std::set<std::string>{"{alpha_xxx,alpha_xyx}", "{alpha_xxx,alpha_xyy}"});
    CHECK(block_distance(r.blocks, optimal_cloning_blocks(d)) < 1e-6);
    CHECK(constraint_residual(r.blocks) < 1e-10);
  }
  CHECK(std::abs(cloning_extremal_search(5).fidelity.total() - 4.0 / 15.0) < 1e-9);
  CHECK_THROWS_AS(cloning_extremal_search(1), DimensionError);
}

TEST_CASE("every certificate entry respects the global bound", "[optimize][property]") {
  for (std::size_t d = 2; d <= 5; ++d) {
    const OptimizationResult r = cloning_extremal_search(d);
    const double bound = 4.0 / (3.0 * static_cast<double>(d)) + 1e-9;
    std::size_t feasible = 0;
    for (const ExtremalCandidate& c : r.certificate) {
      CHECK(c.entries.size() <= 2);
      if (c.feasible) {
        ++feasible;
        CHECK(c.fidelity <= bound);
        for (const CandidateEntry& e : c.entries) {
          if (e.slot.irrep != Irrep::Alpha) continue;
          // Rank one: the determinant of a PSD 2x2 block vanishes.
          CHECK(std::abs(e.alpha.determinant()) < 1e-9);
        }
        CHECK(constraint_residual(blocks_of(c, d, Task::Cloning)) < 1e-9);
      } else {
        CHECK_FALSE(c.reason.empty());
      }
    }
    CHECK(feasible > 0);
    // Each slot appears alone and in every pair.
    const std::size_t slots = d == 2 ? 8 : 15;
    CHECK(r.certificate.size() == slots + slots * (slots - 1) / 2);
  }
}

TEST_CASE("complex phases do not improve the cloning optimum", "[optimize]") {
  const OptimizationResult r = cloning_extremal_search(2);
  CHECK(complex_phase_spot_check(r, 64) <= 2.0 / 3.0 + 1e-9);
}

TEST_CASE("canonical cloning blocks", "[optimize]") {
  for (std::size_t d = 2; d <= 6; ++d) {
    const ReducedBlocks b = optimal_cloning_blocks(d);
    CHECK(std::abs(reduced_fidelity(b).total() - 4.0 / (3.0 * static_cast<double>(d))) < 1e-9);
    CHECK(constraint_residual(b) < 1e-12);
    const GeneralizedInstrument g = assemble_instrument(b);
    if (d <= 3) {
      CHECK(check_instrument(g).ok());
      CHECK(has_symmetry(g, SymmetryMap::Swap));
    }
  }
  // d = 2: B = [[1/6, sqrt(3)/6], [., 1/2]] and s_xyx = B / 2.
  const ReducedBlocks b2 = optimal_cloning_blocks(2);
  CHECK(std::abs(b2[OutcomeClass::XYX].alpha(0, 1).real() - std::sqrt(3.0) / 12.0) < 1e-15);
  CHECK(std::abs(b2[OutcomeClass::XYY].alpha(0, 1).real() + std::sqrt(3.0) / 12.0) < 1e-15);
  CHECK(std::abs(b2[OutcomeClass::XXX].alpha(0, 0).real() - 4.0 / 3.0) < 1e-15);
}

TEST_CASE("published cloning blocks are feasible but below the optimum", "[optimize]") {
  for (std::size_t d = 2; d <= 6; ++d) {
    const ReducedBlocks b = printed_cloning_blocks(d);
    CHECK(constraint_residual(b) < 1e-12);
    CHECK(reduced_fidelity(b).total() < 4.0 / (3.0 * static_cast<double>(d)) - 1e-3);
  }
  // d = 2: B off-diagonal sqrt(d_-)/(3d) = 1/6, so s_xyx carries 1/12.
  const ReducedBlocks b2 = printed_cloning_blocks(2);
  CHECK(std::abs(b2[OutcomeClass::XYX].alpha(0, 1).real() - 1.0 / 12.0) < 1e-15);
  CHECK(std::abs(reduced_fidelity(b2).total() - 0.659223633544) < 1e-11);
  CHECK(check_instrument(assemble_instrument(b2)).ok());
}

TEST_CASE("Q-form of the replicated POVM depends on the control weight", "[optimize]") {
  for (std::size_t d = 2; d <= 4; ++d) {
    const Matrix id = Matrix::Identity(d, d);
    const double printed_w = 1.0 / (9.0 * d * (d + 1.0));
    const Povm opt = replicated_povm(assemble_instrument(optimal_cloning_blocks(d)), id);
    const Povm pub = replicated_povm(assemble_instrument(printed_cloning_blocks(d)), id);
    CHECK(povm_distance(opt, cloning_replicated_closed(d, id, 1.0 / 18.0)) < 1e-12);
    CHECK(povm_distance(pub, cloning_replicated_closed(d, id, printed_w)) < 1e-12);
    CHECK(povm_distance(opt, cloning_replicated_closed(d, id, printed_w)) > 1e-3);
  }
}

TEST_CASE("learning optimum", "[optimize]") {
  const OptimizationResult r2 = optimal_learning_blocks(2);
  CHECK(std::abs(r2.fidelity.total() - 7.0 / 12.0) < 1e-12);
  CHECK(std::abs(learning_fidelity_closed(2) - 7.0 / 12.0) < 1e-15);
  CHECK(std::abs(optimal_learning_blocks(3).fidelity.total() - 7.0 / 27.0) < 1e-9);
  for (std::size_t d = 2; d <= 6; ++d) {
    const double x = static_cast<double>(d);
    const OptimizationResult r = optimal_learning_blocks(d);
    if (d >= 3) CHECK(std::abs(r.fidelity.total() - learning_formula(x)) < 1e-9);
    REQUIRE(r.maximizer.has_value());
    CHECK(std::abs(*r.maximizer - (x + 1.0) / (18.0 * x * (x - 1.0))) < 1e-6);
    CHECK(std::abs(r.fidelity.beta - 1.0 / (x * x)) < 1e-12);
    CHECK(std::abs(r.fidelity.gamma - (d > 2 ? 1.0 / (2.0 * x * x) : 0.0)) < 1e-12);
    CHECK(constraint_residual(r.blocks) < 1e-12);
    // The maximizer is interior and the objective falls off on both sides.
    const double a = learning_maximizer_closed(d);
    CHECK(a > 0.0);
    CHECK(a < 1.0 / (2.0 * x));
    const double f = reduced_fidelity(learning_blocks(d, a)).total();
    CHECK(reduced_fidelity(learning_blocks(d, 0.9 * a)).total() < f);
    CHECK(reduced_fidelity(learning_blocks(d, 1.1 * a)).total() < f);
  }
  CHECK_THROWS_AS(learning_blocks(3, -0.1), InvalidInput);
  CHECK_THROWS_AS(learning_blocks(3, 1.0), InvalidInput);
}

TEST_CASE("estimate-and-prepare baseline", "[optimize]") {
  CHECK(std::abs(estimate_prepare_fidelity(2) - 4.0 / 9.0) < 1e-15);
  CHECK(std::abs(estimate_prepare_fidelity(3) - 25.0 / 144.0) < 1e-15);
  for (std::size_t d = 2; d <= 10; ++d) {
    CHECK(estimate_prepare_fidelity(d) < learning_fidelity_closed(d));
    CHECK(learning_fidelity_closed(d) < cloning_fidelity_closed(d));
  }
  CHECK_THROWS_AS(estimate_prepare_fidelity(1), DimensionError);
}

TEST_CASE("no random feasible point beats the optimum", "[optimize][property]") {
  constexpr int kSamples = 100000;
  for (Task task : {Task::Cloning, Task::Learning}) {
    Rng rng = derive_stream(51, task == Task::Cloning ? 0 : 1);
    const double bound = (task == Task::Cloning ? 2.0 / 3.0 : 7.0 / 12.0) + 1e-9;
    const DeltaTable table = delta_table(2);
    double worst_residual = 0.0;
    double best = 0.0;
    for (int n = 0; n < kSamples; ++n) {
      const ReducedBlocks b = feasible_random_blocks(2, task, rng);
      worst_residual = std::max(worst_residual, constraint_residual(b));
      best = std::max(best, reduced_fidelity(b, table).total());
    }
    CHECK(worst_residual < 1e-10);
    CHECK(best <= bound);
  }
}

TEST_CASE("sampled feasible points assemble into valid instruments", "[optimize]") {
  Rng rng = derive_stream(51, 2);
  for (std::size_t d = 2; d <= 3; ++d) {
    for (Task task : {Task::Cloning, Task::Learning}) {
      for (int n = 0; n < 10; ++n) CHECK(check_instrument(assemble_instrument(feasible_random_blocks(d, task, rng))).ok());
    }
  }
}

TEST_CASE("learning alpha bound holds on sampled points", "[optimize][property]") {
  constexpr int kSamples = 10000;
  for (std::size_t d = 2; d <= 4; ++d) {
    Rng rng = derive_stream(51, 10 + d);
    const DeltaTable table = delta_table(d);
    int violations = 0;
    for (int n = 0; n < kSamples; ++n) {
      const ReducedBlocks b = feasible_random_blocks(d, Task::Learning, rng);
      const double a = swap_symmetrize(b)[OutcomeClass::XYX].alpha(0, 0).real();
      const double fa = reduced_fidelity(b, table).alpha;
      violations += fa > learning_alpha_bound(d, a) + 1e-12;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("fidelity is linear under mixing", "[optimize][property]") {
  Rng rng = derive_stream(51, 3);
  for (std::size_t d = 2; d <= 4; ++d) {
    for (int n = 0; n < 20; ++n) {
      const ReducedBlocks a = feasible_random_blocks(d, Task::Cloning, rng);
      const ReducedBlocks b = feasible_random_blocks(d, Task::Cloning, rng);
      const double t = uniform01(rng);
      const double lhs = reduced_fidelity(mix(a, b, t)).total();
      const double rhs = t * reduced_fidelity(a).total() + (1.0 - t) * reduced_fidelity(b).total();
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
  const GeneralizedInstrument g1 = random_instrument(2, Task::Cloning, rng);
  const GeneralizedInstrument g2 = random_instrument(2, Task::Cloning, rng);
  const double lhs = exact_fidelity(mix(g1, g2, 0.3));
  CHECK(std::abs(lhs - (0.3 * exact_fidelity(g1) + 0.7 * exact_fidelity(g2))) < 1e-12);
}

TEST_CASE("symmetrized random instruments stay below the optima", "[optimize][property]") {
  Rng rng = derive_stream(51, 4);
  for (Task task : {Task::Cloning, Task::Learning}) {
    const double bound = (task == Task::Cloning ? 2.0 / 3.0 : 7.0 / 12.0) + 1e-9;
    for (int n = 0; n < 20; ++n) {
      const GeneralizedInstrument g = random_instrument(2, task, rng);
      const double f = exact_fidelity(g);
      CHECK(f <= bound);
      GeneralizedInstrument s = g;
      for (SymmetryMap m : {SymmetryMap::Diagonal, SymmetryMap::Covariant, SymmetryMap::Relabel, SymmetryMap::Swap}) {
        s = symmetrize(s, m);
      }
      const ReducedBlocks b = extract_blocks(s);
      CHECK(std::abs(reduced_fidelity(b).total() - f) < 1e-9);
      CHECK(constraint_residual(b) < 1e-9);
    }
  }
}

TEST_CASE("golden-section search finds interior and boundary maxima", "[optimize]") {
  CHECK(std::abs(golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-12) - 0.3) < 1e-6);
  CHECK(golden_section_max([](double x) { return x; }, 0.0, 1.0, 1e-12) == 1.0);
}
