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
 * @file verify.hpp
 * @brief End-to-end consistency report.
 *
 * Every closed-form claim is recomputed from its definition: projectors from
 * their vectors, the Delta table by compression, optima by search, the
 * circuit by link products and fidelities by Haar sampling. Printed values
 * that disagree with the recomputation are WARN entries; a check that
 * contradicts a definition is FAIL.
 */

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "mclone/optimize.hpp"
#include "mclone/realization.hpp"
#include "mclone/report.hpp"
#include "mclone/symmetry.hpp"

namespace mclone {

struct VerifyOptions {
  std::vector<std::size_t> dims{2, 3};
  double tol = 1e-9;
  std::uint64_t seed = 7;
  std::size_t mc_samples = 2000;
  std::size_t full_dmax = 5;  ///< largest d for suites that build d^4 x d^4 instruments
  std::size_t mc_dmax = 3;    ///< largest d for Haar sampling
  bool inject_delta_fault = false;
};

namespace detail {

inline std::string tag(const std::string& suite, std::size_t d, const std::string& what) {
  return suite + "/d=" + std::to_string(d) + "/" + what;
}

/// A second representative of each class, built from the largest indices.
inline std::array<std::size_t, 3> alternate_representative(OutcomeClass c, std::size_t d) {
  const std::size_t y = d - 1, x = d - 2, z = d > 2 ? d - 3 : 0;
  switch (c) {
    case OutcomeClass::XXX: return {y, y, y};
    case OutcomeClass::XXY: return {y, y, x};
    case OutcomeClass::XYX: return {y, x, y};
    case OutcomeClass::XYY: return {y, x, x};
    case OutcomeClass::XYZ: return {z, y, x};
  }
  return {0, 0, 0};
}

inline double delta_entry_distance(const DeltaEntry& a, const DeltaEntry& b) {
  return std::max({(a.alpha - b.alpha).cwiseAbs().maxCoeff(), std::abs(a.beta - b.beta), std::abs(a.gamma - b.gamma)});
}

inline void verify_projectors(VerificationReport& rep, std::size_t d, double tol, Rng& rng) {
  const std::string ref = "irrep-decomposition";
  const IrrepProjectors& p = projectors(d);
  const auto n3 = static_cast<Eigen::Index>(d * d * d);
  std::vector<const Matrix*> blocks{&p.alpha[0][0], &p.alpha[1][1], &p.beta};
  if (p.has_gamma()) blocks.push_back(&p.gamma);
  Matrix sum = Matrix::Zero(n3, n3);
  double idem = 0.0, ortho = 0.0;
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    sum += *blocks[a];
    idem = std::max(idem, ((*blocks[a]) * (*blocks[a]) - *blocks[a]).norm());
    for (std::size_t b = a + 1; b < blocks.size(); ++b) ortho = std::max(ortho, ((*blocks[a]) * (*blocks[b])).norm());
  }
  rep.check(tag("projectors", d, "completeness"), ref, (sum - Matrix::Identity(n3, n3)).norm(), 0.0, tol);
  rep.check(tag("projectors", d, "idempotence"), ref, idem, 0.0, tol);
  rep.check(tag("projectors", d, "orthogonality"), ref, ortho, 0.0, tol);
  const Matrix v = covariance_rep(haar_sample(d, rng));
  double comm = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) comm = std::max(comm, (v * p.alpha[a][b] - p.alpha[a][b] * v).norm());
  }
  comm = std::max(comm, (v * p.beta - p.beta * v).norm());
  comm = std::max(comm, (v * p.gamma - p.gamma * v).norm());
  rep.check(tag("projectors", d, "commutation"), ref, comm, 0.0, tol);
  rep.check(tag("projectors", d, "dim-beta"), ref, p.beta.trace().real(), p.d_beta(), tol);
  rep.check(tag("projectors", d, "dim-gamma"), ref, p.gamma.trace().real(), p.d_gamma(), tol);
}

inline void verify_delta_table(VerificationReport& rep, std::size_t d, const DeltaTable& table, double tol) {
  const std::string ref = "delta-table";
  const IrrepProjectors& p = projectors(d);
  double spread = 0.0;
  for (OutcomeClass c : classes_for(d)) {
    const auto r = alternate_representative(c, d);
    spread = std::max(spread, delta_entry_distance(table.at(c), delta_at(r[0], r[1], r[2], p)));
  }
  rep.check(tag("delta", d, "representative-independence"), ref, spread, 0.0, tol,
            "table entries against direct compression at alternate class representatives");

  const DeltaTable printed = printed_delta_table(d);
  for (OutcomeClass c : classes_for(d)) {
    const DeltaEntry& mine = table.at(c);
    const DeltaEntry& theirs = printed.at(c);
    const std::string cls = to_string(c);
    for (int a = 0; a < 2; ++a) {
      for (int b = a; b < 2; ++b) {
        const std::string ab = std::string(a ? "-" : "+") + (b ? "-" : "+");
        rep.compare_printed(tag("delta", d, "alpha" + ab + "_" + cls), ref, mine.alpha(a, b), theirs.alpha(a, b), tol,
                            "printed table under the same class label");
      }
    }
    rep.compare_printed(tag("delta", d, "beta_" + cls), ref, mine.beta, theirs.beta, tol,
                        "printed table under the same class label");
    if (d > 2) {
      rep.compare_printed(tag("delta", d, "gamma_" + cls), ref, mine.gamma, theirs.gamma, tol,
                          "printed table under the same class label");
    }
  }
  const DeltaTable rotated = rotate_labels(printed);
  double worst = 0.0;
  for (OutcomeClass c : classes_for(d)) worst = std::max(worst, delta_entry_distance(table.at(c), rotated.at(c)));
  rep.compare_printed(tag("delta", d, "printed-under-cyclic-relabel"), ref, worst, 0.0, tol,
                      "printed table with representatives (i,j,k) read as (j,k,i)");
}

inline void verify_cloning(VerificationReport& rep, std::size_t d, const DeltaTable& table, double tol) {
  const std::string ref = "cloning-optimum";
  const double target = cloning_fidelity_closed(d);
  const OptimizationResult res = cloning_extremal_search(d);
  rep.check(tag("cloning", d, "extremal-search-fidelity"), ref, res.fidelity.total(), target, tol);
  double worst = -1.0;
  std::size_t infeasible = 0;
  for (const ExtremalCandidate& c : res.certificate) {
    if (c.feasible) worst = std::max(worst, c.fidelity);
    else ++infeasible;
  }
  rep.check(tag("cloning", d, "certificate-bound"), ref, std::max(0.0, worst - target), 0.0, tol,
            std::to_string(res.certificate.size()) + " supports, " + std::to_string(infeasible) + " infeasible");
  std::vector<std::string> supports;
  for (std::size_t n : res.winners) supports.push_back(res.certificate[n].support());
  std::sort(supports.begin(), supports.end());
  const std::vector<std::string> expected{"{alpha_xxx,alpha_xyx}", "{alpha_xxx,alpha_xyy}"};
  std::string joined;
  for (const std::string& s : supports) joined += s + " ";
  rep.require(tag("cloning", d, "winning-supports"), ref, supports == expected, "observed ties: " + joined);

  const ReducedBlocks opt = optimal_cloning_blocks(d);
  rep.check(tag("cloning", d, "canonical-blocks-fidelity"), ref, reduced_fidelity(opt, table).total(), target, tol);
  rep.check(tag("cloning", d, "canonical-blocks-constraints"), ref, constraint_residual(opt), 0.0, tol);
  double block_gap = 0.0;
  for (const auto& [c, blk] : opt.blocks) block_gap = std::max(block_gap, (blk.alpha - res.blocks[c].alpha).cwiseAbs().maxCoeff());
  rep.check(tag("cloning", d, "search-vs-canonical-blocks"), ref, block_gap, 0.0, 1e-6,
            "golden-section location accuracy on a flat optimum");

  const ReducedBlocks printed = printed_cloning_blocks(d);
  rep.check(tag("cloning", d, "printed-blocks-constraints"), ref, constraint_residual(printed), 0.0, tol);
  rep.compare_printed(tag("cloning", d, "printed-blocks-fidelity"), ref, reduced_fidelity(printed, table).total(), target,
                      tol, "printed optimal blocks are feasible but reach a lower value; control weight 1/18 restores the optimum");
  if (d == 2) {
    rep.check(tag("cloning", d, "complex-phase-spot-check"), ref, std::max(0.0, complex_phase_spot_check(res) - target),
              0.0, tol, "complex off-diagonal phases do not improve the optimum");
  }
}

inline void verify_learning(VerificationReport& rep, std::size_t d, double tol) {
  const std::string ref = "learning-optimum";
  const OptimizationResult res = optimal_learning_blocks(d);
  const double dd = static_cast<double>(d);
  rep.check(tag("learning", d, "fidelity"), ref, res.fidelity.total(), learning_fidelity_closed(d), tol);
  rep.check(tag("learning", d, "grid-maximizer"), ref, *res.maximizer, learning_maximizer_closed(d), 1e-6,
            "1-D grid refinement of F(a) over [0, 1/(2d)]");
  rep.check(tag("learning", d, "f-alpha"), ref, res.fidelity.alpha,
            4.0 * (2.0 * dd - 1.0) / (3.0 * dd * dd * (dd * dd - 1.0)), tol);
  rep.check(tag("learning", d, "f-beta"), ref, res.fidelity.beta, 1.0 / (dd * dd), tol);
  rep.check(tag("learning", d, "f-gamma"), ref, res.fidelity.gamma, d > 2 ? 1.0 / (2.0 * dd * dd) : 0.0, tol);
  rep.check(tag("learning", d, "constraints"), ref, constraint_residual(res.blocks), 0.0, tol);
  rep.check(tag("learning", d, "alpha-bound-tight"), ref, res.fidelity.alpha,
            learning_alpha_bound(d, learning_maximizer_closed(d)), tol);
  rep.require(tag("learning", d, "beats-estimate-and-prepare"), ref,
              estimate_prepare_fidelity(d) < res.fidelity.total(),
              "estimate-and-prepare " + format_number(estimate_prepare_fidelity(d)));
}

inline void verify_full(VerificationReport& rep, std::size_t d, const DeltaTable& table, double tol, Rng& rng) {
  const ReducedBlocks clone_blocks = optimal_cloning_blocks(d);
  const GeneralizedInstrument clone = assemble_instrument(clone_blocks);
  const GeneralizedInstrument learn = assemble_instrument(optimal_learning_blocks(d).blocks);
  const InstrumentCheck cc = check_instrument(clone, tol);
  const InstrumentCheck lc = check_instrument(learn, tol);
  rep.check(tag("normalization", d, "cloning-instrument"), "instrument-normalization", cc.ok() ? cc.normalization_defect : 1.0,
            0.0, tol, cc.message);
  rep.check(tag("normalization", d, "learning-instrument"), "instrument-normalization", lc.ok() ? lc.normalization_defect : 1.0,
            0.0, tol, lc.message);
  rep.require(tag("normalization", d, "cloning-comb"), "instrument-normalization",
              check_comb(clone.total(), cloning_shape(), tol));
  rep.check(tag("reduction", d, "exact-vs-reduced-cloning"), "reduced-fidelity", exact_fidelity(clone),
            reduced_fidelity(clone_blocks, table).total(), tol, "twirl-based fidelity of the assembled instrument");

  const std::string ref = "realization-identity";
  const GeneralizedInstrument circuit = realization_instrument(d);
  double gap = 0.0;
  for (std::size_t n = 0; n < d * d; ++n) gap = std::max(gap, distance(circuit.elements[n], clone.elements[n]));
  rep.check(tag("realization", d, "identity"), ref, gap, 0.0, tol, "link-product circuit against assembled optimal blocks");
  const GeneralizedInstrument printed_circuit = realization_instrument(d, printed_control_povm(d));
  const GeneralizedInstrument printed_assembled = assemble_instrument(printed_cloning_blocks(d));
  double pgap = 0.0;
  for (std::size_t n = 0; n < d * d; ++n) pgap = std::max(pgap, distance(printed_circuit.elements[n], printed_assembled.elements[n]));
  rep.check(tag("realization", d, "identity-printed-weight"), ref, pgap, 0.0, tol,
            "printed control weight against printed blocks");
  const Povm pq = bipartite_q_povm(d);
  rep.check(tag("realization", d, "q-completeness"), ref,
            (pq.sum().matrix() - Matrix::Identity(2 * static_cast<Eigen::Index>(d), 2 * static_cast<Eigen::Index>(d))).norm(),
            0.0, 1e-10);
  rep.check(tag("realization", d, "q-equals-p-then-f"), ref, povm_distance(pq, composed_q_povm(d, control_povm(d))), 0.0, 1e-12);

  const std::string gref = "replicated-povm";
  const Matrix u = haar_sample(d, rng);
  const double dd = static_cast<double>(d);
  const double w_printed = 1.0 / (9.0 * dd * (dd + 1.0));
  const Povm g_clone = replicated_povm(clone, u);
  rep.check(tag("replicated", d, "cloning-closed-form"), gref, povm_distance(g_clone, cloning_replicated_closed(d, u, 1.0 / 18.0)),
            0.0, tol, "weight 1/18");
  rep.compare_printed(tag("replicated", d, "cloning-printed-coefficient"), gref,
                      povm_distance(g_clone, cloning_replicated_closed(d, u, w_printed)), 0.0, tol,
                      "printed Q+- coefficient 1/sqrt(9d(d+1)) against the optimal instrument");
  rep.check(tag("replicated", d, "printed-blocks-printed-form"), gref,
            povm_distance(replicated_povm(printed_assembled, u), cloning_replicated_closed(d, u, w_printed)), 0.0, tol);
  if (d >= 3) {
    rep.compare_printed(tag("replicated", d, "learning-closed-form"), gref,
                        povm_distance(replicated_povm(learn, u), learning_replicated_closed(d, u)), 0.0, tol);
  }
}

inline void verify_monte_carlo(VerificationReport& rep, std::size_t d, std::size_t samples, std::uint64_t seed) {
  const std::string ref = "haar-average";
  const GeneralizedInstrument clone = assemble_instrument(optimal_cloning_blocks(d));
  const HaarEstimate ec = haar_average_fidelity(clone, samples, seed);
  rep.check(tag("monte-carlo", d, "cloning"), ref, ec.mean, cloning_fidelity_closed(d), 3.0 * ec.std_error + 1e-9,
            std::to_string(samples) + " Haar samples; tolerance 3 SE + 1e-9");
  const GeneralizedInstrument learn = assemble_instrument(optimal_learning_blocks(d).blocks);
  const HaarEstimate el = haar_average_fidelity(learn, samples, seed + 1);
  rep.check(tag("monte-carlo", d, "learning"), ref, el.mean, learning_fidelity_closed(d), 3.0 * el.std_error + 1e-9,
            std::to_string(samples) + " Haar samples; tolerance 3 SE + 1e-9");
  Rng rng = derive_stream(seed, 1000 + d);
  const GeneralizedInstrument rnd = random_instrument(d, Task::Cloning, rng);
  const HaarEstimate er = haar_average_fidelity(rnd, samples, seed + 2);
  rep.check(tag("monte-carlo", d, "random-instrument"), ref, er.mean, exact_fidelity(rnd), 3.0 * er.std_error + 1e-9,
            "non-covariant instrument against its twirl-based exact value");
}

}  // namespace detail

inline VerificationReport run_verification(const VerifyOptions& opt) {
  for (std::size_t d : opt.dims) {
    if (d < 2 || d > 8) throw DimensionError("run_verification: dimensions must lie in 2..8");
  }
  VerificationReport rep;
  for (std::size_t d : opt.dims) {
    Rng rng = derive_stream(opt.seed, d);
    DeltaTable table = delta_table(d);
    if (opt.inject_delta_fault) table.entries[OutcomeClass::XYX].alpha(0, 1) += 0.05;
    detail::verify_projectors(rep, d, opt.tol, rng);
    detail::verify_delta_table(rep, d, table, opt.tol);
    detail::verify_cloning(rep, d, table, opt.tol);
    detail::verify_learning(rep, d, opt.tol);
    rep.check(detail::tag("realization", d, "p-completeness"), "realization-identity",
              (control_povm(d).povm().sum().matrix() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-12);
    rep.check(detail::tag("realization", d, "p-completeness-printed-weight"), "realization-identity",
              (printed_control_povm(d).povm().sum().matrix() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-12);
    if (d <= opt.full_dmax) detail::verify_full(rep, d, table, opt.tol, rng);
    if (d <= opt.mc_dmax && opt.mc_samples > 0) detail::verify_monte_carlo(rep, d, opt.mc_samples, opt.seed + d);
  }
  return rep;
}

}  // namespace mclone
