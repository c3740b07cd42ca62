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
 * @file optimize.hpp
 * @brief Optimal replicating networks in reduced form.
 *
 * Cloning: F is linear and the feasible set is cut out by two trace
 * constraints, so the maximum sits at an extremal point. Extremal points have
 * rank-one alpha blocks and at most two nonzero slots; the search enumerates
 * every such support and solves the remaining one- or two-parameter problem.
 *
 * Learning: the beta and gamma parts decouple and the alpha part reduces to a
 * one-parameter family in a = s^{alpha,++}_{xyx}.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mclone/comb.hpp"
#include "mclone/random.hpp"
#include "mclone/symmetry.hpp"

namespace mclone {

inline void require_dim(std::size_t d, const char* where) {
  if (d < 2) throw DimensionError(std::string(where) + ": d must be >= 2");
}

inline double cloning_fidelity_closed(std::size_t d) { return 4.0 / (3.0 * static_cast<double>(d)); }

inline double learning_fidelity_closed(std::size_t d) {
  require_dim(d, "learning_fidelity_closed");
  if (d == 2) return 7.0 / 12.0;
  const double x = static_cast<double>(d);
  return (9.0 * x * x + 16.0 * x - 17.0) / (6.0 * x * x * (x * x - 1.0));
}

/// Measure-and-prepare baseline: estimate the measurement, then apply the guess twice.
inline double estimate_prepare_fidelity(std::size_t d) {
  require_dim(d, "estimate_prepare_fidelity");
  const double x = static_cast<double>(d);
  const double f = (x + 2.0) / (x * (x + 1.0));
  return f * f;
}

inline double learning_maximizer_closed(std::size_t d) {
  const double x = static_cast<double>(d);
  return (x + 1.0) / (18.0 * x * (x - 1.0));
}

/// Right side of the F_alpha bound for learning with a = s^{alpha,++}_{xyx}
/// of the swap-symmetrized blocks. Returned as F_alpha (not d F_alpha).
inline double learning_alpha_bound(std::size_t d, double a) {
  const double x = static_cast<double>(d);
  const double dm = x * (x * x - 1.0);
  return ((5.0 * x - 3.0) / (2.0 * dm) - 3.0 * a / (x + 1.0) + 2.0 * std::sqrt(a / (2.0 * dm))) / x;
}

/// Maximizes a concave function on [lo, hi] to a bracket width of `width`.
inline double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double width = 1e-12) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = f(c);
  double fe = f(e);
  while (b - a > width * std::max(1.0, std::abs(hi - lo))) {
    if (fc < fe) {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = f(e);
    } else {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    }
  }
  // Endpoints can win for monotone objectives.
  double best = 0.5 * (a + b);
  double fb = f(best);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > fb) {
      fb = fx;
      best = x;
    }
  }
  return best;
}

struct Slot {
  OutcomeClass cls = OutcomeClass::XXX;
  Irrep irrep = Irrep::Alpha;
};

inline std::string to_string(const Slot& s) {
  return std::string(to_string(s.irrep)) + "_" + to_string(s.cls);
}

struct CandidateEntry {
  Slot slot;
  Eigen::Matrix2cd alpha = Eigen::Matrix2cd::Zero();  ///< used when slot.irrep == Alpha
  double scalar = 0.0;                                 ///< used for beta / gamma
};

struct ExtremalCandidate {
  std::vector<CandidateEntry> entries;
  bool feasible = false;
  double fidelity = -std::numeric_limits<double>::infinity();
  std::string reason;

  std::string support() const {
    std::string s = "{";
    for (std::size_t n = 0; n < entries.size(); ++n) s += (n ? "," : "") + to_string(entries[n].slot);
    return s + "}";
  }
};

struct OptimizationResult {
  ReducedBlocks blocks;
  FidelitySplit fidelity;
  std::vector<ExtremalCandidate> certificate;
  std::vector<std::size_t> winners;  ///< indices into certificate, within 1e-9 of the best
  std::optional<double> maximizer;   ///< learning: a found by grid refinement
};

inline ReducedBlocks blocks_of(const ExtremalCandidate& c, std::size_t d, Task task) {
  ReducedBlocks b = ReducedBlocks::zeros(d, task);
  for (const CandidateEntry& e : c.entries) {
    ClassBlock& blk = b[e.slot.cls];
    if (e.slot.irrep == Irrep::Alpha) blk.alpha = e.alpha;
    else if (e.slot.irrep == Irrep::Beta) blk.beta = e.scalar;
    else blk.gamma = e.scalar;
  }
  return b;
}

namespace detail {

/// Rank-one real block [[p, sign sqrt(pq)], [., q]].
inline Eigen::Matrix2cd rank_one(double p, double q, double sign) {
  p = std::max(p, 0.0);
  q = std::max(q, 0.0);
  const double x = sign * std::sqrt(p * q);
  Eigen::Matrix2cd m;
  m << p, x, x, q;
  return m;
}

inline double alpha_value(const Eigen::Matrix2d& delta, double p, double q) {
  return delta(0, 0) * p + delta(1, 1) * q + 2.0 * std::abs(delta(0, 1)) * std::sqrt(std::max(p * q, 0.0));
}

inline double off_sign(const Eigen::Matrix2d& delta) { return delta(0, 1) < 0.0 ? -1.0 : 1.0; }

}  // namespace detail

inline std::vector<Slot> cloning_slots(std::size_t d) {
  std::vector<Slot> slots;
  for (OutcomeClass c : classes_for(d)) {
    slots.push_back({c, Irrep::Alpha});
    slots.push_back({c, Irrep::Beta});
    if (d > 2) slots.push_back({c, Irrep::Gamma});
  }
  return slots;
}

/// Best point supported on the given one or two slots, subject to
///   d sum s^{alpha,++} + d_beta sum s^beta  = d_+,
///   d sum s^{alpha,--} + d_gamma sum s^gamma = d_-.
inline ExtremalCandidate solve_cloning_support(const std::vector<Slot>& support, const DeltaTable& table) {
  const std::size_t d = table.dim;
  const IrrepProjectors& p = projectors(d);
  const double dd = static_cast<double>(d);
  const double pmax = p.d_plus() / dd;   // total alpha ++ mass when beta is empty
  const double qmax = p.d_minus() / dd;  // total alpha -- mass when gamma is empty
  ExtremalCandidate cand;
  for (const Slot& s : support) cand.entries.push_back({s, Eigen::Matrix2cd::Zero(), 0.0});

  int n_alpha = 0, n_beta = 0, n_gamma = 0;
  for (const Slot& s : support) {
    n_alpha += s.irrep == Irrep::Alpha;
    n_beta += s.irrep == Irrep::Beta;
    n_gamma += s.irrep == Irrep::Gamma;
  }
  if (n_alpha == 0 && n_gamma == 0) {
    cand.reason = "antisymmetric constraint cannot be met without alpha or gamma";
    return cand;
  }
  if (n_alpha == 0 && n_beta == 0) {
    cand.reason = "symmetric constraint cannot be met without alpha or beta";
    return cand;
  }
  if (n_beta > 1 || n_gamma > 1) {
    cand.reason = "two scalar slots of the same irrep are a non-extremal split";
    return cand;
  }

  auto delta = [&](const Slot& s) { return table.at(s.cls).alpha; };
  auto scal = [&](const Slot& s) {
    return s.irrep == Irrep::Beta ? table.at(s.cls).beta : table.at(s.cls).gamma;
  };

  if (n_alpha == 1 && support.size() == 1) {
    const Eigen::Matrix2d dl = delta(support[0]);
    cand.entries[0].alpha = detail::rank_one(pmax, qmax, detail::off_sign(dl));
    cand.fidelity = detail::alpha_value(dl, pmax, qmax) / dd;
  } else if (n_alpha == 2) {
    const Eigen::Matrix2d d1 = delta(support[0]);
    const Eigen::Matrix2d d2 = delta(support[1]);
    auto value = [&](double p1, double q1) {
      return detail::alpha_value(d1, p1, q1) + detail::alpha_value(d2, pmax - p1, qmax - q1);
    };
    auto best_q = [&](double p1) {
      return golden_section_max([&](double q1) { return value(p1, q1); }, 0.0, qmax);
    };
    const double p1 = golden_section_max([&](double x) { return value(x, best_q(x)); }, 0.0, pmax);
    const double q1 = best_q(p1);
    cand.entries[0].alpha = detail::rank_one(p1, q1, detail::off_sign(d1));
    cand.entries[1].alpha = detail::rank_one(pmax - p1, qmax - q1, detail::off_sign(d2));
    cand.fidelity = value(p1, q1) / dd;
  } else if (n_alpha == 1) {
    const std::size_t ia = support[0].irrep == Irrep::Alpha ? 0 : 1;
    const std::size_t is = 1 - ia;
    const Eigen::Matrix2d dl = delta(support[ia]);
    const double ds = scal(support[is]);
    if (support[is].irrep == Irrep::Beta) {
      auto value = [&](double x) {
        return detail::alpha_value(dl, x, qmax) + ds * (p.d_plus() - dd * x) / p.d_beta();
      };
      const double x = golden_section_max(value, 0.0, pmax);
      cand.entries[ia].alpha = detail::rank_one(x, qmax, detail::off_sign(dl));
      cand.entries[is].scalar = (p.d_plus() - dd * x) / p.d_beta();
      cand.fidelity = value(x) / dd;
    } else {
      auto value = [&](double y) {
        return detail::alpha_value(dl, pmax, y) + ds * (p.d_minus() - dd * y) / p.d_gamma();
      };
      const double y = golden_section_max(value, 0.0, qmax);
      cand.entries[ia].alpha = detail::rank_one(pmax, y, detail::off_sign(dl));
      cand.entries[is].scalar = (p.d_minus() - dd * y) / p.d_gamma();
      cand.fidelity = value(y) / dd;
    }
  } else {
    // one beta slot and one gamma slot: fully determined
    const std::size_t ib = support[0].irrep == Irrep::Beta ? 0 : 1;
    const std::size_t ig = 1 - ib;
    cand.entries[ib].scalar = p.d_plus() / p.d_beta();
    cand.entries[ig].scalar = p.d_minus() / p.d_gamma();
    cand.fidelity =
        (scal(support[ib]) * cand.entries[ib].scalar + scal(support[ig]) * cand.entries[ig].scalar) / dd;
  }
  cand.feasible = true;
  return cand;
}

/// Largest violation of the task's linear constraints on reduced blocks.
/// Cloning: d sum s^{alpha,++} + d_beta sum s^beta = d_+ and the same with
/// (--, gamma, d_-). Learning: sum s^alpha = I/d, sum s^beta = sum s^gamma = 1/d.
inline double constraint_residual(const ReducedBlocks& b) {
  const IrrepProjectors& p = projectors(b.dim);
  const double dd = static_cast<double>(b.dim);
  Eigen::Matrix2cd t = Eigen::Matrix2cd::Zero();
  double sb = 0.0, sg = 0.0;
  for (const auto& [c, blk] : b.blocks) {
    t += blk.alpha;
    sb += blk.beta;
    sg += blk.gamma;
  }
  if (b.task == Task::Cloning) {
    const double rp = std::abs(dd * t(0, 0).real() + p.d_beta() * sb - p.d_plus());
    const double rm = std::abs(dd * t(1, 1).real() + (b.dim > 2 ? p.d_gamma() * sg : 0.0) - p.d_minus());
    return std::max(rp, rm);
  }
  double r = (t - Eigen::Matrix2cd::Identity() / dd).cwiseAbs().maxCoeff();
  r = std::max(r, std::abs(sb - 1.0 / dd));
  if (b.dim > 2) r = std::max(r, std::abs(sg - 1.0 / dd));
  return r;
}

/// The canonical optimum: equal mixture of the two tied extremal strategies,
///   s^alpha_xxx = diag(4(d+1)/9, 0), s^alpha_xyx = B/2, s^alpha_xyy = sigma_z B sigma_z / 2,
///   B = [[(d+1)/18, sqrt(d^2-1)/6], [., (d-1)/2]].
inline ReducedBlocks optimal_cloning_blocks(std::size_t d) {
  require_dim(d, "optimal_cloning_blocks");
  const double x = static_cast<double>(d);
  ReducedBlocks b = ReducedBlocks::zeros(d, Task::Cloning);
  b[OutcomeClass::XXX].alpha(0, 0) = 4.0 * (x + 1.0) / 9.0;
  Eigen::Matrix2cd m;
  const double off = std::sqrt(x * x - 1.0) / 6.0;
  m << (x + 1.0) / 18.0, off, off, (x - 1.0) / 2.0;
  b[OutcomeClass::XYX].alpha = 0.5 * m;
  b[OutcomeClass::XYY].alpha = 0.5 * sigma_z() * m * sigma_z();
  return b;
}

/// Blocks with the published coefficients. Feasible,
/// but below the optimum; kept for the consistency report.
inline ReducedBlocks printed_cloning_blocks(std::size_t d) {
  require_dim(d, "printed_cloning_blocks");
  const double x = static_cast<double>(d);
  const double dp = x * (x + 1.0) / 2.0;
  const double dm = x * (x - 1.0) / 2.0;
  ReducedBlocks b = ReducedBlocks::zeros(d, Task::Cloning);
  b[OutcomeClass::XXX].alpha(0, 0) = (9.0 * dp - 1.0) / (9.0 * x);
  Eigen::Matrix2cd m;
  const double off = std::sqrt(dm) / (3.0 * x);
  m << 1.0 / (9.0 * x), off, off, dm / x;
  b[OutcomeClass::XYX].alpha = 0.5 * m;
  b[OutcomeClass::XYY].alpha = 0.5 * sigma_z() * m * sigma_z();
  return b;
}

/// Enumerates every support of one or two slots and keeps all maximizers
/// within 1e-9. The returned blocks are optimal_cloning_blocks(d) when the
/// two expected strategies tie, otherwise the first winner.
inline OptimizationResult cloning_extremal_search(std::size_t d) {
  require_dim(d, "cloning_extremal_search");
  const DeltaTable table = delta_table(d);
  const std::vector<Slot> slots = cloning_slots(d);
  std::vector<std::vector<Slot>> supports;
  for (std::size_t a = 0; a < slots.size(); ++a) {
    supports.push_back({slots[a]});
    for (std::size_t b = a + 1; b < slots.size(); ++b) supports.push_back({slots[a], slots[b]});
  }
  OptimizationResult res;
  res.certificate.resize(supports.size());
  parallel_shards(supports.size(),
                  [&](std::size_t n) { res.certificate[n] = solve_cloning_support(supports[n], table); });

  double best = -std::numeric_limits<double>::infinity();
  for (const ExtremalCandidate& c : res.certificate) {
    if (c.feasible) best = std::max(best, c.fidelity);
  }
  for (std::size_t n = 0; n < res.certificate.size(); ++n) {
    if (res.certificate[n].feasible && res.certificate[n].fidelity >= best - 1e-9) res.winners.push_back(n);
  }
  if (res.winners.empty()) throw InvalidInput("cloning_extremal_search: no feasible candidate");

  std::vector<ReducedBlocks> winning;
  for (std::size_t n : res.winners) winning.push_back(blocks_of(res.certificate[n], d, Task::Cloning));
  res.blocks = winning.size() == 2 ? mix(winning[0], winning[1], 0.5) : winning.front();
  res.fidelity = reduced_fidelity(res.blocks, table);
  return res;
}

/// Largest fidelity reached by giving the off-diagonal entries of the winning
/// alpha blocks a complex phase, over a grid of `steps` phases.
inline double complex_phase_spot_check(const OptimizationResult& res, std::size_t steps = 64) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t n : res.winners) {
    const ExtremalCandidate& c = res.certificate[n];
    for (std::size_t k = 0; k < steps; ++k) {
      const double phi = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(steps);
      ExtremalCandidate tilted = c;
      for (CandidateEntry& e : tilted.entries) {
        e.alpha(0, 1) *= std::polar(1.0, phi);
        e.alpha(1, 0) = std::conj(e.alpha(0, 1));
      }
      const ReducedBlocks b = blocks_of(tilted, res.blocks.dim, Task::Cloning);
      best = std::max(best, reduced_fidelity(b).total());
    }
  }
  return best;
}

/// Learning blocks in the one-parameter family
///   s^alpha_xxx = diag(1/d - 2a, 0), s^alpha_xyx = [[a, sqrt(a/(2d))], [., 1/(2d)]],
///   s^alpha_xyy = sigma_z s^alpha_xyx sigma_z, s^beta_xxy = s^gamma_xyz = 1/d.
inline ReducedBlocks learning_blocks(std::size_t d, double a) {
  require_dim(d, "learning_blocks");
  const double x = static_cast<double>(d);
  if (a < 0.0 || a > 1.0 / (2.0 * x)) throw InvalidInput("learning_blocks: a outside [0, 1/(2d)]");
  ReducedBlocks b = ReducedBlocks::zeros(d, Task::Learning);
  b[OutcomeClass::XXX].alpha(0, 0) = 1.0 / x - 2.0 * a;
  Eigen::Matrix2cd m;
  const double off = std::sqrt(a / (2.0 * x));
  m << a, off, off, 1.0 / (2.0 * x);
  b[OutcomeClass::XYX].alpha = m;
  b[OutcomeClass::XYY].alpha = sigma_z() * m * sigma_z();
  b[OutcomeClass::XXY].beta = 1.0 / x;
  if (d > 2) b[OutcomeClass::XYZ].gamma = 1.0 / x;
  return b;
}

/// Grid refinement of F(a) over [0, 1/(2d)]: 101 points, then repeated zoom
/// around the best point until the bracket is below `width`.
inline double refine_learning_maximizer(std::size_t d, double width = 1e-13) {
  const DeltaTable table = delta_table(d);
  auto f = [&](double a) { return reduced_fidelity(learning_blocks(d, a), table).total(); };
  double lo = 0.0;
  double hi = 1.0 / (2.0 * static_cast<double>(d));
  double best = lo;
  while (hi - lo > width) {
    const int n = 100;
    const double step = (hi - lo) / n;
    double fbest = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
      const double a = lo + step * k;
      const double v = f(a);
      if (v > fbest) {
        fbest = v;
        best = a;
      }
    }
    const double full = 1.0 / (2.0 * static_cast<double>(d));
    lo = std::max(0.0, best - step);
    hi = std::min(full, best + step);
  }
  return best;
}

inline OptimizationResult optimal_learning_blocks(std::size_t d) {
  require_dim(d, "optimal_learning_blocks");
  OptimizationResult res;
  res.maximizer = refine_learning_maximizer(d);
  res.blocks = learning_blocks(d, learning_maximizer_closed(d));
  res.fidelity = reduced_fidelity(res.blocks);
  return res;
}

/// Random point of the task's feasible set. Slots are sparsified at random so
/// that boundary points are sampled too; the constraints are then met exactly
/// by a congruence on the (+, -) multiplicity space and a rescaling of the
/// scalar blocks.
inline ReducedBlocks feasible_random_blocks(std::size_t d, Task task, Rng& rng) {
  require_dim(d, "feasible_random_blocks");
  const IrrepProjectors& p = projectors(d);
  const double dd = static_cast<double>(d);
  std::exponential_distribution<double> expo(1.0);
  for (;;) {
    ReducedBlocks b = ReducedBlocks::zeros(d, task);
    for (auto& [c, blk] : b.blocks) {
      if (uniform01(rng) < 0.6) {
        const Eigen::Index rank = uniform01(rng) < 0.5 ? 1 : 2;
        blk.alpha = random_psd(2, rank, rng);
      }
      if (uniform01(rng) < 0.6) blk.beta = expo(rng);
      if (d > 2 && uniform01(rng) < 0.6) blk.gamma = expo(rng);
    }
    Eigen::Matrix2cd t = Eigen::Matrix2cd::Zero();
    double sb = 0.0, sg = 0.0;
    for (const auto& [c, blk] : b.blocks) {
      t += blk.alpha;
      sb += blk.beta;
      sg += blk.gamma;
    }
    if (task == Task::Cloning) {
      const double xp = dd * t(0, 0).real() + p.d_beta() * sb;
      const double xm = dd * t(1, 1).real() + (d > 2 ? p.d_gamma() * sg : 0.0);
      if (xp < 1e-9 || xm < 1e-9) continue;
      const double sp = p.d_plus() / xp;
      const double sm = p.d_minus() / xm;
      Eigen::Matrix2cd c = Eigen::Matrix2cd::Zero();
      c(0, 0) = std::sqrt(sp);
      c(1, 1) = std::sqrt(sm);
      for (auto& [cls, blk] : b.blocks) {
        blk.alpha = c * blk.alpha * c;
        blk.beta *= sp;
        blk.gamma *= sm;
      }
      return b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(t);
    if (es.eigenvalues().minCoeff() < 1e-6 * std::max(1.0, es.eigenvalues().maxCoeff())) continue;
    if (sb < 1e-9 || (d > 2 && sg < 1e-9)) continue;
    const Eigen::Matrix2cd c = es.operatorInverseSqrt() / std::sqrt(dd);
    for (auto& [cls, blk] : b.blocks) {
      blk.alpha = c * blk.alpha * c.adjoint();
      blk.alpha = 0.5 * (blk.alpha + blk.alpha.adjoint()).eval();
      blk.beta /= dd * sb;
      blk.gamma = d > 2 ? blk.gamma / (dd * sg) : 0.0;
    }
    return b;
  }
}

namespace detail {

/// Random POVM with `outcomes` elements on `sig`: A_k random PSD, then
/// S^{-1/2} A_k S^{-1/2} with S = sum A_k.
inline std::vector<Operator> random_povm(const Signature& sig, std::size_t outcomes, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(sig.total_dim());
  std::vector<Matrix> raw;
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < outcomes; ++k) {
    raw.push_back(random_psd(n, std::max<Eigen::Index>(1, n / 2), rng));
    s += raw.back();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Matrix w = es.operatorInverseSqrt();
  std::vector<Operator> out;
  for (const Matrix& a : raw) {
    Matrix e = w * a * w;
    e = 0.5 * (e + e.adjoint()).eval();
    out.emplace_back(sig, std::move(e));
  }
  return out;
}

}  // namespace detail

/// Random valid instrument with a d-dimensional memory.
/// Cloning: isometry A B -> C M, then a d^2-outcome POVM on D M.
/// Learning: state on C M, then a d^2-outcome POVM on A B D M.
inline GeneralizedInstrument random_instrument(std::size_t d, Task task, Rng& rng) {
  require_dim(d, "random_instrument");
  const Signature target = instrument_signature(d);
  GeneralizedInstrument g = GeneralizedInstrument::zeros(d, task);
  if (task == Task::Cloning) {
    const auto rows = static_cast<Eigen::Index>(d * d);
    Eigen::HouseholderQR<Matrix> qr(ginibre(rows, rows, rng));
    const Matrix v = qr.householderQ() * Matrix::Identity(rows, rows);
    const ChoiOperator iso = choi_of_unitary(v, Signature{{"A", d}, {"B", d}}, Signature{{"C", d}, {"M", d}});
    const auto povm = detail::random_povm(Signature{{"D", d}, {"M", d}}, d * d, rng);
    for (std::size_t n = 0; n < d * d; ++n) g.elements[n] = align_to(link(iso.op, effect_choi(povm[n]).op), target);
  } else {
    const auto n = static_cast<Eigen::Index>(d * d);
    Matrix rho = random_psd(n, uniform01(rng) < 0.5 ? 1 : n, rng);
    rho /= rho.trace();
    const Operator state(Signature{{"C", d}, {"M", d}}, rho);
    const auto povm = detail::random_povm(Signature{{"A", d}, {"B", d}, {"D", d}, {"M", d}}, d * d, rng);
    for (std::size_t k = 0; k < d * d; ++k) g.elements[k] = align_to(link(state, effect_choi(povm[k]).op), target);
  }
  return g;
}

/// Closed form of the replicated POVM of the cloning blocks built with
/// control weight w:
///   G_ii = (1 - 2w) P^+ (E_i (x) I) P^+,
///   G_ij = [Q^+ (E_i (x) I) Q^+ + Q^- (E_j (x) I) Q^-] / (d - 1),
///   Q^+- = sqrt(w) P^+ +- sqrt(1/2) P^-,   E_i = U|i><i|U^dagger.
inline Povm cloning_replicated_closed(std::size_t d, const Matrix& u, double w) {
  require_dim(d, "cloning_replicated_closed");
  const IrrepProjectors& p = projectors(d);
  const Matrix qp = std::sqrt(w) * p.sym + std::sqrt(0.5) * p.antisym;
  const Matrix qm = std::sqrt(w) * p.sym - std::sqrt(0.5) * p.antisym;
  const auto n = static_cast<Eigen::Index>(d);
  auto ea = [&](std::size_t i) {
    const Vector v = u.col(static_cast<Eigen::Index>(i));
    return detail::kron(outer(v, v), Matrix::Identity(n, n));
  };
  const Signature ab{{"A", d}, {"B", d}};
  Povm g;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Matrix m = i == j ? Matrix((1.0 - 2.0 * w) * p.sym * ea(i) * p.sym)
                        : Matrix((qp * ea(i) * qp + qm * ea(j) * qm) / (static_cast<double>(d) - 1.0));
      g.elements.emplace_back(ab, std::move(m));
    }
  }
  return g;
}

/// Closed form of the replicated POVM of the optimal learning blocks, d >= 3:
///   G_ii = (16d - 2)/(9d(d^2-1)) P^+ (E_i (x) I) P^+ + (d^2 - 3)/(d(d^2-1)) P^+,
///   G_ij = [Q'^+ (E_i (x) I) Q'^+ + Q'^- (E_j (x) I) Q'^-] / (d - 1)
///          + 2/(d(d-1)^2(d-2)) P^- (E_i (x) I + E_j (x) I) P^- + (d-3)/((d-1)^2(d-2)) P^-,
///   Q'^+- = (P^+ +- 3 P^-) / sqrt(9d(d-1)).
inline Povm learning_replicated_closed(std::size_t d, const Matrix& u) {
  if (d < 3) throw DimensionError("learning_replicated_closed: needs d >= 3");
  const IrrepProjectors& p = projectors(d);
  const double x = static_cast<double>(d);
  const double norm = std::sqrt(9.0 * x * (x - 1.0));
  const Matrix qp = (p.sym + 3.0 * p.antisym) / norm;
  const Matrix qm = (p.sym - 3.0 * p.antisym) / norm;
  const auto n = static_cast<Eigen::Index>(d);
  auto ea = [&](std::size_t i) {
    const Vector v = u.col(static_cast<Eigen::Index>(i));
    return detail::kron(outer(v, v), Matrix::Identity(n, n));
  };
  const Signature ab{{"A", d}, {"B", d}};
  Povm g;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Matrix m;
      if (i == j) {
        m = (16.0 * x - 2.0) / (9.0 * x * (x * x - 1.0)) * p.sym * ea(i) * p.sym +
            (x * x - 3.0) / (x * (x * x - 1.0)) * p.sym;
      } else {
        m = (qp * ea(i) * qp + qm * ea(j) * qm) / (x - 1.0) +
            2.0 / (x * (x - 1.0) * (x - 1.0) * (x - 2.0)) * p.antisym * (ea(i) + ea(j)) * p.antisym +
            (x - 3.0) / ((x - 1.0) * (x - 1.0) * (x - 2.0)) * p.antisym;
      }
      g.elements.emplace_back(ab, std::move(m));
    }
  }
  return g;
}

/// Largest Frobenius distance between matching elements of two POVMs.
inline double povm_distance(const Povm& a, const Povm& b) {
  if (a.outcomes() != b.outcomes()) throw InvalidInput("povm_distance: outcome counts differ");
  double worst = 0.0;
  for (std::size_t n = 0; n < a.outcomes(); ++n) worst = std::max(worst, distance(a.elements[n], b.elements[n]));
  return worst;
}

}  // namespace mclone
