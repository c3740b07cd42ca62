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
 * @file symmetry.hpp
 * @brief Symmetry reduction of replicating networks.
 *
 * A network that is diagonal in the classical wire D, covariant under
 * U* (x) U* (x) U on A B C, and invariant under simultaneous relabelling of
 * outcomes is fixed by one operator per outcome pattern (xxx, xxy, xyx,
 * xyy, xyz). Each of those decomposes over the invariant subspaces of
 * U* (x) U* (x) U:
 *
 *   alpha: two copies of the d-dimensional irrep, spanned by
 *          Psi^+-_m = (|w>_AC|m>_B +- |m>_A|w>_BC) / sqrt(2(d +- 1));
 *          the block is a 2x2 matrix on the (+, -) multiplicity space.
 *   beta:  (P^+_AB (x) I_C) minus the alpha(+) part; scalar block.
 *   gamma: (P^-_AB (x) I_C) minus the alpha(-) part; scalar block, empty at d = 2.
 *
 * ReducedBlocks stores s = (n(l)/d) r for each class l, where r is the
 * block of R_l and n(l) the class size. In these variables the figure of
 * merit is F = (1/d) sum_{nu,l} Tr[Delta^nu_l s^nu_l].
 */

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "mclone/comb.hpp"
#include "mclone/measurement.hpp"

namespace mclone {

enum class OutcomeClass { XXX, XXY, XYX, XYY, XYZ };

inline constexpr std::array<OutcomeClass, 5> kAllClasses = {
    OutcomeClass::XXX, OutcomeClass::XXY, OutcomeClass::XYX, OutcomeClass::XYY, OutcomeClass::XYZ};

inline const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::XXX: return "xxx";
    case OutcomeClass::XXY: return "xxy";
    case OutcomeClass::XYX: return "xyx";
    case OutcomeClass::XYY: return "xyy";
    case OutcomeClass::XYZ: return "xyz";
  }
  return "?";
}

/// Classes that occur for outcome alphabet size d (xyz needs d >= 3).
inline std::vector<OutcomeClass> classes_for(std::size_t d) {
  std::vector<OutcomeClass> out(kAllClasses.begin(), kAllClasses.end());
  if (d < 3) out.pop_back();
  return out;
}

/// Pattern of coincidences among (i, j, k), indices in [0, d).
inline OutcomeClass class_of(std::size_t i, std::size_t j, std::size_t k, std::size_t d) {
  if (i >= d || j >= d || k >= d) throw InvalidInput("class_of: index out of range");
  if (i == j && j == k) return OutcomeClass::XXX;
  if (i == j) return OutcomeClass::XXY;
  if (i == k) return OutcomeClass::XYX;
  if (j == k) return OutcomeClass::XYY;
  return OutcomeClass::XYZ;
}

inline std::size_t class_size(OutcomeClass c, std::size_t d) {
  switch (c) {
    case OutcomeClass::XXX: return d;
    case OutcomeClass::XXY:
    case OutcomeClass::XYX:
    case OutcomeClass::XYY: return d * (d - 1);
    case OutcomeClass::XYZ: return d < 3 ? 0 : d * (d - 1) * (d - 2);
  }
  return 0;
}

inline std::array<std::size_t, 3> representative(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::XXX: return {0, 0, 0};
    case OutcomeClass::XXY: return {0, 0, 1};
    case OutcomeClass::XYX: return {0, 1, 0};
    case OutcomeClass::XYY: return {0, 1, 1};
    case OutcomeClass::XYZ: return {0, 1, 2};
  }
  return {0, 0, 0};
}

enum class Irrep { Alpha, Beta, Gamma };

inline const char* to_string(Irrep nu) {
  switch (nu) {
    case Irrep::Alpha: return "alpha";
    case Irrep::Beta: return "beta";
    case Irrep::Gamma: return "gamma";
  }
  return "?";
}

/// sigma_z on the (+, -) multiplicity space.
inline Eigen::Matrix2cd sigma_z() {
  Eigen::Matrix2cd z;
  z << 1.0, 0.0, 0.0, -1.0;
  return z;
}

inline Signature abc_signature(std::size_t d) { return Signature{{"A", d}, {"B", d}, {"C", d}}; }

/// Swap of A and B on C^d (x) C^d.
inline Matrix swap_matrix(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix s = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) s(j * n + i, i * n + j) = 1.0;
  }
  return s;
}

struct IrrepProjectors {
  std::size_t dim = 2;
  std::array<std::vector<Vector>, 2> psi;  ///< psi[0] = Psi^+_m, psi[1] = Psi^-_m
  std::array<std::array<Matrix, 2>, 2> alpha;  ///< alpha[a][b] = sum_m |Psi^a_m><Psi^b_m|
  Matrix beta;
  Matrix gamma;
  Matrix sym;      ///< P^+ on A B
  Matrix antisym;  ///< P^- on A B

  bool has_gamma() const { return dim > 2; }
  double d_alpha() const { return static_cast<double>(dim); }
  double d_beta() const { return static_cast<double>(dim * (dim * (dim + 1) / 2) - dim); }
  double d_gamma() const { return static_cast<double>(dim * (dim * (dim - 1) / 2) - dim); }
  double d_plus() const { return static_cast<double>(dim * (dim + 1) / 2); }
  double d_minus() const { return static_cast<double>(dim * (dim - 1) / 2); }
  double dim_of(Irrep nu) const {
    return nu == Irrep::Alpha ? d_alpha() : nu == Irrep::Beta ? d_beta() : d_gamma();
  }
};

inline IrrepProjectors build_projectors(std::size_t d) {
  if (d < 2) throw DimensionError("build_projectors: d must be >= 2");
  IrrepProjectors p;
  p.dim = d;
  const auto n = static_cast<Eigen::Index>(d);
  const Eigen::Index n3 = n * n * n;
  for (int a = 0; a < 2; ++a) {
    const double sign = a == 0 ? 1.0 : -1.0;
    const double norm = std::sqrt(2.0 * (static_cast<double>(d) + sign));
    for (Eigen::Index m = 0; m < n; ++m) {
      Vector v = Vector::Zero(n3);
      for (Eigen::Index k = 0; k < n; ++k) {
        v(k * n * n + m * n + k) += 1.0;          // |w>_AC |m>_B
        v(m * n * n + k * n + k) += sign * 1.0;   // |m>_A |w>_BC
      }
      p.psi[a].push_back(v / norm);
    }
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      p.alpha[a][b] = Matrix::Zero(n3, n3);
      for (Eigen::Index m = 0; m < n; ++m) p.alpha[a][b] += outer(p.psi[a][m], p.psi[b][m]);
    }
  }
  const Matrix id2 = Matrix::Identity(n * n, n * n);
  const Matrix swap = swap_matrix(d);
  p.sym = 0.5 * (id2 + swap);
  p.antisym = 0.5 * (id2 - swap);
  const Matrix id1 = Matrix::Identity(n, n);
  p.beta = detail::kron(p.sym, id1) - p.alpha[0][0];
  p.gamma = detail::kron(p.antisym, id1) - p.alpha[1][1];
  return p;
}

/// Shared, immutable projector set per dimension.
inline const IrrepProjectors& projectors(std::size_t d) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<const IrrepProjectors>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) {
    it = cache.emplace(d, std::make_unique<const IrrepProjectors>(build_projectors(d))).first;
  }
  return *it->second;
}

/// U* (x) U* (x) U on A B C.
inline Matrix covariance_rep(const Matrix& u) {
  const Matrix uc = u.conjugate();
  return detail::kron(detail::kron(uc, uc), u);
}

/// Compression of |ijk><ijk| onto each invariant subspace.
struct DeltaEntry {
  Eigen::Matrix2d alpha = Eigen::Matrix2d::Zero();
  double beta = 0.0;
  double gamma = 0.0;
};

inline DeltaEntry delta_at(std::size_t i, std::size_t j, std::size_t k, const IrrepProjectors& p) {
  const std::size_t d = p.dim;
  const auto idx = static_cast<Eigen::Index>(i * d * d + j * d + k);
  DeltaEntry e;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) e.alpha(a, b) = p.alpha[a][b](idx, idx).real();
  }
  e.beta = p.beta(idx, idx).real();
  e.gamma = p.gamma(idx, idx).real();
  return e;
}

struct DeltaTable {
  std::size_t dim = 2;
  std::map<OutcomeClass, DeltaEntry> entries;

  const DeltaEntry& at(OutcomeClass c) const { return entries.at(c); }
};

/// Delta table computed from the projectors at the class representatives.
inline DeltaTable delta_table(std::size_t d) {
  const IrrepProjectors& p = projectors(d);
  DeltaTable t{d, {}};
  for (OutcomeClass c : classes_for(d)) {
    const auto r = representative(c);
    t.entries[c] = delta_at(r[0], r[1], r[2], p);
  }
  return t;
}

/// Published closed-form table, under its own class labels.
/// The duplicated gamma line is read as gamma_{xy,x}.
inline DeltaTable printed_delta_table(std::size_t d) {
  const double dd = static_cast<double>(d);
  DeltaTable t{d, {}};
  for (OutcomeClass c : classes_for(d)) t.entries[c] = DeltaEntry{};
  t.entries[OutcomeClass::XXX].alpha(0, 0) = 2.0 / (dd + 1.0);
  Eigen::Matrix2d m;
  m << 1.0 / (dd + 1.0), 1.0 / std::sqrt(dd * dd - 1.0), 1.0 / std::sqrt(dd * dd - 1.0),
      1.0 / (dd - 1.0);
  m *= 0.5;
  Eigen::Matrix2d z;
  z << 1.0, 0.0, 0.0, -1.0;
  t.entries[OutcomeClass::XXY].alpha = m;
  t.entries[OutcomeClass::XYX].alpha = z * m * z;
  t.entries[OutcomeClass::XXX].beta = (dd - 1.0) / (dd + 1.0);
  t.entries[OutcomeClass::XXY].beta = dd / (2.0 * (dd + 1.0));
  t.entries[OutcomeClass::XYX].beta = dd / (2.0 * (dd + 1.0));
  t.entries[OutcomeClass::XYY].beta = 1.0;
  if (d > 2) {
    t.entries[OutcomeClass::XYZ].beta = 0.5;
    t.entries[OutcomeClass::XXY].gamma = (dd - 2.0) / (2.0 * (dd - 1.0));
    t.entries[OutcomeClass::XYX].gamma = (dd - 2.0) / (2.0 * (dd - 1.0));
    t.entries[OutcomeClass::XYZ].gamma = 0.5;
  }
  return t;
}

/// Re-key a table by rotating each representative (i, j, k) -> (j, k, i).
inline DeltaTable rotate_labels(const DeltaTable& t) {
  DeltaTable out{t.dim, {}};
  for (const auto& [c, e] : t.entries) {
    const auto r = representative(c);
    out.entries[class_of(r[1], r[2], r[0], std::max<std::size_t>(t.dim, 3))] = e;
  }
  return out;
}

/// Exact Haar average of (U* (x) U* (x) U) x (...)^dagger, computed as the
/// orthogonal projection onto the commutant spanned by the alpha matrix
/// units and P^beta, P^gamma.
inline Matrix twirl_matrix(const Matrix& x, const IrrepProjectors& p) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  const double d = p.d_alpha();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Complex c = (p.alpha[b][a].cwiseProduct(x.transpose())).sum() / d;  // Tr[E_ba x] / d
      out += c * p.alpha[a][b];
    }
  }
  out += ((p.beta.cwiseProduct(x.transpose())).sum() / p.d_beta()) * p.beta;
  if (p.has_gamma()) out += ((p.gamma.cwiseProduct(x.transpose())).sum() / p.d_gamma()) * p.gamma;
  return out;
}

inline Operator twirl(const Operator& x) {
  const Signature& sig = x.signature();
  if (sig.size() != 3 || !sig.contains("A") || !sig.contains("B") || !sig.contains("C")) {
    throw LabelError("twirl: operator must act on A, B, C");
  }
  const std::size_t d = sig.dim_of("A");
  if (sig.dim_of("B") != d || sig.dim_of("C") != d) throw DimensionError("twirl: dims must be (d,d,d)");
  const Signature abc = abc_signature(d);
  return Operator(abc, twirl_matrix(align_to(x, abc).matrix(), projectors(d)));
}

struct ClassBlock {
  Eigen::Matrix2cd alpha = Eigen::Matrix2cd::Zero();
  double beta = 0.0;
  double gamma = 0.0;
};

struct ReducedBlocks {
  std::size_t dim = 2;
  Task task = Task::Cloning;
  std::map<OutcomeClass, ClassBlock> blocks;

  static ReducedBlocks zeros(std::size_t d, Task task) {
    ReducedBlocks b{d, task, {}};
    for (OutcomeClass c : classes_for(d)) b.blocks[c] = ClassBlock{};
    return b;
  }

  ClassBlock& operator[](OutcomeClass c) {
    auto it = blocks.find(c);
    if (it == blocks.end()) throw InvalidInput(std::string("no block for class ") + to_string(c));
    return it->second;
  }
  const ClassBlock& operator[](OutcomeClass c) const {
    auto it = blocks.find(c);
    if (it == blocks.end()) throw InvalidInput(std::string("no block for class ") + to_string(c));
    return it->second;
  }
};

inline ReducedBlocks mix(const ReducedBlocks& a, const ReducedBlocks& b, double w) {
  if (a.dim != b.dim) throw InvalidInput("mix: blocks of different dimension");
  ReducedBlocks out = a;
  for (auto& [c, blk] : out.blocks) {
    const ClassBlock& o = b[c];
    blk.alpha = w * blk.alpha + (1.0 - w) * o.alpha;
    blk.beta = w * blk.beta + (1.0 - w) * o.beta;
    blk.gamma = w * blk.gamma + (1.0 - w) * o.gamma;
  }
  return out;
}

inline void validate_blocks(const ReducedBlocks& b, double tol = 1e-10) {
  if (b.dim < 2) throw DimensionError("blocks: d must be >= 2");
  const std::vector<OutcomeClass> expected = classes_for(b.dim);
  if (b.blocks.size() != expected.size()) throw InvalidInput("blocks: wrong set of classes");
  for (OutcomeClass c : expected) {
    const ClassBlock& blk = b[c];
    if ((blk.alpha - blk.alpha.adjoint()).norm() > tol) throw InvalidInput("blocks: alpha not hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(blk.alpha, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw InvalidInput("blocks: negative alpha block");
    if (blk.beta < -tol || blk.gamma < -tol) throw InvalidInput("blocks: negative scalar block");
    if (b.dim == 2 && std::abs(blk.gamma) > tol) throw InvalidInput("blocks: gamma block at d = 2");
  }
}

/// R_l = P^alpha (x) r^alpha + r^beta P^beta + r^gamma P^gamma with r = d s / n(l).
inline Matrix class_operator(OutcomeClass c, const ClassBlock& s, const IrrepProjectors& p) {
  const std::size_t d = p.dim;
  const double scale = static_cast<double>(d) / static_cast<double>(class_size(c, d));
  Matrix out = Matrix::Zero(p.beta.rows(), p.beta.cols());
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out += (scale * s.alpha(a, b)) * p.alpha[a][b];
  }
  out += (scale * s.beta) * p.beta;
  if (p.has_gamma()) out += (scale * s.gamma) * p.gamma;
  return out;
}

/// R_ij = sum_k R_{class(i,j,k)} (x) |k><k|_D.
inline GeneralizedInstrument assemble_instrument(const ReducedBlocks& b) {
  validate_blocks(b);
  const std::size_t d = b.dim;
  const IrrepProjectors& p = projectors(d);
  std::map<OutcomeClass, Matrix> ops;
  for (const auto& [c, blk] : b.blocks) ops[c] = class_operator(c, blk, p);
  GeneralizedInstrument g = GeneralizedInstrument::zeros(d, b.task);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d * d * d * d),
                              static_cast<Eigen::Index>(d * d * d * d));
      for (std::size_t k = 0; k < d; ++k) {
        m += detail::kron(ops.at(class_of(i, j, k, d)), basis_projector(d, k));
      }
      g.element(i, j) = Operator(instrument_signature(d), std::move(m));
    }
  }
  return g;
}

/// D-block (k, k') of an operator on A B C D, as an operator on A B C.
inline Matrix d_block(const Matrix& r, std::size_t d, std::size_t k, std::size_t kp) {
  const auto n = static_cast<Eigen::Index>(d * d * d);
  Matrix out(n, n);
  const auto dd = static_cast<Eigen::Index>(d);
  for (Eigen::Index y = 0; y < n; ++y) {
    for (Eigen::Index x = 0; x < n; ++x) {
      out(x, y) = r(x * dd + static_cast<Eigen::Index>(k), y * dd + static_cast<Eigen::Index>(kp));
    }
  }
  return out;
}

inline ClassBlock compress_to_block(const Matrix& rp, OutcomeClass c, const IrrepProjectors& p) {
  const std::size_t d = p.dim;
  const double to_s = static_cast<double>(class_size(c, d)) / static_cast<double>(d);
  ClassBlock blk;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      blk.alpha(a, b) = to_s * (p.alpha[b][a].cwiseProduct(rp.transpose())).sum() / p.d_alpha();
    }
  }
  blk.beta = to_s * (p.beta.cwiseProduct(rp.transpose())).sum().real() / p.d_beta();
  if (p.has_gamma()) blk.gamma = to_s * (p.gamma.cwiseProduct(rp.transpose())).sum().real() / p.d_gamma();
  return blk;
}

/// Reads the reduced blocks of a diagonal, covariant, relabelling-symmetric
/// instrument at the class representatives.
inline ReducedBlocks extract_blocks(const GeneralizedInstrument& g) {
  require_instrument_shape(g);
  const IrrepProjectors& p = projectors(g.dim);
  ReducedBlocks b{g.dim, g.task, {}};
  for (OutcomeClass c : classes_for(g.dim)) {
    const auto r = representative(c);
    b.blocks[c] = compress_to_block(d_block(g.element(r[0], r[1]).matrix(), g.dim, r[2], r[2]), c, p);
  }
  return b;
}

struct FidelitySplit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double total() const { return alpha + beta + gamma; }
};

inline FidelitySplit reduced_fidelity(const ReducedBlocks& b, const DeltaTable& table) {
  FidelitySplit f;
  const double d = static_cast<double>(b.dim);
  for (const auto& [c, blk] : b.blocks) {
    const DeltaEntry& e = table.at(c);
    f.alpha += (blk.alpha * e.alpha.cast<Complex>()).trace().real() / d;
    f.beta += e.beta * blk.beta / d;
    if (b.dim > 2) f.gamma += e.gamma * blk.gamma / d;
  }
  return f;
}

inline FidelitySplit reduced_fidelity(const ReducedBlocks& b) {
  return reduced_fidelity(b, delta_table(b.dim));
}

/// Exact Haar-averaged fidelity of any instrument:
/// (1/d^2) sum_{ijk} <ijk| twirl(<k|_D R_ij |k>_D) |ijk>.
inline double exact_fidelity(const GeneralizedInstrument& g) {
  require_instrument_shape(g);
  const std::size_t d = g.dim;
  const IrrepProjectors& p = projectors(d);
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        const Matrix tw = twirl_matrix(d_block(g.element(i, j).matrix(), d, k, k), p);
        const auto idx = static_cast<Eigen::Index>(i * d * d + j * d + k);
        acc += tw(idx, idx).real();
      }
    }
  }
  return acc / static_cast<double>(d * d);
}

enum class SymmetryMap { Diagonal, Covariant, Relabel, Swap };

inline const char* to_string(SymmetryMap s) {
  switch (s) {
    case SymmetryMap::Diagonal: return "diagonal";
    case SymmetryMap::Covariant: return "covariant";
    case SymmetryMap::Relabel: return "relabel";
    case SymmetryMap::Swap: return "swap";
  }
  return "?";
}

namespace detail {

/// T^dagger x T for T = T_sigma^{(x) n}, T_sigma|i> = |sigma(i)>.
inline Matrix conjugate_by_permutation(const Matrix& x, const std::vector<std::size_t>& sigma,
                                       std::size_t factors) {
  const std::size_t d = sigma.size();
  std::size_t n = 1;
  for (std::size_t f = 0; f < factors; ++f) n *= d;
  std::vector<Eigen::Index> map(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    std::size_t out = 0;
    std::size_t weight = 1;
    for (std::size_t f = 0; f < factors; ++f) {
      out += sigma[rem % d] * weight;
      rem /= d;
      weight *= d;
    }
    map[idx] = static_cast<Eigen::Index>(out);
  }
  Matrix y(x.rows(), x.cols());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x(map[r], map[c]);
    }
  }
  return y;
}

inline Operator swap_ab(const Operator& x) {
  return align_to(relabel(x, {{"A", "B"}, {"B", "A"}}), x.signature());
}

}  // namespace detail

/// Averaging maps that leave the figure of merit and the task normalization
/// unchanged while imposing one symmetry each.
inline GeneralizedInstrument symmetrize(const GeneralizedInstrument& g, SymmetryMap which) {
  require_instrument_shape(g);
  const std::size_t d = g.dim;
  GeneralizedInstrument out = g;
  switch (which) {
    case SymmetryMap::Diagonal: {
      // Insert the classical read-out channel between device and network.
      const ChoiOperator readout = mp_channel_choi(Matrix::Identity(static_cast<Eigen::Index>(d),
                                                                    static_cast<Eigen::Index>(d)),
                                                   "D", "D_dev");
      for (Operator& e : out.elements) e = relabel(link(e, readout.op), {{"D_dev", "D"}});
      break;
    }
    case SymmetryMap::Covariant: {
      const IrrepProjectors& p = projectors(d);
      const auto dd = static_cast<Eigen::Index>(d);
      for (Operator& e : out.elements) {
        Matrix m = e.matrix();
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t kp = 0; kp < d; ++kp) {
            const Matrix tw = twirl_matrix(d_block(e.matrix(), d, k, kp), p);
            for (Eigen::Index y = 0; y < tw.cols(); ++y) {
              for (Eigen::Index x = 0; x < tw.rows(); ++x) {
                m(x * dd + static_cast<Eigen::Index>(k), y * dd + static_cast<Eigen::Index>(kp)) = tw(x, y);
              }
            }
          }
        }
        e = Operator(e.signature(), std::move(m));
      }
      break;
    }
    case SymmetryMap::Relabel: {
      std::vector<std::size_t> sigma(d);
      std::iota(sigma.begin(), sigma.end(), 0);
      out = GeneralizedInstrument::zeros(d, g.task);
      std::size_t count = 0;
      do {
        ++count;
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            out.element(i, j).mutable_matrix() +=
                detail::conjugate_by_permutation(g.element(sigma[i], sigma[j]).matrix(), sigma, 4);
          }
        }
      } while (std::next_permutation(sigma.begin(), sigma.end()));
      for (Operator& e : out.elements) e *= Complex(1.0 / static_cast<double>(count), 0.0);
      break;
    }
    case SymmetryMap::Swap: {
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          out.element(i, j) = 0.5 * (g.element(i, j) + detail::swap_ab(g.element(j, i)));
        }
      }
      break;
    }
  }
  return out;
}

/// Structural predicate matching each symmetrization map.
inline bool has_symmetry(const GeneralizedInstrument& g, SymmetryMap which, double tol = 1e-9) {
  const std::size_t d = g.dim;
  switch (which) {
    case SymmetryMap::Diagonal:
      for (const Operator& e : g.elements) {
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t kp = 0; kp < d; ++kp) {
            if (k != kp && d_block(e.matrix(), d, k, kp).norm() > tol) return false;
          }
        }
      }
      return true;
    case SymmetryMap::Covariant: {
      const IrrepProjectors& p = projectors(d);
      for (const Operator& e : g.elements) {
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t kp = 0; kp < d; ++kp) {
            const Matrix blk = d_block(e.matrix(), d, k, kp);
            if ((twirl_matrix(blk, p) - blk).norm() > tol) return false;
          }
        }
      }
      return true;
    }
    case SymmetryMap::Relabel: {
      // The transposition (0 1) and the cycle (0 1 ... d-1) generate S_d.
      std::vector<std::size_t> swap01(d), cycle(d);
      std::iota(swap01.begin(), swap01.end(), 0);
      std::swap(swap01[0], swap01[1]);
      for (std::size_t i = 0; i < d; ++i) cycle[i] = (i + 1) % d;
      for (const auto& sigma : {swap01, cycle}) {
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            const Matrix moved =
                detail::conjugate_by_permutation(g.element(sigma[i], sigma[j]).matrix(), sigma, 4);
            if ((moved - g.element(i, j).matrix()).norm() > tol) return false;
          }
        }
      }
      return true;
    }
    case SymmetryMap::Swap:
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          if (distance(g.element(i, j), detail::swap_ab(g.element(j, i))) > tol) return false;
        }
      }
      return true;
  }
  return false;
}

/// Block-level swap averaging: alpha blocks of self-paired classes lose their
/// off-diagonal part, xyx and xyy are averaged through sigma_z conjugation.
inline ReducedBlocks swap_symmetrize(const ReducedBlocks& b) {
  ReducedBlocks out = b;
  const Eigen::Matrix2cd z = sigma_z();
  for (auto& [c, blk] : out.blocks) {
    if (c == OutcomeClass::XYX || c == OutcomeClass::XYY) continue;
    blk.alpha = 0.5 * (blk.alpha + z * blk.alpha * z);
  }
  const ClassBlock& x = b[OutcomeClass::XYX];
  const ClassBlock& y = b[OutcomeClass::XYY];
  ClassBlock avg;
  avg.alpha = 0.5 * (x.alpha + z * y.alpha * z);
  avg.beta = 0.5 * (x.beta + y.beta);
  avg.gamma = 0.5 * (x.gamma + y.gamma);
  out[OutcomeClass::XYX] = avg;
  ClassBlock mirrored = avg;
  mirrored.alpha = z * avg.alpha * z;
  out[OutcomeClass::XYY] = mirrored;
  return out;
}

}  // namespace mclone
