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
 * @file comb.hpp
 * @brief Choi operators, the link product, and comb / instrument normalization.
 *
 * Choi convention: a map M from `in` to `out` is represented by
 * M = (M (x) id)(|w><w|) on out (x) in, with |w> the unnormalized maximally
 * entangled vector. Wires are identified by label: linking two operators
 * contracts exactly the labels they share.
 */

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mclone/operator.hpp"

namespace mclone {

enum class Role { Input, Output };

struct ChoiOperator {
  Operator op;
  std::map<Label, Role> roles;

  std::vector<Label> labels_with(Role role) const {
    std::vector<Label> out;
    for (const Subsystem& s : op.signature()) {
      auto it = roles.find(s.label);
      if (it != roles.end() && it->second == role) out.push_back(s.label);
    }
    return out;
  }
  std::vector<Label> inputs() const { return labels_with(Role::Input); }
  std::vector<Label> outputs() const { return labels_with(Role::Output); }
};

inline ChoiOperator make_choi(Operator op, std::map<Label, Role> roles) {
  for (const Subsystem& s : op.signature()) {
    if (!roles.count(s.label)) throw LabelError("make_choi: no role for '" + s.label + "'");
  }
  for (const auto& [label, role] : roles) {
    if (!op.signature().contains(label)) throw LabelError("make_choi: unknown label '" + label + "'");
  }
  return ChoiOperator{std::move(op), std::move(roles)};
}

inline bool is_isometry(const Matrix& u, double tol = kDefaultTol) {
  const Matrix g = u.adjoint() * u;
  return (g - Matrix::Identity(g.rows(), g.cols())).norm() <= tol * std::max(1.0, g.norm());
}

/// Choi operator (U (x) I)|w><w|(U (x) I)^dagger on out (x) in.
inline ChoiOperator choi_of_unitary(const Matrix& u, const Signature& in, const Signature& out) {
  if (u.rows() != static_cast<Eigen::Index>(out.total_dim()) ||
      u.cols() != static_cast<Eigen::Index>(in.total_dim())) {
    throw DimensionError("choi_of_unitary: matrix shape does not match signatures");
  }
  if (!is_isometry(u)) throw InvalidInput("choi_of_unitary: matrix is not unitary");
  const Eigen::Index n_in = u.cols();
  Vector v = Vector::Zero(u.rows() * n_in);
  for (Eigen::Index n = 0; n < n_in; ++n) {
    for (Eigen::Index o = 0; o < u.rows(); ++o) v(o * n_in + n) = u(o, n);
  }
  std::map<Label, Role> roles;
  for (const Subsystem& s : out) roles[s.label] = Role::Output;
  for (const Subsystem& s : in) roles[s.label] = Role::Input;
  return make_choi(Operator(Signature::concat(out, in), v * v.adjoint()), std::move(roles));
}

inline ChoiOperator choi_of_unitary(const Matrix& u, const Label& in_label, const Label& out_label) {
  if (u.rows() != u.cols()) throw DimensionError("choi_of_unitary: matrix is not square");
  const auto d = static_cast<std::size_t>(u.rows());
  return choi_of_unitary(u, Signature{{in_label, d}}, Signature{{out_label, d}});
}

/// A state rho on some systems, viewed as the Choi operator of its preparation.
inline ChoiOperator state_choi(const Operator& rho) {
  std::map<Label, Role> roles;
  for (const Subsystem& s : rho.signature()) roles[s.label] = Role::Output;
  return make_choi(rho, std::move(roles));
}

/// A POVM element E, viewed as the Choi operator E^T of the map rho -> Tr[E rho].
inline ChoiOperator effect_choi(const Operator& effect) {
  std::map<Label, Role> roles;
  for (const Subsystem& s : effect.signature()) roles[s.label] = Role::Input;
  return make_choi(effect.transpose(), std::move(roles));
}

/// Tr_out[c] == I_in within tol.
inline bool is_channel(const ChoiOperator& c, double tol = 1e-9) {
  const Operator reduced = partial_trace(c.op, c.outputs());
  const Operator id = Operator::identity(reduced.signature());
  return (reduced.matrix() - id.matrix()).norm() <= tol * std::max(1.0, id.matrix().norm());
}

/// M(rho) = Tr_in[M (I_out (x) rho^T)].
inline Operator apply_channel(const ChoiOperator& c, const Operator& rho) {
  const Signature in_sig = c.op.signature().select(c.inputs());
  if (!rho.signature().same_label_set(in_sig)) {
    throw LabelError("apply_channel: state labels do not match the channel inputs");
  }
  const Signature out_sig = c.op.signature().select(c.outputs());
  const Operator rho_t = align_to(rho, in_sig).transpose();
  const Operator lifted = align_to(tensor(Operator::identity(out_sig), rho_t), c.op.signature());
  return partial_trace(c.op * lifted, c.inputs());
}

/// Link product a * b = Tr_K[a^{T_K} b], K = shared labels. Surviving labels
/// keep a's order followed by b's.
inline Operator link(const Operator& a, const Operator& b) {
  const Signature& sa = a.signature();
  const Signature& sb = b.signature();
  std::vector<Label> shared;
  for (const Subsystem& s : sa) {
    if (sb.contains(s.label)) {
      if (sb.dim_of(s.label) != s.dim) {
        throw DimensionError("link: shared label '" + s.label + "' has mismatched dims");
      }
      shared.push_back(s.label);
    }
  }
  const Signature a_rest = sa.without(shared);
  const Signature b_rest = sb.without(shared);
  std::vector<Label> a_order = a_rest.labels();
  a_order.insert(a_order.end(), shared.begin(), shared.end());
  std::vector<Label> b_order = shared;
  const std::vector<Label> b_rest_labels = b_rest.labels();
  b_order.insert(b_order.end(), b_rest_labels.begin(), b_rest_labels.end());
  const Matrix ap = permute_systems(a, a_order).matrix();
  const Matrix bp = permute_systems(b, b_order).matrix();

  const auto ar = static_cast<Eigen::Index>(a_rest.total_dim());
  const auto br = static_cast<Eigen::Index>(b_rest.total_dim());
  const Eigen::Index k = ap.rows() / ar;

  // result((x,y),(x',y')) = sum_{k1,k2} a((x,k2),(x',k1)) b((k2,y),(k1,y'))
  Matrix at(ar * ar, k * k);
  for (Eigen::Index x = 0; x < ar; ++x) {
    for (Eigen::Index xp = 0; xp < ar; ++xp) {
      for (Eigen::Index k2 = 0; k2 < k; ++k2) {
        for (Eigen::Index k1 = 0; k1 < k; ++k1) {
          at(x * ar + xp, k2 * k + k1) = ap(x * k + k2, xp * k + k1);
        }
      }
    }
  }
  Matrix bt(k * k, br * br);
  for (Eigen::Index k2 = 0; k2 < k; ++k2) {
    for (Eigen::Index k1 = 0; k1 < k; ++k1) {
      for (Eigen::Index y = 0; y < br; ++y) {
        for (Eigen::Index yp = 0; yp < br; ++yp) {
          bt(k2 * k + k1, y * br + yp) = bp(k2 * br + y, k1 * br + yp);
        }
      }
    }
  }
  const Matrix prod = at * bt;
  Matrix out(ar * br, ar * br);
  for (Eigen::Index x = 0; x < ar; ++x) {
    for (Eigen::Index xp = 0; xp < ar; ++xp) {
      for (Eigen::Index y = 0; y < br; ++y) {
        for (Eigen::Index yp = 0; yp < br; ++yp) {
          out(x * br + y, xp * br + yp) = prod(x * ar + xp, y * br + yp);
        }
      }
    }
  }
  return Operator(Signature::concat(a_rest, b_rest), std::move(out));
}

inline ChoiOperator link(const ChoiOperator& a, const ChoiOperator& b) {
  Operator op = link(a.op, b.op);
  std::map<Label, Role> roles;
  for (const Subsystem& s : op.signature()) {
    auto it = a.roles.find(s.label);
    roles[s.label] = (it != a.roles.end() && !b.op.signature().contains(s.label)) ? it->second
                                                                                  : b.roles.at(s.label);
  }
  return make_choi(std::move(op), std::move(roles));
}

/// Causal slots of a network, in order. Each tooth takes `inputs` and emits
/// `outputs`; either side may be empty.
struct NetworkShape {
  struct Tooth {
    std::vector<Label> inputs;
    std::vector<Label> outputs;
  };
  std::vector<Tooth> teeth;
};

/// Recursive normalization Tr_{out_k}[R^(k)] = I_{in_k} (x) R^(k-1), R^(0) = 1.
inline bool check_comb(const Operator& op, const NetworkShape& shape, double tol = 1e-9) {
  std::vector<Label> covered;
  for (const auto& t : shape.teeth) {
    covered.insert(covered.end(), t.inputs.begin(), t.inputs.end());
    covered.insert(covered.end(), t.outputs.begin(), t.outputs.end());
  }
  if (covered.size() != op.signature().size()) return false;
  for (const Label& l : covered) {
    if (!op.signature().contains(l)) return false;
  }

  Operator current = op;
  for (std::size_t k = shape.teeth.size(); k-- > 0;) {
    const auto& tooth = shape.teeth[k];
    const Operator traced = partial_trace(current, tooth.outputs);
    const Signature in_sig = traced.signature().select(tooth.inputs);
    Operator previous = partial_trace(traced, tooth.inputs) *
                        (1.0 / static_cast<double>(in_sig.total_dim()));
    const Operator expected = tensor(Operator::identity(in_sig), previous);
    const double scale = std::max(1.0, traced.matrix().norm());
    if (distance(traced, expected) > tol * scale) return false;
    current = std::move(previous);
  }
  return std::abs(current.trace() - Complex(1.0, 0.0)) <= tol;
}

enum class Task { Cloning, Learning };

inline const char* to_string(Task t) { return t == Task::Cloning ? "cloning" : "learning"; }

/// Wires of the replicating network: A, B carry the states to be measured,
/// C feeds the measurement device, D returns its classical outcome.
inline Signature instrument_signature(std::size_t d) {
  return Signature{{"A", d}, {"B", d}, {"C", d}, {"D", d}};
}

inline NetworkShape cloning_shape() { return NetworkShape{{{{"A", "B"}, {"C"}}, {{"D"}, {}}}}; }
inline NetworkShape learning_shape() { return NetworkShape{{{{}, {"C"}}, {{"A", "B", "D"}, {}}}}; }
inline NetworkShape shape_for(Task t) { return t == Task::Cloning ? cloning_shape() : learning_shape(); }

/// Outcome pair (i, j) -> probabilistic comb on A, B, C, D. Indices are 0-based;
/// element (i, j) is stored at i * dim + j.
struct GeneralizedInstrument {
  std::size_t dim = 2;
  Task task = Task::Cloning;
  std::vector<Operator> elements;

  static GeneralizedInstrument zeros(std::size_t d, Task task) {
    GeneralizedInstrument g{d, task, {}};
    g.elements.assign(d * d, Operator::zero(instrument_signature(d)));
    return g;
  }

  const Operator& element(std::size_t i, std::size_t j) const { return elements.at(i * dim + j); }
  Operator& element(std::size_t i, std::size_t j) { return elements.at(i * dim + j); }

  Operator total() const {
    Operator sum = Operator::zero(instrument_signature(dim));
    for (const Operator& e : elements) sum += e;
    return sum;
  }
};

/// Convex mixture w * a + (1 - w) * b.
inline GeneralizedInstrument mix(const GeneralizedInstrument& a, const GeneralizedInstrument& b,
                                 double w) {
  if (a.dim != b.dim || a.task != b.task) throw InvalidInput("mix: incompatible instruments");
  GeneralizedInstrument out = a;
  for (std::size_t n = 0; n < out.elements.size(); ++n) {
    out.elements[n] = w * a.elements[n] + (1.0 - w) * b.elements[n];
  }
  return out;
}

inline void require_instrument_shape(const GeneralizedInstrument& g) {
  if (g.elements.size() != g.dim * g.dim) throw InvalidInput("instrument: wrong element count");
  const Signature sig = instrument_signature(g.dim);
  for (const Operator& e : g.elements) {
    if (!(e.signature() == sig)) throw InvalidInput("instrument: element signature is not ABCD");
  }
}

struct InstrumentCheck {
  bool elements_psd = true;
  bool normalized = true;
  double normalization_defect = 0.0;
  /// Learning only: the reduced state on C and its distance from I/d.
  std::optional<Matrix> rho;
  double rho_defect = 0.0;
  std::string message;

  bool ok() const { return elements_psd && normalized; }
};

/// Element-wise positivity and the task's sum structure:
/// cloning  sum R_ij = I_D (x) S_ABC with Tr_C S = I_AB;
/// learning sum R_ij = I_ABD (x) rho_C with Tr rho = 1.
inline InstrumentCheck check_instrument(const GeneralizedInstrument& g, double tol = 1e-9) {
  require_instrument_shape(g);
  InstrumentCheck out;
  std::ostringstream msg;
  for (std::size_t n = 0; n < g.elements.size(); ++n) {
    if (!is_hermitian(g.elements[n], tol) || !is_psd(g.elements[n], tol)) {
      out.elements_psd = false;
      msg << "element (" << n / g.dim << "," << n % g.dim << ") not PSD; ";
    }
  }
  const Operator total = g.total();
  const double d = static_cast<double>(g.dim);
  if (g.task == Task::Cloning) {
    const Operator s = partial_trace(total, {"D"}) * (1.0 / d);
    const Operator lifted = tensor(s, Operator::identity(Signature{{"D", g.dim}}));
    const double defect_d = distance(total, lifted) / std::max(1.0, total.matrix().norm());
    const Operator s_ab = partial_trace(s, {"C"});
    const double defect_c =
        (s_ab.matrix() - Matrix::Identity(s_ab.matrix().rows(), s_ab.matrix().cols())).norm() /
        std::max(1.0, s_ab.matrix().norm());
    out.normalization_defect = std::max(defect_d, defect_c);
    if (defect_d > tol) msg << "sum is not I_D (x) S (defect " << defect_d << "); ";
    if (defect_c > tol) msg << "sum deficit: Tr_C S != I_AB (defect " << defect_c << "); ";
  } else {
    const Operator rho = partial_trace(total, {"A", "B", "D"}) * (1.0 / (d * d * d));
    const Operator lifted =
        tensor(Operator::identity(Signature{{"A", g.dim}, {"B", g.dim}, {"D", g.dim}}), rho);
    const double defect = distance(total, lifted) / std::max(1.0, total.matrix().norm());
    const double trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
    out.normalization_defect = std::max(defect, trace_defect);
    out.rho = rho.matrix();
    out.rho_defect =
        (rho.matrix() - Matrix::Identity(rho.matrix().rows(), rho.matrix().cols()) / d).norm();
    if (defect > tol) msg << "sum is not I_ABD (x) rho (defect " << defect << "); ";
    if (trace_defect > tol) msg << "sum deficit: Tr rho != 1 (defect " << trace_defect << "); ";
  }
  out.normalized = out.normalization_defect <= tol;
  out.message = msg.str();
  return out;
}

}  // namespace mclone
