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
 * @file operator.hpp
 * @brief Dense operators on labelled multi-partite Hilbert spaces.
 *
 * An Operator is a square complex matrix together with a Signature, the
 * ordered list of subsystems it acts on. The matrix basis is the
 * lexicographic product of the computational bases of the subsystems, in
 * signature order (first subsystem = most significant digit). All
 * transpositions and conjugations are taken in that fixed basis.
 */

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mclone {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Label = std::string;

class LabelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Default hermiticity / positivity slack, relative to the spectral scale.
inline constexpr double kDefaultTol = 1e-10;

struct Subsystem {
  Label label;
  std::size_t dim = 1;

  bool operator==(const Subsystem&) const = default;
};

class Signature {
 public:
  Signature() = default;
  Signature(std::initializer_list<Subsystem> systems)
      : Signature(std::vector<Subsystem>(systems)) {}
  explicit Signature(std::vector<Subsystem> systems)
      : systems_(std::move(systems)) {
    std::set<Label> seen;
    for (const Subsystem& s : systems_) {
      if (s.dim < 1) throw DimensionError("subsystem '" + s.label + "' has dim 0");
      if (!seen.insert(s.label).second) {
        throw LabelError("duplicate subsystem label '" + s.label + "'");
      }
    }
  }

  std::size_t size() const { return systems_.size(); }
  bool empty() const { return systems_.empty(); }
  const Subsystem& operator[](std::size_t i) const { return systems_[i]; }
  auto begin() const { return systems_.begin(); }
  auto end() const { return systems_.end(); }
  const std::vector<Subsystem>& systems() const { return systems_; }

  std::size_t total_dim() const {
    std::size_t n = 1;
    for (const Subsystem& s : systems_) n *= s.dim;
    return n;
  }

  bool contains(const Label& label) const {
    return std::any_of(systems_.begin(), systems_.end(),
                       [&](const Subsystem& s) { return s.label == label; });
  }

  std::size_t index_of(const Label& label) const {
    for (std::size_t i = 0; i < systems_.size(); ++i) {
      if (systems_[i].label == label) return i;
    }
    throw LabelError("unknown subsystem label '" + label + "'");
  }

  std::size_t dim_of(const Label& label) const { return systems_[index_of(label)].dim; }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(systems_.size());
    for (const Subsystem& s : systems_) out.push_back(s.label);
    return out;
  }

  /// Subsystems whose labels are in `labels`, in this signature's order.
  Signature select(const std::vector<Label>& labels) const {
    std::vector<Subsystem> out;
    for (const Subsystem& s : systems_) {
      if (std::find(labels.begin(), labels.end(), s.label) != labels.end()) out.push_back(s);
    }
    return Signature(std::move(out));
  }

  Signature without(const std::vector<Label>& labels) const {
    std::vector<Subsystem> out;
    for (const Subsystem& s : systems_) {
      if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) out.push_back(s);
    }
    return Signature(std::move(out));
  }

  static Signature concat(const Signature& a, const Signature& b) {
    std::vector<Subsystem> out = a.systems_;
    out.insert(out.end(), b.systems_.begin(), b.systems_.end());
    return Signature(std::move(out));
  }

  bool same_label_set(const Signature& other) const {
    if (size() != other.size()) return false;
    for (const Subsystem& s : systems_) {
      if (!other.contains(s.label) || other.dim_of(s.label) != s.dim) return false;
    }
    return true;
  }

  bool operator==(const Signature&) const = default;

 private:
  std::vector<Subsystem> systems_;
};

namespace detail {

/// Row-major (most significant first) strides of a signature.
inline std::vector<std::size_t> strides(const Signature& sig) {
  std::vector<std::size_t> st(sig.size(), 1);
  for (std::size_t i = sig.size(); i-- > 1;) st[i - 1] = st[i] * sig[i].dim;
  return st;
}

/// For each flat index, the additive contribution of the subsystems whose
/// mask entry is true. Flat index = part(mask) + part(!mask).
inline std::vector<std::size_t> masked_part(const Signature& sig, const std::vector<bool>& mask) {
  const std::size_t n = sig.total_dim();
  const std::vector<std::size_t> st = strides(sig);
  std::vector<std::size_t> out(n, 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    std::size_t acc = 0;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      const std::size_t digit = rem / st[s];
      rem %= st[s];
      if (mask[s]) acc += digit * st[s];
    }
    out[idx] = acc;
  }
  return out;
}

/// Compact index of the masked subsystems (in signature order) for each flat index.
inline std::vector<std::size_t> compact_index(const Signature& sig, const std::vector<bool>& mask) {
  const std::size_t n = sig.total_dim();
  const std::vector<std::size_t> st = strides(sig);
  std::vector<std::size_t> out(n, 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    std::size_t acc = 0;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      const std::size_t digit = rem / st[s];
      rem %= st[s];
      if (mask[s]) acc = acc * sig[s].dim + digit;
    }
    out[idx] = acc;
  }
  return out;
}

inline std::vector<bool> label_mask(const Signature& sig, const std::vector<Label>& labels) {
  std::vector<bool> mask(sig.size(), false);
  for (const Label& l : labels) mask[sig.index_of(l)] = true;
  return mask;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace detail

class Operator {
 public:
  Operator() : matrix_(Matrix::Ones(1, 1)) {}
  Operator(Signature sig, Matrix entries) : sig_(std::move(sig)), matrix_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(sig_.total_dim());
    if (matrix_.rows() != n || matrix_.cols() != n) {
      throw DimensionError("matrix is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.cols()) + " but signature needs " +
                           std::to_string(n) + "x" + std::to_string(n));
    }
  }

  static Operator identity(const Signature& sig) {
    const auto n = static_cast<Eigen::Index>(sig.total_dim());
    return Operator(sig, Matrix::Identity(n, n));
  }
  static Operator zero(const Signature& sig) {
    const auto n = static_cast<Eigen::Index>(sig.total_dim());
    return Operator(sig, Matrix::Zero(n, n));
  }
  static Operator scalar(Complex value) {
    Matrix m(1, 1);
    m(0, 0) = value;
    return Operator(Signature{}, m);
  }

  const Signature& signature() const { return sig_; }
  const Matrix& matrix() const { return matrix_; }
  Matrix& mutable_matrix() { return matrix_; }
  std::size_t dim() const { return sig_.total_dim(); }

  Complex trace() const { return matrix_.trace(); }
  Operator adjoint() const { return Operator(sig_, matrix_.adjoint()); }
  Operator transpose() const { return Operator(sig_, matrix_.transpose()); }
  Operator conjugate() const { return Operator(sig_, matrix_.conjugate()); }

  Operator& operator+=(const Operator& other) {
    require_same_signature(other);
    matrix_ += other.matrix_;
    return *this;
  }
  Operator& operator-=(const Operator& other) {
    require_same_signature(other);
    matrix_ -= other.matrix_;
    return *this;
  }
  Operator& operator*=(Complex c) {
    matrix_ *= c;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, Complex c) { return a *= c; }
  friend Operator operator*(Complex c, Operator a) { return a *= c; }
  friend Operator operator*(Operator a, double c) { return a *= Complex(c, 0.0); }
  friend Operator operator*(double c, Operator a) { return a *= Complex(c, 0.0); }

  /// Matrix product; both factors must carry the same signature.
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.require_same_signature(b);
    return Operator(a.sig_, a.matrix_ * b.matrix_);
  }

 private:
  void require_same_signature(const Operator& other) const {
    if (!(sig_ == other.sig_)) throw LabelError("operator signatures differ");
  }

  Signature sig_;
  Matrix matrix_;
};

inline Operator tensor(const Operator& a, const Operator& b) {
  for (const Subsystem& s : b.signature()) {
    if (a.signature().contains(s.label)) {
      throw LabelError("tensor: label '" + s.label + "' appears in both factors");
    }
  }
  return Operator(Signature::concat(a.signature(), b.signature()),
                  detail::kron(a.matrix(), b.matrix()));
}

/// Re-index `a` so that its subsystems appear in `new_order`. The abstract
/// operator is unchanged.
inline Operator permute_systems(const Operator& a, const std::vector<Label>& new_order) {
  const Signature& sig = a.signature();
  if (new_order.size() != sig.size()) throw LabelError("permute_systems: not a permutation");
  std::vector<Subsystem> systems;
  systems.reserve(sig.size());
  for (const Label& l : new_order) systems.push_back(sig[sig.index_of(l)]);
  Signature out_sig(std::move(systems));  // rejects duplicates

  // New flat index of each old flat index: digits moved to their new slots.
  const std::vector<std::size_t> new_st = detail::strides(out_sig);
  const std::size_t n = sig.total_dim();
  std::vector<std::size_t> map(n, 0);
  for (std::size_t s = 0; s < sig.size(); ++s) {
    std::vector<bool> mask(sig.size(), false);
    mask[s] = true;
    const std::vector<std::size_t> digit = detail::compact_index(sig, mask);
    const std::size_t target = new_st[out_sig.index_of(sig[s].label)];
    for (std::size_t i = 0; i < n; ++i) map[i] += digit[i] * target;
  }
  Matrix out(a.matrix().rows(), a.matrix().cols());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      out(static_cast<Eigen::Index>(map[r]), static_cast<Eigen::Index>(map[c])) =
          a.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return Operator(out_sig, std::move(out));
}

/// Bring `b` into the subsystem order of `reference` (same label set required).
inline Operator align_to(const Operator& b, const Signature& reference) {
  if (!b.signature().same_label_set(reference)) {
    throw LabelError("align_to: label sets or dims differ");
  }
  if (b.signature() == reference) return b;
  return permute_systems(b, reference.labels());
}

inline Operator partial_trace(const Operator& a, const std::vector<Label>& labels) {
  const Signature& sig = a.signature();
  const std::vector<bool> traced = detail::label_mask(sig, labels);
  std::vector<bool> kept(traced.size());
  for (std::size_t i = 0; i < traced.size(); ++i) kept[i] = !traced[i];

  const std::vector<std::size_t> keep_idx = detail::compact_index(sig, kept);
  const std::vector<std::size_t> trace_part = detail::masked_part(sig, traced);
  Signature out_sig = sig.without(labels);
  const auto m = static_cast<Eigen::Index>(out_sig.total_dim());
  Matrix out = Matrix::Zero(m, m);
  const std::size_t n = sig.total_dim();
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      if (trace_part[r] == trace_part[c]) {
        out(static_cast<Eigen::Index>(keep_idx[r]), static_cast<Eigen::Index>(keep_idx[c])) +=
            a.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return Operator(std::move(out_sig), std::move(out));
}

inline Operator partial_transpose(const Operator& a, const std::vector<Label>& labels) {
  const Signature& sig = a.signature();
  const std::vector<bool> flipped = detail::label_mask(sig, labels);
  const std::vector<std::size_t> flip_part = detail::masked_part(sig, flipped);
  const std::size_t n = sig.total_dim();
  Matrix out(a.matrix().rows(), a.matrix().cols());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t nr = r - flip_part[r] + flip_part[c];
      const std::size_t nc = c - flip_part[c] + flip_part[r];
      out(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc)) =
          a.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return Operator(sig, std::move(out));
}

/// Rename subsystems simultaneously; the matrix is untouched.
inline Operator relabel(const Operator& a, const std::map<Label, Label>& renames) {
  for (const auto& entry : renames) a.signature().index_of(entry.first);
  std::vector<Subsystem> systems = a.signature().systems();
  for (Subsystem& s : systems) {
    auto it = renames.find(s.label);
    if (it != renames.end()) s.label = it->second;
  }
  return Operator(Signature(std::move(systems)), a.matrix());
}

inline double hermiticity_defect(const Operator& a) {
  const double scale = std::max(1.0, a.matrix().norm());
  return (a.matrix() - a.matrix().adjoint()).norm() / scale;
}

inline bool is_hermitian(const Operator& a, double tol = kDefaultTol) {
  return hermiticity_defect(a) <= tol;
}

inline Eigen::VectorXd eigenvalues_hermitian(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// True iff the smallest eigenvalue is >= -tol * max(1, trace norm).
/// Throws InvalidInput when `a` is not hermitian within `tol`.
inline bool is_psd(const Operator& a, double tol = kDefaultTol) {
  if (!is_hermitian(a, tol)) throw InvalidInput("is_psd: operator is not hermitian");
  const Eigen::VectorXd ev = eigenvalues_hermitian(a.matrix());
  const double scale = std::max(1.0, ev.cwiseAbs().sum());
  return ev.minCoeff() >= -tol * scale;
}

/// Unnormalized sum_n |n>|n>, squared norm d.
inline Vector max_entangled_vector(std::size_t d) {
  if (d < 1) throw DimensionError("max_entangled_vector: d must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  Vector v = Vector::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) v(i * n + i) = 1.0;
  return v;
}

inline Vector basis_vector(std::size_t dim, std::size_t i) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

inline Matrix outer(const Vector& a, const Vector& b) { return a * b.adjoint(); }

inline Matrix basis_projector(std::size_t dim, std::size_t i) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  return m;
}

/// Frobenius distance after aligning `b` to `a`'s subsystem order.
inline double distance(const Operator& a, const Operator& b) {
  return (a.matrix() - align_to(b, a.signature()).matrix()).norm();
}

}  // namespace mclone
