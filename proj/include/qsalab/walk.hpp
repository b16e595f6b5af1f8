// Copyright 2026 The qsalab Authors
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

// Quantum walk on the doubled configuration space span{|i>|j>}.
//
// Amplitudes are stored row-major: index i * d + j holds <i, j|psi>, first
// register i, second register j. All operators here are real, so the state
// scalar is a template parameter; double and std::complex<double> are both
// supported and give identical results on real input.
//
//   X  block diagonal, X (|i> (x) v) = |i> (x) V_i v with V_i the Householder
//      reflection exchanging e_0 and a_i = (sqrt S_i0, ..., sqrt S_i,d-1).
//   P  register swap |i, j> -> |j, i>.
//   R  1 (x) (1 - 2 |0><0|), a sign flip on every amplitude with j = 0.
//
// Two walk products are provided:
//   literal_product  W = X^dag P X P R P X^dag P X R, the ten-factor product
//                    as written.
//   two_reflection   W = X^dag P X R X^dag P X R. This is the Szegedy walk
//                    (P Ref_A P) Ref_A, Ref_A = 2 X (1 (x) |0><0|) X^dag - 1,
//                    conjugated by X so that sum_i sqrt(pi_i) |i, 0> is its
//                    fixed point.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "qsalab/chains.hpp"
#include "qsalab/error.hpp"

namespace qsalab {

/// Hard ceiling for walk-space allocations (d^2 = 2^24 amplitudes).
inline constexpr int kMaxWalkBits = 12;
/// Default cap used by the annealing engine (d^2 = 2^20 amplitudes).
inline constexpr int kDefaultWalkBits = 10;

enum class WalkVariant { two_reflection, literal_product };

inline const char* to_string(WalkVariant v) {
  return v == WalkVariant::two_reflection ? "two_reflection" : "literal_product";
}

/// Accepts "two-reflection", "two_reflection", "literal", "literal_product".
inline WalkVariant parse_walk_variant(const std::string& s) {
  if (s == "two-reflection" || s == "two_reflection") return WalkVariant::two_reflection;
  if (s == "literal" || s == "literal_product" || s == "literal-product")
    return WalkVariant::literal_product;
  throw UsageError("walk", "unknown walk variant \"" + s + "\"");
}

/// Bytes needed for a state of n bits with scalar T.
template <typename T>
constexpr std::uint64_t state_bytes(int n) {
  return (std::uint64_t{1} << (2 * n)) * sizeof(T);
}

/// Amplitude vector of length d^2 over (first, second) register pairs.
template <typename T>
class BasicState {
 public:
  using scalar_type = T;

  explicit BasicState(int n) : n_(n) {
    if (n < 1 || n > kMaxWalkBits)
      throw CapError("walk", "state with n = " + std::to_string(n) + " outside [1, " +
                                 std::to_string(kMaxWalkBits) + "]");
    amplitudes_.assign(std::size_t{1} << (2 * n), T{});
  }

  static BasicState basis(int n, std::uint64_t i, std::uint64_t j) {
    BasicState s(n);
    s(i, j) = T{1};
    return s;
  }

  int n() const noexcept { return n_; }
  std::uint64_t dimension() const noexcept { return std::uint64_t{1} << n_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  T& operator()(std::uint64_t i, std::uint64_t j) { return amplitudes_[i * dimension() + j]; }
  const T& operator()(std::uint64_t i, std::uint64_t j) const {
    return amplitudes_[i * dimension() + j];
  }

  std::span<T> amplitudes() noexcept { return amplitudes_; }
  std::span<const T> amplitudes() const noexcept { return amplitudes_; }
  /// Second-register slice of first-register value i.
  std::span<T> block(std::uint64_t i) noexcept {
    return {amplitudes_.data() + i * dimension(), dimension()};
  }

  double norm() const {
    double s = 0.0;
    for (const T& a : amplitudes_) s += std::norm(a);
    return std::sqrt(s);
  }

  /// Pr(first register = i) = sum_j |amp(i, j)|^2.
  std::vector<double> first_register_marginals() const {
    std::vector<double> p(dimension(), 0.0);
    const std::uint64_t d = dimension();
    for (std::uint64_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::uint64_t j = 0; j < d; ++j) s += std::norm(amplitudes_[i * d + j]);
      p[i] = s;
    }
    return p;
  }

  template <typename U>
  BasicState<U> cast() const {
    BasicState<U> out(n_);
    if constexpr (std::is_same_v<U, double> && !std::is_same_v<T, double>) {
      for (std::size_t k = 0; k < size(); ++k) out.amplitudes()[k] = std::real(amplitudes_[k]);
    } else {
      for (std::size_t k = 0; k < size(); ++k) out.amplitudes()[k] = U(amplitudes_[k]);
    }
    return out;
  }

 private:
  int n_;
  std::vector<T> amplitudes_;
};

using QuantumState = BasicState<std::complex<double>>;
using RealState = BasicState<double>;

/// Structured walk operator W(beta). Stores the chain and, for each row i,
/// the sparse Householder vector w_i = a_i - e_0 (empty when a_i = e_0).
class WalkOperator {
 public:
  int n() const noexcept { return source_.n(); }
  std::uint64_t dimension() const noexcept { return source_.dimension(); }
  double beta() const noexcept { return source_.beta(); }
  WalkVariant variant() const noexcept { return variant_; }
  const StochasticMatrix& source() const noexcept { return source_; }

  /// Nonzero pattern of w_i.
  std::span<const std::uint32_t> reflection_indices(std::uint64_t i) const {
    return {indices_.data() + offsets_[i], indices_.data() + offsets_[i + 1]};
  }
  std::span<const double> reflection_values(std::uint64_t i) const {
    return {values_.data() + offsets_[i], values_.data() + offsets_[i + 1]};
  }
  /// 2 / |w_i|^2, zero for identity blocks.
  double reflection_scale(std::uint64_t i) const { return scales_[i]; }
  bool block_is_identity(std::uint64_t i) const { return offsets_[i] == offsets_[i + 1]; }

  /// Dense d x d block V_i (tests and diagnostics).
  Eigen::MatrixXd block(std::uint64_t i) const {
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    const auto idx = reflection_indices(i);
    const auto val = reflection_values(i);
    for (std::size_t k = 0; k < idx.size(); ++k) w(idx[k]) = val[k];
    v -= scales_[i] * w * w.transpose();
    return v;
  }

  /// Column form: v[k * stride] <- (V_i v)[k] for a strided slice.
  template <typename T>
  void reflect_strided(std::uint64_t i, T* v, std::uint64_t stride) const {
    const std::size_t begin = offsets_[i], end = offsets_[i + 1];
    if (begin == end) return;
    const std::uint32_t* idx = indices_.data() + begin;
    const double* w = values_.data() + begin;
    const std::size_t len = end - begin;
    T dot{};
    for (std::size_t k = 0; k < len; ++k) dot += w[k] * v[idx[k] * stride];
    const T f = scales_[i] * dot;
    for (std::size_t k = 0; k < len; ++k) v[idx[k] * stride] -= w[k] * f;
  }

  /// v <- V_i v for one second-register slice.
  template <typename T>
  void reflect_block(std::uint64_t i, T* v) const {
    const std::size_t begin = offsets_[i], end = offsets_[i + 1];
    if (begin == end) return;
    const std::uint32_t* idx = indices_.data() + begin;
    const double* w = values_.data() + begin;
    const std::size_t len = end - begin;
    T dot{};
    for (std::size_t k = 0; k < len; ++k) dot += w[k] * v[idx[k]];
    const T f = scales_[i] * dot;
    for (std::size_t k = 0; k < len; ++k) v[idx[k]] -= w[k] * f;
  }

 private:
  friend WalkOperator build_walk(const StochasticMatrix&, WalkVariant);

  StochasticMatrix source_;
  WalkVariant variant_ = WalkVariant::two_reflection;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
  std::vector<double> scales_;
};

/// Completes Eq.-1 style isometry rows into Householder blocks.
inline WalkOperator build_walk(const StochasticMatrix& s, WalkVariant variant = WalkVariant::two_reflection) {
  if (s.n() > kMaxWalkBits)
    throw CapError("walk", "walk operator with n = " + std::to_string(s.n()) + " exceeds cap " +
                               std::to_string(kMaxWalkBits));
  WalkOperator op;
  op.source_ = s;
  op.variant_ = variant;
  const std::uint64_t d = s.dimension();
  op.offsets_.assign(d + 1, 0);
  op.scales_.assign(d, 0.0);
  std::vector<std::pair<std::uint32_t, double>> w;
  for (std::uint64_t i = 0; i < d; ++i) {
    double total = 0.0;
    w.clear();
    bool has_zero = false;
    for (const auto& t : s.row(i)) {
      if (!(t.probability >= 0.0 && t.probability <= 1.0))
        throw DomainError("walk", "row " + std::to_string(i) + " has an entry outside [0, 1]");
      total += t.probability;
      double a = std::sqrt(t.probability);
      if (t.target == 0) {
        has_zero = true;
        a -= 1.0;
      }
      w.emplace_back(static_cast<std::uint32_t>(t.target), a);
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw DomainError("walk", "row " + std::to_string(i) + " is not stochastic (sum = " +
                                    std::to_string(total) + ")");
    if (!has_zero) w.emplace(w.begin(), 0u, -1.0);
    double norm2 = 0.0;
    for (const auto& [j, v] : w) norm2 += v * v;
    if (std::sqrt(norm2) >= 1e-12) {
      for (const auto& [j, v] : w) {
        op.indices_.push_back(j);
        op.values_.push_back(v);
      }
      op.scales_[i] = 2.0 / norm2;
    }
    op.offsets_[i + 1] = op.indices_.size();
  }
  return op;
}

namespace detail {

inline void check_state(const WalkOperator& op, std::uint64_t state_dimension) {
  if (state_dimension != op.dimension())
    throw DomainError("walk", "state dimension " + std::to_string(state_dimension) +
                                  " does not match operator dimension " +
                                  std::to_string(op.dimension()));
}

/// In-place transpose of a d x d row-major matrix, tiled.
template <typename T>
void transpose_square(T* a, std::uint64_t d) {
  constexpr std::uint64_t tile = 32;
  for (std::uint64_t ii = 0; ii < d; ii += tile) {
    const std::uint64_t iend = std::min(ii + tile, d);
    for (std::uint64_t jj = ii; jj < d; jj += tile) {
      const std::uint64_t jend = std::min(jj + tile, d);
      for (std::uint64_t i = ii; i < iend; ++i)
        for (std::uint64_t j = std::max(jj, i + 1); j < jend; ++j) std::swap(a[i * d + j], a[j * d + i]);
    }
  }
}

}  // namespace detail

template <typename T>
void apply_X(const WalkOperator& op, BasicState<T>& state) {
  detail::check_state(op, state.dimension());
  const std::uint64_t d = state.dimension();
  T* a = state.amplitudes().data();
  for (std::uint64_t i = 0; i < d; ++i) op.reflect_block(i, a + i * d);
}

/// Adjoint of X. Each block is a real symmetric reflection, so this applies
/// V_i^T = V_i; kept as its own entry point so the identity is testable.
template <typename T>
void apply_X_dagger(const WalkOperator& op, BasicState<T>& state) {
  detail::check_state(op, state.dimension());
  const std::uint64_t d = state.dimension();
  T* a = state.amplitudes().data();
  for (std::uint64_t i = 0; i < d; ++i) op.reflect_block(i, a + i * d);
}

template <typename T>
void apply_P(BasicState<T>& state) {
  detail::transpose_square(state.amplitudes().data(), state.dimension());
}

template <typename T>
void apply_R(BasicState<T>& state) {
  const std::uint64_t d = state.dimension();
  T* a = state.amplitudes().data();
  for (std::uint64_t i = 0; i < d; ++i) a[i * d] = -a[i * d];
}

/// V_j applied to the first register of every column j,
/// i.e. sum_j V_j (x) |j><j|. Equals P X P.
template <typename T>
void apply_X_columns(const WalkOperator& op, BasicState<T>& state) {
  detail::check_state(op, state.dimension());
  const std::uint64_t d = state.dimension();
  T* a = state.amplitudes().data();
  for (std::uint64_t j = 0; j < d; ++j) op.reflect_strided(j, a + j, d);
}

/// Sign flip on every amplitude with first register 0. Equals P R P.
template <typename T>
void apply_R_first(BasicState<T>& state) {
  T* a = state.amplitudes().data();
  for (std::uint64_t j = 0; j < state.dimension(); ++j) a[j] = -a[j];
}

/// Applies the walk as the literal sequence of X, X^dag, P and R factors.
template <typename T>
void apply_W_factored(const WalkOperator& op, BasicState<T>& state, std::uint64_t times = 1) {
  detail::check_state(op, state.dimension());
  for (std::uint64_t t = 0; t < times; ++t) {
    // Factors are applied right to left.
    if (op.variant() == WalkVariant::two_reflection) {
      apply_R(state);
      apply_X(op, state);
      apply_P(state);
      apply_X_dagger(op, state);
      apply_R(state);
      apply_X(op, state);
      apply_P(state);
      apply_X_dagger(op, state);
    } else {
      apply_R(state);
      apply_X(op, state);
      apply_P(state);
      apply_X_dagger(op, state);
      apply_P(state);
      apply_R(state);
      apply_P(state);
      apply_X(op, state);
      apply_P(state);
      apply_X_dagger(op, state);
    }
  }
}

/// Applies W `times` times.
///
/// For two_reflection the swaps are commuted through the product using
/// P X = X_col P and R P = P R_first, which leaves the transpose-free form
/// W = X X_col R_first X_col X R (X = X^dag for Householder blocks).
template <typename T>
void apply_W(const WalkOperator& op, BasicState<T>& state, std::uint64_t times = 1) {
  detail::check_state(op, state.dimension());
  if (op.variant() != WalkVariant::two_reflection) {
    apply_W_factored(op, state, times);
    return;
  }
  for (std::uint64_t t = 0; t < times; ++t) {
    apply_R(state);
    apply_X(op, state);
    apply_X_columns(op, state);
    apply_R_first(state);
    apply_X_columns(op, state);
    apply_X(op, state);
  }
}

/// sum_i sqrt(pi_i) |i, 0>.
template <typename T = std::complex<double>>
BasicState<T> coherent_gibbs_state(const GibbsDistribution& pi) {
  const auto d = pi.dimension();
  if (d < 2 || !std::has_single_bit(d)) throw DomainError("walk", "distribution length must be 2^n, n >= 1");
  BasicState<T> s(std::countr_zero(d));
  for (std::uint64_t i = 0; i < d; ++i) s(i, 0) = T(std::sqrt(pi.probabilities[i]));
  return s;
}

/// |W psi_pi - psi_pi| for the coherent Gibbs state.
inline double fixed_point_residual(const WalkOperator& op, const GibbsDistribution& pi) {
  if (std::abs(op.beta() - pi.beta) > 1e-12 * std::max(1.0, std::abs(pi.beta)))
    throw DomainError("walk", "operator beta " + std::to_string(op.beta()) +
                                  " does not match distribution beta " + std::to_string(pi.beta));
  const auto psi = coherent_gibbs_state<std::complex<double>>(pi);
  auto out = psi;
  apply_W(op, out);
  double s = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) s += std::norm(out.amplitudes()[k] - psi.amplitudes()[k]);
  return std::sqrt(s);
}

/// Materializes W column by column (verification oracle).
inline Eigen::MatrixXcd dense_walk_matrix(const WalkOperator& op, int max_n = 3) {
  if (op.n() > max_n)
    throw CapError("walk", "dense walk matrix for n = " + std::to_string(op.n()) + " exceeds cap " +
                               std::to_string(max_n));
  const std::uint64_t d = op.dimension();
  const auto dim = static_cast<Eigen::Index>(d * d);
  Eigen::MatrixXcd w(dim, dim);
  for (std::uint64_t c = 0; c < d * d; ++c) {
    auto e = QuantumState::basis(op.n(), c / d, c % d);
    apply_W(op, e);
    for (Eigen::Index r = 0; r < dim; ++r) w(r, static_cast<Eigen::Index>(c)) = e.amplitudes()[static_cast<std::size_t>(r)];
  }
  return w;
}

// ---------------------------------------------------------------------------
// Eigenphases
// ---------------------------------------------------------------------------

enum class SpectrumMethod {
  /// Relevant-subspace diagonalization up to dense_max_n, shortcut above.
  automatic,
  /// Orthonormal basis of the smallest W-invariant subspace containing the
  /// |i, 0> fiber, then a dense eigensolve of W restricted to it.
  relevant_subspace,
  /// Phases 2 arccos |lambda_j| from the discriminant spectrum
  /// (two_reflection only).
  discriminant_shortcut,
};

inline const char* to_string(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::automatic: return "automatic";
    case SpectrumMethod::relevant_subspace: return "relevant_subspace";
    case SpectrumMethod::discriminant_shortcut: return "discriminant_shortcut";
  }
  return "?";
}

struct SpectrumOptions {
  SpectrumMethod method = SpectrumMethod::automatic;
  int dense_max_n = 5;
  /// Phases at or below this are treated as zero when picking phase_gap.
  double zero_tolerance = 1e-7;
  /// Directions of W|i, 0> off the fiber with singular value below this are dropped.
  double rank_tolerance = 1e-7;
  SpectralOptions chain;
};

struct WalkSpectrum {
  double beta = 0.0;
  WalkVariant variant = WalkVariant::two_reflection;
  SpectrumMethod method = SpectrumMethod::relevant_subspace;
  /// |arg| of each eigenvalue on the relevant subspace, ascending.
  std::vector<double> phases;
  /// Smallest phase above zero_tolerance; empty if every phase is zero.
  std::optional<double> phase_gap;
  /// Gap of the underlying chain, lambda_0 - lambda_1.
  double chain_gap = 0.0;
  /// lambda_0 - max_{j >= 1} |lambda_j| of the chain.
  double chain_absolute_gap = 0.0;
  std::size_t subspace_dimension = 0;
  /// max over basis vectors of the component of W b outside the subspace.
  double invariance_residual = 0.0;

  /// phase_gap >= sqrt(chain_gap) - tol.
  bool gap_bound_holds(double tol = 1e-9) const {
    return phase_gap && *phase_gap >= std::sqrt(chain_gap) - tol;
  }
  /// Same bound against the absolute gap, which also covers chains with an
  /// eigenvalue close to -1.
  bool absolute_gap_bound_holds(double tol = 1e-9) const {
    return phase_gap && *phase_gap >= std::sqrt(chain_absolute_gap) - tol;
  }
};

namespace detail {

inline std::optional<double> smallest_nonzero(const std::vector<double>& sorted, double tol) {
  for (double p : sorted)
    if (p > tol) return p;
  return std::nullopt;
}

/// 2 arccos(1 - mu) for mu = 1 - |lambda| in [0, 1], accurate for small mu.
inline double phase_from_distance(double mu) {
  mu = std::clamp(mu, 0.0, 1.0);
  return 4.0 * std::asin(std::sqrt(mu / 2.0));
}

inline WalkSpectrum relevant_subspace_spectrum(const WalkOperator& op, const SpectrumOptions& opt) {
  if (op.n() > opt.dense_max_n)
    throw CapError("walk", "relevant-subspace diagonalization for n = " + std::to_string(op.n()) +
                               " exceeds dense cap " + std::to_string(opt.dense_max_n));
  const std::uint64_t d = op.dimension();
  const auto len = static_cast<Eigen::Index>(d * d);
  auto apply = [&](const Eigen::VectorXd& v) {
    RealState s(op.n());
    std::copy(v.data(), v.data() + len, s.amplitudes().begin());
    apply_W(op, s);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(s.amplitudes().data(), len));
  };
  const auto dd = static_cast<Eigen::Index>(d);
  // Fiber columns |i, 0>, then the part of W|i, 0> orthogonal to the fiber.
  Eigen::MatrixXd image(len, dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(len);
    e(i * dd) = 1.0;
    image.col(i) = apply(e);
    for (Eigen::Index r = 0; r < dd; ++r) image(r * dd, i) = 0.0;
  }
  // SVD rather than sequential Gram-Schmidt: nearly fixed fiber vectors leave
  // clusters of tiny residuals that Gram-Schmidt mixes badly.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(image, Eigen::ComputeThinU);
  Eigen::Index extra = 0;
  while (extra < dd && svd.singularValues()(extra) > opt.rank_tolerance) ++extra;
  const Eigen::Index k = dd + extra;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(len, k);
  for (Eigen::Index i = 0; i < dd; ++i) q(i * dd, i) = 1.0;
  q.rightCols(extra) = svd.matrixU().leftCols(extra);
  for (Eigen::Index r = 0; r < dd; ++r) q.row(r * dd).tail(extra).setZero();
  Eigen::MatrixXd wq(len, k);
  for (Eigen::Index c = 0; c < k; ++c) wq.col(c) = apply(q.col(c));
  const Eigen::MatrixXd m = q.transpose() * wq;

  WalkSpectrum out;
  out.invariance_residual = (wq - q * m).colwise().norm().maxCoeff();
  if (!(out.invariance_residual <= 1e-7))
    throw NumericalError("walk", "relevant subspace is not invariant (residual " +
                                     format_sci(out.invariance_residual) + ")");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  Eigen::VectorXcd ev;
  if (solver.info() == Eigen::Success) {
    ev = solver.eigenvalues();
  } else {
    // The real Schur iteration can stall on nearly reducible chains (very
    // large beta); the complex one is slower but more forgiving.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> fallback(m.cast<std::complex<double>>(), false);
    if (fallback.info() != Eigen::Success)
      throw NumericalError("walk", "eigensolve of the restricted walk did not converge");
    ev = fallback.eigenvalues();
  }
  out.phases.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < ev.size(); ++j) out.phases.push_back(std::abs(std::arg(ev(j))));
  out.subspace_dimension = static_cast<std::size_t>(k);
  out.method = SpectrumMethod::relevant_subspace;
  return out;
}

inline WalkSpectrum shortcut_spectrum(const WalkOperator& op, const SpectralReport& chain,
                                     const SpectrumOptions& opt) {
  if (op.variant() != WalkVariant::two_reflection)
    throw DomainError("walk", "the discriminant shortcut only describes the two_reflection walk");
  WalkSpectrum out;
  for (std::size_t k = 0; k < chain.eigenvalues.size(); ++k) {
    // Pairs below the rank tolerance collapse to a single direction, exactly
    // as in the subspace construction, where W acts on it as +1 or -1.
    const double phi = phase_from_distance(chain.distance_to_unit(k));
    if (std::sin(phi) <= opt.rank_tolerance) {
      out.phases.push_back(phi < std::numbers::pi / 2 ? 0.0 : std::numbers::pi);
    } else {
      out.phases.push_back(phi);
      out.phases.push_back(phi);
    }
  }
  out.subspace_dimension = out.phases.size();
  out.method = SpectrumMethod::discriminant_shortcut;
  return out;
}

}  // namespace detail

inline WalkSpectrum walk_spectrum(const WalkOperator& op, const SpectrumOptions& options = {}) {
  const SpectralReport chain = spectral_report(op.source(), options.chain);
  SpectrumMethod method = options.method;
  if (method == SpectrumMethod::automatic)
    method = op.n() <= options.dense_max_n ? SpectrumMethod::relevant_subspace
                                           : SpectrumMethod::discriminant_shortcut;
  WalkSpectrum out = method == SpectrumMethod::relevant_subspace
                         ? detail::relevant_subspace_spectrum(op, options)
                         : detail::shortcut_spectrum(op, chain, options);
  std::sort(out.phases.begin(), out.phases.end());
  out.beta = op.beta();
  out.variant = op.variant();
  out.chain_gap = chain.gap;
  out.chain_absolute_gap = chain.absolute_gap;
  out.phase_gap = detail::smallest_nonzero(out.phases, options.zero_tolerance);
  return out;
}

/// All eigenphases |arg| of the full dense W, ascending (n <= max_n).
inline std::vector<double> dense_phases(const WalkOperator& op, int max_n = 3) {
  const Eigen::MatrixXcd w = dense_walk_matrix(op, max_n);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(w, false);
  if (solver.info() != Eigen::Success) throw NumericalError("walk", "dense eigensolve did not converge");
  std::vector<double> phases;
  for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j)
    phases.push_back(std::abs(std::arg(solver.eigenvalues()(j))));
  std::sort(phases.begin(), phases.end());
  return phases;
}

// ---------------------------------------------------------------------------
// Dumps
// ---------------------------------------------------------------------------

/// CSV with header beta,phi_0,...,phi_{K-1}; shorter rows are padded with
/// empty fields. Values use 17 significant digits.
inline void write_spectrum_csv(std::span<const WalkSpectrum> spectra, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& s : spectra) width = std::max(width, s.phases.size());
  out << "beta";
  for (std::size_t j = 0; j < width; ++j) out << ",phi_" << j;
  out << '\n';
  char buf[64];
  for (const auto& s : spectra) {
    std::snprintf(buf, sizeof buf, "%.17g", s.beta);
    out << buf;
    for (std::size_t j = 0; j < width; ++j) {
      out << ',';
      if (j < s.phases.size()) {
        std::snprintf(buf, sizeof buf, "%.17g", s.phases[j]);
        out << buf;
      }
    }
    out << '\n';
  }
}

namespace detail {

inline void put_le_double(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline double get_le_double(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw SchemaError("walk", "truncated state file");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= std::uint64_t{bytes[k]} << (8 * k);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

/// Raw dump: d^2 (re, im) pairs of little-endian IEEE-754 float64 in index
/// order, no header.
template <typename T>
void write_state_binary(const BasicState<T>& state, std::ostream& out) {
  for (const T& a : state.amplitudes()) {
    const std::complex<double> c(a);
    detail::put_le_double(out, c.real());
    detail::put_le_double(out, c.imag());
  }
}

inline QuantumState read_state_binary(std::istream& in, int n) {
  QuantumState s(n);
  for (auto& a : s.amplitudes()) {
    const double re = detail::get_le_double(in);
    const double im = detail::get_le_double(in);
    a = {re, im};
  }
  return s;
}

}  // namespace qsalab
