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

// Metropolis-Hastings transition matrices over single-bit-flip neighborhoods,
// Gibbs distributions and chain spectra.
//
// Direction convention: S(i, j) = Pr(sigma_j | sigma_i) is the probability of
// the transition i -> j, rows sum to one, and a distribution evolves by the
// transposed action p'_j = sum_i S(i, j) p_i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"
#include "qsalab/parallel.hpp"

namespace qsalab {

struct Transition {
  std::uint64_t target = 0;
  double probability = 0.0;
};

/// Sparse row-stochastic matrix in compressed-row form. Entries within a row
/// are sorted by target and strictly positive.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  StochasticMatrix(int n, double beta, double laziness, std::vector<std::size_t> offsets,
                   std::vector<Transition> entries)
      : n_(n),
        beta_(beta),
        laziness_(laziness),
        offsets_(std::move(offsets)),
        entries_(std::move(entries)) {}

  int n() const noexcept { return n_; }
  std::uint64_t dimension() const noexcept { return std::uint64_t{1} << n_; }
  double beta() const noexcept { return beta_; }
  double laziness() const noexcept { return laziness_; }

  std::span<const Transition> row(std::uint64_t i) const {
    return {entries_.data() + offsets_[i], entries_.data() + offsets_[i + 1]};
  }

  /// S(i, j), zero when absent.
  double at(std::uint64_t i, std::uint64_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.begin(), r.end(), j,
                                     [](const Transition& t, std::uint64_t v) { return t.target < v; });
    return (it != r.end() && it->target == j) ? it->probability : 0.0;
  }

  std::size_t nonzeros() const noexcept { return entries_.size(); }

  Eigen::MatrixXd dense() const {
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (std::uint64_t i = 0; i < dimension(); ++i)
      for (const auto& t : row(i))
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t.target)) = t.probability;
    return m;
  }

 private:
  int n_ = 0;
  double beta_ = 0.0;
  double laziness_ = 1.0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Transition> entries_;
};

struct MetropolisOptions {
  /// alpha in (0, 1]: the chain used is (1 - alpha) I + alpha S. 1 disables.
  double laziness = 1.0;
};

/// Single-bit-flip Metropolis chain at inverse temperature beta: propose each
/// of the n neighbors with probability 1/n, accept with
/// min(1, exp(-beta (E_j - E_i))), keep the residual on the self-loop.
inline StochasticMatrix metropolis(const ProblemInstance& instance, double beta,
                                   const MetropolisOptions& options = {}) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw DomainError("chains", "inverse temperature must be finite and >= 0");
  const double alpha = options.laziness;
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("chains", "laziness must lie in (0, 1]");

  const int n = instance.n();
  const std::uint64_t d = instance.dimension();
  const double proposal = 1.0 / n;
  std::vector<std::size_t> offsets(d + 1, 0);
  std::vector<Transition> entries;
  entries.reserve(d * static_cast<std::size_t>(n + 1));
  std::vector<Transition> row;
  row.reserve(static_cast<std::size_t>(n + 1));

  for (std::uint64_t i = 0; i < d; ++i) {
    row.clear();
    const double ei = instance.energy(i);
    double moved = 0.0;
    for (int b = 0; b < n; ++b) {
      const std::uint64_t j = i ^ (std::uint64_t{1} << b);
      const double de = instance.energy(j) - ei;
      const double accept = de <= 0.0 ? 1.0 : std::exp(-beta * de);
      const double p = alpha * proposal * accept;
      if (p > 0.0) {
        row.push_back({j, p});
        moved += p;
      }
    }
    const double stay = 1.0 - moved;
    if (stay > 0.0) row.push_back({i, stay});
    std::sort(row.begin(), row.end(),
              [](const Transition& a, const Transition& b) { return a.target < b.target; });
    entries.insert(entries.end(), row.begin(), row.end());
    offsets[i + 1] = entries.size();
  }
  return StochasticMatrix(n, beta, alpha, std::move(offsets), std::move(entries));
}

struct GibbsDistribution {
  double beta = 0.0;
  std::vector<double> probabilities;

  std::uint64_t dimension() const noexcept { return probabilities.size(); }
};

/// pi(sigma) = exp(-beta (E(sigma) - E_min)) / Z.
inline GibbsDistribution gibbs(const ProblemInstance& instance, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw DomainError("chains", "inverse temperature must be finite and >= 0");
  GibbsDistribution g;
  g.beta = beta;
  g.probabilities.resize(instance.dimension());
  const double e0 = instance.min_energy();
  double z = 0.0;
  for (std::uint64_t i = 0; i < instance.dimension(); ++i) {
    g.probabilities[i] = std::exp(-beta * (instance.energy(i) - e0));
    z += g.probabilities[i];
  }
  for (double& p : g.probabilities) p /= z;
  return g;
}

/// Probability mass a distribution puts on the optimal set.
inline double optimal_mass(const ProblemInstance& instance, std::span<const double> p) {
  double s = 0.0;
  for (const auto& c : instance.optimal_set()) s += p[c.index];
  return s;
}

/// max over (i, j) of |pi_i S_ij - pi_j S_ji|. A beta mismatch between S and
/// pi is permitted and shows up as a positive residual.
inline double detailed_balance_residual(const StochasticMatrix& s, const GibbsDistribution& pi) {
  if (s.dimension() != pi.dimension())
    throw DomainError("chains", "dimension mismatch between matrix (" +
                                    std::to_string(s.dimension()) + ") and distribution (" +
                                    std::to_string(pi.dimension()) + ")");
  double worst = 0.0;
  for (std::uint64_t i = 0; i < s.dimension(); ++i) {
    for (const auto& t : s.row(i)) {
      const double forward = pi.probabilities[i] * t.probability;
      const double backward = pi.probabilities[t.target] * s.at(t.target, i);
      worst = std::max(worst, std::abs(forward - backward));
    }
  }
  return worst;
}

/// Symmetric sparse matrix (full storage, both triangles) in compressed rows.
struct SymmetricSparse {
  std::uint64_t d = 0;
  std::vector<std::size_t> offsets;
  std::vector<Transition> entries;

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::uint64_t i = 0; i < d; ++i)
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(entries[k].target)) =
            entries[k].probability;
    return m;
  }
};

/// D_ij = sqrt(S_ij S_ji). Similar to S whenever S is reversible.
inline SymmetricSparse discriminant(const StochasticMatrix& s) {
  SymmetricSparse out;
  out.d = s.dimension();
  out.offsets.assign(out.d + 1, 0);
  for (std::uint64_t i = 0; i < out.d; ++i) {
    for (const auto& t : s.row(i)) {
      const double v = std::sqrt(t.probability * s.at(t.target, i));
      if (v > 0.0) out.entries.push_back({t.target, v});
    }
    out.offsets[i + 1] = out.entries.size();
  }
  return out;
}

struct SpectralReport {
  double beta = 0.0;
  std::vector<double> eigenvalues;  // descending
  /// 1 - lambda_k and 1 + lambda_k. Near the ends of the spectrum these keep
  /// full relative accuracy, which 1 - eigenvalues[k] would not.
  std::vector<double> one_minus;
  std::vector<double> one_plus;
  double gap = 0.0;  // lambda_0 - lambda_1
  /// lambda_0 - max_{j >= 1} |lambda_j| (clamped at 0); smaller than gap when an
  /// eigenvalue sits near -1.
  double absolute_gap = 0.0;

  /// 1 - |lambda_k|, accurate near |lambda_k| = 1.
  double distance_to_unit(std::size_t k) const {
    return eigenvalues[k] >= 0.0 ? one_minus[k] : one_plus[k];
  }
};

struct SpectralOptions {
  /// Dense symmetric eigensolves are refused above this dimension.
  std::uint64_t max_dimension = 1u << 10;
  /// Eigenvalues within this distance of +1 or -1 are recomputed from the
  /// factored forms of I - D and I + D.
  double refine_window = 1e-3;
};

namespace detail {

// Ritz values of x^T (I -/+ D) x on the span of `v`, with the quadratic form
// written as a sum of squares so that tiny values keep relative accuracy:
//   x^T (I - D) x = sum_{i<j} (sqrt(S_ij) x_i - sqrt(S_ji) x_j)^2
//   x^T (I + D) x = sum_{i<j} (sqrt(S_ij) x_i + sqrt(S_ji) x_j)^2 + sum_i 2 S_ii x_i^2
inline Eigen::VectorXd factored_ritz_values(const StochasticMatrix& s, const Eigen::MatrixXd& v, double sign) {
  const auto d = static_cast<Eigen::Index>(s.dimension());
  std::vector<double> rows;
  std::vector<Eigen::Index> heads, tails;
  std::vector<double> wh, wt;
  for (Eigen::Index i = 0; i < d; ++i)
    for (const auto& t : s.row(static_cast<std::uint64_t>(i))) {
      const auto j = static_cast<Eigen::Index>(t.target);
      if (j <= i) continue;
      heads.push_back(i);
      tails.push_back(j);
      wh.push_back(std::sqrt(t.probability));
      wt.push_back(sign * std::sqrt(s.at(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i))));
    }
  const auto edges = static_cast<Eigen::Index>(heads.size());
  const Eigen::Index extra = sign > 0.0 ? d : 0;
  Eigen::MatrixXd b(edges + extra, v.cols());
  for (Eigen::Index e = 0; e < edges; ++e)
    b.row(e) = wh[static_cast<std::size_t>(e)] * v.row(heads[static_cast<std::size_t>(e)]) +
               wt[static_cast<std::size_t>(e)] * v.row(tails[static_cast<std::size_t>(e)]);
  for (Eigen::Index i = 0; i < extra; ++i)
    b.row(edges + i) = std::sqrt(2.0 * s.at(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(i))) * v.row(i);
  // Singular values of the tall factor rather than eigenvalues of b^T b.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  Eigen::VectorXd mu = svd.singularValues().cwiseAbs2();
  std::sort(mu.data(), mu.data() + mu.size());
  return mu;
}

}  // namespace detail

/// Eigenvalues of S via its symmetric discriminant.
inline SpectralReport spectral_report(const StochasticMatrix& s, const SpectralOptions& options = {}) {
  if (s.dimension() > options.max_dimension)
    throw CapError("chains", "dense eigensolve of dimension " + std::to_string(s.dimension()) +
                                 " exceeds cap " + std::to_string(options.max_dimension));
  const Eigen::MatrixXd dm = discriminant(s).dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dm, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericalError("chains", "symmetric eigensolve did not converge at beta = " +
                                       std::to_string(s.beta()) + " (d = " +
                                       std::to_string(s.dimension()) + ")");
  SpectralReport r;
  r.beta = s.beta();
  const auto& ev = solver.eigenvalues();  // ascending
  const Eigen::Index d = ev.size();
  r.eigenvalues.assign(ev.data(), ev.data() + d);
  std::reverse(r.eigenvalues.begin(), r.eigenvalues.end());
  r.one_minus.resize(static_cast<std::size_t>(d));
  r.one_plus.resize(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
    r.one_minus[k] = 1.0 - r.eigenvalues[k];
    r.one_plus[k] = 1.0 + r.eigenvalues[k];
  }
  // Top cluster: descending positions [0, top).
  Eigen::Index top = 0;
  while (top < d && r.one_minus[static_cast<std::size_t>(top)] < options.refine_window) ++top;
  if (top > 0) {
    const Eigen::VectorXd mu = detail::factored_ritz_values(s, solver.eigenvectors().rightCols(top), -1.0);
    for (Eigen::Index k = 0; k < top; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      r.one_minus[kk] = mu(k);
      r.eigenvalues[kk] = 1.0 - mu(k);
      r.one_plus[kk] = 2.0 - mu(k);
    }
  }
  // Bottom cluster: ascending positions [0, bottom), i.e. the last descending ones.
  Eigen::Index bottom = 0;
  while (bottom < d - top && r.one_plus[static_cast<std::size_t>(d - 1 - bottom)] < options.refine_window) ++bottom;
  if (bottom > 0) {
    const Eigen::VectorXd mu = detail::factored_ritz_values(s, solver.eigenvectors().leftCols(bottom), 1.0);
    for (Eigen::Index k = 0; k < bottom; ++k) {
      const auto kk = static_cast<std::size_t>(d - 1 - k);
      r.one_plus[kk] = mu(k);
      r.eigenvalues[kk] = mu(k) - 1.0;
      r.one_minus[kk] = 2.0 - mu(k);
    }
  }
  if (d > 1) {
    r.gap = r.one_minus[1] - r.one_minus[0];
    const double far = std::min(r.one_minus[1], r.one_plus.back());
    r.absolute_gap = std::max(0.0, far - r.one_minus[0]);
  }
  return r;
}

struct ScheduleGapOptions {
  MetropolisOptions chain;
  SpectralOptions spectral;
  unsigned threads = 1;
};

/// min over the grid of the Metropolis chain gap.
inline double schedule_gap(const ProblemInstance& instance, std::span<const double> betas,
                           const ScheduleGapOptions& options = {}) {
  if (betas.empty()) throw DomainError("chains", "schedule_gap needs a non-empty beta list");
  std::vector<double> gaps(betas.size());
  parallel_for(betas.size(), options.threads, [&](std::size_t k) {
    gaps[k] = spectral_report(metropolis(instance, betas[k], options.chain), options.spectral).gap;
  });
  return *std::min_element(gaps.begin(), gaps.end());
}

/// One step of the chain applied to a distribution: p'_j = sum_i S_ij p_i.
inline std::vector<double> evolve_distribution(const StochasticMatrix& s, std::span<const double> p) {
  if (p.size() != s.dimension())
    throw DomainError("chains", "distribution has " + std::to_string(p.size()) +
                                    " entries, matrix dimension is " + std::to_string(s.dimension()));
  std::vector<double> out(p.size(), 0.0);
  for (std::uint64_t i = 0; i < s.dimension(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    for (const auto& t : s.row(i)) out[t.target] += t.probability * pi;
  }
  return out;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("chains", "total variation of unequal-length vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// Matrix dumps. Triplets are emitted in row-major order, values with 17
// significant digits.

inline void write_triplets_csv(const StochasticMatrix& s, std::ostream& out) {
  out << "i,j,value\n";
  char buf[64];
  for (std::uint64_t i = 0; i < s.dimension(); ++i)
    for (const auto& t : s.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", t.probability);
      out << i << ',' << t.target << ',' << buf << '\n';
    }
}

inline nlohmann::json triplets_json(const StochasticMatrix& s) {
  nlohmann::json doc;
  doc["n"] = s.n();
  doc["d"] = s.dimension();
  doc["beta"] = s.beta();
  doc["laziness"] = s.laziness();
  auto entries = nlohmann::json::array();
  for (std::uint64_t i = 0; i < s.dimension(); ++i)
    for (const auto& t : s.row(i)) entries.push_back({i, t.target, t.probability});
  doc["entries"] = std::move(entries);
  return doc;
}

}  // namespace qsalab
