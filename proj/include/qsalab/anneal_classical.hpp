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

// Classical simulated annealing baseline: the schedule, Monte Carlo
// trajectories and exact propagation of the full distribution.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsalab/chains.hpp"
#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"
#include "qsalab/rng.hpp"
#include "qsalab/terminal_beta.hpp"

namespace qsalab {

struct SaOptions {
  /// Scale of the temperature increment: delta_beta = c_sa * eps * Delta / (2 E_max).
  double c_sa = 1.0;
  std::uint64_t steps_per_temperature = 1;
  double laziness = 1.0;
  BetaFormula beta_formula = BetaFormula::inverse_gap;
};

/// beta_0 = 0 < beta_1 < ... < beta_m = beta_m with constant increments
/// (the final one may be short). Betas are produced on demand since m grows
/// like 1 / Delta.
struct SaSchedule {
  double delta_beta = 0.0;
  std::uint64_t m = 0;
  double beta_m = 0.0;
  bool beta_adjusted = false;
  double epsilon = 0.0;
  double delta_used = 0.0;
  double c_sa = 1.0;
  std::uint64_t steps_per_temperature = 1;
  double laziness = 1.0;
  /// Set for constant-temperature schedules: every step runs at beta_m.
  bool constant = false;

  /// beta_k for k in [0, m].
  double beta(std::uint64_t k) const {
    if (k == 0) return constant ? beta_m : 0.0;
    if (constant || k >= m) return beta_m;
    return std::min(static_cast<double>(k) * delta_beta, beta_m);
  }
};

inline SaSchedule build_sa_schedule(const ProblemInstance& instance, double delta, double epsilon,
                                    const SaOptions& options = {}) {
  if (!(delta > 0.0 && delta <= 2.0))
    throw DomainError("anneal_classical", "spectral gap bound must lie in (0, 2], got " +
                                              std::to_string(delta));
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("anneal_classical", "epsilon must lie in (0, 1)");
  if (!(options.c_sa > 0.0)) throw DomainError("anneal_classical", "c_sa must be positive");
  if (options.steps_per_temperature < 1)
    throw DomainError("anneal_classical", "steps_per_temperature must be >= 1");
  const auto tb = terminal_beta(instance, epsilon, options.beta_formula);
  SaSchedule s;
  s.epsilon = epsilon;
  s.delta_used = delta;
  s.c_sa = options.c_sa;
  s.steps_per_temperature = options.steps_per_temperature;
  s.laziness = options.laziness;
  s.beta_m = tb.value;
  s.beta_adjusted = tb.adjusted;
  s.delta_beta = options.c_sa * epsilon * delta / (2.0 * instance.e_max());
  s.m = increments_to(s.beta_m, s.delta_beta);
  return s;
}

/// Constant-temperature schedule with m steps at `beta`; used for
/// stationarity checks.
inline SaSchedule constant_sa_schedule(double beta, std::uint64_t m) {
  SaSchedule s;
  s.m = m;
  s.beta_m = beta;
  s.constant = true;
  return s;
}

/// Number of transition-rule applications of the schedule.
inline std::uint64_t sa_cost(const SaSchedule& schedule) {
  return schedule.m * schedule.steps_per_temperature;
}

/// One Monte Carlo trajectory: uniform start, one Metropolis step per
/// temperature (times steps_per_temperature), returns the last configuration.
inline Configuration run_sa_chain(const ProblemInstance& instance, const SaSchedule& schedule,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const int n = instance.n();
  const auto energies = instance.energies();
  std::uint64_t x = rng.uniform_int(instance.dimension());
  const bool lazy = schedule.laziness < 1.0;
  for (std::uint64_t k = 1; k <= schedule.m; ++k) {
    const double beta = schedule.beta(k);
    for (std::uint64_t s = 0; s < schedule.steps_per_temperature; ++s) {
      if (lazy && rng.uniform01() >= schedule.laziness) continue;
      const std::uint64_t y = x ^ (std::uint64_t{1} << rng.uniform_int(static_cast<std::uint64_t>(n)));
      const double de = energies[y] - energies[x];
      if (de <= 0.0 || rng.uniform01() < std::exp(-beta * de)) x = y;
    }
  }
  return {x};
}

/// Applies single-bit-flip Metropolis steps to a dense distribution without
/// materializing the matrix. Arithmetic per row matches `metropolis`.
class MetropolisKernel {
 public:
  explicit MetropolisKernel(const ProblemInstance& instance)
      : n_(instance.n()), d_(instance.dimension()) {
    const auto e = instance.energies();
    uphill_.resize(d_ * static_cast<std::size_t>(n_));
    std::vector<double> raw;
    for (std::uint64_t i = 0; i < d_; ++i)
      for (int b = 0; b < n_; ++b) {
        const double de = e[i ^ (std::uint64_t{1} << b)] - e[i];
        if (de > 0.0) raw.push_back(de);
      }
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    rises_ = raw;
    for (std::uint64_t i = 0; i < d_; ++i)
      for (int b = 0; b < n_; ++b) {
        const double de = e[i ^ (std::uint64_t{1} << b)] - e[i];
        std::int64_t idx = -1;
        if (de > 0.0)
          idx = std::lower_bound(rises_.begin(), rises_.end(), de) - rises_.begin();
        uphill_[i * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)] = idx;
      }
    accept_.resize(rises_.size());
  }

  /// out = p pushed through S(beta). `out` is overwritten.
  void step(double beta, double laziness, std::span<const double> p, std::span<double> out) {
    for (std::size_t u = 0; u < rises_.size(); ++u) accept_[u] = std::exp(-beta * rises_[u]);
    std::fill(out.begin(), out.end(), 0.0);
    const double proposal = 1.0 / n_;
    for (std::uint64_t i = 0; i < d_; ++i) {
      const double pi = p[i];
      const std::int64_t* up = uphill_.data() + i * static_cast<std::size_t>(n_);
      double moved = 0.0;
      for (int b = 0; b < n_; ++b) {
        const double a = up[b] < 0 ? 1.0 : accept_[static_cast<std::size_t>(up[b])];
        const double q = laziness * proposal * a;
        if (q > 0.0) {
          out[i ^ (std::uint64_t{1} << b)] += q * pi;
          moved += q;
        }
      }
      const double stay = 1.0 - moved;
      if (stay > 0.0) out[i] += stay * pi;
    }
  }

 private:
  int n_;
  std::uint64_t d_;
  std::vector<std::int64_t> uphill_;
  std::vector<double> rises_;
  std::vector<double> accept_;
};

struct SaPropagation {
  std::vector<double> distribution;
  double tv_to_gibbs = 0.0;
  double success_probability = 0.0;
};

struct PropagationOptions {
  std::uint64_t max_dimension = std::uint64_t{1} << 20;
};

/// Exact distribution after the schedule, starting from `initial` (uniform
/// when empty), with its total-variation distance to pi_{beta_m} and its mass
/// on the optimal set.
inline SaPropagation propagate_exact(const ProblemInstance& instance, const SaSchedule& schedule,
                                     std::span<const double> initial = {},
                                     const PropagationOptions& options = {}) {
  const std::uint64_t d = instance.dimension();
  if (d > options.max_dimension)
    throw CapError("anneal_classical", "exact propagation of d = " + std::to_string(d) +
                                           " exceeds cap " + std::to_string(options.max_dimension));
  std::vector<double> p;
  if (initial.empty()) {
    p.assign(d, 1.0 / static_cast<double>(d));
  } else {
    if (initial.size() != d) throw DomainError("anneal_classical", "initial distribution has wrong length");
    p.assign(initial.begin(), initial.end());
  }
  std::vector<double> next(d);
  MetropolisKernel kernel(instance);
  for (std::uint64_t k = 1; k <= schedule.m; ++k) {
    const double beta = schedule.beta(k);
    for (std::uint64_t s = 0; s < schedule.steps_per_temperature; ++s) {
      kernel.step(beta, schedule.laziness, p, next);
      p.swap(next);
    }
  }
  SaPropagation out;
  const auto target = gibbs(instance, schedule.beta_m);
  out.tv_to_gibbs = total_variation(p, target.probabilities);
  out.success_probability = optimal_mass(instance, p);
  out.distribution = std::move(p);
  return out;
}

inline nlohmann::json to_json(const SaSchedule& s) {
  return {{"delta_beta", s.delta_beta},   {"m", s.m},
          {"beta_m", s.beta_m},           {"adjusted_beta_m", s.beta_adjusted},
          {"epsilon", s.epsilon},         {"delta", s.delta_used},
          {"c_sa", s.c_sa},               {"steps_per_temperature", s.steps_per_temperature},
          {"laziness", s.laziness},       {"cost", sa_cost(s)}};
}

}  // namespace qsalab
