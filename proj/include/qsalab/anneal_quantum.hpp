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

// Quantum simulated annealing by exact state-vector simulation: schedule
// constants, randomized walk powers t_k, final measurement of the first
// register.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsalab/chains.hpp"
#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"
#include "qsalab/rng.hpp"
#include "qsalab/terminal_beta.hpp"
#include "qsalab/walk.hpp"

namespace qsalab {

struct QsaOptions {
  /// Number of unif[0, Q-1] draws summed into each t_k.
  std::uint64_t randomization_rounds = 1;
  BetaFormula beta_formula = BetaFormula::inverse_gap;
  /// User-supplied lower bound on the chain gap; computed over the schedule
  /// grid when empty.
  std::optional<double> delta;
  /// Largest n the engine will allocate a state for.
  int max_n = kDefaultWalkBits;
  ScheduleGapOptions gap;
};

struct QsaSchedule {
  std::vector<double> betas;  // beta_1 .. beta_m
  double delta_beta = 0.0;
  std::uint64_t m = 0;
  double beta_m = 0.0;
  bool beta_adjusted = false;
  double epsilon = 0.0;
  std::uint64_t q = 0;
  double delta_used = 0.0;
  bool delta_user_supplied = false;
  std::uint64_t randomization_rounds = 1;
  double e_max = 0.0;
  BetaFormula beta_formula = BetaFormula::inverse_gap;
};

/// Q = ceil(2 pi / sqrt(Delta)).
inline std::uint64_t walk_power_range(double delta) {
  if (!(delta > 0.0)) throw DomainError("anneal_quantum", "gap bound must be positive");
  return static_cast<std::uint64_t>(std::ceil(2.0 * std::numbers::pi / std::sqrt(delta)));
}

/// Schedule for an explicit gap bound.
inline QsaSchedule build_qsa_schedule(const ProblemInstance& instance, double delta, double epsilon,
                                      const QsaOptions& options = {}) {
  if (!(delta > 0.0 && delta <= 2.0))
    throw DomainError("anneal_quantum", "spectral gap bound must lie in (0, 2], got " +
                                            std::to_string(delta));
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("anneal_quantum", "epsilon must lie in (0, 1)");
  if (options.randomization_rounds < 1)
    throw DomainError("anneal_quantum", "randomization_rounds must be >= 1");
  const auto tb = terminal_beta(instance, epsilon, options.beta_formula);
  QsaSchedule s;
  s.epsilon = epsilon;
  s.beta_m = tb.value;
  s.beta_adjusted = tb.adjusted;
  s.beta_formula = options.beta_formula;
  s.e_max = instance.e_max();
  s.delta_beta = epsilon / (2.0 * instance.e_max());
  s.m = increments_to(s.beta_m, s.delta_beta);
  s.betas = beta_ladder(s.beta_m, s.delta_beta, s.m);
  s.delta_used = delta;
  s.delta_user_supplied = true;
  s.q = walk_power_range(delta);
  s.randomization_rounds = options.randomization_rounds;
  return s;
}

/// Schedule whose gap bound is options.delta if given, otherwise the minimum
/// chain gap over {0, beta_1, ..., beta_m}.
inline QsaSchedule build_qsa_schedule(const ProblemInstance& instance, double epsilon,
                                      const QsaOptions& options = {}) {
  if (options.delta) return build_qsa_schedule(instance, *options.delta, epsilon, options);
  // Ladder first (delta only enters Q), then the gap over it.
  QsaSchedule s = build_qsa_schedule(instance, 1.0, epsilon, options);
  std::vector<double> grid;
  grid.reserve(s.betas.size() + 1);
  grid.push_back(0.0);
  grid.insert(grid.end(), s.betas.begin(), s.betas.end());
  s.delta_used = schedule_gap(instance, grid, options.gap);
  if (!(s.delta_used > 0.0))
    throw NumericalError("anneal_quantum", "chain gap over the schedule grid is not positive");
  s.delta_user_supplied = false;
  s.q = walk_power_range(s.delta_used);
  return s;
}

/// Expected number of walk applications, m r (Q - 1) / 2.
inline double average_cost(const QsaSchedule& s) {
  return static_cast<double>(s.m) * static_cast<double>(s.randomization_rounds) *
         static_cast<double>(s.q - 1) / 2.0;
}

/// sum_i |i, 0> / sqrt(d).
template <typename T = std::complex<double>>
BasicState<T> initial_state(int n, int max_n = kDefaultWalkBits) {
  if (n > max_n)
    throw CapError("anneal_quantum", "n = " + std::to_string(n) + " exceeds the state cap " +
                                         std::to_string(max_n) + " (" +
                                         std::to_string(state_bytes<T>(n) >> 20) + " MiB)");
  BasicState<T> s(n);
  // Same rounding as coherent_gibbs_state at beta = 0.
  const double a = std::sqrt(1.0 / static_cast<double>(s.dimension()));
  for (std::uint64_t i = 0; i < s.dimension(); ++i) s(i, 0) = T(a);
  return s;
}

struct QsaRunTrace {
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> t;
  std::uint64_t total_applications = 0;
  /// Set when the run completed (not aborted).
  std::optional<Configuration> measured;
  std::optional<double> exact_success;
  double final_norm = 0.0;
  /// True when sum t_k exceeded the requested cost cutoff; no evolution ran.
  bool aborted = false;
};

struct QsaRunOptions {
  bool compute_exact = true;
  /// Abort before evolving if sum t_k exceeds this.
  std::optional<std::uint64_t> cost_cutoff;
};

/// Walk operators for every temperature of a schedule, built once and shared
/// by all seeds.
class QsaRunner {
 public:
  QsaRunner(const ProblemInstance& instance, QsaSchedule schedule,
            WalkVariant variant = WalkVariant::two_reflection, int max_n = kDefaultWalkBits)
      : instance_(&instance), schedule_(std::move(schedule)), variant_(variant), max_n_(max_n) {
    if (instance.n() > max_n)
      throw CapError("anneal_quantum", "n = " + std::to_string(instance.n()) +
                                           " exceeds the state cap " + std::to_string(max_n));
    if (schedule_.q < 1 || schedule_.betas.size() != schedule_.m)
      throw DomainError("anneal_quantum", "invalid schedule");
    walks_.reserve(schedule_.betas.size());
    for (double beta : schedule_.betas) walks_.push_back(build_walk(metropolis(instance, beta), variant));
  }

  const QsaSchedule& schedule() const noexcept { return schedule_; }
  WalkVariant variant() const noexcept { return variant_; }

  /// Draws t_1..t_m from the seed's stream, evolves, then measures the first
  /// register with the next draw of the same stream.
  QsaRunTrace run(std::uint64_t seed, const QsaRunOptions& options = {}) const {
    QsaRunTrace trace;
    trace.seed = seed;
    Rng rng(seed);
    trace.t.resize(schedule_.m);
    for (auto& tk : trace.t) {
      tk = 0;
      for (std::uint64_t r = 0; r < schedule_.randomization_rounds; ++r) tk += rng.uniform_int(schedule_.q);
      trace.total_applications += tk;
    }
    if (options.cost_cutoff && trace.total_applications > *options.cost_cutoff) {
      trace.aborted = true;
      return trace;
    }
    auto state = initial_state<double>(instance_->n(), max_n_);
    for (std::size_t k = 0; k < walks_.size(); ++k) apply_W(walks_[k], state, trace.t[k]);
    trace.final_norm = state.norm();

    const auto marginals = state.first_register_marginals();
    if (options.compute_exact) trace.exact_success = optimal_mass(*instance_, marginals);
    double total = 0.0;
    for (double p : marginals) total += p;
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    std::uint64_t pick = marginals.size() - 1;
    for (std::uint64_t i = 0; i < marginals.size(); ++i) {
      acc += marginals[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    trace.measured = Configuration{pick};
    return trace;
  }

 private:
  const ProblemInstance* instance_;
  QsaSchedule schedule_;
  WalkVariant variant_;
  int max_n_;
  std::vector<WalkOperator> walks_;
};

inline QsaRunTrace run_qsa(const ProblemInstance& instance, const QsaSchedule& schedule,
                           std::uint64_t seed, WalkVariant variant = WalkVariant::two_reflection,
                           int max_n = kDefaultWalkBits) {
  return QsaRunner(instance, schedule, variant, max_n).run(seed);
}

/// Mass of the final state on the optimal set, without sampling noise.
inline double exact_success_probability(const ProblemInstance& instance, const QsaSchedule& schedule,
                                        std::uint64_t seed,
                                        WalkVariant variant = WalkVariant::two_reflection,
                                        int max_n = kDefaultWalkBits) {
  return *QsaRunner(instance, schedule, variant, max_n).run(seed).exact_success;
}

struct RepeatOptions {
  /// Runs whose sum of t_k exceeds c_markov * average_cost are aborted.
  double c_markov = 4.0;
  WalkVariant variant = WalkVariant::two_reflection;
  QsaOptions qsa;
  /// Aborted attempts allowed per round before giving up.
  std::uint64_t max_aborts_per_round = 16;
};

struct RepeatResult {
  Configuration best;
  double best_energy = 0.0;
  std::uint64_t rounds_used = 0;
  /// True when `best` attains the known minimum energy.
  bool certified = false;
  std::uint64_t aborted_runs = 0;
  std::uint64_t attempts = 0;
};

/// Repeats QSA at a fixed base error until a configuration of minimum energy
/// is measured or max_rounds completed runs have been spent.
inline RepeatResult repeat_until_success(const ProblemInstance& instance, double epsilon0,
                                         std::uint64_t max_rounds, std::uint64_t seed,
                                         const RepeatOptions& options = {}) {
  if (max_rounds < 1) throw DomainError("anneal_quantum", "max_rounds must be >= 1");
  if (!(options.c_markov > 0.0)) throw DomainError("anneal_quantum", "c_markov must be positive");
  const QsaSchedule schedule = build_qsa_schedule(instance, epsilon0, options.qsa);
  const QsaRunner runner(instance, schedule, options.variant, options.qsa.max_n);
  QsaRunOptions run_options;
  run_options.compute_exact = false;
  run_options.cost_cutoff = static_cast<std::uint64_t>(std::floor(options.c_markov * average_cost(schedule)));

  RepeatResult out;
  out.best_energy = std::numeric_limits<double>::infinity();
  const double target = instance.min_energy() + tie_tolerance(instance.e_max());
  const std::uint64_t max_attempts = max_rounds * (1 + options.max_aborts_per_round);
  while (out.rounds_used < max_rounds && out.attempts < max_attempts) {
    const auto trace = runner.run(derive_seed(seed, out.attempts), run_options);
    ++out.attempts;
    if (trace.aborted) {
      ++out.aborted_runs;
      continue;
    }
    ++out.rounds_used;
    const double e = instance.energy(trace.measured->index);
    if (e < out.best_energy) {
      out.best_energy = e;
      out.best = *trace.measured;
    }
    if (e <= target) {
      out.certified = true;
      break;
    }
  }
  return out;
}

inline nlohmann::json to_json(const QsaSchedule& s) {
  return {{"epsilon", s.epsilon},
          {"delta", s.delta_used},
          {"delta_user_supplied", s.delta_user_supplied},
          {"Q", s.q},
          {"m", s.m},
          {"r", s.randomization_rounds},
          {"delta_beta", s.delta_beta},
          {"beta_m", s.beta_m},
          {"adjusted_beta_m", s.beta_adjusted},
          {"beta_formula", to_string(s.beta_formula)},
          {"e_max", s.e_max},
          {"average_cost", average_cost(s)}};
}

/// Trace record. With full_tk the t_k list is embedded, otherwise a
/// {count, sum, min, max} summary.
inline nlohmann::json to_json(const QsaRunTrace& t, const QsaSchedule& s, WalkVariant variant,
                              bool full_tk = true) {
  nlohmann::json j;
  j["seed"] = t.seed;
  j["epsilon"] = s.epsilon;
  j["delta"] = s.delta_used;
  j["Q"] = s.q;
  j["m"] = s.m;
  j["r"] = s.randomization_rounds;
  if (full_tk) {
    j["t_k"] = t.t;
  } else {
    std::uint64_t lo = t.t.empty() ? 0 : t.t[0], hi = lo;
    for (auto v : t.t) lo = std::min(lo, v), hi = std::max(hi, v);
    j["t_k_summary"] = {{"count", t.t.size()}, {"sum", t.total_applications}, {"min", lo}, {"max", hi}};
  }
  j["total_applications"] = t.total_applications;
  j["measured_config"] = t.measured ? nlohmann::json(t.measured->index) : nlohmann::json(nullptr);
  if (t.exact_success) j["exact_success"] = *t.exact_success;
  j["walk_variant"] = to_string(variant);
  j["beta_m"] = s.beta_m;
  j["adjusted_beta_m"] = s.beta_adjusted;
  j["aborted"] = t.aborted;
  return j;
}

}  // namespace qsalab
