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

#include <cmath>
#include <string>

#include "qsalab/chains.hpp"
#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"

namespace qsalab {

/// Closed form used for the final inverse temperature.
enum class BetaFormula {
  /// (2 / gamma) log(2 sqrt(d) / epsilon). Default.
  inverse_gap,
  /// (gamma / 2) log(2 sqrt(d) / epsilon), kept for comparison.
  gap_times_log,
};

inline const char* to_string(BetaFormula f) {
  return f == BetaFormula::inverse_gap ? "inverse_gap" : "gap_times_log";
}

struct TerminalBeta {
  double value = 0.0;
  /// Closed-form value before any adjustment.
  double formula_value = 0.0;
  /// True when the closed form missed the Gibbs-mass target and was raised.
  bool adjusted = false;
  /// Gibbs mass on the optimal set at `value`.
  double optimal_mass = 0.0;
  BetaFormula formula = BetaFormula::inverse_gap;
};

/// Final inverse temperature of both annealing schedules. The result always
/// satisfies gibbs(beta).mass(S0) >= 1 - epsilon / 2; if the closed form does
/// not, beta is raised by factors of 1.25 until it does.
inline TerminalBeta terminal_beta(const ProblemInstance& instance, double epsilon,
                                  BetaFormula formula = BetaFormula::inverse_gap) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("anneal_quantum", "epsilon must lie in (0, 1)");
  const double d = static_cast<double>(instance.dimension());
  const double log_term = std::log(2.0 * std::sqrt(d) / epsilon);
  const double gamma = instance.gamma();

  TerminalBeta out;
  out.formula = formula;
  out.formula_value = formula == BetaFormula::inverse_gap ? (2.0 / gamma) * log_term
                                                          : (gamma / 2.0) * log_term;
  out.value = out.formula_value;
  const double target = 1.0 - epsilon / 2.0;
  out.optimal_mass = optimal_mass(instance, gibbs(instance, out.value).probabilities);
  int guard = 0;
  while (out.optimal_mass < target) {
    if (++guard > 400)
      throw NumericalError("anneal_quantum", "terminal beta did not reach the Gibbs mass target");
    out.value = out.value > 0.0 ? out.value * 1.25 : 1.0 / gamma;
    out.adjusted = true;
    out.optimal_mass = optimal_mass(instance, gibbs(instance, out.value).probabilities);
  }
  return out;
}

/// Number of schedule increments needed to reach beta_m in steps of
/// delta_beta; the last increment may be short.
inline std::uint64_t increments_to(double beta_m, double delta_beta) {
  const double ratio = beta_m / delta_beta;
  auto m = static_cast<std::uint64_t>(std::ceil(ratio));
  // Absorb round-off when ratio is an integer up to a few ulps.
  if (m > 0 && static_cast<double>(m - 1) * delta_beta >= beta_m * (1.0 - 1e-14)) --m;
  return m;
}

/// beta_k = min(k delta_beta, beta_m) for k = 1..m.
inline std::vector<double> beta_ladder(double beta_m, double delta_beta, std::uint64_t m) {
  std::vector<double> betas(m);
  for (std::uint64_t k = 1; k <= m; ++k)
    betas[k - 1] = std::min(static_cast<double>(k) * delta_beta, beta_m);
  if (m > 0) betas.back() = beta_m;
  return betas;
}

}  // namespace qsalab
