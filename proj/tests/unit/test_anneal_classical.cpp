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
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qsalab/anneal_classical.hpp"
#include "qsalab/bundled.hpp"
#include "qsalab/chains.hpp"

namespace qsalab {
namespace {

TEST(SaSchedule, TwoStateIncrement) {
  const auto inst = bundled::two_state();
  const auto s = build_sa_schedule(inst, 1.5, 0.1);
  EXPECT_NEAR(s.delta_beta, 0.075, 1e-15);
  // beta_m = 2 ln(2 sqrt(2) / 0.1) for gamma = 1.
  const double beta_m = 2.0 * std::log(2.0 * std::sqrt(2.0) / 0.1);
  EXPECT_NEAR(s.beta_m, beta_m, 1e-12);
  EXPECT_EQ(s.m, static_cast<std::uint64_t>(std::ceil(beta_m / 0.075)));
  EXPECT_EQ(s.m, 90u);
  EXPECT_EQ(sa_cost(s), s.m);
  EXPECT_EQ(s.beta(0), 0.0);
  EXPECT_EQ(s.beta(s.m), s.beta_m);
  EXPECT_NEAR(s.beta(1), 0.075, 1e-15);
}

TEST(SaSchedule, LadderIncrementsAndLanding) {
  const auto s = build_sa_schedule(bundled::ising3(), 0.3, 0.2);
  for (std::uint64_t k = 1; k < s.m; ++k) EXPECT_NEAR(s.beta(k) - s.beta(k - 1), s.delta_beta, 1e-12);
  const double last = s.beta(s.m) - s.beta(s.m - 1);
  EXPECT_GT(last, 0.0);
  EXPECT_LE(last, s.delta_beta * (1.0 + 1e-12));
}

TEST(SaSchedule, HalvingEpsilonOrDeltaDoublesSteps) {
  const auto inst = bundled::ising3();
  const auto base = build_sa_schedule(inst, 0.4, 0.2);
  const auto half_delta = build_sa_schedule(inst, 0.2, 0.2);
  EXPECT_NEAR(half_delta.delta_beta, base.delta_beta / 2.0, 1e-15);
  EXPECT_LE(half_delta.m, 2 * base.m);
  EXPECT_GE(half_delta.m, 2 * base.m - 1);
  // Halving epsilon also moves beta_m, so m at least doubles.
  const auto half_eps = build_sa_schedule(inst, 0.4, 0.1);
  EXPECT_GE(half_eps.m, 2 * base.m - 1);
}

TEST(SaSchedule, CostMonotoneInDelta) {
  const auto inst = bundled::ising3();
  std::uint64_t prev = ~std::uint64_t{0};
  for (double delta : {0.01, 0.05, 0.1, 0.5, 1.0, 2.0}) {
    const auto c = sa_cost(build_sa_schedule(inst, delta, 0.2));
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(SaSchedule, Preconditions) {
  const auto inst = bundled::two_state();
  EXPECT_THROW(build_sa_schedule(inst, 0.0, 0.1), DomainError);
  EXPECT_THROW(build_sa_schedule(inst, -1.0, 0.1), DomainError);
  EXPECT_THROW(build_sa_schedule(inst, 2.5, 0.1), DomainError);
  EXPECT_THROW(build_sa_schedule(inst, 1.0, 0.0), DomainError);
  EXPECT_THROW(build_sa_schedule(inst, 1.0, 1.0), DomainError);
  EXPECT_NO_THROW(build_sa_schedule(inst, 2.0, 0.5));
}

TEST(SaSchedule, CostOfGivenLength) {
  SaSchedule s;
  s.m = 134;
  EXPECT_EQ(sa_cost(s), 134u);
  s.steps_per_temperature = 3;
  EXPECT_EQ(sa_cost(s), 402u);
}

TEST(Propagate, SingleStepAtLn2) {
  const auto r = propagate_exact(bundled::two_state(), constant_sa_schedule(std::numbers::ln2, 1));
  EXPECT_NEAR(r.distribution[0], 0.75, 1e-15);
  EXPECT_NEAR(r.distribution[1], 0.25, 1e-15);
  EXPECT_NEAR(r.tv_to_gibbs, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(r.success_probability, 0.75, 1e-15);
}

TEST(Propagate, EmptySchedule) {
  const auto inst = bundled::ising3();
  const auto r = propagate_exact(inst, constant_sa_schedule(1.0, 0));
  for (double p : r.distribution) EXPECT_EQ(p, 1.0 / 8.0);
  EXPECT_NEAR(r.success_probability, 2.0 / 8.0, 1e-15);
}

TEST(Propagate, DefaultTwoStateSucceeds) {
  const auto inst = bundled::two_state();
  const auto s = build_sa_schedule(inst, 1.5, 0.1);
  const auto r = propagate_exact(inst, s);
  EXPECT_GE(r.success_probability, 0.9);
}

TEST(Propagate, KernelMatchesMatrixRoute) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto inst = generate_ising_chain(2 + static_cast<int>(seed % 4), seed, 1.0);
    SaOptions opts;
    opts.laziness = seed % 2 == 0 ? 1.0 : 0.5;
    const auto s = build_sa_schedule(inst, 1.0, 0.3, opts);
    std::vector<double> p(inst.dimension(), 1.0 / static_cast<double>(inst.dimension()));
    for (std::uint64_t k = 1; k <= s.m; ++k)
      p = evolve_distribution(metropolis(inst, s.beta(k), {.laziness = s.laziness}), p);
    const auto r = propagate_exact(inst, s);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(r.distribution[i], p[i], 1e-13);
  }
}

TEST(Propagate, StationaryStartStaysPut) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_ising_chain(2 + static_cast<int>(seed % 5), seed, 1.5);
    for (double beta : {0.0, 0.6, 2.4}) {
      const auto g = gibbs(inst, beta);
      const auto r = propagate_exact(inst, constant_sa_schedule(beta, 25), g.probabilities);
      EXPECT_LE(r.tv_to_gibbs, 1e-12);
    }
  }
}

TEST(Propagate, CapAndLengthChecks) {
  const auto inst = bundled::ising6();
  EXPECT_THROW(propagate_exact(inst, constant_sa_schedule(1.0, 1), {}, {.max_dimension = 16}), CapError);
  const std::vector<double> wrong(3, 1.0 / 3.0);
  EXPECT_THROW(propagate_exact(bundled::two_state(), constant_sa_schedule(1.0, 1), wrong), DomainError);
}

TEST(SaChain, Deterministic) {
  const auto inst = bundled::ising3();
  const auto s = build_sa_schedule(inst, 0.5, 0.2);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(run_sa_chain(inst, s, seed).index, run_sa_chain(inst, s, seed).index);
}

// Per-configuration binomial agreement between sampled trajectories and the
// exact propagated distribution.
void expect_binomial_agreement(const ProblemInstance& inst, const SaSchedule& s, std::uint64_t trials) {
  std::vector<double> counts(inst.dimension(), 0.0);
  for (std::uint64_t seed = 0; seed < trials; ++seed)
    counts[run_sa_chain(inst, s, derive_seed(99, seed)).index] += 1.0;
  const auto exact = propagate_exact(inst, s);
  const double n = static_cast<double>(trials);
  for (std::uint64_t i = 0; i < inst.dimension(); ++i) {
    const double p = exact.distribution[i];
    EXPECT_NEAR(counts[i] / n, p, oracle::three_sigma(p, n) + 1e-12) << "configuration " << i;
  }
}

TEST(SaChain, EmptyScheduleIsUniform) {
  expect_binomial_agreement(bundled::ising3(), constant_sa_schedule(1.0, 0), 4000);
}

TEST(SaChain, AgreesWithPropagationTwoState) {
  const auto inst = bundled::two_state();
  const auto s = build_sa_schedule(inst, 1.5, 0.1);
  expect_binomial_agreement(inst, s, 1000);
  std::uint64_t zeros = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) zeros += run_sa_chain(inst, s, seed).index == 0;
  EXPECT_GE(static_cast<double>(zeros) / 1000.0, 0.9);
}

TEST(SaChain, AgreesWithPropagationIsing3) {
  const auto inst = bundled::ising3();
  expect_binomial_agreement(inst, build_sa_schedule(inst, 0.5, 0.2), 4000);
}

TEST(SaChain, AgreesWithPropagationLazy) {
  const auto inst = bundled::ising3();
  SaOptions opts;
  opts.laziness = 0.5;
  opts.steps_per_temperature = 2;
  expect_binomial_agreement(inst, build_sa_schedule(inst, 1.0, 0.2, opts), 4000);
}

TEST(SaSchedule, JsonFields) {
  const auto j = to_json(build_sa_schedule(bundled::two_state(), 1.5, 0.1));
  EXPECT_EQ(j["m"], 90);
  EXPECT_EQ(j["cost"], 90);
  EXPECT_DOUBLE_EQ(j["delta"].get<double>(), 1.5);
}

}  // namespace
}  // namespace qsalab
