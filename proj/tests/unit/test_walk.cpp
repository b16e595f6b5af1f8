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
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "qsalab/bundled.hpp"
#include "qsalab/chains.hpp"
#include "qsalab/rng.hpp"
#include "qsalab/terminal_beta.hpp"
#include "qsalab/walk.hpp"

namespace qsalab {
namespace {

const double kLn2 = std::numbers::ln2;

QuantumState random_state(int n, std::uint64_t seed) {
  Rng rng(seed);
  QuantumState s(n);
  for (auto& a : s.amplitudes()) a = {rng.uniform01() - 0.5, rng.uniform01() - 0.5};
  const double nrm = s.norm();
  for (auto& a : s.amplitudes()) a /= nrm;
  return s;
}

double max_diff(const QuantumState& a, const QuantumState& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.amplitudes()[k] - b.amplitudes()[k]));
  return m;
}

SpectrumOptions with_method(SpectrumMethod method) {
  SpectrumOptions o;
  o.method = method;
  return o;
}

ProblemInstance small_instance(std::uint64_t seed, int n) {
  return n == 1 ? bundled::two_state() : generate_ising_chain(n, seed, 1.0);
}

TEST(BuildWalk, TwoStateInfiniteTemperatureBlockIsSwap) {
  const auto op = build_walk(metropolis(bundled::two_state(), 0.0));
  const Eigen::MatrixXd v0 = op.block(0);
  EXPECT_NEAR(v0(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(v0(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(v0(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(v0(1, 1), 0.0, 1e-15);
}

TEST(BuildWalk, SelfLoopRowGivesIdentity) {
  // At beta = ln 2 the excited state always falls: a_1 = e_0.
  const auto op = build_walk(metropolis(bundled::two_state(), kLn2));
  EXPECT_TRUE(op.block_is_identity(1));
  EXPECT_FALSE(op.block_is_identity(0));
  EXPECT_EQ(op.block(1), Eigen::MatrixXd::Identity(2, 2));
}

TEST(BuildWalk, BlocksAreSymmetricOrthogonalReflections) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const auto inst = small_instance(seed, n);
    const auto s = metropolis(inst, 0.9);
    const auto op = build_walk(s);
    const Eigen::MatrixXd dense = s.dense();
    const auto d = static_cast<Eigen::Index>(inst.dimension());
    for (Eigen::Index i = 0; i < d; ++i) {
      const Eigen::MatrixXd v = op.block(static_cast<std::uint64_t>(i));
      EXPECT_LE((v - v.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_LE((v * v - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
      const Eigen::VectorXd a = dense.row(i).transpose().cwiseSqrt();
      EXPECT_NEAR(a.norm(), 1.0, 1e-12);
      EXPECT_LE((v.col(0) - a).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(BuildWalk, RejectsNonStochasticRows) {
  const StochasticMatrix bad(1, 0.0, 1.0, {0, 1, 2}, {{1, 0.9}, {0, 1.0}});
  EXPECT_THROW(build_walk(bad), DomainError);
  const StochasticMatrix negative(1, 0.0, 1.0, {0, 2, 3}, {{0, -0.5}, {1, 1.5}, {0, 1.0}});
  EXPECT_THROW(build_walk(negative), DomainError);
}

TEST(ApplyX, TwoStateRowZero) {
  const auto op = build_walk(metropolis(bundled::two_state(), kLn2));
  auto s = QuantumState::basis(1, 0, 0);
  apply_X(op, s);
  EXPECT_NEAR(s.amplitudes()[0].real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(s.amplitudes()[1].real(), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(s.amplitudes()[2], std::complex<double>(0.0));
  EXPECT_EQ(s.amplitudes()[3], std::complex<double>(0.0));
}

TEST(ApplyX, ReproducesSquareRootRows) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    const auto inst = generate_ising_chain(n, seed, 1.3);
    const auto s = metropolis(inst, 1.1);
    const auto op = build_walk(s);
    const Eigen::MatrixXd dense = s.dense();
    for (std::uint64_t i = 0; i < inst.dimension(); ++i) {
      auto st = QuantumState::basis(n, i, 0);
      apply_X(op, st);
      for (std::uint64_t a = 0; a < inst.dimension(); ++a)
        for (std::uint64_t j = 0; j < inst.dimension(); ++j) {
          const double expected =
              a == i ? std::sqrt(dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) : 0.0;
          EXPECT_NEAR(std::abs(st(a, j) - expected), 0.0, 1e-12);
        }
    }
  }
}

TEST(ApplyX, CoherentGibbsImage) {
  const auto inst = bundled::ising3();
  const auto s = metropolis(inst, 0.7);
  const auto pi = gibbs(inst, 0.7);
  const auto op = build_walk(s);
  auto st = coherent_gibbs_state(pi);
  apply_X(op, st);
  for (std::uint64_t i = 0; i < 8; ++i)
    for (std::uint64_t j = 0; j < 8; ++j)
      EXPECT_NEAR(st(i, j).real(), std::sqrt(pi.probabilities[i] * s.at(i, j)), 1e-13);
  // Detailed balance makes the image swap-symmetric.
  auto swapped = st;
  apply_P(swapped);
  EXPECT_LE(max_diff(st, swapped), 1e-12);
}

TEST(ApplyX, DaggerEqualsXAndInvertsIt) {
  const auto op = build_walk(metropolis(bundled::ising3(), 1.5));
  const auto psi = random_state(3, 7);
  auto a = psi, b = psi;
  apply_X(op, a);
  apply_X_dagger(op, b);
  EXPECT_EQ(max_diff(a, b), 0.0);
  apply_X_dagger(op, a);
  EXPECT_LE(max_diff(a, psi), 1e-10);
}

TEST(ApplyX, DimensionMismatchThrows) {
  const auto op = build_walk(metropolis(bundled::ising3(), 1.0));
  QuantumState s(2);
  EXPECT_THROW(apply_X(op, s), DomainError);
  EXPECT_THROW(apply_W(op, s), DomainError);
}

TEST(ApplyP, SwapsRegistersAndIsInvolution) {
  auto s = QuantumState::basis(2, 1, 3);
  apply_P(s);
  EXPECT_EQ(s(3, 1), std::complex<double>(1.0));
  EXPECT_EQ(s.norm(), 1.0);
  const auto psi = random_state(4, 3);
  auto t = psi;
  apply_P(t);
  EXPECT_NE(max_diff(t, psi), 0.0);
  apply_P(t);
  EXPECT_EQ(max_diff(t, psi), 0.0);
  // Large enough to cross transpose tiles.
  const auto big = random_state(6, 4);
  auto u = big;
  apply_P(u);
  for (std::uint64_t i = 0; i < 64; ++i)
    for (std::uint64_t j = 0; j < 64; ++j) ASSERT_EQ(u(i, j), big(j, i));
}

TEST(ApplyR, NegatesSecondRegisterZero) {
  auto s = QuantumState::basis(2, 2, 0);
  apply_R(s);
  EXPECT_EQ(s(2, 0), std::complex<double>(-1.0));
  auto t = QuantumState::basis(2, 2, 1);
  apply_R(t);
  EXPECT_EQ(t(2, 1), std::complex<double>(1.0));
  const auto psi = random_state(3, 5);
  auto u = psi;
  apply_R(u);
  apply_R(u);
  EXPECT_EQ(max_diff(u, psi), 0.0);
}

TEST(ApplyR, ConjugatedBySwapIsFirstRegisterReflection) {
  for (std::uint64_t i = 0; i < 4; ++i)
    for (std::uint64_t j = 0; j < 4; ++j) {
      auto a = QuantumState::basis(2, i, j);
      auto b = a;
      apply_P(a);
      apply_R(a);
      apply_P(a);
      apply_R_first(b);
      EXPECT_EQ(max_diff(a, b), 0.0);
    }
}

TEST(ApplyX, ConjugatedBySwapActsOnColumns) {
  const auto op = build_walk(metropolis(bundled::ising3(), 0.8));
  const auto psi = random_state(3, 11);
  auto a = psi, b = psi;
  apply_P(a);
  apply_X(op, a);
  apply_P(a);
  apply_X_columns(op, b);
  EXPECT_LE(max_diff(a, b), 1e-15);
}

TEST(CoherentGibbs, Examples) {
  const auto u = coherent_gibbs_state(gibbs(bundled::two_state(), 0.0));
  EXPECT_NEAR(u.amplitudes()[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(u.amplitudes()[1], std::complex<double>(0.0));
  EXPECT_NEAR(u.amplitudes()[2].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(u.amplitudes()[3], std::complex<double>(0.0));
  const auto g = coherent_gibbs_state(gibbs(bundled::two_state(), kLn2));
  EXPECT_NEAR(g.amplitudes()[0].real(), std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(g.amplitudes()[2].real(), std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(g.norm(), 1.0, 1e-15);
  EXPECT_NEAR(coherent_gibbs_state(gibbs(bundled::ising6(), 3.0)).norm(), 1.0, 1e-14);
}

TEST(ApplyW, FastFormMatchesFactorsAndDenseOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const auto inst = small_instance(seed, n);
    const auto s = metropolis(inst, 0.5 + 0.4 * static_cast<double>(seed));
    const Eigen::MatrixXd sz = oracle::szegedy_walk_dense(s.dense());
    const Eigen::MatrixXd lit = oracle::literal_walk_dense(s.dense());
    const auto two = build_walk(s, WalkVariant::two_reflection);
    const auto literal = build_walk(s, WalkVariant::literal_product);
    EXPECT_LE((dense_walk_matrix(two) - sz.cast<std::complex<double>>()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((dense_walk_matrix(literal) - lit.cast<std::complex<double>>()).cwiseAbs().maxCoeff(), 1e-12);
    const auto psi = random_state(n, seed);
    auto fast = psi, slow = psi;
    apply_W(two, fast, 3);
    apply_W_factored(two, slow, 3);
    EXPECT_LE(max_diff(fast, slow), 1e-13);
  }
}

TEST(ApplyW, NormPreserved) {
  const auto inst = generate_ising_chain(5, std::uint64_t{17}, 1.0);
  for (auto variant : {WalkVariant::two_reflection, WalkVariant::literal_product}) {
    const auto op = build_walk(metropolis(inst, 1.3), variant);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto psi = random_state(5, seed);
      apply_W(op, psi);
      EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    }
  }
}

TEST(ApplyW, NormDriftOverManyApplications) {
  const auto op = build_walk(metropolis(bundled::ising3(), 2.0));
  auto psi = random_state(3, 1);
  apply_W(op, psi, 1000);
  EXPECT_LT(std::abs(psi.norm() - 1.0), 1e-8);
  auto real = coherent_gibbs_state<double>(gibbs(bundled::ising3(), 0.0));
  apply_W(op, real, 1000);
  EXPECT_LT(std::abs(real.norm() - 1.0), 1e-8);
}

TEST(DenseWalk, UnitaryWithConjugatePairedSpectrum) {
  for (auto variant : {WalkVariant::two_reflection, WalkVariant::literal_product}) {
    for (const auto& inst : {bundled::two_state(), bundled::ising3()}) {
      const auto w = dense_walk_matrix(build_walk(metropolis(inst, kLn2), variant));
      const auto dim = w.rows();
      EXPECT_LE((w.adjoint() * w - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff(), 1e-10);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(w, false);
      const auto& ev = es.eigenvalues();
      for (Eigen::Index k = 0; k < ev.size(); ++k) {
        EXPECT_NEAR(std::abs(ev(k)), 1.0, 1e-9);
        double nearest = 10.0;
        for (Eigen::Index l = 0; l < ev.size(); ++l) nearest = std::min(nearest, std::abs(ev(l) - std::conj(ev(k))));
        EXPECT_LE(nearest, 1e-9);
      }
    }
  }
}

TEST(DenseWalk, CapEnforced) {
  EXPECT_THROW(dense_walk_matrix(build_walk(metropolis(bundled::ising6(), 1.0))), CapError);
}

TEST(FixedPoint, TwoReflectionOnBundledGrid) {
  for (const auto& inst : {bundled::two_state(), bundled::ising3(), bundled::ising6()}) {
    for (double beta : {0.0, 0.5, kLn2, 1.0, 2.0, 5.0}) {
      const auto op = build_walk(metropolis(inst, beta));
      EXPECT_LE(fixed_point_residual(op, gibbs(inst, beta)), 1e-10) << "n=" << inst.n() << " beta=" << beta;
    }
  }
}

TEST(FixedPoint, InfiniteTemperature) {
  const auto inst = bundled::ising3();
  EXPECT_LE(fixed_point_residual(build_walk(metropolis(inst, 0.0)), gibbs(inst, 0.0)), 1e-12);
}

TEST(FixedPoint, TwoStateDenseCheck) {
  const auto s = metropolis(bundled::two_state(), kLn2);
  const auto pi = gibbs(bundled::two_state(), kLn2);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(4);
  psi(0) = std::sqrt(pi.probabilities[0]);
  psi(2) = std::sqrt(pi.probabilities[1]);
  const double dense_sz = (oracle::szegedy_walk_dense(s.dense()) * psi - psi).norm();
  const double dense_lit = (oracle::literal_walk_dense(s.dense()) * psi - psi).norm();
  EXPECT_LE(dense_sz, 1e-12);
  EXPECT_NEAR(fixed_point_residual(build_walk(s, WalkVariant::two_reflection), pi), dense_sz, 1e-12);
  // The literal product is measured, not required to fix the state.
  EXPECT_NEAR(fixed_point_residual(build_walk(s, WalkVariant::literal_product), pi), dense_lit, 1e-12);
}

TEST(FixedPoint, BetaMismatchThrows) {
  const auto inst = bundled::ising3();
  EXPECT_THROW(fixed_point_residual(build_walk(metropolis(inst, 1.0)), gibbs(inst, 2.0)), DomainError);
}

TEST(Spectrum, TwoStateAtLn2) {
  const auto op = build_walk(metropolis(bundled::two_state(), kLn2));
  const auto dense = walk_spectrum(op, with_method(SpectrumMethod::relevant_subspace));
  const auto shortcut = walk_spectrum(op, with_method(SpectrumMethod::discriminant_shortcut));
  ASSERT_TRUE(dense.phase_gap && shortcut.phase_gap);
  EXPECT_GE(*dense.phase_gap, std::sqrt(1.5));
  EXPECT_NEAR(*dense.phase_gap, *shortcut.phase_gap, 1e-9);
  EXPECT_NEAR(*dense.phase_gap, 2.0 * std::acos(0.5), 1e-9);
  EXPECT_NEAR(dense.chain_gap, 1.5, 1e-12);
  EXPECT_NEAR(dense.phases.front(), 0.0, 1e-9);
}

TEST(Spectrum, RelevantSubspaceMatchesShortcutAndDense) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const auto inst = small_instance(seed + 100, n);
    const auto op = build_walk(metropolis(inst, 0.3 + 0.3 * static_cast<double>(seed)));
    const auto rel = walk_spectrum(op, with_method(SpectrumMethod::relevant_subspace));
    const auto sc = walk_spectrum(op, with_method(SpectrumMethod::discriminant_shortcut));
    ASSERT_EQ(rel.phases.size(), sc.phases.size());
    for (std::size_t k = 0; k < rel.phases.size(); ++k) EXPECT_NEAR(rel.phases[k], sc.phases[k], 1e-9);
    EXPECT_LE(rel.invariance_residual, 1e-10);
    // Every restricted phase is a phase of the full operator.
    const auto all = dense_phases(op);
    for (double p : rel.phases) {
      double nearest = 10.0;
      for (double q : all) nearest = std::min(nearest, std::abs(p - q));
      EXPECT_LE(nearest, 1e-7);
    }
  }
}

TEST(Spectrum, PhaseGapBoundOnRandomInstances) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    const auto inst = generate_ising_chain(n, seed + 500, 1.0);
    const double beta_m = terminal_beta(inst, 0.2).value;
    for (int k = 1; k <= 5; ++k) {
      const double beta = beta_m * k / 5.0;
      const auto s = metropolis(inst, beta);
      const auto two = walk_spectrum(build_walk(s, WalkVariant::two_reflection));
      ASSERT_TRUE(two.phase_gap);
      EXPECT_NEAR(two.phases.front(), 0.0, 1e-9);
      EXPECT_TRUE(two.gap_bound_holds()) << "seed " << seed << " beta " << beta;
      EXPECT_TRUE(two.absolute_gap_bound_holds());
      // The literal product is only measured.
      const auto lit = walk_spectrum(build_walk(s, WalkVariant::literal_product));
      EXPECT_GT(lit.subspace_dimension, 0u);
      ++checked;
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(Spectrum, AbsoluteGapBoundAtHighTemperature) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = generate_ising_chain(2 + static_cast<int>(seed % 4), seed, 1.0);
    for (double beta : {0.0, 0.25, 0.5, 1.0}) {
      const auto w = walk_spectrum(build_walk(metropolis(inst, beta)));
      EXPECT_TRUE(w.absolute_gap_bound_holds()) << "seed " << seed << " beta " << beta;
    }
  }
}

// Near-periodic chain: an eigenvalue close to -1 gives a phase below
// sqrt(lambda_0 - lambda_1). The bound survives with the absolute gap.
TEST(Spectrum, NearPeriodicChainViolatesTopGapBound) {
  const auto inst = generate_ising_chain(2, std::uint64_t{8}, 1.0);
  const auto s = metropolis(inst, 0.25);
  const auto w = walk_spectrum(build_walk(s));
  const auto chain = spectral_report(s);
  EXPECT_LT(chain.eigenvalues.back(), -0.98);
  ASSERT_TRUE(w.phase_gap);
  EXPECT_NEAR(*w.phase_gap, 2.0 * std::acos(-chain.eigenvalues.back()), 1e-9);
  EXPECT_FALSE(w.gap_bound_holds());
  EXPECT_TRUE(w.absolute_gap_bound_holds());
}

TEST(Spectrum, ExtremeBetaStaysFinite) {
  // Tiny cost gap: beta_m runs into the hundreds and S is numerically reducible.
  const auto inst = generate_ising_chain(5, std::uint64_t{15}, 1.0);
  ASSERT_LT(inst.gamma(), 0.01);
  const auto w = walk_spectrum(build_walk(metropolis(inst, 228.0)));
  for (double p : w.phases) EXPECT_TRUE(std::isfinite(p));
  EXPECT_LE(w.invariance_residual, 1e-7);
}

TEST(Spectrum, ShortcutForLargeInstances) {
  const auto op = build_walk(metropolis(bundled::ising6(), 1.0));
  const auto s = walk_spectrum(op);
  EXPECT_EQ(s.method, SpectrumMethod::discriminant_shortcut);
  ASSERT_TRUE(s.phase_gap);
  EXPECT_GE(*s.phase_gap, std::sqrt(s.chain_gap) - 1e-9);
  EXPECT_THROW(walk_spectrum(op, with_method(SpectrumMethod::relevant_subspace)), CapError);
  const auto lit = build_walk(metropolis(bundled::ising6(), 1.0), WalkVariant::literal_product);
  EXPECT_THROW(walk_spectrum(lit, with_method(SpectrumMethod::discriminant_shortcut)), DomainError);
}

TEST(Export, SpectrumCsv) {
  WalkSpectrum a, b;
  a.beta = 0.5;
  a.phases = {0.0, 1.5};
  b.beta = 1.0;
  b.phases = {0.0};
  const std::vector<WalkSpectrum> rows = {a, b};
  std::ostringstream out;
  write_spectrum_csv(rows, out);
  EXPECT_EQ(out.str(), "beta,phi_0,phi_1\n0.5,0,1.5\n1,0,\n");
}

TEST(Export, BinaryStateRoundTrip) {
  const auto psi = random_state(2, 9);
  std::ostringstream out;
  write_state_binary(psi, out);
  const std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 16u * 16u);
  const auto back_in = std::string(bytes);
  std::istringstream in(back_in);
  const auto back = read_state_binary(in, 2);
  EXPECT_EQ(max_diff(psi, back), 0.0);

  std::ostringstream one;
  write_state_binary(QuantumState::basis(1, 0, 0), one);
  // 1.0 as little-endian IEEE-754: 00 .. 00 f0 3f.
  EXPECT_EQ(static_cast<unsigned char>(one.str()[6]), 0xf0);
  EXPECT_EQ(static_cast<unsigned char>(one.str()[7]), 0x3f);
  std::istringstream truncated(bytes.substr(0, 40));
  EXPECT_THROW(read_state_binary(truncated, 2), SchemaError);
}

TEST(State, CapsAndMarginals) {
  EXPECT_THROW(QuantumState(kMaxWalkBits + 1), CapError);
  EXPECT_THROW(QuantumState(0), CapError);
  const auto g = coherent_gibbs_state(gibbs(bundled::ising3(), 1.0));
  const auto m = g.first_register_marginals();
  const auto pi = gibbs(bundled::ising3(), 1.0);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m[i], pi.probabilities[i], 1e-15);
}

}  // namespace
}  // namespace qsalab
