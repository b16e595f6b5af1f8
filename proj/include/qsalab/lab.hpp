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

// Experiment orchestration: side-by-side SA / QSA tables and gap-scaling
// studies.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qsalab/anneal_classical.hpp"
#include "qsalab/anneal_quantum.hpp"
#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"
#include "qsalab/parallel.hpp"
#include "qsalab/report.hpp"
#include "qsalab/rng.hpp"

namespace qsalab {

struct NamedInstance {
  std::string id;
  ProblemInstance instance;
};

struct ComparisonRow {
  std::string instance_id;
  int n = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::uint64_t sa_cost = 0;
  double qsa_cost_expected = 0.0;
  double sa_success = 0.0;
  double qsa_success_mean = 0.0;
  double qsa_success_stderr = 0.0;
  std::uint64_t seeds = 0;
};

struct LabOptions {
  QsaOptions qsa;
  SaOptions sa;
  WalkVariant variant = WalkVariant::two_reflection;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  PropagationOptions propagation;
};

struct SuccessStats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean and standard error of the exact QSA success over `seeds` runs.
inline SuccessStats qsa_success_stats(const QsaRunner& runner, std::uint64_t seeds,
                                      std::uint64_t stream, unsigned threads) {
  std::vector<double> p(seeds);
  parallel_for(seeds, threads, [&](std::size_t s) {
    p[s] = *runner.run(derive_seed(stream, s)).exact_success;
  });
  SuccessStats st;
  if (seeds == 0) return st;
  for (double v : p) st.mean += v;
  st.mean /= static_cast<double>(seeds);
  if (seeds > 1) {
    double var = 0.0;
    for (double v : p) var += (v - st.mean) * (v - st.mean);
    var /= static_cast<double>(seeds - 1);
    st.stderr_ = std::sqrt(var / static_cast<double>(seeds));
  }
  return st;
}

/// One row per instance: gap over the QSA grid, both schedules built with it,
/// exact SA propagation, and mean exact QSA success over `seeds` runs.
inline std::vector<ComparisonRow> compare(std::span<const NamedInstance> instances, double epsilon,
                                          std::uint64_t seeds, const LabOptions& options = {}) {
  std::vector<ComparisonRow> rows;
  rows.reserve(instances.size());
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& inst = instances[k].instance;
    const QsaSchedule qs = build_qsa_schedule(inst, epsilon, options.qsa);
    const SaSchedule ss = build_sa_schedule(inst, qs.delta_used, epsilon, options.sa);
    const auto sa = propagate_exact(inst, ss, {}, options.propagation);
    const QsaRunner runner(inst, qs, options.variant, options.qsa.max_n);
    const auto stats = qsa_success_stats(runner, seeds, derive_seed(options.master_seed, k), options.threads);

    ComparisonRow r;
    r.instance_id = instances[k].id;
    r.n = inst.n();
    r.delta = qs.delta_used;
    r.epsilon = epsilon;
    r.sa_cost = sa_cost(ss);
    r.qsa_cost_expected = average_cost(qs);
    r.sa_success = sa.success_probability;
    r.qsa_success_mean = stats.mean;
    r.qsa_success_stderr = stats.stderr_;
    r.seeds = seeds;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Table comparison_table(std::span<const ComparisonRow> rows) {
  Table t;
  t.columns = {"instance_id", "n",          "delta",           "epsilon",
               "sa_cost",     "qsa_cost_expected", "sa_success", "qsa_success_mean",
               "qsa_success_stderr", "seeds"};
  for (const auto& r : rows)
    t.rows.push_back({r.instance_id, static_cast<std::int64_t>(r.n), r.delta, r.epsilon, r.sa_cost,
                      r.qsa_cost_expected, r.sa_success, r.qsa_success_mean, r.qsa_success_stderr,
                      r.seeds});
  return t;
}

inline void emit_report(std::span<const ComparisonRow> rows, ReportFormat format, const std::string& path) {
  emit_table(comparison_table(rows), format, path);
}

// ---------------------------------------------------------------------------
// Scaling studies
// ---------------------------------------------------------------------------

/// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("lab", "fit inputs differ in length");
  if (x.size() < 3) throw DomainError("lab", "slope fit needs at least 3 points, got " + std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("lab", "log-log fit needs positive data");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx <= 0.0) throw DomainError("lab", "slope fit needs distinct abscissae");
  return sxy / sxx;
}

using InstanceFamily = std::function<ProblemInstance(double knob)>;

/// Ising chain with unit couplings except a stiffer middle bond of strength
/// `knob`. Raising the knob raises the barrier between the two ground states,
/// shrinking the chain gap, while gamma stays 2. Passing a common e_max keeps
/// E_max fixed across the family.
inline InstanceFamily stiff_bond_family(int n, double e_max) {
  return [n, e_max](double knob) {
    std::vector<double> j(static_cast<std::size_t>(n - 1), 1.0);
    j[static_cast<std::size_t>((n - 1) / 2)] = knob;
    return generate_ising_chain(n, j, e_max);
  };
}

struct ScalingPoint {
  double knob = 0.0;
  int n = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::uint64_t q = 0;
  std::uint64_t m = 0;
  std::uint64_t sa_cost = 0;
  double qsa_cost_expected = 0.0;
  double qsa_success_mean = 0.0;
  double qsa_success_stderr = 0.0;
  std::uint64_t seeds = 0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  /// d log(cost) / d log(1 / Delta).
  double qsa_slope = 0.0;
  double sa_slope = 0.0;
};

inline ScalingResult scaling_study(const InstanceFamily& family, std::span<const double> knobs,
                                   double epsilon, std::uint64_t seeds, const LabOptions& options = {}) {
  if (knobs.size() < 3)
    throw DomainError("lab", "scaling study needs at least 3 points, got " + std::to_string(knobs.size()));
  ScalingResult out;
  std::vector<double> inv_gap, qsa_cost, sa_costs;
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    const ProblemInstance inst = family(knobs[k]);
    const QsaSchedule qs = build_qsa_schedule(inst, epsilon, options.qsa);
    const SaSchedule ss = build_sa_schedule(inst, qs.delta_used, epsilon, options.sa);
    ScalingPoint p;
    p.knob = knobs[k];
    p.n = inst.n();
    p.delta = qs.delta_used;
    p.epsilon = epsilon;
    p.q = qs.q;
    p.m = qs.m;
    p.sa_cost = sa_cost(ss);
    p.qsa_cost_expected = average_cost(qs);
    p.seeds = seeds;
    if (seeds > 0) {
      const QsaRunner runner(inst, qs, options.variant, options.qsa.max_n);
      const auto st = qsa_success_stats(runner, seeds, derive_seed(options.master_seed, k), options.threads);
      p.qsa_success_mean = st.mean;
      p.qsa_success_stderr = st.stderr_;
    }
    inv_gap.push_back(1.0 / p.delta);
    qsa_cost.push_back(p.qsa_cost_expected);
    sa_costs.push_back(static_cast<double>(p.sa_cost));
    out.points.push_back(p);
  }
  out.qsa_slope = fit_loglog_slope(inv_gap, qsa_cost);
  out.sa_slope = fit_loglog_slope(inv_gap, sa_costs);
  return out;
}

inline Table scaling_table(std::span<const ScalingPoint> points) {
  Table t;
  t.columns = {"knob", "n", "delta", "epsilon", "Q", "m", "sa_cost", "qsa_cost_expected",
               "qsa_success_mean", "qsa_success_stderr", "seeds"};
  for (const auto& p : points)
    t.rows.push_back({p.knob, static_cast<std::int64_t>(p.n), p.delta, p.epsilon, p.q, p.m, p.sa_cost,
                      p.qsa_cost_expected, p.qsa_success_mean, p.qsa_success_stderr, p.seeds});
  return t;
}

}  // namespace qsalab
