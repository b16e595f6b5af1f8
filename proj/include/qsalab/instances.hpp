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

// Discrete optimization instances over n-bit configurations.
//
// Energies are held as an explicit table of d = 2^n values so that the
// optimal set, the cost gap and every Gibbs quantity can be computed exactly.
// Spin convention for Ising instances: bit i of the configuration index set
// to 0 means s_i = +1, set to 1 means s_i = -1 (bit 0 is spin 1).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsalab/error.hpp"
#include "qsalab/rng.hpp"

namespace qsalab {

/// Largest bit count an instance table may have.
inline constexpr int kMaxInstanceBits = 24;

/// A point of the search space, identified by its index in [0, 2^n).
struct Configuration {
  std::uint64_t index = 0;

  friend bool operator==(Configuration, Configuration) = default;
  friend auto operator<=>(Configuration, Configuration) = default;
};

/// Renders a configuration as an n-character bit string, most significant bit
/// first (so index 2 with n = 3 prints "010").
inline std::string to_bit_string(Configuration c, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int b = 0; b < n; ++b)
    if ((c.index >> b) & 1u) s[static_cast<std::size_t>(n - 1 - b)] = '1';
  return s;
}

class ProblemInstance;
inline ProblemInstance analyze(std::vector<double> energies,
                               std::optional<double> e_max_override = std::nullopt);

/// Immutable cost table with its derived structure (E_max, cost gap, optimal
/// set). Construct through `analyze` or one of the generators.
class ProblemInstance {
 public:
  int n() const noexcept { return n_; }
  std::uint64_t dimension() const noexcept { return std::uint64_t{1} << n_; }
  std::span<const double> energies() const noexcept { return energies_; }
  double energy(std::uint64_t index) const { return energies_[index]; }

  /// Upper bound on max |E| used by the annealing schedules.
  double e_max() const noexcept { return e_max_; }
  /// True when e_max was supplied rather than computed.
  bool e_max_overridden() const noexcept { return e_max_overridden_; }
  double min_energy() const noexcept { return min_energy_; }
  /// Cost gap: min over non-optimal configurations of E - min E.
  double gamma() const noexcept { return gamma_; }

  const std::vector<Configuration>& optimal_set() const noexcept { return optimal_; }
  bool is_optimal(std::uint64_t index) const { return optimal_mask_[index] != 0; }

 private:
  friend ProblemInstance analyze(std::vector<double>, std::optional<double>);

  int n_ = 0;
  std::vector<double> energies_;
  double e_max_ = 0.0;
  bool e_max_overridden_ = false;
  double min_energy_ = 0.0;
  double gamma_ = 0.0;
  std::vector<Configuration> optimal_;
  std::vector<char> optimal_mask_;
};

/// Energy of one configuration. Throws DomainError for an out-of-range index.
inline double evaluate(const ProblemInstance& instance, Configuration config) {
  if (config.index >= instance.dimension())
    throw DomainError("instances", "configuration index " + std::to_string(config.index) +
                                       " out of range for d = " +
                                       std::to_string(instance.dimension()));
  return instance.energy(config.index);
}

/// Tolerance used to decide ties at the minimum. Energies within this distance
/// of the minimum all belong to the optimal set.
inline double tie_tolerance(double max_abs_energy) {
  return 1e-12 * std::max(1.0, max_abs_energy);
}

/// Builds an instance from a raw energy table by exhaustive scan.
inline ProblemInstance analyze(std::vector<double> energies,
                               std::optional<double> e_max_override) {
  const std::size_t d = energies.size();
  if (d == 0 || !std::has_single_bit(d))
    throw SchemaError("instances", "energy table has " + std::to_string(d) +
                                       " entries; expected a power of two");
  const int n = std::countr_zero(d);
  if (n > kMaxInstanceBits)
    throw CapError("instances", "n = " + std::to_string(n) + " exceeds the instance cap " +
                                    std::to_string(kMaxInstanceBits));
  double lo = energies[0], hi = energies[0], max_abs = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double e = energies[i];
    if (!std::isfinite(e))
      throw SchemaError("instances", "energy of configuration " + std::to_string(i) +
                                         " is not finite");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    max_abs = std::max(max_abs, std::abs(e));
  }

  const double tol = tie_tolerance(max_abs);
  if (hi - lo <= tol) throw DegenerateInstanceError("instances");

  ProblemInstance inst;
  inst.n_ = n;
  inst.min_energy_ = lo;
  inst.optimal_mask_.assign(d, 0);
  double second = hi;
  for (std::size_t i = 0; i < d; ++i) {
    if (energies[i] - lo <= tol) {
      inst.optimal_mask_[i] = 1;
      inst.optimal_.push_back({i});
    } else {
      second = std::min(second, energies[i]);
    }
  }
  inst.gamma_ = second - lo;

  if (e_max_override) {
    if (!std::isfinite(*e_max_override) || *e_max_override < max_abs)
      throw DomainError("instances", "e_max override must be finite and >= max |E| = " +
                                         std::to_string(max_abs));
    inst.e_max_ = *e_max_override;
    inst.e_max_overridden_ = true;
  } else {
    inst.e_max_ = max_abs;
  }
  inst.energies_ = std::move(energies);
  return inst;
}

/// Open Ising chain E(s) = -sum_i J_i s_i s_{i+1}.
inline ProblemInstance generate_ising_chain(int n, std::span<const double> couplings,
                                            std::optional<double> e_max_override = std::nullopt) {
  if (n < 2) throw DomainError("instances", "Ising chain needs n >= 2, got " + std::to_string(n));
  if (n > kMaxInstanceBits)
    throw CapError("instances", "n = " + std::to_string(n) + " exceeds the instance cap");
  if (couplings.size() != static_cast<std::size_t>(n - 1))
    throw SchemaError("instances", "Ising chain with n = " + std::to_string(n) + " needs " +
                                       std::to_string(n - 1) + " couplings, got " +
                                       std::to_string(couplings.size()));
  for (double j : couplings)
    if (!std::isfinite(j)) throw SchemaError("instances", "coupling is not finite");

  const std::uint64_t d = std::uint64_t{1} << n;
  std::vector<double> energies(d);
  for (std::uint64_t s = 0; s < d; ++s) {
    double e = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      // s_i s_{i+1} = +1 when the two bits agree.
      const bool agree = (((s >> i) ^ (s >> (i + 1))) & 1u) == 0;
      e -= agree ? couplings[i] : -couplings[i];
    }
    energies[s] = e;
  }
  return analyze(std::move(energies), e_max_override);
}

/// Couplings drawn uniformly from [-magnitude, magnitude].
inline std::vector<double> random_couplings(int n, std::uint64_t seed, double magnitude) {
  if (n < 2) throw DomainError("instances", "Ising chain needs n >= 2, got " + std::to_string(n));
  if (!std::isfinite(magnitude) || magnitude < 0.0)
    throw DomainError("instances", "coupling magnitude must be finite and non-negative");
  Rng rng(seed);
  std::vector<double> j(static_cast<std::size_t>(n - 1));
  for (double& c : j) c = magnitude * (2.0 * rng.uniform01() - 1.0);
  return j;
}

inline ProblemInstance generate_ising_chain(int n, std::uint64_t seed, double magnitude) {
  const auto j = random_couplings(n, seed, magnitude);
  return generate_ising_chain(n, j);
}

// ---------------------------------------------------------------------------
// Instance documents (JSON)
//
//   {"n": int, "energies": [d reals], "e_max": optional real}
//   {"type": "ising_chain", "n": int, "couplings": [n-1 reals]}
//   {"type": "ising_chain_random", "n": int, "seed": int, "coupling_magnitude": real}
// ---------------------------------------------------------------------------

namespace detail {

inline void require_keys(const nlohmann::json& doc, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError("instances", "unexpected field \"" + key + "\"");
  }
}

inline int read_bits(const nlohmann::json& doc) {
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw SchemaError("instances", "field \"n\" must be an integer");
  const auto n = doc["n"].get<long long>();
  if (n < 1 || n > kMaxInstanceBits)
    throw SchemaError("instances", "field \"n\" out of range: " + std::to_string(n));
  return static_cast<int>(n);
}

inline std::vector<double> read_reals(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw SchemaError("instances", std::string("field \"") + key + "\" must be an array");
  std::vector<double> out;
  out.reserve(doc[key].size());
  for (const auto& v : doc[key]) {
    if (!v.is_number()) throw SchemaError("instances", std::string("non-numeric entry in \"") + key + "\"");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline ProblemInstance instance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("instances", "instance document must be a JSON object");
  if (!doc.contains("type")) {
    detail::require_keys(doc, {"n", "energies", "e_max"});
    const int n = detail::read_bits(doc);
    auto energies = detail::read_reals(doc, "energies");
    if (energies.size() != (std::size_t{1} << n))
      throw SchemaError("instances", "n = " + std::to_string(n) + " requires " +
                                         std::to_string(std::size_t{1} << n) + " energies, got " +
                                         std::to_string(energies.size()));
    std::optional<double> e_max;
    if (doc.contains("e_max")) {
      if (!doc["e_max"].is_number()) throw SchemaError("instances", "field \"e_max\" must be a number");
      e_max = doc["e_max"].get<double>();
    }
    return analyze(std::move(energies), e_max);
  }
  if (!doc["type"].is_string()) throw SchemaError("instances", "field \"type\" must be a string");
  const auto type = doc["type"].get<std::string>();
  if (type == "ising_chain") {
    detail::require_keys(doc, {"type", "n", "couplings"});
    const int n = detail::read_bits(doc);
    const auto j = detail::read_reals(doc, "couplings");
    return generate_ising_chain(n, j);
  }
  if (type == "ising_chain_random") {
    detail::require_keys(doc, {"type", "n", "seed", "coupling_magnitude"});
    const int n = detail::read_bits(doc);
    if (!doc.contains("seed") || !doc["seed"].is_number_integer())
      throw SchemaError("instances", "field \"seed\" must be an integer");
    if (!doc.contains("coupling_magnitude") || !doc["coupling_magnitude"].is_number())
      throw SchemaError("instances", "field \"coupling_magnitude\" must be a number");
    return generate_ising_chain(n, doc["seed"].get<std::uint64_t>(),
                                doc["coupling_magnitude"].get<double>());
  }
  throw SchemaError("instances", "unknown instance type \"" + type + "\"");
}

inline ProblemInstance load_instance(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("instances", std::string("malformed JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

inline ProblemInstance load_instance_text(const std::string& text) {
  std::istringstream in(text);
  return load_instance(in);
}

inline ProblemInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("instances", "cannot open instance file " + path);
  return load_instance(in);
}

/// Explicit-table document. Doubles are written with round-trip precision.
inline nlohmann::json instance_to_json(const ProblemInstance& instance) {
  nlohmann::json doc;
  doc["n"] = instance.n();
  doc["energies"] = std::vector<double>(instance.energies().begin(), instance.energies().end());
  doc["e_max"] = instance.e_max();
  return doc;
}

inline void save_instance(const ProblemInstance& instance, std::ostream& out) {
  out << instance_to_json(instance).dump() << '\n';
}

}  // namespace qsalab
