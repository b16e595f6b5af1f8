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

// Instances shipped with the library and used by the tests, the acceptance
// suite and the CLI (`--instance bundled:<name>`).

#include <array>
#include <string>
#include <vector>

#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"
#include "qsalab/lab.hpp"

namespace qsalab::bundled {

/// Stiff-bond family at n = 6: knob values and the shared E_max bound.
inline constexpr int kFamilyBits = 6;
inline constexpr std::array<double, 4> kFamilyKnobs = {1.0, 1.25, 1.5, 1.75};
inline constexpr double kFamilyEMax = 4.0 + 1.75;

inline ProblemInstance two_state() { return analyze({0.0, 1.0}); }

inline ProblemInstance ising3() {
  const std::vector<double> j = {1.0, 1.0};
  return generate_ising_chain(3, j);
}

inline ProblemInstance ising6() {
  const std::vector<double> j(5, 1.0);
  return generate_ising_chain(6, j);
}

inline InstanceFamily stiff_family() { return stiff_bond_family(kFamilyBits, kFamilyEMax); }

inline std::string family_id(double knob) {
  return "stiff6_" + format_real(knob);
}

/// two_state, ising3, ising6 and the four stiff-bond family members.
inline std::vector<NamedInstance> all() {
  std::vector<NamedInstance> out = {{"two_state", two_state()}, {"ising3", ising3()}, {"ising6", ising6()}};
  const auto fam = stiff_family();
  for (double k : kFamilyKnobs) out.push_back({family_id(k), fam(k)});
  return out;
}

/// Small set for quick end-to-end runs.
inline std::vector<NamedInstance> demo() {
  return {{"two_state", two_state()}, {"ising3", ising3()}};
}

inline ProblemInstance by_name(const std::string& name) {
  if (name == "two_state") return two_state();
  if (name == "ising3") return ising3();
  if (name == "ising6") return ising6();
  for (double k : kFamilyKnobs)
    if (name == family_id(k)) return stiff_family()(k);
  throw SchemaError("instances", "unknown bundled instance \"" + name + "\"");
}

}  // namespace qsalab::bundled
