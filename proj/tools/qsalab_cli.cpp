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
// qsalab command-line frontend. Every subcommand resolves its settings from
// built-in defaults, then an optional JSON config file, then flags, and
// embeds the resolved settings in its report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsalab/qsalab.hpp"

namespace {

using nlohmann::json;
using namespace qsalab;

struct Flags {
  std::optional<std::string> config, instance, variant, out, format;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<int> max_n;
  // spectrum
  std::optional<std::string> betas, method;
  // gibbs
  std::optional<double> beta;
  // sa, qsa, compare, scaling
  std::optional<double> c_sa, delta, laziness, c_markov;
  std::optional<std::uint64_t> trials, m, steps_per_temperature, seeds, r, rounds;
  std::optional<std::string> instances, knobs;
  bool full_trace = false;
};

const std::vector<std::string> kConfigKeys = {
    "instance", "epsilon", "seed",  "variant", "threads", "max_n", "format", "out",
    "betas",    "method",  "beta",  "c_sa",    "delta",   "laziness", "c_markov",
    "trials",   "m",       "steps_per_temperature", "seeds", "r", "rounds",
    "instances", "knobs",  "full_trace", "command", "family"};

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config", "cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw UsageError("config", "malformed config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config", "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
      throw UsageError("config", "unknown config key \"" + key + "\"");
  }
  return doc;
}

template <typename T>
T pick(const std::optional<T>& flag, const json& cfg, const char* key, T fallback) {
  if (flag) return *flag;
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config", std::string("config key \"") + key + "\" has the wrong type");
  }
}

std::vector<double> parse_reals(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item.substr(b), &used);
    } catch (const std::exception&) {
      throw UsageError("cli", std::string("cannot parse ") + what + " entry \"" + item + "\"");
    }
    if (item.find_first_not_of(" \t", b + used) != std::string::npos)
      throw UsageError("cli", std::string("cannot parse ") + what + " entry \"" + item + "\"");
    out.push_back(v);
  }
  return out;
}

/// Real list from a comma-separated flag or a JSON array in the config.
std::optional<std::vector<double>> pick_reals(const std::optional<std::string>& flag, const json& cfg,
                                              const char* key) {
  if (flag) return parse_reals(*flag, key);
  if (!cfg.contains(key)) return std::nullopt;
  try {
    return cfg.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw UsageError("config", std::string("config key \"") + key + "\" must be an array of numbers");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<NamedInstance> bundled_group(const std::string& name) {
  if (name == "bundled:demo") return bundled::demo();
  if (name == "bundled:all") return bundled::all();
  return {};
}

/// "bundled:<name>" or a path to an instance document.
ProblemInstance load_source(const std::string& source) {
  constexpr std::string_view prefix = "bundled:";
  if (source.starts_with(prefix)) return bundled::by_name(source.substr(prefix.size()));
  return load_instance_file(source);
}

std::string source_id(const std::string& source) {
  constexpr std::string_view prefix = "bundled:";
  if (source.starts_with(prefix)) return source.substr(prefix.size());
  return std::filesystem::path(source).stem().string();
}

SpectrumMethod parse_method(const std::string& s) {
  if (s == "automatic" || s == "auto") return SpectrumMethod::automatic;
  if (s == "relevant" || s == "relevant_subspace") return SpectrumMethod::relevant_subspace;
  if (s == "shortcut" || s == "discriminant_shortcut") return SpectrumMethod::discriminant_shortcut;
  throw UsageError("cli", "unknown spectrum method \"" + s + "\"");
}

/// Settings shared by every subcommand, after merging.
struct Common {
  std::string command;
  json config = json::object();  // resolved values, echoed into reports
  json file = json::object();    // raw config file contents
  std::string instance;
  double epsilon = 0.2;
  std::uint64_t seed = 0;
  WalkVariant variant = WalkVariant::two_reflection;
  unsigned threads = 1;
  int max_n = kDefaultWalkBits;
  ReportFormat format = ReportFormat::csv;
  std::string out;
};

Common resolve_common(const std::string& command, const Flags& f, ReportFormat default_format) {
  Common c;
  c.command = command;
  if (f.config) c.file = read_config(*f.config);
  if (c.file.contains("command") && c.file["command"] != command)
    throw UsageError("config", "config was written for subcommand " + c.file["command"].dump());

  const std::string default_instance = (command == "compare" || command == "scaling") ? "" : "bundled:two_state";
  if (f.instance) {
    c.instance = *f.instance;
  } else if (c.file.contains("instance")) {
    if (!c.file["instance"].is_string()) throw UsageError("config", "config key \"instance\" must be a string");
    c.instance = c.file["instance"].get<std::string>();
  } else {
    c.instance = default_instance;
  }
  c.epsilon = pick(f.epsilon, c.file, "epsilon", 0.2);
  c.seed = pick(f.seed, c.file, "seed", std::uint64_t{0});
  c.variant = parse_walk_variant(pick(f.variant, c.file, "variant", std::string("two_reflection")));
  c.threads = pick(f.threads, c.file, "threads", 1u);
  c.max_n = pick(f.max_n, c.file, "max_n", kDefaultWalkBits);
  const std::string fmt = pick(f.format, c.file, "format",
                               std::string(default_format == ReportFormat::csv ? "csv" : "json"));
  c.format = parse_report_format(fmt);
  c.out = pick(f.out, c.file, "out", std::string());
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw UsageError("cli", "--epsilon must lie in (0, 1)");
  if (c.threads < 1) throw UsageError("cli", "--threads must be >= 1");
  if (c.max_n < 1 || c.max_n > kMaxWalkBits)
    throw UsageError("cli", "--max-n must lie in [1, " + std::to_string(kMaxWalkBits) + "]");

  c.config = {{"command", command},        {"epsilon", c.epsilon},
              {"seed", c.seed},            {"variant", to_string(c.variant)},
              {"threads", c.threads},      {"max_n", c.max_n},
              {"format", fmt}};
  if (!c.instance.empty()) c.config["instance"] = c.instance;
  if (!c.out.empty()) c.config["out"] = c.out;
  return c;
}

ProblemInstance load_checked(const Common& c) {
  ProblemInstance inst = load_source(c.instance);
  if (inst.n() > c.max_n)
    throw CapError("cli", "instance has n = " + std::to_string(inst.n()) + " above --max-n " +
                              std::to_string(c.max_n));
  return inst;
}

/// Writes the table (and, for JSON, the extras) to --out or stdout. CSV
/// reports written to a file get a sidecar <out>.config.json with the config
/// and extras.
void emit(const Common& c, const Table& table, const json& extras, const json* rows_override = nullptr) {
  std::ostringstream body;
  json meta = {{"command", c.command}, {"config", c.config}};
  for (const auto& [k, v] : extras.items()) meta[k] = v;
  if (c.format == ReportFormat::csv) {
    write_csv(table, body);
  } else {
    meta["rows"] = rows_override ? *rows_override : table_json(table);
    body << meta.dump(2) << '\n';
  }
  if (c.out.empty()) {
    std::cout << body.str();
    std::cout.flush();
    if (!std::cout) throw Error(ErrorKind::data, "report", "write to stdout failed");
    return;
  }
  write_text_file(c.out, body.str());
  if (c.format == ReportFormat::csv) write_text_file(c.out + ".config.json", meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const Flags& f) {
  Common c = resolve_common("spectrum", f, ReportFormat::csv);
  const auto inst = load_checked(c);
  std::vector<double> betas;
  if (auto grid = pick_reals(f.betas, c.file, "betas")) {
    betas = *grid;
    if (betas.empty()) throw UsageError("spectrum", "empty beta grid");
  } else {
    // Nine points over [0, beta_m].
    const double bm = terminal_beta(inst, c.epsilon).value;
    for (int k = 0; k <= 8; ++k) betas.push_back(bm * k / 8.0);
  }
  for (double b : betas)
    if (!(b >= 0.0) || !std::isfinite(b)) throw UsageError("spectrum", "beta grid entries must be finite and >= 0");
  SpectrumOptions opt;
  opt.method = parse_method(pick(f.method, c.file, "method", std::string("automatic")));
  c.config["betas"] = betas;
  c.config["method"] = to_string(opt.method);

  std::vector<SpectralReport> chains(betas.size());
  std::vector<WalkSpectrum> walks(betas.size());
  parallel_for(betas.size(), c.threads, [&](std::size_t k) {
    const auto s = metropolis(inst, betas[k]);
    chains[k] = spectral_report(s, opt.chain);
    walks[k] = walk_spectrum(build_walk(s, c.variant), opt);
  });

  std::size_t width = 0;
  for (const auto& w : walks) width = std::max(width, w.phases.size());
  Table t;
  t.columns = {"beta", "gap", "absolute_gap", "sqrt_gap", "phase_gap", "method", "subspace_dimension"};
  for (std::uint64_t k = 0; k < inst.dimension(); ++k) t.columns.push_back("lambda_" + std::to_string(k));
  for (std::size_t k = 0; k < width; ++k) t.columns.push_back("phi_" + std::to_string(k));
  json rows = json::array();
  for (std::size_t r = 0; r < betas.size(); ++r) {
    const auto& w = walks[r];
    std::vector<Cell> row = {betas[r], chains[r].gap, chains[r].absolute_gap, std::sqrt(chains[r].gap)};
    row.push_back(w.phase_gap ? Cell(*w.phase_gap) : Cell(std::string()));
    row.push_back(std::string(to_string(w.method)));
    row.push_back(static_cast<std::uint64_t>(w.subspace_dimension));
    for (double l : chains[r].eigenvalues) row.push_back(l);
    for (std::size_t k = 0; k < width; ++k) row.push_back(k < w.phases.size() ? Cell(w.phases[k]) : Cell(std::string()));
    t.rows.push_back(row);

    auto round = [](double v) { return std::strtod(format_real(v).c_str(), nullptr); };
    json obj = {{"beta", round(betas[r])},
                {"gap", round(chains[r].gap)},
                {"absolute_gap", round(chains[r].absolute_gap)},
                {"sqrt_gap", round(std::sqrt(chains[r].gap))},
                {"phase_gap", w.phase_gap ? json(round(*w.phase_gap)) : json(nullptr)},
                {"method", to_string(w.method)},
                {"subspace_dimension", w.subspace_dimension},
                {"invariance_residual", round(w.invariance_residual)}};
    json ev = json::array(), ph = json::array();
    for (double l : chains[r].eigenvalues) ev.push_back(round(l));
    for (double p : w.phases) ph.push_back(round(p));
    obj["eigenvalues"] = ev;
    obj["phases"] = ph;
    rows.push_back(obj);
  }
  emit(c, t, json::object(), &rows);
  return 0;
}

int cmd_gibbs(const Flags& f) {
  Common c = resolve_common("gibbs", f, ReportFormat::csv);
  const auto inst = load_source(c.instance);
  const double beta = pick(f.beta, c.file, "beta", terminal_beta(inst, c.epsilon).value);
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw UsageError("gibbs", "--beta must be finite and >= 0");
  c.config["beta"] = beta;
  const auto g = gibbs(inst, beta);
  Table t;
  t.columns = {"index", "config", "energy", "probability", "optimal"};
  for (std::uint64_t i = 0; i < inst.dimension(); ++i)
    t.rows.push_back({i, to_bit_string({i}, inst.n()), inst.energy(i), g.probabilities[i],
                      static_cast<std::int64_t>(inst.is_optimal(i))});
  emit(c, t, {{"optimal_mass", optimal_mass(inst, g.probabilities)}, {"gamma", inst.gamma()}});
  return 0;
}

QsaOptions qsa_options(const Flags& f, Common& c, bool with_rounds = true) {
  QsaOptions q;
  q.max_n = c.max_n;
  q.gap.threads = c.threads;
  if (with_rounds) {
    q.randomization_rounds = pick(f.r, c.file, "r", std::uint64_t{1});
    c.config["r"] = q.randomization_rounds;
  }
  if (f.delta || c.file.contains("delta")) {
    q.delta = pick(f.delta, c.file, "delta", 0.0);
    c.config["delta"] = *q.delta;
  }
  return q;
}

SaOptions sa_options(const Flags& f, Common& c) {
  SaOptions s;
  s.c_sa = pick(f.c_sa, c.file, "c_sa", 1.0);
  s.laziness = pick(f.laziness, c.file, "laziness", 1.0);
  s.steps_per_temperature = pick(f.steps_per_temperature, c.file, "steps_per_temperature", std::uint64_t{1});
  c.config["c_sa"] = s.c_sa;
  c.config["laziness"] = s.laziness;
  c.config["steps_per_temperature"] = s.steps_per_temperature;
  return s;
}

int cmd_sa(const Flags& f) {
  Common c = resolve_common("sa", f, ReportFormat::json);
  const auto inst = load_source(c.instance);
  const QsaOptions qo = qsa_options(f, c, false);
  const SaOptions so = sa_options(f, c);
  const std::uint64_t trials = pick(f.trials, c.file, "trials", std::uint64_t{0});
  c.config["trials"] = trials;

  const double delta = qo.delta ? *qo.delta : build_qsa_schedule(inst, c.epsilon, qo).delta_used;
  SaSchedule schedule = build_sa_schedule(inst, delta, c.epsilon, so);
  if (f.m || c.file.contains("m")) {
    schedule.m = pick(f.m, c.file, "m", std::uint64_t{0});
    c.config["m"] = schedule.m;
  }
  const auto exact = propagate_exact(inst, schedule);

  std::vector<std::uint8_t> hit(trials);
  parallel_for(trials, c.threads, [&](std::size_t k) {
    hit[k] = inst.is_optimal(run_sa_chain(inst, schedule, derive_seed(c.seed, k)).index) ? 1 : 0;
  });
  std::uint64_t hits = 0;
  for (auto h : hit) hits += h;
  const double freq = trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  const double err = trials ? std::sqrt(freq * (1.0 - freq) / static_cast<double>(trials)) : 0.0;

  Table t;
  t.columns = {"instance_id", "n", "epsilon", "delta", "m", "cost", "exact_success", "tv_to_gibbs",
               "trials", "mc_success_frequency", "mc_success_stderr"};
  t.rows.push_back({source_id(c.instance), static_cast<std::int64_t>(inst.n()), c.epsilon, delta, schedule.m,
                    sa_cost(schedule), exact.success_probability, exact.tv_to_gibbs, trials, freq, err});
  json extras = {{"schedule", to_json(schedule)}};
  if (inst.dimension() <= 1024) extras["final_distribution"] = exact.distribution;
  emit(c, t, extras);
  return 0;
}

int cmd_qsa(const Flags& f) {
  Common c = resolve_common("qsa", f, ReportFormat::json);
  const auto inst = load_checked(c);
  const QsaOptions qo = qsa_options(f, c);
  const std::uint64_t seeds = pick(f.seeds, c.file, "seeds", std::uint64_t{1});
  const bool full_trace = f.full_trace || (c.file.contains("full_trace") && c.file["full_trace"].get<bool>());
  c.config["seeds"] = seeds;
  c.config["full_trace"] = full_trace;
  if (seeds < 1) throw UsageError("qsa", "--seeds must be >= 1");

  const auto schedule = build_qsa_schedule(inst, c.epsilon, qo);
  json extras = {{"schedule", to_json(schedule)}};
  Table t;

  if (f.rounds || c.file.contains("rounds")) {
    RepeatOptions ro;
    ro.c_markov = pick(f.c_markov, c.file, "c_markov", 4.0);
    ro.variant = c.variant;
    ro.qsa = qo;
    ro.qsa.delta = schedule.delta_used;
    const std::uint64_t rounds = pick(f.rounds, c.file, "rounds", std::uint64_t{1});
    c.config["rounds"] = rounds;
    c.config["c_markov"] = ro.c_markov;
    std::vector<RepeatResult> res(seeds);
    parallel_for(seeds, c.threads, [&](std::size_t k) {
      res[k] = repeat_until_success(inst, c.epsilon, rounds, derive_seed(c.seed, k), ro);
    });
    t.columns = {"run", "seed", "rounds_used", "attempts", "aborted_runs", "certified", "best_config", "best_energy"};
    std::uint64_t failures = 0, attempts = 0, aborts = 0;
    for (std::size_t k = 0; k < seeds; ++k) {
      const auto& r = res[k];
      failures += r.certified ? 0 : 1;
      attempts += r.attempts;
      aborts += r.aborted_runs;
      t.rows.push_back({static_cast<std::uint64_t>(k), derive_seed(c.seed, k), r.rounds_used, r.attempts,
                        r.aborted_runs, static_cast<std::int64_t>(r.certified), r.best.index, r.best_energy});
    }
    extras["summary"] = {{"failure_frequency", static_cast<double>(failures) / static_cast<double>(seeds)},
                         {"abort_fraction", attempts ? static_cast<double>(aborts) / static_cast<double>(attempts) : 0.0}};
    emit(c, t, extras);
    return 0;
  }

  const QsaRunner runner(inst, schedule, c.variant, c.max_n);
  std::vector<QsaRunTrace> traces(seeds);
  parallel_for(seeds, c.threads, [&](std::size_t k) { traces[k] = runner.run(derive_seed(c.seed, k)); });

  t.columns = {"run", "seed", "total_applications", "measured_config", "measured_energy", "measured_optimal",
               "exact_success", "final_norm"};
  double mean = 0.0;
  std::uint64_t hits = 0;
  json trace_docs = json::array();
  for (std::size_t k = 0; k < seeds; ++k) {
    const auto& tr = traces[k];
    const auto idx = tr.measured->index;
    const bool opt = inst.is_optimal(idx);
    hits += opt ? 1 : 0;
    mean += *tr.exact_success;
    t.rows.push_back({static_cast<std::uint64_t>(k), tr.seed, tr.total_applications, to_bit_string({idx}, inst.n()),
                      inst.energy(idx), static_cast<std::int64_t>(opt), *tr.exact_success, tr.final_norm});
    trace_docs.push_back(to_json(tr, schedule, c.variant, full_trace));
  }
  mean /= static_cast<double>(seeds);
  double var = 0.0;
  for (const auto& tr : traces) var += (*tr.exact_success - mean) * (*tr.exact_success - mean);
  const double stderr_ = seeds > 1 ? std::sqrt(var / static_cast<double>(seeds - 1) / static_cast<double>(seeds)) : 0.0;
  extras["summary"] = {{"exact_success_mean", mean},
                       {"exact_success_stderr", stderr_},
                       {"measured_success_frequency", static_cast<double>(hits) / static_cast<double>(seeds)}};
  extras["traces"] = trace_docs;
  emit(c, t, extras);
  return 0;
}

LabOptions lab_options(const Flags& f, Common& c) {
  LabOptions lo;
  lo.qsa = qsa_options(f, c);
  lo.sa = sa_options(f, c);
  lo.variant = c.variant;
  lo.master_seed = c.seed;
  lo.threads = c.threads;
  return lo;
}

int cmd_compare(const Flags& f) {
  Common c = resolve_common("compare", f, ReportFormat::csv);
  std::vector<std::string> sources;
  if (f.instances) {
    sources = split_list(*f.instances);
  } else if (c.file.contains("instances")) {
    try {
      sources = c.file["instances"].get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw UsageError("config", "config key \"instances\" must be an array of strings");
    }
  } else if (!c.instance.empty()) {
    sources = {c.instance};
  } else {
    sources = {"bundled:demo"};
  }
  std::vector<NamedInstance> list;
  for (const auto& s : sources) {
    auto group = bundled_group(s);
    if (!group.empty()) {
      list.insert(list.end(), group.begin(), group.end());
      continue;
    }
    list.push_back({source_id(s), load_source(s)});
  }
  for (const auto& ni : list)
    if (ni.instance.n() > c.max_n)
      throw CapError("cli", ni.id + " has n = " + std::to_string(ni.instance.n()) + " above --max-n " +
                                std::to_string(c.max_n));
  c.config["instances"] = sources;
  const std::uint64_t seeds = pick(f.seeds, c.file, "seeds", std::uint64_t{20});
  c.config["seeds"] = seeds;
  const LabOptions lo = lab_options(f, c);
  const auto rows = compare(list, c.epsilon, seeds, lo);
  emit(c, comparison_table(rows), json::object());
  return 0;
}

int cmd_scaling(const Flags& f) {
  Common c = resolve_common("scaling", f, ReportFormat::csv);
  std::vector<double> knobs(bundled::kFamilyKnobs.begin(), bundled::kFamilyKnobs.end());
  if (auto k = pick_reals(f.knobs, c.file, "knobs")) knobs = *k;
  for (double k : knobs)
    if (!(k > 0.0 && k <= bundled::kFamilyEMax - 4.0))
      throw UsageError("scaling", "knobs must lie in (0, " + format_real(bundled::kFamilyEMax - 4.0) + "]");
  const std::uint64_t seeds = pick(f.seeds, c.file, "seeds", std::uint64_t{4});
  if (c.file.contains("family") && c.file["family"] != "stiff6")
    throw UsageError("config", "only the stiff6 family is available");
  c.config["family"] = "stiff6";
  c.config["knobs"] = knobs;
  c.config["seeds"] = seeds;
  const LabOptions lo = lab_options(f, c);
  const auto res = scaling_study(bundled::stiff_family(), knobs, c.epsilon, seeds, lo);
  emit(c, scaling_table(res.points), {{"qsa_slope", res.qsa_slope}, {"sa_slope", res.sa_slope}});
  return 0;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  app->add_option("--instance", f.instance, "Instance file or bundled:<name>");
  app->add_option("--epsilon", f.epsilon, "Target error (default 0.2)");
  app->add_option("--seed", f.seed, "Master seed (default 0)");
  app->add_option("--variant", f.variant, "Walk variant: two-reflection (default) or literal");
  app->add_option("--out", f.out, "Output path (default stdout)");
  app->add_option("--threads", f.threads, "Worker threads (default 1)");
  app->add_option("--max-n", f.max_n, "Largest n for state-vector work");
  app->add_option("--format", f.format, "csv or json");
}

void add_schedule_knobs(CLI::App* app, Flags& f) {
  app->add_option("--delta", f.delta, "Gap bound; computed over the schedule grid when absent");
  app->add_option("--c-sa", f.c_sa, "SA increment scale (default 1)");
  app->add_option("--laziness", f.laziness, "SA laziness in (0, 1] (default 1)");
  app->add_option("--steps-per-temperature", f.steps_per_temperature, "SA steps per temperature (default 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsalab: classical and quantum-walk simulated annealing on small instances"};
  app.require_subcommand(1);
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "Chain eigenvalues, gaps and walk phases over a beta grid");
  add_common(spectrum, f);
  spectrum->add_option("--betas", f.betas, "Comma-separated beta grid (default 9 points over [0, beta_m])");
  spectrum->add_option("--method", f.method, "automatic, relevant or shortcut");

  auto* gibbs_cmd = app.add_subcommand("gibbs", "Gibbs distribution at one inverse temperature");
  add_common(gibbs_cmd, f);
  gibbs_cmd->add_option("--beta", f.beta, "Inverse temperature (default beta_m)");

  auto* sa = app.add_subcommand("sa", "Exact SA propagation and optional Monte Carlo trials");
  add_common(sa, f);
  add_schedule_knobs(sa, f);
  sa->add_option("--trials", f.trials, "Monte Carlo trajectories (default 0)");
  sa->add_option("--m", f.m, "Override the number of schedule steps");

  auto* qsa = app.add_subcommand("qsa", "Quantum simulated annealing runs");
  add_common(qsa, f);
  qsa->add_option("--delta", f.delta, "Gap bound; computed over the schedule grid when absent");
  qsa->add_option("--seeds", f.seeds, "Number of runs (default 1)");
  qsa->add_option("--r", f.r, "Randomization rounds per temperature (default 1)");
  qsa->add_option("--rounds", f.rounds, "Repeat until success with this many rounds per run");
  qsa->add_option("--c-markov", f.c_markov, "Cost cutoff multiple for repeated runs (default 4)");
  qsa->add_flag("--full-trace", f.full_trace, "Embed every t_k in the JSON traces");

  auto* cmp = app.add_subcommand("compare", "SA versus QSA cost and success table");
  add_common(cmp, f);
  add_schedule_knobs(cmp, f);
  cmp->add_option("--instances", f.instances, "Comma-separated sources; bundled:demo and bundled:all expand");
  cmp->add_option("--seeds", f.seeds, "QSA seeds per instance (default 20)");
  cmp->add_option("--r", f.r, "Randomization rounds per temperature (default 1)");

  auto* scaling = app.add_subcommand("scaling", "Cost scaling over the stiff-bond family");
  add_common(scaling, f);
  add_schedule_knobs(scaling, f);
  scaling->add_option("--knobs", f.knobs, "Comma-separated bond strengths (default 1,1.25,1.5,1.75)");
  scaling->add_option("--seeds", f.seeds, "QSA seeds per point (default 4)");
  scaling->add_option("--r", f.r, "Randomization rounds per temperature (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "qsalab: usage: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::usage);
  }

  const std::vector<std::pair<CLI::App*, std::function<int(const Flags&)>>> commands = {
      {spectrum, cmd_spectrum}, {gibbs_cmd, cmd_gibbs}, {sa, cmd_sa},
      {qsa, cmd_qsa},           {cmp, cmd_compare},     {scaling, cmd_scaling}};
  std::string stage = "cli";
  try {
    for (const auto& [sub, run] : commands) {
      if (!sub->parsed()) continue;
      stage = sub->get_name();
      return run(f);
    }
  } catch (const Error& e) {
    // what() already starts with the stage that raised it.
    std::cerr << "qsalab " << stage << " failed in " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::cerr << "qsalab " << stage << " failed: out of memory\n";
    return static_cast<int>(ErrorKind::numerical);
  } catch (const std::exception& e) {
    std::cerr << "qsalab " << stage << " failed: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numerical);
  }
  return static_cast<int>(ErrorKind::usage);
}
