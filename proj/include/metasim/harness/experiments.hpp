#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "metasim/harness/config_io.hpp"
#include "metasim/sim/simulator.hpp"
#include "metasim/workloads/instrument.hpp"
#include "metasim/workloads/trace_spec.hpp"

namespace metasim {

struct ExperimentOptions {
  SimConfig base;
  std::uint64_t seed = 1;
  unsigned reps = 5;
  /// Replaces the experiment's default traces with this one (spec or file).
  std::optional<std::string> trace;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct ResultRow {
  std::string experiment;
  std::string trace;
  std::string variant;
  std::string sweep_param;
  std::string sweep_value;
  unsigned rep = 0;
  std::uint64_t seed = 0;
  bool baseline = false;
  Stats stats;
  std::uint64_t baseline_cycles = 0;
  std::uint64_t baseline_mem_accesses = 0;
  /// Spread of normalized time over the repetitions of the same cell.
  double normalized_mean = 0;
  double normalized_min = 0;
  double normalized_max = 0;
  std::size_t unbound_ops = 0;
  bool terminated = false;
  std::vector<TrapRecord> traps;

  double normalized_time() const {
    return baseline_cycles == 0 ? 0.0 : static_cast<double>(stats.cycles) / static_cast<double>(baseline_cycles);
  }
  std::int64_t extra_mem_accesses() const {
    return static_cast<std::int64_t>(stats.mem_accesses) - static_cast<std::int64_t>(baseline_mem_accesses);
  }
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "lookup_triggers", "bandwidth",  "mmc_size",         "granularity",    "translation", "contention",
      "mitigation",      "op_density", "usecase_prefetch", "usecase_bounds", "usecase_rap", "single"};
  return names;
}

/// Seed of repetition `rep` (splitmix64 of the experiment seed).
inline std::uint64_t rep_seed(std::uint64_t seed, unsigned rep) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (rep + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

struct NamedTrace {
  std::string name;
  std::shared_ptr<const Trace> trace;
};

struct Cell {
  NamedTrace trace;
  std::string variant;
  std::string sweep_param;
  std::string sweep_value;
  SimConfig cfg;
  /// Cells sharing a group are normalized against the group's baseline cell.
  std::string group;
  bool baseline = false;
};

class Plan {
 public:
  explicit Plan(const ExperimentOptions& opt) : opt_(opt) {}

  NamedTrace trace(const std::string& default_spec) {
    const auto arg = opt_.trace.value_or(default_spec);
    if (auto it = cache_.find(arg); it != cache_.end()) return it->second;
    NamedTrace t{arg, std::make_shared<const Trace>(load_or_generate(arg))};
    cache_.emplace(arg, t);
    return t;
  }

  std::vector<NamedTrace> traces(const std::vector<std::string>& defaults) {
    if (opt_.trace) return {trace(*opt_.trace)};
    std::vector<NamedTrace> out;
    for (const auto& d : defaults) out.push_back(trace(d));
    return out;
  }

  static NamedTrace derived(const NamedTrace& t, Trace d, const std::string& suffix) {
    return {t.name + suffix, std::make_shared<const Trace>(std::move(d))};
  }

  SimConfig config(std::vector<ClientSpec> clients) const {
    auto c = opt_.base;
    c.clients = std::move(clients);
    return c;
  }

  void add(Cell c) { cells.push_back(std::move(c)); }

  std::vector<Cell> cells;

 private:
  const ExperimentOptions& opt_;
  std::map<std::string, NamedTrace> cache_;
};

inline std::string interval_label(Cycle interval, Cycle base) {
  if (interval == base) return "1x";
  if (interval > base) return "1/" + std::to_string(interval / base) + "x";
  return std::to_string(base / interval) + "x";
}

inline void plan_lookup_triggers(Plan& p) {
  for (const auto& t : p.traces({"stream", "3d_array", "linked_list", "random"})) {
    p.add({t, "baseline", "trigger", "none", p.config({}), t.name, true});
    p.add({t, "all_access", "trigger", "all_access", p.config({client(ClientKind::NullAll)}), t.name});
    p.add({t, "miss_only", "trigger", "miss_only", p.config({client(ClientKind::NullMiss)}), t.name});
  }
}

inline void plan_bandwidth(Plan& p, const SimConfig& base) {
  const auto nominal = base.machine.mem_issue_interval_cycles;
  for (const auto& t : p.traces({"random", "linked_list", "stream"})) {
    for (const Cycle interval : {nominal * 2, nominal, std::max<Cycle>(1, nominal / 2)}) {
      const auto label = interval_label(interval, nominal);
      const auto group = t.name + "/" + label;
      auto b = p.config({});
      b.machine.mem_issue_interval_cycles = interval;
      auto m = p.config({client(ClientKind::NullAll)});
      m.machine.mem_issue_interval_cycles = interval;
      p.add({t, "baseline", "bandwidth", label, b, group, true});
      p.add({t, "metasys", "bandwidth", label, m, group});
    }
  }
}

inline void plan_mmc_size(Plan& p) {
  for (const auto& t : p.traces({"stream", "linked_list", "random"})) {
    p.add({t, "baseline", "mmc_entries", "none", p.config({}), t.name, true});
    for (const std::uint64_t e : {16, 32, 64, 128, 256, 512}) {
      auto c = p.config({client(ClientKind::NullAll)});
      c.meta.mmc_entries = e;
      p.add({t, "metasys", "mmc_entries", std::to_string(e), c, t.name});
    }
  }
}

inline void plan_granularity(Plan& p) {
  for (const auto& t : p.traces({"stream", "linked_list", "random", "3d_array"})) {
    p.add({t, "baseline", "granularity_bytes", "none", p.config({}), t.name, true});
    for (const std::uint64_t g : {64, 128, 256, 512, 1024, 2048}) {
      auto c = p.config({client(ClientKind::NullAll)});
      c.meta.granularity_bytes = g;
      p.add({t, "metasys", "granularity_bytes", std::to_string(g), c, t.name});
    }
  }
}

inline void plan_translation(Plan& p) {
  for (const auto& t : p.traces({"random", "linked_list", "graph"})) {
    const auto base = t.trace->header.generator == "graph" ? Plan::derived(t, strip_metadata_ops(*t.trace), "") : t;
    auto clients = std::vector<ClientSpec>{client(ClientKind::NullAll)};
    p.add({base, "baseline", "translation_mode", "none", p.config({}), t.name, true});
    auto v = p.config(clients);
    v.meta.translation_mode = TranslationMode::Virtual;
    auto ph = p.config(clients);
    ph.meta.translation_mode = TranslationMode::Physical;
    p.add({base, "virtual", "translation_mode", "virtual", v, t.name});
    p.add({base, "physical", "translation_mode", "physical", ph, t.name});
  }
}

inline const std::vector<std::string>& contention_traces() {
  static const std::vector<std::string> t = {"random", "3d_array:dx=1100,dy=32,dz=40,x_steps=64", "linked_list"};
  return t;
}

inline void plan_contention(Plan& p) {
  for (const auto& t : p.traces(contention_traces())) {
    p.add({t, "baseline", "clients", "none", p.config({}), t.name, true});
    p.add({t, "one_client", "clients", "1", p.config({client(ClientKind::NullAll)}), t.name});
    p.add({t, "two_clients", "clients", "2",
           p.config({client(ClientKind::NullAll), client(ClientKind::TlbMiss)}), t.name});
  }
}

inline void plan_mitigation(Plan& p) {
  const std::vector<ClientSpec> two = {client(ClientKind::NullAll), client(ClientKind::TlbMiss)};
  for (const auto& t : p.traces(contention_traces())) {
    p.add({t, "baseline", "mitigation", "none", p.config({}), t.name, true});
    p.add({t, "shared", "mitigation", "shared", p.config(two), t.name});
    auto part = p.config(two);
    part.meta.mmc_mode = MmcMode::Partitioned;
    p.add({t, "partitioned", "mitigation", "partitioned", part, t.name});
    auto prio = p.config(two);
    prio.meta.mmc_mode = MmcMode::PrioritizedInsertion;
    prio.meta.priority_client = 1;
    p.add({t, "prioritized_insertion", "mitigation", "prioritized_insertion", prio, t.name});
    p.add({t, "no_stall", "mitigation", "no_stall",
           p.config({client(ClientKind::NullAll, LookupMode::NoStall), client(ClientKind::TlbMiss, LookupMode::NoStall)}),
           t.name});
  }
}

inline void plan_op_density(Plan& p) {
  for (const auto& t : p.traces({"stream", "3d_array"})) {
    const auto plain = Plan::derived(t, strip_metadata_ops(*t.trace), "");
    const auto cfg = p.config({client(ClientKind::Passive)});
    p.add({plain, "baseline", "op_every", "none", cfg, t.name, true});
    for (const std::uint64_t every : {8, 2}) {
      auto d = Plan::derived(t, insert_op_density(*plain.trace, every, ClientId{0}), "");
      p.add({d, "per_" + std::to_string(every), "op_every", std::to_string(every), cfg, t.name});
    }
  }
}

inline void plan_usecase_prefetch(Plan& p) {
  for (const auto& t : p.traces({"graph:seed=1", "graph:seed=2,degree=8", "graph:seed=3,vertices=16384,degree=2"})) {
    const auto plain = Plan::derived(t, strip_metadata_ops(*t.trace), "");
    p.add({plain, "baseline", "prefetcher", "none", p.config({}), t.name, true});
    auto stride = p.config({});
    stride.machine.stride_prefetch_degree = 2;
    p.add({plain, "stride", "prefetcher", "stride", stride, t.name});
    p.add({t, "graphpref", "prefetcher", "graphpref", p.config({client(ClientKind::GraphPrefetchIdeal)}), t.name});
    p.add({t, "metasys", "prefetcher", "metasys", p.config({client(ClientKind::GraphPrefetch)}), t.name});
  }
}

inline SimConfig safety_config(SimConfig c) {
  c.meta.granularity_bytes = 64;
  c.os.terminate_on_trap = false;
  return c;
}

inline void plan_usecase_bounds(Plan& p) {
  for (const auto& t : p.traces({"safety_bounds"})) {
    const auto plain = Plan::derived(t, strip_metadata_ops(*t.trace), "");
    const auto sw = Plan::derived(t, instrument_software_checks(*t.trace, SoftwareCheck::Bounds), "");
    p.add({plain, "baseline", "protection", "none", safety_config(p.config({})), t.name, true});
    p.add({sw, "software", "protection", "software", safety_config(p.config({})), t.name});
    p.add({t, "metasys", "protection", "metasys", safety_config(p.config({client(ClientKind::Bounds)})), t.name});
  }
}

inline void plan_usecase_rap(Plan& p) {
  for (const auto& t : p.traces({"safety_rap"})) {
    const auto plain = Plan::derived(t, strip_metadata_ops(*t.trace), "");
    const auto canary = Plan::derived(t, instrument_software_checks(*plain.trace, SoftwareCheck::Canary), "");
    p.add({plain, "baseline", "protection", "none", safety_config(p.config({})), t.name, true});
    p.add({canary, "canary", "protection", "canary", safety_config(p.config({})), t.name});
    p.add({plain, "metasys", "protection", "metasys", safety_config(p.config({client(ClientKind::Rap)})), t.name});
  }
}

/// The configured clients on one trace, against the same trace with no clients.
inline void plan_single(Plan& p, const SimConfig& base) {
  for (const auto& t : p.traces({"stream"})) {
    const auto plain = Plan::derived(t, strip_metadata_ops(*t.trace), "");
    p.add({plain, "baseline", "clients", "none", p.config({}), t.name, true});
    p.add({t, "configured", "clients", format_client_list(base.clients), base, t.name});
  }
}

inline std::vector<Cell> plan_experiment(const std::string& name, const ExperimentOptions& opt) {
  Plan p(opt);
  if (name == "lookup_triggers") plan_lookup_triggers(p);
  else if (name == "bandwidth") plan_bandwidth(p, opt.base);
  else if (name == "mmc_size") plan_mmc_size(p);
  else if (name == "granularity") plan_granularity(p);
  else if (name == "translation") plan_translation(p);
  else if (name == "contention") plan_contention(p);
  else if (name == "mitigation") plan_mitigation(p);
  else if (name == "op_density") plan_op_density(p);
  else if (name == "usecase_prefetch") plan_usecase_prefetch(p);
  else if (name == "usecase_bounds") plan_usecase_bounds(p);
  else if (name == "usecase_rap") plan_usecase_rap(p);
  else if (name == "single") plan_single(p, opt.base);
  else throw ConfigError("unknown experiment: " + name);
  return std::move(p.cells);
}

}  // namespace detail

/// Runs every (cell x repetition) of a named experiment and returns one row
/// per run, in plan order.
inline std::vector<ResultRow> run_experiment(const std::string& name, const ExperimentOptions& opt) {
  if (opt.reps == 0) throw ConfigError("reps must be >= 1");
  opt.base.validate();
  const auto cells = detail::plan_experiment(name, opt);
  const std::size_t jobs = cells.size() * opt.reps;
  std::vector<ResultRow> rows(jobs);

  auto work = [&](std::size_t job) {
    const auto& cell = cells[job / opt.reps];
    const auto rep = static_cast<unsigned>(job % opt.reps);
    auto cfg = cell.cfg;
    cfg.seed = rep_seed(opt.seed, rep);
    const auto r = run_one(cfg, *cell.trace.trace);
    auto& row = rows[job];
    row.experiment = name;
    row.trace = cell.trace.name;
    row.variant = cell.variant;
    row.sweep_param = cell.sweep_param;
    row.sweep_value = cell.sweep_value;
    row.rep = rep;
    row.seed = cfg.seed;
    row.baseline = cell.baseline;
    row.stats = r.stats;
    row.unbound_ops = r.unbound_ops;
    row.terminated = r.terminated;
    row.traps = r.traps;
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) work(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t j; (j = next.fetch_add(1)) < jobs;) work(j);
        } catch (...) {
          errors[w] = std::current_exception();
          next = jobs;
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Normalize against the baseline cell of the same group and repetition.
  std::map<std::pair<std::string, unsigned>, const ResultRow*> base;
  for (std::size_t j = 0; j < jobs; ++j)
    if (cells[j / opt.reps].baseline) base[{cells[j / opt.reps].group, rows[j].rep}] = &rows[j];
  for (std::size_t j = 0; j < jobs; ++j) {
    const auto it = base.find({cells[j / opt.reps].group, rows[j].rep});
    if (it == base.end()) continue;
    rows[j].baseline_cycles = it->second->stats.cycles;
    rows[j].baseline_mem_accesses = it->second->stats.mem_accesses;
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double sum = 0, lo = 0, hi = 0;
    for (unsigned r = 0; r < opt.reps; ++r) {
      const double v = rows[c * opt.reps + r].normalized_time();
      sum += v;
      lo = r == 0 ? v : std::min(lo, v);
      hi = r == 0 ? v : std::max(hi, v);
    }
    for (unsigned r = 0; r < opt.reps; ++r) {
      auto& row = rows[c * opt.reps + r];
      row.normalized_mean = sum / opt.reps;
      row.normalized_min = lo;
      row.normalized_max = hi;
    }
  }
  return rows;
}

/// Mean of a per-row metric over the rows matching trace and variant.
template <class F>
double mean_of(const std::vector<ResultRow>& rows, const std::string& trace, const std::string& variant,
               const std::string& sweep_value, F metric) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.trace == trace && r.variant == variant && (sweep_value.empty() || r.sweep_value == sweep_value)) {
      sum += metric(r);
      ++n;
    }
  if (n == 0) throw ConfigError("no rows for " + trace + "/" + variant + "/" + sweep_value);
  return sum / static_cast<double>(n);
}

}  // namespace metasim
