#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metasim/clients/bounds.hpp"
#include "metasim/clients/client.hpp"
#include "metasim/clients/graph_prefetch.hpp"
#include "metasim/clients/null_client.hpp"
#include "metasim/clients/rap.hpp"
#include "metasim/workloads/trace.hpp"

namespace metasim {

enum class ClientKind { NullAll, NullMiss, TlbMiss, Bounds, Rap, GraphPrefetch, GraphPrefetchIdeal, Passive };

inline constexpr std::string_view kClientNames[] = {
    "null_all", "null_miss", "tlb_miss", "bounds", "rap", "graph_prefetch", "graph_prefetch_ideal", "passive"};

inline std::string_view to_string(ClientKind k) { return kClientNames[static_cast<int>(k)]; }

inline ClientKind parse_client_kind(std::string_view name) {
  for (int i = 0; i < static_cast<int>(std::size(kClientNames)); ++i)
    if (kClientNames[i] == name) return static_cast<ClientKind>(i);
  throw ConfigError("unknown client: " + std::string(name));
}

inline std::string_view to_string(LookupMode m) {
  switch (m) {
    case LookupMode::ForceStall: return "force_stall";
    case LookupMode::NoStall: return "no_stall";
    case LookupMode::BestEffort: return "best_effort";
  }
  return "?";
}

inline LookupMode parse_lookup_mode(std::string_view s) {
  if (s == "force_stall") return LookupMode::ForceStall;
  if (s == "no_stall") return LookupMode::NoStall;
  if (s == "best_effort") return LookupMode::BestEffort;
  throw ConfigError("unknown lookup mode: " + std::string(s));
}

inline LookupMode default_lookup_mode(ClientKind k) {
  return k == ClientKind::GraphPrefetch ? LookupMode::BestEffort : LookupMode::ForceStall;
}

struct ClientSpec {
  ClientKind kind = ClientKind::NullAll;
  LookupMode mode = LookupMode::ForceStall;
  friend bool operator==(const ClientSpec&, const ClientSpec&) = default;
};

inline ClientSpec client(ClientKind k) { return {k, default_lookup_mode(k)}; }
inline ClientSpec client(ClientKind k, LookupMode m) { return {k, m}; }

struct SimConfig {
  MachineConfig machine;
  MetadataConfig meta;
  OsConfig os;
  /// Registered in order; the first one gets client id 0.
  std::vector<ClientSpec> clients;
  std::uint64_t seed = 1;

  void validate() const {
    machine.validate();
    meta.validate();
    if (clients.size() > 255) throw ConfigError("too many clients");
    if (meta.priority_client && *meta.priority_client >= clients.size())
      throw ConfigError("priority_client does not name a configured client");
  }
};

struct RunResult {
  Stats stats;
  std::vector<TrapRecord> traps;
  std::vector<Addr> prefetch_log;
  bool terminated = false;
  /// Operators still waiting for a load/store when the trace ended.
  std::size_t unbound_ops = 0;
};

inline std::unique_ptr<Client> make_client(ClientSpec spec, ClientId id) {
  switch (spec.kind) {
    case ClientKind::NullAll: return std::make_unique<NullClient>(id, spec.mode, TriggerPolicy::AllAccess);
    case ClientKind::NullMiss: return std::make_unique<NullClient>(id, spec.mode, TriggerPolicy::MissOnly);
    case ClientKind::TlbMiss: return std::make_unique<TlbMissClient>(id, spec.mode);
    case ClientKind::Bounds: return std::make_unique<BoundsClient>(id, spec.mode);
    case ClientKind::Rap: return std::make_unique<RapClient>(id, spec.mode);
    case ClientKind::GraphPrefetch: return std::make_unique<GraphPrefetcher>(id, spec.mode, false);
    case ClientKind::GraphPrefetchIdeal: return std::make_unique<GraphPrefetcher>(id, spec.mode, true);
    case ClientKind::Passive: return std::make_unique<PassiveClient>(id, spec.mode);
  }
  throw ConfigError("unknown client kind");
}

/// One simulated process running one trace on one machine.
class Simulator {
 public:
  Simulator(const SimConfig& cfg, const Trace& trace)
      : cfg_(validated(cfg)),
        trace_(&trace),
        process_(make_process(cfg_, trace)),
        machine_(cfg_.machine, process_.page_map, stats_),
        plane_(cfg_.meta, allocate_mmt(cfg_.meta.physical_memory_bytes, cfg_.meta.granularity_bytes,
                                       cfg_.machine.page_bytes),
               process_.mmt_vbase, static_cast<std::uint32_t>(std::max<std::size_t>(1, cfg_.clients.size())),
               cfg_.seed, stats_),
        executor_(plane_, machine_, stats_),
        env_{plane_, machine_, executor_, traps_, stats_, trace.image, process_, cfg_.os, &prefetch_log_} {
    for (std::size_t i = 0; i < cfg_.clients.size(); ++i) {
      const ClientId id(static_cast<std::uint8_t>(i));
      plane_.register_client(id);
      clients_.push_back(make_client(cfg_.clients[i], id));
    }
  }

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Runs the remaining events and returns the final state.
  RunResult run() {
    const auto& events = trace_->events;
    while (next_ < events.size() && !traps_.terminated()) {
      step(events[next_], next_);
      ++next_;
      if (next_ % kRetireEvery == 0) machine_.retire(now_);
    }
    return finish();
  }

  /// Executes a single event at trace position `pos`.
  void step(const TraceEvent& ev, std::size_t pos) {
    std::visit([&](const auto& e) { handle(e, pos); }, ev);
  }

  RunResult finish() {
    RunResult r;
    r.unbound_ops = executor_.pending();
    if (r.unbound_ops) executor_.commit(now_);
    stats_.cycles = now_;
    r.stats = stats_;
    r.traps = traps_.records();
    r.prefetch_log = prefetch_log_;
    r.terminated = traps_.terminated();
    return r;
  }

  /// Switches to another process and back: PMTs, TLB and (optionally) MMC lose their contents.
  void context_switch() { now_ += metasim::context_switch(plane_, machine_, cfg_.os); }

  std::uint64_t remap(std::uint64_t vpn, std::uint64_t new_ppn) {
    return remap_page(process_, vpn, new_ppn, plane_, machine_);
  }

  /// Direct metadata lookup by virtual address, outside any trace event.
  LookupResult metadata_lookup(ClientId client, Addr vaddr, LookupMode mode) {
    return plane_.lookup(client, vaddr, now_, mode, machine_);
  }

  Cycle now() const { return now_; }
  const Stats& stats() const { return stats_; }
  Machine& machine() { return machine_; }
  MetadataPlane& plane() { return plane_; }
  OpExecutor& executor() { return executor_; }
  ProcessContext& process() { return process_; }
  const TrapLog& traps() const { return traps_; }
  const SimConfig& config() const { return cfg_; }

 private:
  static constexpr std::size_t kRetireEvery = 4096;

  static const SimConfig& validated(const SimConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  static ProcessContext make_process(const SimConfig& cfg, const Trace& trace) {
    const auto mmt = allocate_mmt(cfg.meta.physical_memory_bytes, cfg.meta.granularity_bytes, cfg.machine.page_bytes);
    return build_process(trace.header.address_space_bytes, mmt, cfg.machine.page_bytes, cfg.os.page_map,
                         cfg.seed);
  }

  /// Load or store issued at now_; returns the cycle it commits.
  Cycle access(AccessKind kind, Addr vaddr, std::size_t pos, bool labeled) {
    ++stats_.instructions;
    const Cycle issue = now_ + 1;
    Machine::TimedTranslation tr;
    try {
      tr = machine_.translate(vaddr, issue);
    } catch (const PageFault& f) {
      throw SimulationFault(f.what(), pos);
    }
    const auto data = machine_.access_data(tr.paddr, kind == AccessKind::Store, tr.ready);
    Cycle commit = data.ready;
    if (!tr.tlb_hit)
      for (auto& c : clients_) commit = std::max(commit, c->on_tlb_miss(env_, vaddr, tr.ready));
    const AccessInfo info{vaddr, tr.paddr, kind, data.l1_hit, tr.ready, pos, labeled};
    for (auto& c : clients_) commit = std::max(commit, c->on_access(env_, info));
    return commit;
  }

  void handle(const MemAccess& e, std::size_t pos) {
    executor_.commit(now_);
    const bool labeled = std::exchange(label_, false);
    now_ = access(e.kind, e.vaddr, pos, labeled);
  }

  void handle(const MetaEvent& e, std::size_t pos) {
    ++stats_.instructions;
    now_ += 1;
    executor_.enqueue(e.op, pos);
  }

  void handle(const CallEvent& e, std::size_t pos) {
    executor_.commit(now_);
    const bool labeled = std::exchange(label_, false);
    now_ = access(AccessKind::Store, e.ret_slot, pos, labeled);
    Cycle extra = 0;
    for (auto& c : clients_) extra += c->on_call(env_, e.ret_slot, now_);
    stats_.instructions += extra;
    now_ += extra;
  }

  void handle(const ReturnEvent& e, std::size_t pos) {
    executor_.commit(now_);
    const bool labeled = std::exchange(label_, false);
    now_ = access(AccessKind::Load, e.ret_slot, pos, labeled);
    Cycle extra = 0;
    for (auto& c : clients_) extra += c->on_return(env_, e.ret_slot, now_);
    stats_.instructions += extra;
    now_ += extra;
  }

  void handle(const ComputeEvent& e, std::size_t) {
    stats_.instructions += e.cycles;
    now_ += e.cycles;
  }

  void handle(const LabelEvent&, std::size_t) { label_ = true; }

  SimConfig cfg_;
  const Trace* trace_;
  Stats stats_;
  ProcessContext process_;
  Machine machine_;
  MetadataPlane plane_;
  OpExecutor executor_;
  TrapLog traps_;
  std::vector<Addr> prefetch_log_;
  ClientEnv env_;
  std::vector<std::unique_ptr<Client>> clients_;
  Cycle now_ = 0;
  std::size_t next_ = 0;
  bool label_ = false;
};

inline RunResult run_one(const SimConfig& cfg, const Trace& trace) {
  Simulator sim(cfg, trace);
  return sim.run();
}

}  // namespace metasim
