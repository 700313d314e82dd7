#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "metasim/isa/executor.hpp"
#include "metasim/metadata/plane.hpp"
#include "metasim/os/os.hpp"
#include "metasim/workloads/trace.hpp"

namespace metasim {

/// Everything a client may touch while reacting to an event.
struct ClientEnv {
  MetadataPlane& plane;
  Machine& machine;
  OpExecutor& executor;
  TrapLog& traps;
  Stats& stats;
  const MemoryImage& image;
  const ProcessContext& process;
  const OsConfig& os;
  std::vector<Addr>* prefetch_log = nullptr;
};

/// A demand access as seen by the clients, after translation and the L1 lookup.
struct AccessInfo {
  Addr vaddr = 0;
  Addr paddr = 0;
  AccessKind kind = AccessKind::Load;
  bool l1_hit = false;
  Cycle translated_at = 0;  // physical address known
  std::size_t position = 0;
  bool labeled = false;  // generator marked it as a violation
};

/// Base of every optimization client. Hooks return the cycle before which
/// the triggering instruction may not commit (0 = no constraint), except
/// on_call/on_return which return extra instruction cycles.
class Client {
 public:
  Client(ClientId id, LookupMode mode) : id_(id), mode_(mode) {}
  virtual ~Client() = default;

  virtual std::string_view kind() const = 0;

  virtual Cycle on_access(ClientEnv&, const AccessInfo&) { return 0; }
  virtual Cycle on_tlb_miss(ClientEnv&, Addr /*vaddr*/, Cycle /*walk_done*/) { return 0; }
  virtual Cycle on_call(ClientEnv&, Addr /*ret_slot*/, Cycle /*at*/) { return 0; }
  virtual Cycle on_return(ClientEnv&, Addr /*ret_slot*/, Cycle /*at*/) { return 0; }

  ClientId id() const { return id_; }
  LookupMode mode() const { return mode_; }

 protected:
  LookupResult lookup(ClientEnv& env, Addr paddr, Cycle at) {
    return env.plane.lookup_physical(id_, paddr, at, mode_, env.machine);
  }

  Cycle commit_bound(const LookupResult& r) const {
    return mode_ == LookupMode::ForceStall && !r.dropped ? r.ready : 0;
  }

 private:
  ClientId id_;
  LookupMode mode_;
};

/// Receives CREATEs but never triggers.
class PassiveClient final : public Client {
 public:
  using Client::Client;
  std::string_view kind() const override { return "passive"; }
};

}  // namespace metasim
