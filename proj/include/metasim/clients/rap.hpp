#pragma once

#include "metasim/clients/client.hpp"

namespace metasim {

/// Return-address protection: return slots are tagged 1 between call and
/// return, and stores into a tag-1 region trap.
class RapClient final : public Client {
 public:
  static constexpr TagId kReturnTag{1};
  static constexpr std::uint64_t kSlotBytes = 8;

  using Client::Client;
  std::string_view kind() const override { return "rap"; }

  Cycle on_access(ClientEnv& env, const AccessInfo& a) override {
    if (a.kind != AccessKind::Store) return 0;
    const auto r = lookup(env, a.paddr, a.translated_at);
    if (!r.dropped && r.tag == kReturnTag)
      env.traps.raise(ViolationKind::ReturnAddressOverwrite, a.vaddr, a.position, a.labeled, env.stats,
                      env.os.terminate_on_trap);
    return commit_bound(r);
  }

  Cycle on_call(ClientEnv& env, Addr ret_slot, Cycle at) override {
    env.executor.exec(MapOp{kReturnTag, ret_slot, kSlotBytes}, at);
    return 1;
  }

  Cycle on_return(ClientEnv& env, Addr ret_slot, Cycle at) override {
    env.executor.exec(MapOp{kUntagged, ret_slot, kSlotBytes}, at);
    return 1;
  }
};

}  // namespace metasim
