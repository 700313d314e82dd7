#pragma once

#include "metasim/clients/client.hpp"

namespace metasim {

/// Hardware bounds checker: every access that follows a CREATE must land in a
/// region whose tag equals the CREATE's tag.
class BoundsClient final : public Client {
 public:
  BoundsClient(ClientId id, LookupMode mode, bool check_loads = true, bool check_stores = true)
      : Client(id, mode), check_loads_(check_loads), check_stores_(check_stores) {}

  std::string_view kind() const override { return "bounds"; }

  Cycle on_access(ClientEnv& env, const AccessInfo& a) override {
    const bool triggers = a.kind == AccessKind::Load ? check_loads_ : check_stores_;
    if (!triggers) return 0;
    const auto armed = env.plane.consume_armed_tag(id());
    if (!armed) return 0;
    const auto r = lookup(env, a.paddr, a.translated_at);
    if (!r.dropped && r.tag != *armed)
      env.traps.raise(ViolationKind::BoundsViolation, a.vaddr, a.position, a.labeled, env.stats,
                      env.os.terminate_on_trap);
    return commit_bound(r);
  }

 private:
  bool check_loads_;
  bool check_stores_;
};

}  // namespace metasim
