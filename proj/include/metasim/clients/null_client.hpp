#pragma once

#include "metasim/clients/client.hpp"

namespace metasim {

enum class TriggerPolicy { AllAccess, MissOnly };

/// Characterization client: looks up metadata and discards it.
class NullClient final : public Client {
 public:
  NullClient(ClientId id, LookupMode mode, TriggerPolicy policy) : Client(id, mode), policy_(policy) {}

  std::string_view kind() const override {
    return policy_ == TriggerPolicy::AllAccess ? "null_all" : "null_miss";
  }

  Cycle on_access(ClientEnv& env, const AccessInfo& a) override {
    if (policy_ == TriggerPolicy::MissOnly && a.l1_hit) return 0;
    return commit_bound(lookup(env, a.paddr, a.translated_at));
  }

 private:
  TriggerPolicy policy_;
};

/// Second characterization client: one lookup per TLB miss, keyed by the
/// physical address of the leaf page-table entry.
class TlbMissClient final : public Client {
 public:
  using Client::Client;
  std::string_view kind() const override { return "tlb_miss"; }

  Cycle on_tlb_miss(ClientEnv& env, Addr vaddr, Cycle walk_done) override {
    const auto vpn = vaddr / env.process.page_map.page_bytes();
    return commit_bound(lookup(env, env.process.pte_paddr(vpn), walk_done));
  }
};

}  // namespace metasim
