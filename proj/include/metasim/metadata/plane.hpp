#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "metasim/machine/machine.hpp"
#include "metasim/metadata/mmc.hpp"
#include "metasim/metadata/mmt.hpp"
#include "metasim/metadata/pmt.hpp"

namespace metasim {

enum class LookupMode { ForceStall, NoStall, BestEffort };
enum class TranslationMode { Virtual, Physical };

struct MetadataConfig {
  std::uint64_t mmc_entries = 128;
  MmcMode mmc_mode = MmcMode::Shared;
  std::uint64_t granularity_bytes = 512;
  TranslationMode translation_mode = TranslationMode::Virtual;
  Cycle mmc_hit_cycles = 1;
  std::size_t pmt_entry_bytes = 64;
  std::uint64_t physical_memory_bytes = 256ULL << 20;
  /// Client whose MMC fills are sticky in PrioritizedInsertion mode.
  std::optional<std::uint8_t> priority_client;

  void validate() const {
    if (!is_power_of_two(granularity_bytes)) throw ConfigError("granularity_bytes must be a power of two");
    if (mmc_entries == 0) throw ConfigError("mmc_entries must be >= 1");
    if (pmt_entry_bytes == 0 || pmt_entry_bytes > 512)
      throw ConfigError("pmt_entry_bytes must be in 1..512");
    if (granularity_bytes > physical_memory_bytes)
      throw ConfigError("granularity larger than physical memory");
  }
};

struct LookupResult {
  TagId tag;
  /// PMT slot of the owning client; empty when untagged or dropped.
  std::span<const std::uint8_t> metadata;
  bool mmc_hit = false;
  bool dropped = false;
  Cycle stall_cycles = 0;
  Cycle background_cycles = 0;
  /// Cycle at which the tag and metadata are known.
  Cycle ready = 0;
};

/// MMT + MMC + per-client PMTs and the timed lookup path.
class MetadataPlane {
 public:
  MetadataPlane(const MetadataConfig& cfg, Mmt mmt, Addr mmt_vbase, std::uint32_t mmc_partitions,
                std::uint64_t seed, Stats& stats)
      : cfg_(cfg),
        mmt_(std::move(mmt)),
        mmt_vbase_(mmt_vbase),
        mmc_(cfg.mmc_entries, cfg.mmc_mode, mmc_partitions, seed),
        stats_(&stats),
        partitions_(cfg.mmc_mode == MmcMode::Partitioned ? std::max<std::uint32_t>(1, mmc_partitions) : 1) {
    cfg.validate();
  }

  void register_client(ClientId id) {
    if (pmts_.contains(id.value)) throw ConfigError("client id registered twice");
    pmts_.emplace(id.value, Pmt(id, cfg_.pmt_entry_bytes));
    if (cfg_.mmc_mode == MmcMode::Partitioned)
      mmc_.assign_partition(id, static_cast<std::uint32_t>(pmts_.size() - 1) % partitions_);
  }

  bool registered(ClientId id) const { return pmts_.contains(id.value); }

  Pmt& pmt(ClientId id) {
    auto it = pmts_.find(id.value);
    if (it == pmts_.end()) throw MetadataError("unknown client " + std::to_string(id.value));
    return it->second;
  }

  /// CREATE: overwrite the client's PMT slot and latch the tag in its armed register.
  void create(ClientId client, TagId tag, std::span<const std::uint8_t> metadata) {
    pmt(client).write(tag, metadata);
    armed_[client.value] = tag;
    ++stats_->create_ops;
  }

  std::optional<TagId> armed_tag(ClientId client) const {
    if (auto it = armed_.find(client.value); it != armed_.end()) return it->second;
    return std::nullopt;
  }
  std::optional<TagId> consume_armed_tag(ClientId client) {
    auto it = armed_.find(client.value);
    if (it == armed_.end()) return std::nullopt;
    auto t = it->second;
    armed_.erase(it);
    return t;
  }

  /// Lookup keyed by a physical address that is already known at `start`.
  LookupResult lookup_physical(ClientId client, Addr paddr, Cycle start, LookupMode mode,
                               Machine& machine) {
    ++stats_->lookups_issued;
    const auto region = mmt_.region_of(paddr);
    if (region >= mmt_.entry_count())
      throw MetadataError("lookup beyond physical memory: " + std::to_string(paddr));
    LookupResult r;
    if (mode == LookupMode::BestEffort && !mmc_.probe(region) && refill_busy_until_ > start) {
      ++stats_->lookups_dropped;
      r.dropped = true;
      r.ready = start;
      return r;
    }
    const bool sticky = cfg_.priority_client && *cfg_.priority_client == client.value;
    const auto acc = mmc_.access(region, mmt_.tag(region), client, sticky);
    Cycle ready = start + cfg_.mmc_hit_cycles;
    if (acc.hit) {
      ++stats_->mmc_hits;
    } else {
      ++stats_->mmc_misses;
      Addr entry = mmt_.entry_paddr(region);
      if (cfg_.translation_mode == TranslationMode::Virtual) {
        const auto t = machine.translate(mmt_vbase_ + (entry - mmt_.base_paddr()), ready);
        entry = t.paddr;
        ready = t.ready;
      }
      ready = machine.memory_request(ready);
      ++stats_->mmt_mem_accesses;
      refill_busy_until_ = std::max(refill_busy_until_, ready);
    }
    r.tag = acc.tag;
    r.mmc_hit = acc.hit;
    r.ready = ready;
    if (!r.tag.untagged() && registered(client)) r.metadata = pmt(client).read(r.tag);
    if (mode == LookupMode::ForceStall)
      r.stall_cycles = ready - start;
    else
      r.background_cycles = ready - start;
    return r;
  }

  /// Full lookup: translate `vaddr` through the TLB first, then query the MMC.
  LookupResult lookup(ClientId client, Addr vaddr, Cycle start, LookupMode mode, Machine& machine) {
    const auto t = machine.translate(vaddr, start);
    auto r = lookup_physical(client, t.paddr, t.ready, mode, machine);
    const Cycle total = r.ready - start;
    if (!r.dropped) {
      if (mode == LookupMode::ForceStall)
        r.stall_cycles = total;
      else
        r.background_cycles = total;
    }
    return r;
  }

  /// Makes subsequent lookups of `region` observe the current MMT contents.
  bool invalidate(std::uint64_t region) { return mmc_.invalidate(region); }

  /// Invalidates every cached region in [first, last].
  void invalidate_regions(std::uint64_t first, std::uint64_t last) {
    if (last - first + 1 > mmc_.capacity()) {
      for (std::uint32_t p = 0; p < partitions_; ++p)
        for (auto r : mmc_.resident(p))
          if (r >= first && r <= last) mmc_.invalidate(r);
      return;
    }
    for (auto r = first; r <= last; ++r) mmc_.invalidate(r);
  }

  /// Writes `tag` into every cached entry for a region in [first, last].
  void update_regions(std::uint64_t first, std::uint64_t last, TagId tag) {
    if (last - first + 1 > mmc_.capacity()) {
      for (std::uint32_t p = 0; p < partitions_; ++p)
        for (auto r : mmc_.resident(p))
          if (r >= first && r <= last) mmc_.update(r, tag);
      return;
    }
    for (auto r = first; r <= last; ++r) mmc_.update(r, tag);
  }

  void flush_pmts() {
    for (auto& [id, p] : pmts_) p.clear();
    armed_.clear();
  }
  void flush_mmc() { mmc_.flush(); }

  Mmt& mmt() { return mmt_; }
  const Mmt& mmt() const { return mmt_; }
  Mmc& mmc() { return mmc_; }
  Addr mmt_vbase() const { return mmt_vbase_; }
  const MetadataConfig& config() const { return cfg_; }

 private:
  MetadataConfig cfg_;
  Mmt mmt_;
  Addr mmt_vbase_;
  Mmc mmc_;
  Stats* stats_;
  std::map<std::uint8_t, Pmt> pmts_;
  std::map<std::uint8_t, TagId> armed_;
  Cycle refill_busy_until_ = 0;
  std::uint32_t partitions_;
};

}  // namespace metasim
