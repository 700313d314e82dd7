#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace metasim {

/// Event counters collected over one simulation run.
struct Stats {
  std::uint64_t cycles = 0;
  std::uint64_t instructions = 0;
  std::uint64_t l1_hits = 0;
  std::uint64_t l1_misses = 0;
  std::uint64_t tlb_hits = 0;
  std::uint64_t tlb_misses = 0;
  std::uint64_t mem_accesses = 0;
  std::uint64_t mmc_hits = 0;
  std::uint64_t mmc_misses = 0;
  std::uint64_t mmt_mem_accesses = 0;
  std::uint64_t lookups_issued = 0;
  std::uint64_t lookups_dropped = 0;
  std::uint64_t prefetches_issued = 0;
  std::uint64_t prefetches_useful = 0;
  std::uint64_t traps = 0;
  std::uint64_t map_ops = 0;
  std::uint64_t create_ops = 0;

  friend bool operator==(const Stats&, const Stats&) = default;

  static constexpr std::array<std::string_view, 17> kFieldNames = {
      "cycles",        "instructions",     "l1_hits",        "l1_misses",
      "tlb_hits",      "tlb_misses",       "mem_accesses",   "mmc_hits",
      "mmc_misses",    "mmt_mem_accesses", "lookups_issued", "lookups_dropped",
      "prefetches_issued", "prefetches_useful", "traps",     "map_ops",
      "create_ops"};

  /// Counters in kFieldNames order.
  std::array<std::uint64_t, 17> values() const {
    return {cycles,       instructions,     l1_hits,        l1_misses,       tlb_hits,
            tlb_misses,   mem_accesses,     mmc_hits,       mmc_misses,      mmt_mem_accesses,
            lookups_issued, lookups_dropped, prefetches_issued, prefetches_useful, traps,
            map_ops,      create_ops};
  }

  double mmc_hit_rate() const {
    const auto probes = mmc_hits + mmc_misses;
    return probes == 0 ? 0.0 : static_cast<double>(mmc_hits) / static_cast<double>(probes);
  }
};

}  // namespace metasim
