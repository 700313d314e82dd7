#pragma once

#include <cstdint>
#include <vector>

#include "metasim/common.hpp"

namespace metasim {

inline std::uint64_t mmt_index(Addr paddr, std::uint64_t granularity) { return paddr / granularity; }

/// Metadata Mapping Table: one tag byte per physical region, laid out
/// contiguously in simulated physical memory starting at `base_paddr`.
class Mmt {
 public:
  static constexpr std::uint64_t kEntryBytes = 1;

  Mmt(std::uint64_t physical_memory_bytes, std::uint64_t granularity, Addr base_paddr)
      : granularity_(granularity), base_(base_paddr) {
    if (!is_power_of_two(granularity)) throw ConfigError("tagging granularity must be a power of two");
    if (granularity > physical_memory_bytes)
      throw ConfigError("tagging granularity larger than physical memory");
    entries_.assign(physical_memory_bytes / granularity, 0);
  }

  std::uint64_t granularity() const { return granularity_; }
  Addr base_paddr() const { return base_; }
  std::uint64_t entry_count() const { return entries_.size(); }
  std::uint64_t footprint_bytes() const { return entries_.size() * kEntryBytes; }

  std::uint64_t region_of(Addr paddr) const { return mmt_index(paddr, granularity_); }

  /// Physical address of the MMT byte describing `region`.
  Addr entry_paddr(std::uint64_t region) const { return base_ + region * kEntryBytes; }

  TagId tag(std::uint64_t region) const { return TagId{entries_.at(region)}; }
  TagId tag_at(Addr paddr) const { return tag(region_of(paddr)); }
  void set(std::uint64_t region, TagId t) { entries_.at(region) = t.value; }

  /// Tags every region overlapping [pstart, pstart+len). Returns regions written.
  std::uint64_t set_range(Addr pstart, std::uint64_t len, TagId t) {
    if (len == 0) return 0;
    const auto first = region_of(pstart);
    const auto last = region_of(pstart + len - 1);
    if (last >= entries_.size()) throw MetadataError("MMT range beyond physical memory");
    for (auto r = first; r <= last; ++r) entries_[r] = t.value;
    return last - first + 1;
  }

 private:
  std::uint64_t granularity_;
  Addr base_;
  std::vector<std::uint8_t> entries_;
};

}  // namespace metasim
