#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "metasim/common.hpp"

namespace metasim {

enum class MmcMode { Shared, Partitioned, PrioritizedInsertion };

/// Metadata Mapping Cache: fully associative region -> tag cache with NMRU
/// replacement. Partitioned mode splits the entries evenly between clients;
/// prioritized insertion marks one client's fills sticky so they are evicted
/// last.
class Mmc {
 public:
  struct Access {
    bool hit = false;
    TagId tag;
    std::optional<std::uint64_t> victim;
  };

  Mmc(std::uint64_t entries, MmcMode mode = MmcMode::Shared, std::uint32_t partitions = 1,
      std::uint64_t seed = 0)
      : mode_(mode) {
    if (entries == 0) throw ConfigError("mmc_entries must be >= 1");
    if (mode != MmcMode::Partitioned) partitions = 1;
    if (partitions == 0 || entries < partitions)
      throw ConfigError("MMC too small for its partitions");
    parts_.resize(partitions);
    for (std::uint32_t p = 0; p < partitions; ++p) {
      parts_[p].capacity = entries / partitions;
      parts_[p].rng.seed(seed + 0x9e3779b97f4a7c15ULL * (p + 1));
    }
  }

  /// Non-mutating presence check.
  std::optional<TagId> probe(std::uint64_t region) const {
    if (auto it = index_.find(region); it != index_.end()) return slots_[it->second].tag;
    return std::nullopt;
  }

  Access access(std::uint64_t region, TagId fill_tag_on_miss, ClientId client, bool sticky = false) {
    const auto p = partition_of(client);
    if (auto it = index_.find(region); it != index_.end()) {
      const auto s = it->second;
      if (slots_[s].partition == p) parts_[p].mru = s;
      return {true, slots_[s].tag, std::nullopt};
    }
    auto& part = parts_[p];
    std::optional<std::uint64_t> victim;
    std::size_t s;
    if (!part.free.empty()) {
      s = part.free.back();
      part.free.pop_back();
    } else if (part.members.size() < part.capacity) {
      s = slots_.size();
      slots_.push_back({});
      slots_[s].partition = p;
      part.members.push_back(s);
    } else {
      s = choose_victim(part);
      victim = slots_[s].region;
      index_.erase(slots_[s].region);
    }
    auto& e = slots_[s];
    e.valid = true;
    e.region = region;
    e.tag = fill_tag_on_miss;
    e.owner = client;
    e.sticky = sticky && mode_ == MmcMode::PrioritizedInsertion;
    index_[region] = s;
    part.mru = s;
    return {false, fill_tag_on_miss, victim};
  }

  bool invalidate(std::uint64_t region) {
    auto it = index_.find(region);
    if (it == index_.end()) return false;
    release(it->second);
    index_.erase(it);
    return true;
  }

  /// Rewrites the tag of a resident entry without touching recency.
  bool update(std::uint64_t region, TagId tag) {
    auto it = index_.find(region);
    if (it == index_.end()) return false;
    slots_[it->second].tag = tag;
    return true;
  }

  void flush() {
    for (auto& [region, s] : index_) release(s);
    index_.clear();
  }

  /// Maps a client onto a partition (Partitioned mode only).
  void assign_partition(ClientId client, std::uint32_t partition) {
    if (partition >= parts_.size()) throw ConfigError("MMC partition out of range");
    partition_of_client_[client.value] = partition;
  }

  std::uint32_t partition_of(ClientId client) const {
    if (parts_.size() == 1) return 0;
    if (auto it = partition_of_client_.find(client.value); it != partition_of_client_.end())
      return it->second;
    return client.value % static_cast<std::uint32_t>(parts_.size());
  }

  /// Regions currently held in a partition, in slot order.
  std::vector<std::uint64_t> resident(std::uint32_t partition = 0) const {
    std::vector<std::uint64_t> out;
    for (auto s : parts_.at(partition).members)
      if (slots_[s].valid) out.push_back(slots_[s].region);
    return out;
  }

  std::size_t valid_entries() const { return index_.size(); }
  std::uint64_t capacity() const {
    std::uint64_t c = 0;
    for (const auto& p : parts_) c += p.capacity;
    return c;
  }
  MmcMode mode() const { return mode_; }

 private:
  static constexpr std::size_t kNone = ~std::size_t{0};

  struct Slot {
    bool valid = false;
    std::uint64_t region = 0;
    TagId tag;
    ClientId owner;
    bool sticky = false;
    std::uint32_t partition = 0;
  };

  struct Partition {
    std::uint64_t capacity = 0;
    std::vector<std::size_t> members;
    std::vector<std::size_t> free;
    std::size_t mru = kNone;
    std::mt19937_64 rng;
  };

  void release(std::size_t s) {
    auto& e = slots_[s];
    e.valid = false;
    auto& part = parts_[e.partition];
    part.free.push_back(s);
    if (part.mru == s) part.mru = kNone;
  }

  // Uniform over the partition's entries other than the MRU one; sticky
  // entries are only candidates when nothing else is.
  std::size_t choose_victim(Partition& part) {
    candidates_.clear();
    for (auto s : part.members)
      if (s != part.mru && !slots_[s].sticky) candidates_.push_back(s);
    if (candidates_.empty())
      for (auto s : part.members)
        if (s != part.mru) candidates_.push_back(s);
    if (candidates_.empty()) return part.mru;
    std::uniform_int_distribution<std::size_t> pick(0, candidates_.size() - 1);
    return candidates_[pick(part.rng)];
  }

  MmcMode mode_;
  std::vector<Partition> parts_;
  std::vector<Slot> slots_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::unordered_map<std::uint8_t, std::uint32_t> partition_of_client_;
  std::vector<std::size_t> candidates_;
};

}  // namespace metasim
