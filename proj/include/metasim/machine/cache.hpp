#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "metasim/common.hpp"

namespace metasim {

enum class Replacement { Lru, Nmru };

/// Set-associative tag store. Recency is kept as a per-set rank permutation
/// (0 = MRU, ways-1 = LRU). Data is not modelled; writes are write-allocate
/// and write-backs are free.
class SetAssocCache {
 public:
  struct Access {
    bool hit = false;
    std::optional<std::uint64_t> evicted_line;
  };

  SetAssocCache(std::uint64_t sets, std::uint32_t ways, std::uint32_t line_bytes,
                Replacement policy = Replacement::Lru, std::uint64_t seed = 0)
      : sets_(sets), ways_(ways), line_bytes_(line_bytes), policy_(policy), rng_(seed),
        lines_(sets * ways) {
    if (sets == 0 || ways == 0 || !is_power_of_two(line_bytes))
      throw ConfigError("bad cache geometry");
    for (std::uint64_t s = 0; s < sets_; ++s)
      for (std::uint32_t w = 0; w < ways_; ++w) line(s, w).rank = w;
  }

  std::uint64_t line_number(Addr paddr) const { return paddr / line_bytes_; }
  std::uint64_t set_of(std::uint64_t line_no) const { return line_no % sets_; }

  Access access(Addr paddr, bool /*is_write*/) {
    const auto ln = line_number(paddr);
    if (auto w = find(ln)) {
      touch(set_of(ln), *w);
      return {true, std::nullopt};
    }
    return {false, install(ln)};
  }

  bool contains(Addr paddr) const { return find(line_number(paddr)).has_value(); }

  /// Install a line without a lookup (prefetch promotion). Returns the victim.
  std::optional<std::uint64_t> fill(Addr paddr) {
    const auto ln = line_number(paddr);
    if (auto w = find(ln)) {
      touch(set_of(ln), *w);
      return std::nullopt;
    }
    return install(ln);
  }

  void flush() {
    for (auto& l : lines_) l.valid = false;
  }

  std::uint64_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }

  /// Recency rank of each way of a set (test hook for the permutation invariant).
  std::vector<std::uint32_t> ranks(std::uint64_t set) const {
    std::vector<std::uint32_t> r;
    for (std::uint32_t w = 0; w < ways_; ++w) r.push_back(line(set, w).rank);
    return r;
  }

 private:
  struct Line {
    bool valid = false;
    std::uint64_t line_no = 0;
    std::uint32_t rank = 0;
  };

  Line& line(std::uint64_t set, std::uint32_t way) { return lines_[set * ways_ + way]; }
  const Line& line(std::uint64_t set, std::uint32_t way) const { return lines_[set * ways_ + way]; }

  std::optional<std::uint32_t> find(std::uint64_t ln) const {
    const auto s = set_of(ln);
    for (std::uint32_t w = 0; w < ways_; ++w) {
      const auto& l = line(s, w);
      if (l.valid && l.line_no == ln) return w;
    }
    return std::nullopt;
  }

  void touch(std::uint64_t set, std::uint32_t way) {
    const auto old = line(set, way).rank;
    for (std::uint32_t w = 0; w < ways_; ++w)
      if (line(set, w).rank < old) ++line(set, w).rank;
    line(set, way).rank = 0;
  }

  std::uint32_t victim(std::uint64_t set) {
    for (std::uint32_t w = 0; w < ways_; ++w)
      if (!line(set, w).valid) return w;
    if (policy_ == Replacement::Lru || ways_ == 1) {
      for (std::uint32_t w = 0; w < ways_; ++w)
        if (line(set, w).rank == ways_ - 1) return w;
    }
    // NMRU: uniform over every way except rank 0.
    std::uniform_int_distribution<std::uint32_t> pick(1, ways_ - 1);
    const auto rank = pick(rng_);
    for (std::uint32_t w = 0; w < ways_; ++w)
      if (line(set, w).rank == rank) return w;
    return 0;
  }

  std::optional<std::uint64_t> install(std::uint64_t ln) {
    const auto s = set_of(ln);
    const auto w = victim(s);
    auto& l = line(s, w);
    std::optional<std::uint64_t> evicted;
    if (l.valid) evicted = l.line_no;
    l.valid = true;
    l.line_no = ln;
    touch(s, w);
    return evicted;
  }

  std::uint64_t sets_;
  std::uint32_t ways_;
  std::uint32_t line_bytes_;
  Replacement policy_;
  std::mt19937_64 rng_;
  std::vector<Line> lines_;
};

}  // namespace metasim
