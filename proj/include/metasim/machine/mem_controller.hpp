#pragma once

#include <iterator>
#include <set>

#include "metasim/common.hpp"

namespace metasim {

/// Fixed-latency memory with a bandwidth limit of one request issue per
/// `issue_interval` cycles.
///
/// Issue slots are kept as a calendar rather than a single next-free cursor
/// so that background requests scheduled in the future (prefetch chains,
/// non-stalling lookups) do not delay earlier demand requests. For requests
/// submitted in non-decreasing time order the calendar degenerates to
/// `slot = max(now, next_free); next_free = slot + interval`.
class MemController {
 public:
  MemController(Cycle latency, Cycle issue_interval)
      : latency_(latency), interval_(issue_interval) {}

  /// Schedules one request arriving at `now`; returns its completion cycle.
  Cycle request(Cycle now) {
    Cycle slot = now;
    // Slots are [start, start + interval). Skip every reservation overlapping.
    auto it = slots_.upper_bound(slot);
    if (it != slots_.begin()) {
      auto prev = std::prev(it);
      if (*prev + interval_ > slot) slot = *prev + interval_;
    }
    it = slots_.lower_bound(slot);
    while (it != slots_.end() && *it < slot + interval_) {
      slot = *it + interval_;
      ++it;
    }
    slots_.insert(slot);
    ++requests_;
    return slot + latency_;
  }

  /// Drops reservations that ended before `horizon`; nothing can be scheduled there anymore.
  void retire_before(Cycle horizon) {
    while (!slots_.empty() && *slots_.begin() + interval_ <= horizon) slots_.erase(slots_.begin());
  }

  Cycle latency() const { return latency_; }
  Cycle issue_interval() const { return interval_; }
  std::uint64_t requests() const { return requests_; }

 private:
  Cycle latency_;
  Cycle interval_;
  std::set<Cycle> slots_;
  std::uint64_t requests_ = 0;
};

}  // namespace metasim
