#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "metasim/isa/meta_op.hpp"
#include "metasim/machine/machine.hpp"
#include "metasim/metadata/plane.hpp"

namespace metasim {

struct PhysRange {
  Addr start = 0;
  std::uint64_t len = 0;
  friend bool operator==(const PhysRange&, const PhysRange&) = default;
};

/// What a MAP-family operator did to the MMT.
struct MapEffect {
  std::vector<PhysRange> phys_ranges;  // one mmt_set_range call each
  std::uint64_t regions_written = 0;
  std::uint64_t mmt_write_requests = 0;
};

/// Applies CREATE/MAP operators to the metadata plane and models their
/// binding to the next load/store in program order.
class OpExecutor {
 public:
  /// MMT bytes written per memory request (one 64 B MMT line).
  static constexpr std::uint64_t kMmtLineBytes = 64;

  OpExecutor(MetadataPlane& plane, Machine& machine, Stats& stats)
      : plane_(&plane), machine_(&machine), stats_(&stats) {}

  void exec_create(const CreateOp& op) {
    if (!plane_->registered(op.client))
      throw MetadataError("CREATE for unknown client " + std::to_string(op.client.value));
    plane_->create(op.client, op.tag, op.metadata);
  }

  /// Tags (or untags) the virtual ranges, page by page, and updates any
  /// cached MMC entries in place. The MMT writes are posted at `at`; the core
  /// does not wait for them.
  MapEffect exec_map_ranges(TagId tag, const std::vector<VRange>& ranges, Cycle at) {
    MapEffect eff;
    const auto& pages = machine_->pages();
    const auto pb = pages.page_bytes();
    for (const auto& vr : ranges) {
      Addr v = vr.start;
      std::uint64_t left = vr.len;
      while (left > 0) {
        const std::uint64_t chunk = std::min<std::uint64_t>(left, pb - v % pb);
        const Addr p = pages.to_physical(v);
        if (!eff.phys_ranges.empty() &&
            eff.phys_ranges.back().start + eff.phys_ranges.back().len == p)
          eff.phys_ranges.back().len += chunk;
        else
          eff.phys_ranges.push_back({p, chunk});
        v += chunk;
        left -= chunk;
      }
    }
    auto& mmt = plane_->mmt();
    for (const auto& pr : eff.phys_ranges) {
      eff.regions_written += mmt.set_range(pr.start, pr.len, tag);
      const auto first = mmt.region_of(pr.start);
      const auto last = mmt.region_of(pr.start + pr.len - 1);
      plane_->update_regions(first, last, tag);
      const auto first_line = mmt.entry_paddr(first) / kMmtLineBytes;
      const auto last_line = mmt.entry_paddr(last) / kMmtLineBytes;
      eff.mmt_write_requests += last_line - first_line + 1;
    }
    for (std::uint64_t i = 0; i < eff.mmt_write_requests; ++i) machine_->memory_request(at);
    ++stats_->map_ops;
    return eff;
  }

  MapEffect exec_map(const MapOp& op, Cycle at) { return exec_map_ranges(op.tag, decompose(op), at); }

  MapEffect exec_map_nd(const MetaOp& op, Cycle at) { return exec_map_ranges(op_tag(op), decompose(op), at); }

  /// Executes any operator immediately.
  MapEffect exec(const MetaOp& op, Cycle at) {
    if (const auto* c = std::get_if<CreateOp>(&op)) {
      exec_create(*c);
      return {};
    }
    return exec_map_ranges(op_tag(op), decompose(op), at);
  }

  // Binding: operators wait for the next load/store and commit with it.

  void enqueue(MetaOp op, std::size_t position) { pending_.emplace_back(std::move(op), position); }

  /// Commits every queued operator in program order. Faults carry the
  /// operator's own trace position.
  void commit(Cycle at) {
    while (!pending_.empty()) {
      auto [op, pos] = std::move(pending_.front());
      pending_.pop_front();
      try {
        exec(op, at);
      } catch (const PageFault& f) {
        throw SimulationFault(f.what(), pos);
      } catch (const MetadataError& e) {
        throw SimulationFault(e.what(), pos);
      }
    }
  }

  std::size_t pending() const { return pending_.size(); }

 private:
  MetadataPlane* plane_;
  Machine* machine_;
  Stats* stats_;
  std::deque<std::pair<MetaOp, std::size_t>> pending_;
};

}  // namespace metasim
