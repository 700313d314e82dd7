#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "metasim/isa/meta_op.hpp"
#include "metasim/os/os.hpp"

namespace metasim {

enum class AccessKind : std::uint8_t { Load, Store };

struct MemAccess {
  AccessKind kind = AccessKind::Load;
  Addr vaddr = 0;
  std::uint32_t size = 4;
  friend bool operator==(const MemAccess&, const MemAccess&) = default;
};

struct MetaEvent {
  MetaOp op;
  friend bool operator==(const MetaEvent&, const MetaEvent&) = default;
};

/// Call stores the return address into `ret_slot`.
struct CallEvent {
  Addr ret_slot = 0;
  friend bool operator==(const CallEvent&, const CallEvent&) = default;
};

/// Return reloads the return address from `ret_slot`.
struct ReturnEvent {
  Addr ret_slot = 0;
  friend bool operator==(const ReturnEvent&, const ReturnEvent&) = default;
};

/// `cycles` single-cycle non-memory instructions.
struct ComputeEvent {
  std::uint64_t cycles = 1;
  friend bool operator==(const ComputeEvent&, const ComputeEvent&) = default;
};

/// Marks the next memory access as an injected violation.
struct LabelEvent {
  ViolationKind kind = ViolationKind::BoundsViolation;
  friend bool operator==(const LabelEvent&, const LabelEvent&) = default;
};

using TraceEvent = std::variant<MemAccess, MetaEvent, CallEvent, ReturnEvent, ComputeEvent, LabelEvent>;

inline bool is_memory_event(const TraceEvent& e) {
  return std::holds_alternative<MemAccess>(e) || std::holds_alternative<CallEvent>(e) ||
         std::holds_alternative<ReturnEvent>(e);
}

/// Values stored in simulated memory, for workloads whose addresses depend on data.
class MemoryImage {
 public:
  struct Word {
    std::uint8_t size = 0;
    std::uint64_t value = 0;
    friend bool operator==(const Word&, const Word&) = default;
  };

  void store(Addr addr, std::uint8_t size, std::uint64_t value) { words_[addr] = {size, value}; }

  /// Value of the `size`-byte element at `addr`; unwritten memory reads as 0.
  std::uint64_t load(Addr addr, std::uint32_t size) const {
    auto it = words_.find(addr);
    if (it == words_.end()) return 0;
    const auto v = it->second.value;
    return size >= 8 ? v : v & ((std::uint64_t{1} << (8 * size)) - 1);
  }

  const std::map<Addr, Word>& words() const { return words_; }
  bool empty() const { return words_.empty(); }
  friend bool operator==(const MemoryImage&, const MemoryImage&) = default;

 private:
  std::map<Addr, Word> words_;
};

struct TraceHeader {
  std::uint32_t version = 1;
  std::uint64_t seed = 0;
  std::string generator;
  std::map<std::string, std::string> params;
  std::uint64_t address_space_bytes = 0;
  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

/// What the generator knows the run should observe.
struct ExpectedOutcome {
  std::optional<ViolationKind> violation_kind;
  std::vector<std::size_t> violation_positions;
  std::vector<Addr> prefetch_oracle;
  friend bool operator==(const ExpectedOutcome&, const ExpectedOutcome&) = default;
};

struct Trace {
  TraceHeader header;
  MemoryImage image;
  std::vector<TraceEvent> events;
  ExpectedOutcome expected;
  friend bool operator==(const Trace&, const Trace&) = default;

  std::size_t memory_events() const {
    std::size_t n = 0;
    for (const auto& e : events) n += is_memory_event(e);
    return n;
  }
};

}  // namespace metasim
