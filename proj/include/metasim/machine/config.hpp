#pragma once

#include <cstdint>

#include "metasim/common.hpp"

namespace metasim {

/// Timing parameters of the in-order core, L1D, DTLB and memory controller.
/// Defaults model a small FPGA soft core; DRAM latency and bandwidth in core
/// cycles are calibration knobs.
struct MachineConfig {
  std::uint64_t l1_size_bytes = 16 * 1024;
  std::uint32_t l1_ways = 4;
  std::uint32_t l1_line_bytes = 64;
  Cycle l1_hit_cycles = 4;
  std::uint32_t mshr_entries = 2;
  std::uint32_t tlb_entries = 16;
  std::uint64_t page_bytes = 4096;
  Cycle mem_latency_cycles = 100;
  Cycle mem_issue_interval_cycles = 4;
  std::uint32_t tlb_walk_mem_accesses = 1;
  std::uint32_t prefetch_buffer_lines = 32;
  /// Next-N-line prefetch on every L1 demand miss; 0 disables it.
  std::uint32_t stride_prefetch_degree = 0;

  std::uint64_t l1_sets() const { return l1_size_bytes / (std::uint64_t{l1_ways} * l1_line_bytes); }

  void validate() const {
    if (l1_ways == 0 || l1_line_bytes == 0 || l1_size_bytes == 0 || mshr_entries == 0 ||
        tlb_entries == 0 || page_bytes == 0 || mem_issue_interval_cycles == 0 ||
        prefetch_buffer_lines == 0)
      throw ConfigError("machine counts must be >= 1");
    if (l1_size_bytes % (std::uint64_t{l1_ways} * l1_line_bytes) != 0)
      throw ConfigError("l1_size_bytes must be divisible by l1_ways * l1_line_bytes");
    if (!is_power_of_two(l1_line_bytes) || !is_power_of_two(page_bytes))
      throw ConfigError("line and page sizes must be powers of two");
    if (page_bytes < l1_line_bytes) throw ConfigError("page smaller than a cache line");
  }
};

}  // namespace metasim
