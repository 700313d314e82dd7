#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "metasim/machine/machine.hpp"

using namespace metasim;

namespace {

PageMap identity_pages(std::uint64_t pages, std::uint64_t page_bytes = 4096) {
  PageMap m(page_bytes);
  for (std::uint64_t p = 0; p < pages; ++p) m.map(p, p);
  return m;
}

bool is_permutation_of_ranks(std::vector<std::uint32_t> r) {
  std::sort(r.begin(), r.end());
  for (std::uint32_t i = 0; i < r.size(); ++i)
    if (r[i] != i) return false;
  return true;
}

}  // namespace

TEST(Cache, LruEvictsLeastRecentlyUsed) {
  SetAssocCache c(1, 2, 64);
  EXPECT_FALSE(c.access(0, false).hit);
  EXPECT_FALSE(c.access(64, false).hit);
  EXPECT_TRUE(c.access(0, false).hit);
  const auto a = c.access(128, false);
  EXPECT_FALSE(a.hit);
  ASSERT_TRUE(a.evicted_line);
  EXPECT_EQ(*a.evicted_line, 1u);
  EXPECT_TRUE(c.contains(0));
  EXPECT_FALSE(c.contains(64));
}

TEST(Cache, SetIndexingSeparatesLines) {
  SetAssocCache c(4, 1, 64);
  for (Addr a = 0; a < 4 * 64; a += 64) c.access(a, false);
  for (Addr a = 0; a < 4 * 64; a += 64) EXPECT_TRUE(c.contains(a));
  c.access(4 * 64, false);  // same set as line 0
  EXPECT_FALSE(c.contains(0));
  EXPECT_TRUE(c.contains(64));
}

TEST(Cache, RanksStayAPermutation) {
  SetAssocCache c(2, 4, 64, Replacement::Nmru, 7);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    c.access((rng() % 64) * 64, rng() % 2);
    ASSERT_TRUE(is_permutation_of_ranks(c.ranks(0)));
    ASSERT_TRUE(is_permutation_of_ranks(c.ranks(1)));
  }
}

TEST(Cache, NmruNeverEvictsMostRecent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SetAssocCache c(1, 4, 64, Replacement::Nmru, seed);
    for (Addr a = 0; a < 4 * 64; a += 64) c.access(a, false);
    std::mt19937_64 rng(seed);
    Addr next = 4 * 64;
    for (int i = 0; i < 50; ++i) {
      const Addr mru = (rng() % 4) * 64;
      if (!c.contains(mru)) continue;
      c.access(mru, false);
      c.access(next, false);
      ASSERT_TRUE(c.contains(mru));
      next += 64;
    }
  }
}

TEST(Cache, FlushInvalidatesEverything) {
  SetAssocCache c(2, 2, 64);
  c.access(0, false);
  c.flush();
  EXPECT_FALSE(c.contains(0));
}

TEST(Cache, BadGeometryRejected) {
  EXPECT_THROW(SetAssocCache(0, 2, 64), ConfigError);
  EXPECT_THROW(SetAssocCache(1, 2, 48), ConfigError);
}

TEST(Tlb, HitAfterInsertAndLruEviction) {
  Tlb t(2);
  EXPECT_FALSE(t.probe(1));
  t.insert(1, 10);
  t.insert(2, 20);
  EXPECT_EQ(t.probe(1), 10u);
  t.insert(3, 30);  // evicts 2
  EXPECT_FALSE(t.probe(2));
  EXPECT_EQ(t.probe(3), 30u);
  t.update(3, 31);
  EXPECT_EQ(t.probe(3), 31u);
  t.update(99, 1);
  EXPECT_FALSE(t.probe(99));
  t.invalidate(1);
  EXPECT_FALSE(t.probe(1));
  t.flush();
  EXPECT_TRUE(t.resident_vpns().empty());
}

TEST(Tlb, TranslateChargesWalkOnMiss) {
  Tlb t(4);
  PageMap pages(4096);
  pages.map(5, 9);
  const auto miss = translate(t, pages, 5 * 4096 + 12, 2);
  EXPECT_FALSE(miss.tlb_hit);
  EXPECT_EQ(miss.paddr, 9u * 4096 + 12);
  EXPECT_EQ(miss.extra_mem_accesses, 2u);
  const auto hit = translate(t, pages, 5 * 4096 + 100, 2);
  EXPECT_TRUE(hit.tlb_hit);
  EXPECT_EQ(hit.extra_mem_accesses, 0u);
  EXPECT_THROW(translate(t, pages, 6 * 4096, 2), PageFault);
}

TEST(MemController, BandwidthSerializesIssue) {
  MemController m(100, 4);
  EXPECT_EQ(m.request(0), 100u);
  EXPECT_EQ(m.request(0), 104u);
  EXPECT_EQ(m.request(0), 108u);
  EXPECT_EQ(m.request(50), 150u);
  EXPECT_EQ(m.requests(), 4u);
}

TEST(MemController, LaterReservationDoesNotDelayEarlierRequest) {
  MemController m(100, 4);
  EXPECT_EQ(m.request(1000), 1100u);
  EXPECT_EQ(m.request(0), 100u);
  EXPECT_EQ(m.request(998), 1104u);  // overlaps [1000, 1004)
}

TEST(Machine, LoadLatencies) {
  Stats s;
  const auto pages = identity_pages(16);
  Machine m(MachineConfig{}, pages, s);
  const auto miss = m.access_data(0, false, 10);
  EXPECT_FALSE(miss.l1_hit);
  EXPECT_EQ(miss.ready, 110u);
  const auto hit = m.access_data(4, false, 200);
  EXPECT_TRUE(hit.l1_hit);
  EXPECT_EQ(hit.ready, 204u);
  EXPECT_EQ(s.l1_misses, 1u);
  EXPECT_EQ(s.l1_hits, 1u);
  EXPECT_EQ(s.mem_accesses, 1u);
}

TEST(Machine, StoreMissesBlockOnlyWhenMshrsFull) {
  Stats s;
  const auto pages = identity_pages(16);
  Machine m(MachineConfig{}, pages, s);
  EXPECT_EQ(m.access_data(0, true, 0).ready, 4u);
  EXPECT_EQ(m.access_data(64, true, 0).ready, 4u);
  // Both MSHRs are busy until 100 and 104.
  EXPECT_EQ(m.access_data(128, true, 0).ready, 104u);
}

TEST(Machine, TranslateWalkCostsOneMemoryRequest) {
  Stats s;
  const auto pages = identity_pages(16);
  Machine m(MachineConfig{}, pages, s);
  const auto t = m.translate(4096 + 8, 5);
  EXPECT_FALSE(t.tlb_hit);
  EXPECT_EQ(t.ready, 105u);
  EXPECT_EQ(t.paddr, 4096u + 8);
  const auto h = m.translate(4096 + 16, 200);
  EXPECT_TRUE(h.tlb_hit);
  EXPECT_EQ(h.ready, 200u);
  EXPECT_EQ(s.tlb_misses, 1u);
  EXPECT_EQ(s.tlb_hits, 1u);
}

TEST(Machine, PrefetchedLineServesDemandMiss) {
  Stats s;
  const auto pages = identity_pages(16);
  Machine m(MachineConfig{}, pages, s);
  const auto ready = m.prefetch(640, 0);
  EXPECT_EQ(ready, 100u);
  const auto d = m.access_data(640, false, 300);
  EXPECT_FALSE(d.l1_hit);
  EXPECT_TRUE(d.prefetch_hit);
  EXPECT_EQ(d.ready, 304u);
  EXPECT_EQ(s.prefetches_issued, 1u);
  EXPECT_EQ(s.prefetches_useful, 1u);
  EXPECT_EQ(s.mem_accesses, 1u);
}

TEST(Machine, NextLinePrefetchStaysInPage) {
  Stats s;
  const auto pages = identity_pages(16);
  MachineConfig cfg;
  cfg.stride_prefetch_degree = 2;
  Machine m(cfg, pages, s);
  m.access_data(4096 - 128, false, 0);
  EXPECT_EQ(s.prefetches_issued, 1u);  // only the last line of the page
  EXPECT_TRUE(m.access_data(4096 - 64, false, 1000).prefetch_hit);
}

TEST(Machine, ConfigValidation) {
  MachineConfig c;
  c.l1_ways = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.l1_size_bytes = 1000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.page_bytes = 3000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  EXPECT_EQ(c.l1_sets(), 64u);
}

TEST(Stats, ValuesFollowFieldNames) {
  Stats s;
  s.cycles = 1;
  s.create_ops = 17;
  const auto v = s.values();
  EXPECT_EQ(v.front(), 1u);
  EXPECT_EQ(v.back(), 17u);
  EXPECT_EQ(Stats::kFieldNames.size(), v.size());
  EXPECT_DOUBLE_EQ(s.mmc_hit_rate(), 0.0);
  s.mmc_hits = 3;
  s.mmc_misses = 1;
  EXPECT_DOUBLE_EQ(s.mmc_hit_rate(), 0.75);
}
