#include <gtest/gtest.h>

#include "metasim/sim/simulator.hpp"
#include "metasim/workloads/generators.hpp"

using namespace metasim;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.meta.physical_memory_bytes = 64 << 20;
  return c;
}

}  // namespace

TEST(Simulator, EmptyTraceProducesZeroStats) {
  Trace t;
  const auto r = run_one(small_config(), t);
  EXPECT_EQ(r.stats, Stats{});
  EXPECT_TRUE(r.traps.empty());
}

TEST(Simulator, Stream64KbCompulsoryMisses) {
  const auto r = run_one(small_config(), gen_stream(64 << 10, 4));
  EXPECT_EQ(r.stats.l1_misses, 1024u);
  EXPECT_EQ(r.stats.l1_hits, 16384u - 1024);
  EXPECT_EQ(r.stats.map_ops, 1u);
}

TEST(Simulator, RunsAreDeterministic) {
  auto cfg = small_config();
  cfg.clients = {client(ClientKind::NullAll), client(ClientKind::TlbMiss)};
  const auto t = gen_random(1 << 22, 20000, 5);
  EXPECT_EQ(run_one(cfg, t).stats, run_one(cfg, t).stats);
}

TEST(Simulator, SeedOnlyAffectsReplacementRandomness) {
  auto cfg = small_config();
  cfg.clients = {client(ClientKind::NullAll)};
  cfg.meta.mmc_entries = 16;
  const auto t = gen_random(1 << 22, 20000, 5);
  auto other = cfg;
  other.seed = 99;
  const auto a = run_one(cfg, t).stats;
  const auto b = run_one(other, t).stats;
  EXPECT_EQ(a.lookups_issued, b.lookups_issued);
  EXPECT_EQ(a.l1_misses, b.l1_misses);
}

TEST(Simulator, CyclesFollowTimingModel) {
  Trace t;
  t.header.address_space_bytes = 1 << 20;
  t.events = {MemAccess{AccessKind::Load, 0, 4}, MemAccess{AccessKind::Load, 4, 4}, ComputeEvent{10}};
  const auto r = run_one(small_config(), t);
  // TLB walk (100) + miss (100) after issue at 1; then hit at +1+4; then 10.
  EXPECT_EQ(r.stats.cycles, 1u + 100 + 100 + 1 + 4 + 10);
  EXPECT_EQ(r.stats.instructions, 12u);
}

TEST(Simulator, UnmappedAccessFaultsWithPosition) {
  Trace t;
  t.header.address_space_bytes = 4096;
  t.events = {MemAccess{AccessKind::Load, 0, 4}, MemAccess{AccessKind::Load, 1 << 20, 4}};
  try {
    run_one(small_config(), t);
    FAIL();
  } catch (const SimulationFault& f) {
    EXPECT_EQ(f.position(), 1u);
  }
}

TEST(Simulator, UnboundOperatorsAreReported) {
  Trace t;
  t.header.address_space_bytes = 4096;
  t.events = {MemAccess{AccessKind::Load, 0, 4}, MetaEvent{MapOp{TagId{1}, 0, 64}}};
  Simulator sim(small_config(), t);
  const auto r = sim.run();
  EXPECT_EQ(r.unbound_ops, 1u);
  EXPECT_EQ(sim.plane().mmt().tag_at(sim.process().page_map.to_physical(0)), TagId{1});
}

TEST(Simulator, ContextSwitchLosesArmedTagAndTlb) {
  auto cfg = small_config();
  cfg.clients = {client(ClientKind::Bounds)};
  Trace t;
  t.header.address_space_bytes = 1 << 16;
  t.events = {MemAccess{AccessKind::Load, 0, 4}, MetaEvent{CreateOp{ClientId{0}, TagId{1}, {1}}},
              MemAccess{AccessKind::Load, 8, 4}};
  Simulator sim(cfg, t);
  sim.step(t.events[0], 0);
  sim.step(t.events[1], 1);
  sim.step(t.events[2], 2);  // CREATE commits here and arms the checker
  const auto before = sim.now();
  sim.context_switch();
  EXPECT_EQ(sim.now(), before + cfg.os.context_switch_cycles);
  EXPECT_FALSE(sim.plane().armed_tag(ClientId{0}));
  EXPECT_TRUE(sim.machine().tlb().resident_vpns().empty());
}

TEST(Simulator, RemapKeepsLookupsCoherent) {
  auto cfg = small_config();
  Trace t;
  t.header.address_space_bytes = 1 << 16;
  t.events = {MetaEvent{MapOp{TagId{5}, 4096, 4096}}, MemAccess{AccessKind::Load, 4096, 4}};
  Simulator sim(cfg, t);
  sim.run();
  EXPECT_EQ(sim.remap(1, 40), 8u);
  EXPECT_EQ(sim.metadata_lookup(ClientId{0}, 4096 + 100, LookupMode::ForceStall).tag, TagId{5});
  EXPECT_EQ(sim.plane().mmt().tag_at(4096), kUntagged);
}

TEST(Simulator, PriorityClientMustExist) {
  auto cfg = small_config();
  cfg.meta.priority_client = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.clients = {client(ClientKind::NullAll)};
  EXPECT_NO_THROW(cfg.validate());
}
