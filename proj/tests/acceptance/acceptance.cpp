// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "metasim/metasim.hpp"

using namespace metasim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::ostringstream detail;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "[violated: " << what << "] ";
    }
  }
  template <class T>
  Check& note(const std::string& k, T v) {
    detail << k << '=' << v << ' ';
    return *this;
  }
  Outcome done() const { return {ok, detail.str()}; }
};

ExperimentOptions opts(const std::string& trace, unsigned reps) {
  ExperimentOptions o;
  o.trace = trace;
  o.reps = reps;
  o.seed = 2024;
  return o;
}

double mean_norm(const std::vector<ResultRow>& rows, const std::string& trace, const std::string& variant,
                 const std::string& sweep = "") {
  return mean_of(rows, trace, variant, sweep, [](const ResultRow& r) { return r.normalized_time(); });
}

double mean_stat(const std::vector<ResultRow>& rows, const std::string& trace, const std::string& variant,
                 const std::string& sweep, std::uint64_t Stats::*field) {
  return mean_of(rows, trace, variant, sweep,
                 [field](const ResultRow& r) { return static_cast<double>(r.stats.*field); });
}

double mean_hit_rate(const std::vector<ResultRow>& rows, const std::string& trace, const std::string& variant,
                     const std::string& sweep) {
  return mean_of(rows, trace, variant, sweep, [](const ResultRow& r) { return r.stats.mmc_hit_rate(); });
}

// ---------------------------------------------------------------- 1
// Byte-granular shadow: every byte of every region the range overlaps gets the tag.
struct ShadowMap {
  std::uint64_t granularity;
  std::vector<std::uint8_t> bytes;

  void apply(Addr start, std::uint64_t len, std::uint8_t tag) {
    if (len == 0) return;
    const Addr lo = start / granularity * granularity;
    const Addr hi = (start + len + granularity - 1) / granularity * granularity;
    std::fill(bytes.begin() + static_cast<std::ptrdiff_t>(lo), bytes.begin() + static_cast<std::ptrdiff_t>(hi), tag);
  }
};

Outcome tag_algebra() {
  constexpr std::uint64_t kSpace = 1 << 20;
  std::uint64_t lookups = 0, mismatches = 0, sequences = 0;
  for (const std::uint64_t gran : {64u, 512u}) {
    SimConfig cfg;
    cfg.meta.granularity_bytes = gran;
    cfg.meta.mmc_entries = 16;
    cfg.meta.physical_memory_bytes = 16 << 20;
    cfg.os.page_map = PageMapPolicy::Scattered;
    Trace t;
    t.header.address_space_bytes = kSpace;
    for (std::uint64_t seq = 0; seq < 1000; ++seq) {
      ++sequences;
      cfg.seed = seq + 1;
      Simulator sim(cfg, t);
      ShadowMap shadow{gran, std::vector<std::uint8_t>(kSpace, 0)};
      std::mt19937_64 rng(seq * 7919 + gran);
      auto below = [&](std::uint64_t n) { return rng() % n; };
      Cycle now = 0;
      auto check = [&](Addr v) {
        ++lookups;
        const auto r = sim.metadata_lookup(ClientId{0}, v, LookupMode::ForceStall);
        if (r.tag.value != shadow.bytes[v]) ++mismatches;
      };
      for (int step = 0; step < 30; ++step) {
        const auto kind = below(100);
        const std::uint8_t tag = kind < 15 ? 0 : static_cast<std::uint8_t>(1 + below(255));
        MetaOp op;
        if (kind < 60) {
          const std::uint64_t len = below(20) == 0 ? 1 + below(kSpace / 4) : 1 + below(8192);
          op = MapOp{TagId{tag}, below(kSpace - len), len};
        } else if (kind < 80) {
          const auto len_x = 1 + below(256), size_x = len_x + below(2048), size_y = 1 + below(16);
          op = Map2DOp{TagId{tag}, below(kSpace - size_x * size_y), len_x, size_x, size_y};
        } else {
          const auto len_x = 1 + below(128), size_x = len_x + below(512);
          const auto len_y = 1 + below(4), size_y = len_y + below(8), size_z = 1 + below(4);
          op = Map3DOp{TagId{tag}, below(kSpace - size_x * size_y * size_z), len_x, len_y, size_x, size_y, size_z};
        }
        sim.executor().exec(op, now);
        for (const auto& vr : decompose(op)) shadow.apply(vr.start, vr.len, tag);
        // Probe around the operator's edges and at random.
        const auto ranges = decompose(op);
        if (!ranges.empty()) {
          const auto& f = ranges.front();
          for (Addr v : {f.start, f.start + f.len - 1, f.start >= gran ? f.start - gran : 0,
                         std::min(kSpace - 1, f.start + f.len + gran)})
            check(v);
        }
        for (int i = 0; i < 6; ++i) check(below(kSpace));
        now += 10;
      }
    }
  }
  Check c;
  c.note("sequences", sequences).note("lookups", lookups).note("mismatches", mismatches);
  c.expect(mismatches == 0, "MMC/MMT tags equal the shadow map at every lookup");
  return c.done();
}

// ---------------------------------------------------------------- 2
Outcome stream_reach() {
  SimConfig cfg;
  cfg.clients = {client(ClientKind::NullAll)};
  cfg.meta.granularity_bytes = 512;
  const auto r = run_one(cfg, gen_stream(1 << 20, 4));
  const double expected = 1.0 - 4.0 / 512;  // one miss per region of 128 elements
  const double hr = r.stats.mmc_hit_rate();
  Check c;
  c.note("hit_rate", hr).note("expected", expected);
  c.expect(std::abs(hr - expected) <= 0.001, "hit rate = 127/128 +- 0.1%");
  return c.done();
}

// ---------------------------------------------------------------- 3
Outcome random_reach() {
  SimConfig cfg;
  cfg.clients = {client(ClientKind::NullAll)};
  const std::uint64_t region_bytes = 32 << 20;
  const auto regions = region_bytes / cfg.meta.granularity_bytes;
  const auto r = run_one(cfg, gen_random(region_bytes, 100000, 1));
  Check c;
  c.note("regions", regions).note("mmc_entries", cfg.meta.mmc_entries).note("hit_rate", r.stats.mmc_hit_rate());
  c.expect(regions >= 100 * cfg.meta.mmc_entries, "regions >= 100 x MMC entries");
  c.expect(r.stats.mmc_hit_rate() < 0.02, "hit rate < 2%");
  return c.done();
}

// ---------------------------------------------------------------- 4
Outcome lookup_triggers() {
  Check c;
  for (const std::string trace : {"stream", "3d_array"}) {
    const auto rows = run_experiment("lookup_triggers", opts(trace, 3));
    const auto la = mean_stat(rows, trace, "all_access", "", &Stats::lookups_issued);
    const auto lm = mean_stat(rows, trace, "miss_only", "", &Stats::lookups_issued);
    const auto ea = mean_of(rows, trace, "all_access", "", [](const ResultRow& r) { return double(r.extra_mem_accesses()); });
    const auto em = mean_of(rows, trace, "miss_only", "", [](const ResultRow& r) { return double(r.extra_mem_accesses()); });
    const auto ca = mean_stat(rows, trace, "all_access", "", &Stats::cycles);
    const auto cm = mean_stat(rows, trace, "miss_only", "", &Stats::cycles);
    const double extra_diff = std::abs(ea - em) / std::max({ea, em, 1.0});
    const double cycle_diff = std::abs(ca - cm) / cm;
    c.note(trace + ".lookup_ratio", la / lm).note(trace + ".extra_diff", extra_diff).note(trace + ".cycle_diff", cycle_diff);
    c.expect(la >= 5 * lm, trace + ": AllAccess lookups >= 5x MissOnly");
    c.expect(extra_diff < 0.05, trace + ": extra memory accesses within 5%");
    c.expect(cycle_diff < 0.01, trace + ": cycles within 1%");
  }
  return c.done();
}

// ---------------------------------------------------------------- 5
Outcome bandwidth() {
  const std::string trace = "random";
  const auto rows = run_experiment("bandwidth", opts(trace, 3));
  const auto half = mean_norm(rows, trace, "metasys", "1/2x");
  const auto one = mean_norm(rows, trace, "metasys", "1x");
  const auto two = mean_norm(rows, trace, "metasys", "2x");
  Check c;
  c.note("0.5x", half).note("1x", one).note("2x", two);
  c.expect(half > one && one > two, "overhead strictly decreases with bandwidth");
  return c.done();
}

// ---------------------------------------------------------------- 6
Outcome size_and_granularity() {
  Check c;
  const std::vector<std::string> sizes = {"16", "32", "64", "128", "256", "512"};
  const std::vector<std::string> grans = {"64", "128", "256", "512", "1024", "2048"};
  for (const std::string trace : {"stream", "linked_list", "random"}) {
    const auto rows = run_experiment("mmc_size", opts(trace, 3));
    std::vector<double> hr;
    for (const auto& s : sizes) hr.push_back(mean_hit_rate(rows, trace, "metasys", s));
    std::ostringstream series;
    for (auto h : hr) series << h << '/';
    c.note(trace + ".by_size", series.str());
    if (trace == "random") {
      const auto [lo, hi] = std::minmax_element(hr.begin(), hr.end());
      c.expect(*hi - *lo <= 0.02, "random: insensitive to MMC size within 2%");
    } else {
      c.expect(std::is_sorted(hr.begin(), hr.end()), trace + ": non-decreasing in MMC entries");
    }
  }
  for (const std::string trace : {"stream", "linked_list"}) {
    const auto rows = run_experiment("granularity", opts(trace, 3));
    std::vector<double> hr;
    for (const auto& g : grans) hr.push_back(mean_hit_rate(rows, trace, "metasys", g));
    std::ostringstream series;
    for (auto h : hr) series << h << '/';
    c.note(trace + ".by_granularity", series.str());
    c.expect(std::is_sorted(hr.begin(), hr.end()), trace + ": non-decreasing in granularity");
  }
  return c.done();
}

// ---------------------------------------------------------------- 7
Outcome translation() {
  const std::string trace = "random";
  const auto rows = run_experiment("translation", opts(trace, 3));
  const auto cv = mean_stat(rows, trace, "virtual", "", &Stats::cycles);
  const auto cp = mean_stat(rows, trace, "physical", "", &Stats::cycles);
  const auto tv = mean_stat(rows, trace, "virtual", "", &Stats::tlb_misses);
  const auto tp = mean_stat(rows, trace, "physical", "", &Stats::tlb_misses);
  Check c;
  c.note("virtual_cycles", cv).note("physical_cycles", cp).note("virtual_tlb_misses", tv).note("physical_tlb_misses", tp);
  c.expect(cp <= cv, "physical cycles <= virtual cycles");
  c.expect(tp < tv, "physical TLB misses strictly lower");
  return c.done();
}

// ---------------------------------------------------------------- 8
Outcome contention() {
  Check c;
  const std::string random = "random";
  const auto cont = run_experiment("contention", opts(random, 3));
  const auto one = mean_norm(cont, random, "one_client");
  const auto two = mean_norm(cont, random, "two_clients");
  c.note("random.one", one).note("random.two", two);
  c.expect(two > one, "random: second client increases overhead");

  const auto mit_r = run_experiment("mitigation", opts(random, 3));
  const auto shared_r = mean_norm(mit_r, random, "shared");
  const auto nostall_r = mean_norm(mit_r, random, "no_stall");
  c.note("random.shared", shared_r).note("random.no_stall", nostall_r);
  c.expect(nostall_r < shared_r, "random: NoStall reduces two-client overhead");

  const std::string grid = detail::contention_traces()[1];
  const auto mit_g = run_experiment("mitigation", opts(grid, 3));
  const auto shared_g = mean_norm(mit_g, grid, "shared");
  const auto part_g = mean_norm(mit_g, grid, "partitioned");
  c.note("3d.shared", shared_g).note("3d.partitioned", part_g);
  c.expect(part_g < shared_g, "3D array: partitioning reduces two-client overhead");
  return c.done();
}

// ---------------------------------------------------------------- 9
Outcome op_density() {
  const std::string trace = "stream";
  const auto rows = run_experiment("op_density", opts(trace, 3));
  const auto s8 = mean_norm(rows, trace, "per_8") - 1.0;
  const auto s2 = mean_norm(rows, trace, "per_2") - 1.0;
  Check c;
  c.note("slowdown_per_8", s8).note("slowdown_per_2", s2);
  c.expect(s2 > s8 && s8 > 0, "per-2 slowdown > per-8 slowdown > 0");
  c.expect(s8 < 0.10, "per-8 slowdown < 10%");
  return c.done();
}

// ---------------------------------------------------------------- 10
// Brute force over the trace: layout from the header, values from the memory image.
std::vector<Addr> prefetch_oracle(const Trace& t) {
  const auto vertices = std::stoull(t.header.params.at("vertices"));
  const auto stride = std::stoull(t.header.params.at("stride"));
  constexpr std::uint64_t ib = 4, pb = 8;
  const Addr work = kDataBase;
  auto align = [](Addr a) { return (a + 4095) / 4096 * 4096; };
  const Addr vlist = align(work + vertices * ib);
  const std::uint64_t edges = t.image.load(vlist + vertices * ib, ib);
  const Addr elist = align(vlist + (vertices + 1) * ib);
  const Addr plist = align(elist + std::max<std::uint64_t>(edges, 1) * ib);
  struct S {
    Addr base;
    std::uint64_t bytes, elem;
  };
  const std::vector<S> chain = {{work, vertices * ib, ib},
                                {vlist, (vertices + 1) * ib, ib},
                                {elist, std::max<std::uint64_t>(edges, 1) * ib, ib},
                                {plist, vertices * pb, pb}};
  auto in = [&](std::size_t s, Addr a) { return a >= chain[s].base && a < chain[s].base + chain[s].bytes; };
  std::vector<Addr> out;
  for (const auto& e : t.events) {
    const auto* m = std::get_if<MemAccess>(&e);
    if (!m) continue;
    for (std::size_t s = 0; s < chain.size(); ++s) {
      if (!in(s, m->vaddr)) continue;
      Addr a = m->vaddr + stride * chain[s].elem;
      if (!in(s, a)) break;
      out.push_back(a);
      for (std::size_t k = s; k + 1 < chain.size(); ++k) {
        const Addr next = chain[k + 1].base + t.image.load(a, static_cast<std::uint32_t>(chain[k].elem)) * chain[k + 1].elem;
        if (!in(k + 1, next)) break;
        out.push_back(next);
        a = next;
      }
      break;
    }
  }
  return out;
}

Outcome prefetcher() {
  Check c;
  std::size_t exact = 0, addresses = 0;
  for (std::uint64_t g = 1; g <= 20; ++g) {
    const auto vertices = 8 + (g * 13) % 57;  // 8..64
    const auto degree = 1 + g % 4;
    const auto stride = static_cast<std::uint8_t>(1 + g % 3);
    const auto t = gen_graph_traversal(vertices, degree, g, stride);
    SimConfig cfg;
    cfg.meta.mmc_entries = 1 << 22;
    cfg.clients = {client(ClientKind::GraphPrefetch, LookupMode::ForceStall)};
    const auto r = run_one(cfg, t);
    const auto oracle = prefetch_oracle(t);
    addresses += oracle.size();
    if (r.prefetch_log == oracle && oracle == t.expected.prefetch_oracle) ++exact;
  }
  c.note("graphs_exact", exact).note("oracle_addresses", addresses);
  c.expect(exact == 20, "prefetch sequence equals the brute-force oracle on all 20 graphs");

  const std::vector<std::string> traces = {"graph:seed=1", "graph:seed=2,degree=8", "graph:seed=3,vertices=16384,degree=2"};
  for (const auto& trace : traces) {
    auto o = opts(trace, 3);
    o.base.machine.mem_latency_cycles = 100;
    const auto rows = run_experiment("usecase_prefetch", o);
    const auto m = mean_norm(rows, trace, "metasys");
    c.note(trace, m);
    c.expect(m < 1.0, trace + ": prefetcher reduces cycles");
  }
  return c.done();
}

// ---------------------------------------------------------------- 11
Outcome bounds() {
  Check c;
  SimConfig cfg = detail::safety_config(SimConfig{});
  cfg.clients = {client(ClientKind::Bounds)};

  const auto clean = gen_bounds_corpus(33334, 1, 0);
  std::size_t checked = 0;
  for (const auto& e : clean.events)
    if (const auto* m = std::get_if<MetaEvent>(&e)) checked += std::holds_alternative<CreateOp>(m->op);
  const auto rc = run_one(cfg, clean);
  c.note("checked_accesses", checked).note("clean_traps", rc.traps.size());
  c.expect(checked >= 100000, "clean corpus has >= 1e5 checked accesses");
  c.expect(rc.traps.empty(), "zero false positives on the clean corpus");

  const auto dirty = gen_bounds_corpus(33334, 2, 200);
  const auto rd = run_one(cfg, dirty);
  std::vector<std::size_t> trapped;
  for (const auto& t : rd.traps) trapped.push_back(t.position);
  c.note("injected", dirty.expected.violation_positions.size()).note("trapped", trapped.size());
  c.expect(trapped == dirty.expected.violation_positions, "every injected violation trapped at its exact position");

  const auto rows = run_experiment("usecase_bounds", opts("safety_bounds", 3));
  const auto sw = mean_norm(rows, "safety_bounds", "software");
  const auto ms = mean_norm(rows, "safety_bounds", "metasys");
  c.note("software_overhead", sw - 1).note("metasys_overhead", ms - 1);
  c.expect(ms < sw, "MetaSys overhead < software-check overhead");
  return c.done();
}

// ---------------------------------------------------------------- 12
Outcome rap() {
  Check c;
  SimConfig cfg = detail::safety_config(SimConfig{});
  cfg.clients = {client(ClientKind::Rap)};
  const auto clean = run_one(cfg, gen_rap_corpus(20000, 1, 0));
  c.note("clean_traps", clean.traps.size());
  c.expect(clean.traps.empty(), "zero traps on the clean nested-call corpus");

  const auto dirty = gen_rap_corpus(20000, 2, 100);
  const auto rd = run_one(cfg, dirty);
  std::vector<std::size_t> trapped;
  for (const auto& t : rd.traps) trapped.push_back(t.position);
  c.note("injected", dirty.expected.violation_positions.size()).note("trapped", trapped.size());
  c.expect(trapped == dirty.expected.violation_positions, "every injected overwrite trapped at its exact position");

  const auto rows = run_experiment("usecase_rap", opts("safety_rap", 3));
  const auto canary = mean_norm(rows, "safety_rap", "canary");
  const auto ms = mean_norm(rows, "safety_rap", "metasys");
  c.note("canary_overhead", canary - 1).note("metasys_overhead", ms - 1);
  c.expect(ms < canary, "MetaSys overhead < canary overhead");
  return c.done();
}

// ---------------------------------------------------------------- 13
Outcome determinism() {
  Check c;
  std::size_t traces = 0;
  for (const auto& w : workload_names()) {
    const auto spec = parse_trace_spec(w);
    const auto t = generate(spec);
    ++traces;
    c.expect(generate(spec) == t, w + ": generator is deterministic");
    c.expect(parse_trace(serialize_trace(t)) == t, w + ": trace_read(trace_write(t)) == t");
  }
  SimConfig cfg;
  cfg.clients = {client(ClientKind::NullAll), client(ClientKind::TlbMiss)};
  cfg.seed = 77;
  const auto t = gen_linked_list(4096, 2, 9);
  c.expect(run_one(cfg, t).stats == run_one(cfg, t).stats, "identical Stats for identical inputs");
  auto o = opts("linked_list:nodes=512", 2);
  c.expect(format_csv(run_experiment("mitigation", o)) == format_csv(run_experiment("mitigation", o)),
           "identical experiment CSV for identical seed");
  c.note("generators", traces);
  return c.done();
}

// ---------------------------------------------------------------- 14
Outcome mmt_sizing() {
  const auto mmt = allocate_mmt(8ULL << 30, 512);
  const double fraction = static_cast<double>(mmt.footprint_bytes()) / static_cast<double>(8ULL << 30);
  Check c;
  c.note("bytes", mmt.footprint_bytes()).note("fraction", fraction);
  c.expect(mmt.footprint_bytes() == (16ULL << 20), "MMT of 8 GB at 512 B = 16 MB");
  c.expect(std::abs(fraction * 100 - 0.2) < 0.005, "0.2% of memory");
  return c.done();
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "tag-algebra oracle", 10, tag_algebra},
      {2, "MMC reach, Stream", 5, stream_reach},
      {3, "MMC reach, Random", 30, random_reach},
      {4, "lookup-trigger equivalence", 60, lookup_triggers},
      {5, "bandwidth monotonicity", 60, bandwidth},
      {6, "MMC size and granularity monotonicity", 120, size_and_granularity},
      {7, "translation toggle", 60, translation},
      {8, "contention and mitigation", 120, contention},
      {9, "operator density", 60, op_density},
      {10, "prefetcher oracle equivalence", 120, prefetcher},
      {11, "bounds checking", 120, bounds},
      {12, "return-address protection", 60, rap},
      {13, "determinism and trace round-trip", 60, determinism},
      {14, "MMT sizing", 1, mmt_sizing},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_s) {
      o.pass = false;
      o.detail += "[over time budget] ";
    }
    failed += !o.pass;
    std::printf("%s %2d %s (%.2f s, budget %.0f s): %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, secs, cr.budget_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
