#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <warpspec/grid.hpp>
#include <warpspec/partition.hpp>
#include <warpspec/pipeline.hpp>
#include <warpspec/sim.hpp>
#include <warpspec/trace.hpp>

#include "support/fixtures.hpp"

using namespace warpspec;

namespace {

MachineConfig tiny_mc() {
    MachineConfig mc;
    mc.tma_latency_per_tile = 100;
    mc.mma_latency_per_tile = 20;
    mc.cuda_op_latency = 1;
    mc.ref_tile_rows = 2;
    mc.ref_tile_cols = 2;
    mc.tma_engine_count = 2;
    return mc;
}

LoweredModule specialized_gemm(int64_t trip, int d, int p, bool skip_check = false) {
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, trip));
    WarpSpecProgram ws = partition_kernel(g, d);
    MmaPipelineConfig cfg;
    cfg.p = p;
    cfg.skip_feasibility_check = skip_check;
    return lower(apply_fine_grained(ws, cfg), LowerOptions{p});
}

LoweredModule sequential_gemm(int64_t trip) {
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, trip));
    return lower(sequentialize(g));
}

}  // namespace

TEST_CASE("sequential cycles follow N * (2*tma + mma) within scalar-op slack") {
    const int64_t n = 4;
    MachineConfig mc = tiny_mc();
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
    Buffers in = testing::deterministic_inputs(g, 1);
    SimResult r = simulate(sequential_gemm(n), mc, in);
    REQUIRE(r.verdict == Verdict::Completed);
    int64_t closed_form = n * (2 * 100 + 20);
    CHECK(r.cycles >= closed_form);
    CHECK(r.cycles <= closed_form + 40);  // scalar ops and the store epilogue
    CHECK(r.outputs.at("c") == interpret_sequential(g, in).at("c"));
}

TEST_CASE("specialized D=2 runs strictly fewer cycles than sequential") {
    const int64_t n = 4;
    MachineConfig mc = tiny_mc();
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
    Buffers in = testing::deterministic_inputs(g, 2);
    SimResult seq = simulate(sequential_gemm(n), mc, in);
    SimResult ws = simulate(specialized_gemm(n, 2, 1), mc, in);
    REQUIRE(seq.verdict == Verdict::Completed);
    REQUIRE(ws.verdict == Verdict::Completed);
    CHECK(ws.cycles < seq.cycles);
    CHECK(ws.outputs.at("c") == seq.outputs.at("c"));
}

TEST_CASE("deleting consumed deadlocks with the producer stuck on the empty barrier") {
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, 2));
    WarpSpecProgram ws = partition_kernel(g, 1);
    // drop the release
    auto& body = ws.regions[1].loop.body;
    for (size_t i = 0; i < body.size(); ++i)
        if (body[i].kind == OpKind::Consumed) {
            body.erase(body.begin() + static_cast<long>(i));
            break;
        }
    LoweredModule mod = lower(ws);
    SimResult r = simulate(mod, tiny_mc(), testing::deterministic_inputs(g, 3));
    REQUIRE(r.verdict == Verdict::Deadlock);
    bool producer_on_empty = false;
    for (const auto& e : r.blocked)
        if (e.wg == 0 && e.waiting_on == "empty0_0" && e.want_parity == 1)
            producer_on_empty = true;
    CHECK_MESSAGE(producer_on_empty, r.detail);
}

TEST_CASE("force-built P > D deadlocks with a named blocked barrier") {
    LoweredModule mod = specialized_gemm(4, 1, 2, /*skip_check=*/true);
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, 4));
    SimResult r = simulate(mod, tiny_mc(), testing::deterministic_inputs(g, 4));
    REQUIRE(r.verdict == Verdict::Deadlock);
    REQUIRE(!r.blocked.empty());
    bool named = false;
    for (const auto& e : r.blocked)
        if (!e.waiting_on.empty() && e.waiting_on.rfind("empty", 0) == 0) named = true;
    CHECK_MESSAGE(named, r.detail);
}

TEST_CASE("circular wait reports every blocked agent") {
    // two streams, each waiting a phase that only the other could complete
    LoweredModule mod;
    mod.name = "cycle";
    Channel ch;
    ch.id = 0;
    ch.depth = 1;
    ch.members = {TileType{1, 1, Elem::Int}};
    mod.channels = {ch};
    mod.channel_staging = {false};
    Barrier e;
    e.id = 0;
    e.kind = BarrierKind::Empty;
    e.channel = 0;
    e.slot = 0;
    Barrier f;
    f.id = 1;
    f.kind = BarrierKind::Full;
    f.channel = 0;
    f.slot = 0;
    mod.barriers = {e, f};
    Stream s0;
    s0.wg = 0;
    s0.role = "producer";
    LInstr w0;
    w0.kind = InstrKind::BarWaitPhase;
    w0.barrier = 0;
    w0.parity = 1;  // needs a consumed that never comes
    s0.instrs = {w0};
    Stream s1;
    s1.wg = 1;
    s1.role = "consumer";
    LInstr w1;
    w1.kind = InstrKind::BarWaitPhase;
    w1.barrier = 1;
    w1.parity = 0;  // needs a put that never comes
    s1.instrs = {w1};
    mod.streams = {s0, s1};
    SimResult r = simulate(mod, tiny_mc(), {});
    REQUIRE(r.verdict == Verdict::Deadlock);
    REQUIRE(r.blocked.size() == 2);
    CHECK(r.blocked[0].waiting_on == "empty0_0");
    CHECK(r.blocked[1].waiting_on == "full0_0");
}

TEST_CASE("all agents finishing is a completed verdict") {
    SimResult r = simulate(sequential_gemm(1), tiny_mc(),
                           testing::deterministic_inputs(
                               parse_kernel(testing::gemm_src(2, 2, 2, 1)), 5));
    CHECK(r.verdict == Verdict::Completed);
    CHECK(r.blocked.empty());
}

TEST_CASE("utilization: empty trace, half-busy unit, and overlap gain") {
    SimTrace empty;
    CHECK(utilization(empty, 20).empty());

    SimTrace one;
    one.intervals.push_back({"tensor_core", 0, 5, 15, "g0"});
    auto u = utilization(one, 20);
    CHECK(u.at("tensor_core") == doctest::Approx(0.5));

    // specialized D=3 keeps the tensor core busier than sequential
    const int64_t n = 6;
    MachineConfig mc = tiny_mc();
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
    Buffers in = testing::deterministic_inputs(g, 6);
    SimResult seq = simulate(sequential_gemm(n), mc, in);
    SimResult ws = simulate(specialized_gemm(n, 3, 1), mc, in);
    auto useq = utilization(seq.trace, seq.cycles);
    auto uws = utilization(ws.trace, ws.cycles);
    CHECK(uws.at("tensor_core") > useq.at("tensor_core"));
}

TEST_CASE("gantt renders a row per unit") {
    SimTrace empty;
    std::string g0 = gantt(empty, 0);
    CHECK(g0.find("cycles: 0") != std::string::npos);

    SimTrace t;
    t.intervals.push_back({"tma0", 0, 0, 40, "a"});
    t.intervals.push_back({"tensor_core", 1, 40, 80, "g"});
    std::string g1 = gantt(t, 80, 8);
    CHECK(g1.find("tma0") != std::string::npos);
    CHECK(g1.find("tensor_core") != std::string::npos);
    CHECK(g1.find("####....") != std::string::npos);
    CHECK(g1.find("....####") != std::string::npos);
}

TEST_CASE("simulation is deterministic byte-for-byte") {
    const int64_t n = 4;
    MachineConfig mc = tiny_mc();
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
    Buffers in = testing::deterministic_inputs(g, 8);
    auto run = [&] {
        SimResult r = simulate(specialized_gemm(n, 2, 2), mc, in);
        RunSummary s;
        s.cycles = r.cycles;
        s.verdict = verdict_name(r.verdict);
        s.util = utilization(r.trace, r.cycles);
        return trace_json(r.trace, s).dump(2);
    };
    CHECK(run() == run());
}

TEST_CASE("cycles are monotone non-increasing in D") {
    const int64_t n = 6;
    MachineConfig mc = tiny_mc();
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
    Buffers in = testing::deterministic_inputs(g, 9);
    int64_t prev = -1;
    for (int d = 1; d <= 4; ++d) {
        SimResult r = simulate(specialized_gemm(n, d, 1), mc, in);
        REQUIRE(r.verdict == Verdict::Completed);
        if (prev >= 0) CHECK(r.cycles <= prev);
        prev = r.cycles;
    }
}

TEST_CASE("simulated outputs equal the interpreter across fixtures") {
    for (const char* (*fn)() : {testing::gemm_2x2_src, testing::attention_small_src,
                                testing::gemm_act_src}) {
        KernelGraph g = parse_kernel(fn());
        Buffers in = testing::deterministic_inputs(g, 10);
        Buffers want = interpret_sequential(g, in);
        // unspecialized
        SimResult seq = simulate(lower(sequentialize(g)), tiny_mc(), in);
        REQUIRE(seq.verdict == Verdict::Completed);
        CHECK(seq.outputs == want);
        // specialized, auto-shaped
        WarpSpecProgram ws = partition_kernel(g, 2);
        StagePlan plan = identify_stages(g);
        WarpSpecProgram piped;
        if (plan.has_t && plan.has_c)
            piped = apply_coarse_grained(ws, plan, g);
        else if (plan.has_t)
            piped = apply_fine_grained(ws, MmaPipelineConfig{1, false});
        else
            piped = ws;
        SimResult r = simulate(lower(piped), tiny_mc(), in);
        REQUIRE(r.verdict == Verdict::Completed);
        CHECK(r.outputs == want);
    }
}

TEST_CASE("per-slot phase completions alternate empty, full, empty, full") {
    const int64_t n = 4;
    LoweredModule mod = specialized_gemm(n, 2, 1);
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
    SimResult r = simulate(mod, tiny_mc(), testing::deterministic_inputs(g, 11));
    REQUIRE(r.verdict == Verdict::Completed);
    for (const auto& ch : mod.channels) {
        for (int s = 0; s < ch.depth; ++s) {
            const Barrier* eb = mod.find_barrier(BarrierKind::Empty, ch.id, s);
            const Barrier* fb = mod.find_barrier(BarrierKind::Full, ch.id, s);
            std::string seq;
            for (const auto& [bar, time, count] : r.trace.barrier_log) {
                if (bar == eb->id) seq += 'e';
                if (bar == fb->id) seq += 'f';
            }
            REQUIRE(!seq.empty());
            CHECK(seq[0] == 'e');
            for (size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] != seq[i - 1]);
        }
    }
}

TEST_CASE("unit busy intervals never overlap on one instance") {
    const int64_t n = 6;
    SimResult r = simulate(specialized_gemm(n, 3, 2), tiny_mc(),
                           testing::deterministic_inputs(
                               parse_kernel(testing::gemm_src(2, 2, 2, n)), 12));
    REQUIRE(r.verdict == Verdict::Completed);
    std::map<std::string, std::vector<std::pair<int64_t, int64_t>>> per_unit;
    for (const auto& iv : r.trace.intervals) per_unit[iv.unit].emplace_back(iv.start, iv.end);
    for (auto& [unit, ivs] : per_unit) {
        std::sort(ivs.begin(), ivs.end());
        for (size_t i = 1; i < ivs.size(); ++i) CHECK(ivs[i].first >= ivs[i - 1].second);
    }
}

TEST_CASE("shared-memory overflow is rejected at simulation time") {
    MachineConfig mc = tiny_mc();
    mc.smem_bytes = 8;
    CHECK_THROWS_AS(simulate(specialized_gemm(2, 2, 1), mc, {}), CompileError);
}
