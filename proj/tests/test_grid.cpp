#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <warpspec/grid.hpp>
#include <warpspec/partition.hpp>
#include <warpspec/pipeline.hpp>
#include <warpspec/trace.hpp>

#include "support/fixtures.hpp"

using namespace warpspec;

namespace {

MachineConfig grid_mc() {
    MachineConfig mc;
    mc.tma_latency_per_tile = 100;
    mc.mma_latency_per_tile = 20;
    mc.cuda_op_latency = 1;
    mc.ref_tile_rows = 2;
    mc.ref_tile_cols = 2;
    mc.tma_engine_count = 2;
    mc.num_sms = 4;
    mc.cta_launch_overhead = 1000;
    return mc;
}

LoweredModule ws_module(const KernelGraph& g, int d, int p) {
    WarpSpecProgram ws = partition_kernel(g, d);
    MmaPipelineConfig cfg;
    cfg.p = p;
    return lower(apply_fine_grained(ws, cfg), LowerOptions{p});
}

}  // namespace

TEST_CASE("cooperative 2 WGs: row bands, raised threshold, identical outputs") {
    KernelGraph g = parse_kernel(testing::gemm_src(4, 4, 2, 3));
    Buffers in = testing::deterministic_inputs(g, 31);
    Buffers want = interpret_sequential(g, in);

    LoweredModule base = ws_module(g, 2, 1);
    CooperativeConfig cc;
    cc.num_consumer_wgs = 2;
    LoweredModule coop = apply_cooperative(base, cc);
    REQUIRE(coop.streams.size() == 3);
    CHECK(coop.streams[1].band_count == 2);
    CHECK(coop.streams[2].band_index == 1);
    for (const auto& b : coop.barriers)
        if (b.kind == BarrierKind::Empty) CHECK(b.threshold == 2);

    SimResult r = simulate(coop, grid_mc(), in);
    REQUIRE_MESSAGE(r.verdict == Verdict::Completed, r.detail);
    CHECK(r.outputs.at("c") == want.at("c"));
}

TEST_CASE("cooperative with one WG leaves the module unchanged") {
    KernelGraph g = parse_kernel(testing::gemm_src(4, 4, 2, 2));
    LoweredModule base = ws_module(g, 2, 1);
    LoweredModule same = apply_cooperative(base, CooperativeConfig{1, 0});
    CHECK(same.streams.size() == base.streams.size());
    for (const auto& b : same.barriers) CHECK(b.threshold == 1);
}

TEST_CASE("indivisible tile rows are rejected") {
    KernelGraph g = parse_kernel(testing::gemm_src(4, 4, 2, 2));
    LoweredModule base = ws_module(g, 2, 1);
    CooperativeConfig cc;
    cc.num_consumer_wgs = 3;
    CHECK_THROWS_AS(apply_cooperative(base, cc), CompileError);
}

TEST_CASE("register gate: a large tile needs pooled registers") {
    // 16x16 int accumulator = 1024 bytes; the default 768-byte budget fails
    // for one WG and fits at 1024/2 + overhead for two
    KernelGraph g = parse_kernel(testing::gemm_src(16, 16, 4, 2));
    MachineConfig mc = grid_mc();
    mc.regs_per_wg = 768;
    LoweredModule single = ws_module(g, 2, 1);
    CHECK_THROWS_AS(check_register_budget(single, mc), CompileError);

    LoweredModule coop = apply_cooperative(single, CooperativeConfig{2, 0});
    check_register_budget(coop, mc);  // fits pooled
    Buffers in = testing::deterministic_inputs(g, 32);
    SimResult r = simulate(coop, mc, in);
    REQUIRE(r.verdict == Verdict::Completed);
    CHECK(r.outputs.at("c") == interpret_sequential(g, in).at("c"));
}

TEST_CASE("cooperative release safety across the D grid") {
    KernelGraph g = parse_kernel(testing::gemm_src(4, 4, 2, 4));
    Buffers in = testing::deterministic_inputs(g, 33);
    Buffers want = interpret_sequential(g, in);
    for (int d = 1; d <= 4; ++d) {
        LoweredModule coop = apply_cooperative(ws_module(g, d, 1), CooperativeConfig{2, 0});
        SimResult r = simulate(coop, grid_mc(), in);
        REQUIRE_MESSAGE(r.verdict == Verdict::Completed, "D=" << d << ": " << r.detail);
        CHECK(r.outputs.at("c") == want.at("c"));
    }
}

TEST_CASE("persistent: launch accounting is exactly SMs x overhead") {
    KernelGraph g = parse_kernel(testing::gemm_tiled_src(4, 4, 2, 2, 2, 2));
    Buffers in = testing::deterministic_inputs(g, 34);
    Buffers want = testing::interpret_tiles(g, in, 16);
    MachineConfig mc = grid_mc();

    LoweredModule base = ws_module(g, 2, 1);
    GridResult plain = run_grid(base, mc, in, 16);
    REQUIRE_MESSAGE(plain.verdict == Verdict::Completed, plain.detail);
    CHECK(plain.launch_cycles == 16 * 1000);
    CHECK(plain.outputs.at("c") == want.at("c"));

    LoweredModule pers = apply_persistent(base, 16);
    GridResult fast = run_grid(pers, mc, in, 16);
    REQUIRE_MESSAGE(fast.verdict == Verdict::Completed, fast.detail);
    CHECK(fast.launch_cycles == 4 * 1000);
    CHECK(fast.outputs.at("c") == want.at("c"));

    CHECK(fast.cycles < plain.cycles);
}

TEST_CASE("one tile on one SM: persistent matches non-persistent") {
    KernelGraph g = parse_kernel(testing::gemm_tiled_src(1, 1, 2, 2, 2, 2));
    Buffers in = testing::deterministic_inputs(g, 35);
    MachineConfig mc = grid_mc();
    mc.num_sms = 1;
    LoweredModule base = ws_module(g, 2, 1);
    GridResult plain = run_grid(base, mc, in, 1);
    GridResult pers = run_grid(apply_persistent(base, 1), mc, in, 1);
    REQUIRE(plain.verdict == Verdict::Completed);
    REQUIRE(pers.verdict == Verdict::Completed);
    CHECK(pers.cycles == plain.cycles);
    CHECK(pers.outputs.at("c") == plain.outputs.at("c"));
}

TEST_CASE("persistent equivalence on tiled outputs and zero-overhead parity") {
    KernelGraph g = parse_kernel(testing::gemm_tiled_src(2, 2, 2, 2, 2, 3));
    Buffers in = testing::deterministic_inputs(g, 36);
    Buffers want = testing::interpret_tiles(g, in, 4);
    MachineConfig mc = grid_mc();
    mc.cta_launch_overhead = 0;
    LoweredModule base = ws_module(g, 2, 1);
    GridResult plain = run_grid(base, mc, in, 4);
    GridResult pers = run_grid(apply_persistent(base, 4), mc, in, 4);
    REQUIRE(plain.verdict == Verdict::Completed);
    REQUIRE(pers.verdict == Verdict::Completed);
    CHECK(plain.outputs.at("c") == want.at("c"));
    CHECK(pers.outputs.at("c") == want.at("c"));
    CHECK(pers.launch_cycles == 0);
}

TEST_CASE("persistent cooperative composition still matches the oracle") {
    KernelGraph g = parse_kernel(testing::gemm_tiled_src(2, 2, 4, 4, 2, 2));
    Buffers in = testing::deterministic_inputs(g, 37);
    Buffers want = testing::interpret_tiles(g, in, 4);
    LoweredModule mod =
        apply_persistent(apply_cooperative(ws_module(g, 2, 1), CooperativeConfig{2, 0}), 4);
    GridResult r = run_grid(mod, grid_mc(), in, 4);
    REQUIRE_MESSAGE(r.verdict == Verdict::Completed, r.detail);
    CHECK(r.outputs.at("c") == want.at("c"));
}
