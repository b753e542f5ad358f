#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <warpspec/coexec.hpp>
#include <warpspec/pipeline.hpp>
#include <warpspec/print.hpp>

#include "support/fixtures.hpp"

using namespace warpspec;

namespace {

// compact trace of the consumer stream: channel ops and mma ops only
std::string schedule_trace(const WarpSpecProgram& prog) {
    const Region& consumer = prog.regions.back();
    std::string out;
    for (const auto& io : expand_region(consumer, prog.channels)) {
        switch (io.op.kind) {
            case OpKind::Get: out += "get" + std::to_string(io.iter) + " "; break;
            case OpKind::Consumed: out += "cns" + std::to_string(io.iter) + " "; break;
            case OpKind::MmaIssue: out += "issue" + std::to_string(io.iter) + " "; break;
            case OpKind::MmaWait:
                out += io.op.pendings == 0 && io.wait_group < 0 ? "wait0 " : "wait ";
                break;
            default: break;
        }
    }
    if (!out.empty()) out.pop_back();
    return out;
}

WarpSpecProgram fine_gemm(int64_t trip, int d, int p, bool skip_check = false) {
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, trip));
    WarpSpecProgram ws = partition_kernel(g, d);
    MmaPipelineConfig cfg;
    cfg.p = p;
    cfg.skip_feasibility_check = skip_check;
    return apply_fine_grained(ws, cfg);
}

}  // namespace

TEST_CASE("fine-grained N=4 P=2: wait and release precede the next acquire") {
    WarpSpecProgram prog = fine_gemm(4, 2, 2);
    // the k-P release runs before get(k) so slot reuse stays live at P == D
    CHECK(schedule_trace(prog) ==
          "get0 issue0 get1 issue1 wait cns0 get2 issue2 wait cns1 get3 issue3 "
          "wait0 cns2 cns3");
}

TEST_CASE("fine-grained P=1 degenerates to issue/wait/consumed per iteration") {
    WarpSpecProgram prog = fine_gemm(3, 2, 1);
    CHECK(schedule_trace(prog) ==
          "get0 issue0 wait cns0 get1 issue1 wait cns1 get2 issue2 wait0 cns2");
}

TEST_CASE("fine-grained P=3 over D=2 is infeasible") {
    CHECK_THROWS_AS(fine_gemm(4, 2, 3), CompileError);
    try {
        fine_gemm(4, 2, 3);
    } catch (const CompileError& e) {
        CHECK(e.code() == ErrorCode::PipelineInfeasible);
    }
}

TEST_CASE("fine-grained schedules preserve semantics across the D/P grid") {
    for (int64_t n : {1, 2, 5, 8}) {
        KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
        Buffers in = testing::deterministic_inputs(g, 7 + static_cast<uint64_t>(n));
        Buffers want = interpret_sequential(g, in);
        for (int d = 1; d <= 4; ++d)
            for (int p = 1; p <= 3 && p <= d; ++p) {
                WarpSpecProgram ws = partition_kernel(g, d);
                MmaPipelineConfig cfg;
                cfg.p = p;
                WarpSpecProgram prog = apply_fine_grained(ws, cfg);
                CoExecResult r = co_execute(prog, in);
                REQUIRE_MESSAGE(!r.deadlocked, "N=" << n << " D=" << d << " P=" << p);
                CHECK(r.outputs.at("c") == want.at("c"));
            }
    }
}

TEST_CASE("fine-grained bound: in-flight groups never exceed P, all waited") {
    for (int64_t n : {1, 3, 8}) {
        KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, n));
        for (int d = 1; d <= 4; ++d)
            for (int p = 1; p <= 3 && p <= d; ++p) {
                WarpSpecProgram ws = partition_kernel(g, d);
                MmaPipelineConfig cfg;
                cfg.p = p;
                WarpSpecProgram prog = apply_fine_grained(ws, cfg);
                auto stream = expand_region(prog.regions.back(), prog.channels);
                PipelineAnalysis a = analyze_mma_pipeline(stream);
                CHECK(a.max_in_flight <= p);
                CHECK(a.all_issues_waited);
                CHECK(a.consumed_matches_get);
            }
    }
}

TEST_CASE("identify_stages: attention maps to T / C / U") {
    KernelGraph g = parse_kernel(testing::attention_small_src());
    StagePlan plan = identify_stages(g);
    CHECK(plan.use_u);
    CHECK(plan.t_ops.size() == 1);
    CHECK(plan.c_ops.size() == 2);  // reduce max + ew sub
    CHECK(plan.u_ops.size() == 1);
    CHECK(g.loop.body[static_cast<size_t>(plan.t_ops[0])].kind == OpKind::Dot);
    CHECK(g.loop.body[static_cast<size_t>(plan.u_ops[0])].kind == OpKind::Dot);
}

TEST_CASE("identify_stages: plain gemm has an empty transform stage") {
    KernelGraph g = parse_kernel(testing::gemm_2x2_src());
    StagePlan plan = identify_stages(g);
    CHECK(plan.has_t);
    CHECK(!plan.has_c);
    CHECK(!plan.use_u);
}

TEST_CASE("identify_stages: gemm with in-loop activation is T + C") {
    KernelGraph g = parse_kernel(testing::gemm_act_src());
    StagePlan plan = identify_stages(g);
    CHECK(plan.has_t);
    CHECK(plan.has_c);
    CHECK(!plan.use_u);
    CHECK(plan.t_ops.size() == 1);
    CHECK(plan.c_ops.size() == 1);
}

TEST_CASE("coarse-grained N=3 use_u: step order follows the three-stage template") {
    KernelGraph g = parse_kernel(
        "kernel attn3(q: buf<4x4 int>, kt: buf<4x12 int>, v: buf<12x4 int>, o: buf<4x4 int>) {\n"
        "  %zs = const zeros : 4x4 int\n"
        "  %zacc = const zeros : 4x4 int\n"
        "  %k0 = const 0\n"
        "  loop %k in 0..3 iter (%acc = %zacc, %ok = %k0) {\n"
        "    %tq = tma_load q[0, 0] : 4x4 int\n"
        "    %tk = tma_load kt[0, %ok] : 4x4 int\n"
        "    %tv = tma_load v[%ok, 0] : 4x4 int\n"
        "    %s = dot %tq, %tk.T, acc=%zs\n"
        "    %m = reduce max %s axis=1\n"
        "    %p = ew sub %s, %m\n"
        "    %acc1 = dot %p, %tv, acc=%acc\n"
        "    %ok1 = add %ok, 4\n"
        "    yield %acc1, %ok1\n"
        "  }\n"
        "  store o[0, 0] = %acc\n"
        "}\n");
    WarpSpecProgram ws = partition_kernel(g, 2);
    WarpSpecProgram prog = apply_coarse_grained(ws, identify_stages(g), g);
    // T reads ch0 (q,k tuple) and U reads ch1 (v)
    const CoarseSchedule& cs = *prog.regions.back().coarse;
    CHECK(cs.use_u);
    REQUIRE(cs.t.reads.size() == 1);
    REQUIRE(cs.u.reads.size() == 1);
    CHECK(cs.t.reads[0] == 0);
    CHECK(cs.u.reads[0] == 1);

    std::string trace;
    for (const auto& st : coarse_all_steps(true, false, 3)) {
        const char* v = st.kind == StepKind::Get       ? "g"
                        : st.kind == StepKind::Issue   ? "i"
                        : st.kind == StepKind::Wait    ? "w"
                        : st.kind == StepKind::Consumed ? "c"
                                                        : "C";
        trace += std::string(v) + st.stage + std::to_string(st.index) + " ";
    }
    CHECK(trace ==
          "gT0 iT0 "
          "gT1 iT1 gU0 iU0 wT0 cT0 CC0 wU0 cU0 "
          "gT2 iT2 gU1 iU1 wT1 cT1 CC1 wU1 cU1 "
          "wT2 cT2 CC2 gU2 iU2 wU2 cU2 ");

    // semantics preserved under cooperative execution
    Buffers in = testing::deterministic_inputs(g, 11);
    CoExecResult r = co_execute(prog, in);
    REQUIRE(!r.deadlocked);
    CHECK(r.outputs.at("o") == interpret_sequential(g, in).at("o"));
}

TEST_CASE("coarse-grained N=1 is prologue plus epilogue only") {
    std::vector<CoarseStep> steps = coarse_all_steps(false, false, 1);
    std::string trace;
    for (const auto& st : steps) {
        const char* v = st.kind == StepKind::Get       ? "g"
                        : st.kind == StepKind::Issue   ? "i"
                        : st.kind == StepKind::Wait    ? "w"
                        : st.kind == StepKind::Consumed ? "c"
                                                        : "C";
        trace += std::string(v) + st.stage + std::to_string(st.index) + " ";
    }
    CHECK(trace == "gT0 iT0 wT0 cT0 CC0 ");
}

TEST_CASE("coarse-grained: wrappers vanish for channel-free stages") {
    // dot + activation on constant tiles: no loads, so no channels at all
    KernelGraph g = parse_kernel(
        "kernel pure(c: buf<2x2 int>) {\n"
        "  %z = const zeros : 2x2 int\n"
        "  %w = const [[1, 2], [3, 4]] : 2x2 int\n"
        "  loop %k in 0..2 iter (%acc = %z) {\n"
        "    %acc1 = dot %w, %w, acc=%acc\n"
        "    %r = ew relu %acc1\n"
        "    %acc2 = ew add %acc1, %r\n"
        "    yield %acc2\n"
        "  }\n"
        "  store c[0, 0] = %acc\n"
        "}\n");
    WarpSpecProgram ws = partition_kernel(g, 2);
    REQUIRE(ws.regions.size() == 1);
    WarpSpecProgram prog = apply_coarse_grained(ws, identify_stages(g), g);
    auto stream = expand_region(prog.regions.back(), prog.channels);
    for (const auto& io : stream) {
        CHECK(io.op.kind != OpKind::Get);
        CHECK(io.op.kind != OpKind::Consumed);
    }
    Buffers in;
    CoExecResult r = co_execute(prog, in);
    REQUIRE(!r.deadlocked);
    CHECK(r.outputs.at("c") == interpret_sequential(g, in).at("c"));
}

TEST_CASE("coarse-grained needs D >= 2 on staged channels") {
    KernelGraph g = parse_kernel(testing::attention_small_src());
    WarpSpecProgram ws = partition_kernel(g, 1);
    CHECK_THROWS_AS(apply_coarse_grained(ws, identify_stages(g), g), CompileError);
}

TEST_CASE("coarse-grained semantics preserved for D in {2,3,4}") {
    KernelGraph g = parse_kernel(testing::attention_small_src());
    Buffers in = testing::deterministic_inputs(g, 5);
    Buffers want = interpret_sequential(g, in);
    for (int d : {2, 3, 4}) {
        WarpSpecProgram prog =
            apply_coarse_grained(partition_kernel(g, d), identify_stages(g), g);
        CoExecResult r = co_execute(prog, in);
        REQUIRE(!r.deadlocked);
        CHECK(r.outputs.at("o") == want.at("o"));
    }
}

TEST_CASE("gemm+activation coarse schedule preserves semantics") {
    KernelGraph g = parse_kernel(testing::gemm_act_src());
    Buffers in = testing::deterministic_inputs(g, 21);
    Buffers want = interpret_sequential(g, in);
    WarpSpecProgram prog = apply_coarse_grained(partition_kernel(g, 2), identify_stages(g), g);
    CoExecResult r = co_execute(prog, in);
    REQUIRE(!r.deadlocked);
    CHECK(r.outputs.at("c") == want.at("c"));
}

TEST_CASE("each C_j computes exactly once in the default schedule, N <= 8") {
    for (int64_t n = 1; n <= 8; ++n) {
        std::map<int64_t, int> compute_count;
        for (const auto& st : coarse_all_steps(true, false, n))
            if (st.kind == StepKind::Compute) ++compute_count[st.index];
        CHECK(compute_count.size() == static_cast<size_t>(n));
        for (const auto& [j, cnt] : compute_count) {
            CHECK(j >= 0);
            CHECK(j < n);
            CHECK(cnt == 1);
        }
        // DotWait(T_j) precedes Compute(C_j)
        std::map<int64_t, size_t> wait_at, compute_at;
        auto steps = coarse_all_steps(true, false, n);
        for (size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].kind == StepKind::Wait && steps[i].stage == 'T')
                wait_at.emplace(steps[i].index, i);
            if (steps[i].kind == StepKind::Compute) compute_at.emplace(steps[i].index, i);
        }
        for (const auto& [j, wi] : wait_at) CHECK(wi < compute_at.at(j));
    }
}

TEST_CASE("literal prologue reproduces the printed algorithm, computing C0 twice") {
    auto steps = coarse_all_steps(true, true, 3);
    int c0 = 0;
    for (const auto& st : steps)
        if (st.kind == StepKind::Compute && st.index == 0) ++c0;
    CHECK(c0 == 2);
    // the prologue triple appears before any steady step
    CHECK(steps[2].kind == StepKind::Wait);
    CHECK(steps[3].kind == StepKind::Consumed);
    CHECK(steps[4].kind == StepKind::Compute);
}

TEST_CASE("overlap witness: the steady body issues T_j before computing C_{j-1}") {
    auto body = coarse_steady_steps(true);
    size_t issue_t = 0, compute_c = 0;
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i].kind == StepKind::Issue && body[i].stage == 'T') issue_t = i;
        if (body[i].kind == StepKind::Compute) compute_c = i;
    }
    CHECK(issue_t < compute_c);
}

TEST_CASE("coarse schedule prints with stage definitions and schedule blocks") {
    KernelGraph g = parse_kernel(testing::attention_small_src());
    WarpSpecProgram prog = apply_coarse_grained(partition_kernel(g, 2), identify_stages(g), g);
    std::string text = print_program(prog);
    CHECK(text.find("pipeline coarse trips=2 use_u=true") != std::string::npos);
    CHECK(text.find("stage T reads ch0") != std::string::npos);
    CHECK(text.find("stage U reads ch1") != std::string::npos);
    CHECK(text.find("steady %j in 1..2") != std::string::npos);
}
