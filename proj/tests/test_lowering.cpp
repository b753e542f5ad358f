#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <warpspec/lower.hpp>
#include <warpspec/partition.hpp>
#include <warpspec/pipeline.hpp>

#include "support/fixtures.hpp"

using namespace warpspec;

namespace {

LoweredModule lower_gemm(int64_t trip, int d) {
    KernelGraph g = parse_kernel(testing::gemm_src(2, 2, 2, trip));
    return lower(partition_kernel(g, d));
}

}  // namespace

TEST_CASE("gemm D=2 allocates two barriers per slot") {
    KernelGraph g = parse_kernel(testing::gemm_2x2_src());
    WarpSpecProgram prog = partition_kernel(g, 2);
    LoweredModule mod = lower(prog);
    // one channel, depth 2 -> empty/full per slot
    int empty = 0, full = 0;
    for (const auto& b : mod.barriers) {
        if (b.kind == BarrierKind::Empty) ++empty;
        if (b.kind == BarrierKind::Full) ++full;
    }
    CHECK(empty == 2);
    CHECK(full == 2);
    CHECK(mod.streams.size() == 2);
    CHECK(mod.streams[0].role == "producer");
    CHECK(mod.streams[1].role == "consumer");
}

TEST_CASE("put parity follows floor(k/D) mod 2 across k=0..3") {
    LoweredModule mod = lower_gemm(4, 2);
    const Stream& producer = mod.streams[0];
    // collect the empty-barrier waits in order: slots 0,1,0,1 parities 0,0,1,1
    std::vector<std::pair<int, int>> waits;  // (slot, parity)
    for (const auto& li : producer.instrs) {
        if (li.kind != InstrKind::BarWaitPhase) continue;
        const Barrier& b = mod.barriers[static_cast<size_t>(li.barrier)];
        if (b.kind == BarrierKind::Empty) waits.push_back({b.slot, li.parity});
    }
    REQUIRE(waits.size() == 4);
    CHECK(waits[0] == std::pair<int, int>{0, 0});
    CHECK(waits[1] == std::pair<int, int>{1, 0});
    CHECK(waits[2] == std::pair<int, int>{0, 1});
    CHECK(waits[3] == std::pair<int, int>{1, 1});
}

TEST_CASE("every put expands to wait/expect/async-load and no aref survives") {
    LoweredModule mod = lower_gemm(3, 2);
    const Stream& producer = mod.streams[0];
    int expects = 0, tmas = 0;
    for (size_t i = 0; i < producer.instrs.size(); ++i) {
        const LInstr& li = producer.instrs[i];
        if (li.kind == InstrKind::BarExpectTx) {
            ++expects;
            REQUIRE(i > 0);
            CHECK(producer.instrs[i - 1].kind == InstrKind::BarWaitPhase);
            CHECK(producer.instrs[i + 1].kind == InstrKind::TmaAsyncLoad);
        }
        if (li.kind == InstrKind::TmaAsyncLoad) ++tmas;
        CHECK(li.op.kind != OpKind::Put);
        CHECK(li.op.kind != OpKind::Get);
        CHECK(li.op.kind != OpKind::Consumed);
    }
    CHECK(expects == 3);
    CHECK(tmas == 6);  // 2 members x 3 iterations
}

TEST_CASE("expected transaction bytes equal the tuple payload size") {
    LoweredModule mod = lower_gemm(1, 1);
    for (const auto& li : mod.streams[0].instrs)
        if (li.kind == InstrKind::BarExpectTx) CHECK(li.tx_bytes == 2 * 2 * 2 * 4);
}

TEST_CASE("verify_lowering: clean report on fixtures") {
    for (const char* (*fn)() : {testing::gemm_2x2_src, testing::attention_small_src,
                                testing::gemm_act_src}) {
        KernelGraph g = parse_kernel(fn());
        WarpSpecProgram prog = partition_kernel(g, 2);
        LoweredModule mod = lower(prog);
        VerifyReport rep = verify_lowering(mod, prog);
        CHECK_MESSAGE(rep.clean(), rep.str());
    }
}

TEST_CASE("verify_lowering: a deleted release is flagged") {
    KernelGraph g = parse_kernel(testing::gemm_2x2_src());
    WarpSpecProgram prog = partition_kernel(g, 2);
    LoweredModule mod = lower(prog);
    // delete the first consumed (an empty-barrier arrive in the consumer)
    Stream& consumer = mod.streams[1];
    for (size_t i = 0; i < consumer.instrs.size(); ++i) {
        if (consumer.instrs[i].kind == InstrKind::BarArrive) {
            consumer.instrs.erase(consumer.instrs.begin() + static_cast<long>(i));
            break;
        }
    }
    VerifyReport rep = verify_lowering(mod, prog);
    CHECK(!rep.clean());
    bool mentions_consumed = false;
    for (const auto& v : rep.violations)
        if (v.find("consumeds") != std::string::npos) mentions_consumed = true;
    CHECK(mentions_consumed);
}

TEST_CASE("verify_lowering: 20 random programs are clean") {
    for (int i = 0; i < 20; ++i) {
        int64_t m = 1 + i % 4;
        int64_t kk = 1 + (i / 4) % 3;
        int64_t trip = 1 + i % 5;
        int d = 1 + i % 4;
        KernelGraph g = parse_kernel(testing::gemm_src(m, m, kk, trip));
        WarpSpecProgram prog = partition_kernel(g, d);
        if (i % 2 == 1 && d >= 1) {
            MmaPipelineConfig cfg;
            cfg.p = std::min(2, d);
            prog = apply_fine_grained(prog, cfg);
        }
        LoweredModule mod = lower(prog);
        VerifyReport rep = verify_lowering(mod, prog);
        CHECK_MESSAGE(rep.clean(), "i=" << i << "\n" << rep.str());
    }
}

TEST_CASE("sequential lowering stages loads through private depth-1 channels") {
    KernelGraph g = parse_kernel(testing::gemm_2x2_src());
    WarpSpecProgram prog = sequentialize(g);
    LoweredModule mod = lower(prog);
    REQUIRE(mod.streams.size() == 1);
    CHECK(mod.streams[0].role == "serial");
    // two loads -> two staging channels with 2 barriers each
    int staging = 0;
    for (size_t c = 0; c < mod.channels.size(); ++c)
        if (mod.channel_staging[c]) ++staging;
    CHECK(staging == 2);
    // the load is waited before its use: wait(empty), expect, tma, wait(full)
    const Stream& s = mod.streams[0];
    for (size_t i = 0; i + 1 < s.instrs.size(); ++i)
        if (s.instrs[i].kind == InstrKind::TmaAsyncLoad)
            CHECK(s.instrs[i + 1].kind == InstrKind::BarWaitPhase);
}

TEST_CASE("put of a non-load payload is rejected as unlowered") {
    KernelGraph g = parse_kernel(testing::gemm_2x2_src());
    WarpSpecProgram prog = partition_kernel(g, 2);
    // rewrite the put to publish a constant tile defined in the producer
    Region& producer = prog.regions[0];
    Op zeros;
    zeros.kind = OpKind::Constant;
    zeros.zeros = true;
    zeros.has_tile = true;
    zeros.tile = {2, 2, Elem::Int};
    zeros.results = {"fake"};
    producer.prologue.push_back(zeros);
    for (auto& op : producer.loop.body)
        if (op.kind == OpKind::Put) op.operands[0] = "fake";
    CHECK_THROWS_AS(lower(prog), CompileError);
}

TEST_CASE("lowered listing prints deterministically") {
    KernelGraph g = parse_kernel(testing::gemm_2x2_src());
    WarpSpecProgram prog = partition_kernel(g, 2);
    std::string l1 = print_lowered(lower(prog));
    std::string l2 = print_lowered(lower(prog));
    CHECK(l1 == l2);
    CHECK(l1.find("== WG0 producer ==") != std::string::npos);
    CHECK(l1.find("== WG1 consumer ==") != std::string::npos);
}
