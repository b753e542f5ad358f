#pragma once

#include <string>
#include <vector>

#include "warpspec/lower.hpp"
#include "warpspec/machine.hpp"
#include "warpspec/sim.hpp"

namespace warpspec {

// ---------------------------------------------------------------------------
// Cooperative compute warp groups: the consumer stream is replicated and each
// replica computes a disjoint row band of the output tile from the same
// channel payload. Channel declarations are untouched; only the empty-barrier
// arrival threshold rises so a slot is released after every band is done.
// ---------------------------------------------------------------------------

struct CooperativeConfig {
    int num_consumer_wgs = 1;
    int split_axis = 0;  // output-tile rows
};

inline LoweredModule apply_cooperative(const LoweredModule& mod, const CooperativeConfig& cc) {
    if (cc.num_consumer_wgs < 1)
        fail(ErrorCode::IndivisibleTile, "cooperative warp group count must be >= 1");
    LoweredModule out = mod;
    if (cc.num_consumer_wgs == 1) return out;  // thresholds already 1

    int consumer_idx = -1;
    for (size_t i = 0; i < out.streams.size(); ++i)
        if (out.streams[i].role == "consumer") consumer_idx = static_cast<int>(i);
    if (consumer_idx < 0)
        fail(ErrorCode::UnsupportedKernel,
             "cooperative mode needs a warp-specialized producer/consumer module");

    const Stream& consumer = out.streams[static_cast<size_t>(consumer_idx)];
    for (const auto& li : consumer.instrs) {
        if (li.kind == InstrKind::CudaOp && li.op.kind == OpKind::Reduce && li.op.axis == 0)
            fail(ErrorCode::IndivisibleTile,
                 "row-band split cannot cross an axis-0 reduction");
    }
    if (consumer.out_tile_rows > 0 && consumer.out_tile_rows % cc.num_consumer_wgs != 0)
        fail(ErrorCode::IndivisibleTile,
             "output tile rows " + std::to_string(consumer.out_tile_rows) +
                 " not divisible by " + std::to_string(cc.num_consumer_wgs) + " warp groups");

    // raise the release threshold on every slot the consumer releases
    for (const auto& li : consumer.instrs) {
        if (li.kind != InstrKind::BarArrive) continue;
        Barrier& b = out.barriers[static_cast<size_t>(li.barrier)];
        if (b.kind == BarrierKind::Empty) b.threshold = cc.num_consumer_wgs;
    }

    std::vector<Stream> streams;
    for (size_t i = 0; i < out.streams.size(); ++i) {
        if (static_cast<int>(i) != consumer_idx) {
            streams.push_back(out.streams[i]);
            streams.back().wg = static_cast<int>(streams.size()) - 1;
            continue;
        }
        for (int band = 0; band < cc.num_consumer_wgs; ++band) {
            Stream s = out.streams[i];
            s.wg = static_cast<int>(streams.size());
            s.band_index = band;
            s.band_count = cc.num_consumer_wgs;
            streams.push_back(std::move(s));
        }
    }
    out.streams = std::move(streams);
    return out;
}

// Feasibility gate mirroring the per-warp-group register budget: the carried
// accumulator must fit, pooled across cooperating warp groups.
inline void check_register_budget(const LoweredModule& mod, const MachineConfig& mc) {
    for (const auto& s : mod.streams) {
        int64_t est = mod.reg_estimate(s);
        if (est > mc.regs_per_wg)
            fail(ErrorCode::RegisterBudget,
                 "wg" + std::to_string(s.wg) + " needs ~" + std::to_string(est) +
                     " register bytes, budget is " + std::to_string(mc.regs_per_wg) +
                     (s.band_count == 1 ? " (try cooperative warp groups)" : ""));
    }
}

// ---------------------------------------------------------------------------
// Persistent kernels: resident CTAs loop over a tile queue. All warp groups
// quiesce before each per-tile epilogue and again at the work-loop boundary,
// where channel state re-initializes for the next tile.
// ---------------------------------------------------------------------------

inline LoweredModule apply_persistent(const LoweredModule& mod, int64_t tiles) {
    LoweredModule out = mod;
    out.persistent = true;
    out.tiles = tiles;

    Barrier q;
    q.id = static_cast<int>(out.barriers.size());
    q.kind = BarrierKind::Quiesce;
    q.threshold = static_cast<int>(out.streams.size());
    out.barriers.push_back(q);

    for (auto& stream : out.streams) {
        LInstr arr;
        arr.kind = InstrKind::BarArrive;
        arr.barrier = q.id;
        arr.label = "pre-epilogue quiesce";
        LInstr w;
        w.kind = InstrKind::BarWaitPhase;
        w.barrier = q.id;
        w.parity = 0;
        auto at = stream.instrs.begin() + static_cast<long>(stream.epilogue_start);
        at = stream.instrs.insert(at, std::move(arr)) + 1;
        stream.instrs.insert(at, std::move(w));
        stream.epilogue_start += 2;

        LInstr next;
        next.kind = InstrKind::WorkLoopNext;
        stream.instrs.push_back(std::move(next));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid execution: one CTA per SM; tiles assigned round-robin. Launch
// overhead is charged per CTA launch, which is what persistence amortizes.
// ---------------------------------------------------------------------------

struct GridResult {
    Verdict verdict = Verdict::Completed;
    int64_t cycles = 0;        // makespan including launch overhead
    int64_t launch_cycles = 0; // total overhead charged across CTAs
    Buffers outputs;
    SimTrace trace;
    std::string detail;
    std::vector<DeadlockEntry> blocked;
};

inline GridResult run_grid(const LoweredModule& mod, const MachineConfig& mc,
                           const Buffers& inputs, int64_t tiles) {
    GridResult res;
    Buffers bufs = prepare_buffers(mod.params, inputs);

    std::vector<std::vector<int64_t>> per_sm(static_cast<size_t>(mc.num_sms));
    for (int64_t t = 0; t < tiles; ++t)
        per_sm[static_cast<size_t>(t % mc.num_sms)].push_back(t);

    auto merge_trace = [&](const SimTrace& tr, int sm, int64_t offset) {
        std::string prefix = "sm" + std::to_string(sm) + ".";
        for (auto iv : tr.intervals) {
            iv.unit = prefix + iv.unit;
            iv.start += offset;
            iv.end += offset;
            res.trace.intervals.push_back(std::move(iv));
        }
        for (auto b : tr.blocks) {
            b.start += offset;
            b.end += offset;
            res.trace.blocks.push_back(std::move(b));
        }
    };

    int64_t makespan = 0;
    for (size_t sm = 0; sm < per_sm.size(); ++sm) {
        if (per_sm[sm].empty()) continue;
        int64_t sm_clock = 0;
        if (mod.persistent) {
            res.launch_cycles += mc.cta_launch_overhead;
            res.trace.intervals.push_back({"sm" + std::to_string(sm) + ".launch",
                                           -1, 0, mc.cta_launch_overhead, "cta launch"});
            SimOptions opts;
            opts.tile_queue = per_sm[sm];
            SimResult r = simulate(mod, mc, bufs, opts);
            merge_trace(r.trace, static_cast<int>(sm), mc.cta_launch_overhead);
            sm_clock = mc.cta_launch_overhead + r.cycles;
            bufs = std::move(r.outputs);
            if (r.verdict != Verdict::Completed) {
                res.verdict = r.verdict;
                res.detail = r.detail;
                res.blocked = r.blocked;
            }
        } else {
            for (int64_t t : per_sm[sm]) {
                res.launch_cycles += mc.cta_launch_overhead;
                res.trace.intervals.push_back({"sm" + std::to_string(sm) + ".launch", -1,
                                               sm_clock, sm_clock + mc.cta_launch_overhead,
                                               "cta launch"});
                sm_clock += mc.cta_launch_overhead;
                SimOptions opts;
                opts.pid = t;
                SimResult r = simulate(mod, mc, bufs, opts);
                merge_trace(r.trace, static_cast<int>(sm), sm_clock);
                sm_clock += r.cycles;
                bufs = std::move(r.outputs);
                if (r.verdict != Verdict::Completed) {
                    res.verdict = r.verdict;
                    res.detail = r.detail;
                    res.blocked = r.blocked;
                    break;
                }
            }
        }
        makespan = std::max(makespan, sm_clock);
        if (res.verdict != Verdict::Completed) break;
    }
    res.cycles = makespan;
    res.outputs = std::move(bufs);
    return res;
}

}  // namespace warpspec
