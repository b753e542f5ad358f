#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "warpspec/expand.hpp"
#include "warpspec/ir.hpp"
#include "warpspec/partition.hpp"

namespace warpspec {

struct MmaPipelineConfig {
    int p = 1;  // maximum in-flight MMA issue groups
    // test hook: build schedules past the D >= P gate to demonstrate the
    // resulting deadlock in simulation
    bool skip_feasibility_check = false;
};

namespace detail {

inline Region* consumer_region(WarpSpecProgram& prog) {
    return prog.regions.empty() ? nullptr : &prog.regions.back();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fine-grained MMA pipeline of depth P.
//
// Per iteration k the consumer runs:
//     mma_wait pendings=P        (k >= P)
//     consumed ch[(k-P) % D]     (k >= P)
//     get ch[k % D]
//     mma_issue ...
// followed by a drain that waits all groups and releases the last P slots.
// The wait leaves at most P-1 groups in flight, so the slot released by
// consumed(k-P) is no longer read by any outstanding MMA, and releasing it
// before get(k) keeps the producer live when P equals D.
// ---------------------------------------------------------------------------

inline WarpSpecProgram apply_fine_grained(const WarpSpecProgram& program,
                                          const MmaPipelineConfig& cfg) {
    if (cfg.p < 1) fail(ErrorCode::PipelineInfeasible, "pipeline depth P must be >= 1");
    WarpSpecProgram prog = program;
    Region* consumer = detail::consumer_region(prog);
    if (!consumer) fail(ErrorCode::PipelineInfeasible, "program has no regions");
    if (consumer->coarse)
        fail(ErrorCode::PipelineInfeasible, "region already carries a coarse schedule");

    // shape gate: the only tile computations are dots chained into accumulators
    std::vector<Op> gets, others;
    std::set<int> channels_read;
    for (const auto& op : consumer->loop.body) {
        switch (op.kind) {
            case OpKind::Dot:
            case OpKind::MmaIssue:
            case OpKind::Constant:
            case OpKind::IndexArith:
                others.push_back(op);
                break;
            case OpKind::Get:
                gets.push_back(op);
                channels_read.insert(op.channel);
                break;
            case OpKind::Consumed:
            case OpKind::Yield:
                break;
            case OpKind::MmaWait:
                fail(ErrorCode::PipelineInfeasible, "loop is already pipelined");
            default:
                fail(ErrorCode::PipelineInfeasible,
                     "fine-grained pipelining needs a pure dot-chain loop body");
        }
    }
    bool any_dot = false;
    for (const auto& op : others)
        if (op.kind == OpKind::Dot || op.kind == OpKind::MmaIssue) any_dot = true;
    if (!any_dot)
        fail(ErrorCode::PipelineInfeasible, "fine-grained pipelining needs at least one dot");

    if (!cfg.skip_feasibility_check) {
        for (int c : channels_read) {
            int d = prog.channels[static_cast<size_t>(c)].depth;
            if (cfg.p > d)
                fail(ErrorCode::PipelineInfeasible,
                     "P=" + std::to_string(cfg.p) + " exceeds channel depth D=" +
                         std::to_string(d) + " (deadlock: a slot would be reused while borrowed)");
        }
    }

    const Op* yield = nullptr;
    for (const auto& op : consumer->loop.body)
        if (op.kind == OpKind::Yield) yield = &op;

    std::vector<Op> body;
    {
        Op w;
        w.kind = OpKind::MmaWait;
        w.pendings = cfg.p;
        w.guard_min_k = cfg.p;
        body.push_back(std::move(w));
    }
    for (int c : channels_read) {
        Op cns;
        cns.kind = OpKind::Consumed;
        cns.channel = c;
        cns.slot = SlotExpr{true, cfg.p, 0};
        cns.guard_min_k = cfg.p;
        body.push_back(std::move(cns));
    }
    for (const auto& g : gets) body.push_back(g);
    for (auto op : others) {
        if (op.kind == OpKind::Dot) op.kind = OpKind::MmaIssue;
        body.push_back(std::move(op));
    }
    if (yield) body.push_back(*yield);
    consumer->loop.body = std::move(body);

    // drain: retire every outstanding group, then release the last slots
    std::vector<Op> drain;
    int64_t n = consumer->loop.trip;
    if (n > 0) {
        Op w;
        w.kind = OpKind::MmaWait;
        w.pendings = 0;
        drain.push_back(std::move(w));
        for (int64_t j = std::max<int64_t>(n - cfg.p, 0); j < n; ++j) {
            for (int c : channels_read) {
                Op cns;
                cns.kind = OpKind::Consumed;
                cns.channel = c;
                cns.slot = SlotExpr{false, 0, j};
                drain.push_back(std::move(cns));
            }
        }
    }
    consumer->epilogue.insert(consumer->epilogue.begin(), drain.begin(), drain.end());
    return prog;
}

// ---------------------------------------------------------------------------
// Stage identification for the coarse-grained schedule.
// ---------------------------------------------------------------------------

struct StagePlan {
    std::vector<int> t_ops, c_ops, u_ops;  // kernel loop-body indices
    bool use_u = false;
    bool has_t = false;
    bool has_c = false;
};

// Splits the per-iteration tile subgraph: the first tensor-core phase and its
// glue form T, transforms reading T's outputs form C, a downstream
// tensor-core phase forms U. Direct dot-to-dot accumulator chaining stays
// within one phase; a dot is downstream only when a non-dot transform sits
// between it and an earlier dot.
inline StagePlan identify_stages(const KernelGraph& g) {
    Annotation ann = annotate(g);
    StagePlan plan;

    const auto& body = g.loop.body;
    std::map<std::string, int> def_at;  // body defs only
    for (size_t i = 0; i < body.size(); ++i)
        for (const auto& r : body[i].results) def_at[r] = static_cast<int>(i);

    auto is_tile_op = [&](int i) {
        OpKind k = body[static_cast<size_t>(i)].kind;
        return k == OpKind::Dot || k == OpKind::MmaIssue || k == OpKind::Elementwise ||
               k == OpKind::Reduce;
    };
    auto is_dot = [&](int i) {
        OpKind k = body[static_cast<size_t>(i)].kind;
        return k == OpKind::Dot || k == OpKind::MmaIssue;
    };
    auto consumer_side = [&](int i) {
        return ann.body[static_cast<size_t>(i)].tag == StmtTag::Tile ||
               ann.body[static_cast<size_t>(i)].shared;
    };

    // phase of each dot; -1 for non-dots
    std::vector<int> phase(body.size(), -1);
    // reach[i] = set of dots whose outputs reach op i through non-dot tile ops
    std::vector<std::set<int>> via_transform(body.size());
    for (size_t i = 0; i < body.size(); ++i) {
        if (!is_tile_op(static_cast<int>(i)) || body[i].kind == OpKind::Yield) continue;
        std::set<int> incoming;      // dots reaching through a transform
        std::set<int> direct_dots;   // dots feeding operands directly
        for (const auto& o : body[i].operands) {
            auto it = def_at.find(o);
            if (it == def_at.end()) continue;
            int d = it->second;
            if (is_dot(d))
                direct_dots.insert(d);
            else if (is_tile_op(d))
                for (int x : via_transform[static_cast<size_t>(d)]) incoming.insert(x);
        }
        if (is_dot(static_cast<int>(i))) {
            int p = 0;
            for (int d : direct_dots) p = std::max(p, phase[static_cast<size_t>(d)]);
            for (int d : incoming) p = std::max(p, phase[static_cast<size_t>(d)] + 1);
            phase[i] = p;
            via_transform[i] = {static_cast<int>(i)};
        } else {
            via_transform[i] = incoming;
            for (int d : direct_dots) via_transform[i].insert(d);
        }
    }

    for (size_t i = 0; i < body.size(); ++i) {
        if (!consumer_side(static_cast<int>(i))) continue;
        const Op& op = body[i];
        if (op.kind == OpKind::Yield) continue;
        if (is_dot(static_cast<int>(i))) {
            if (phase[i] == 0)
                plan.t_ops.push_back(static_cast<int>(i));
            else if (phase[i] == 1)
                plan.u_ops.push_back(static_cast<int>(i));
            else
                fail(ErrorCode::StagePlanAmbiguous,
                     "more than two tensor-core phases in one iteration");
        } else if (op.kind == OpKind::Elementwise || op.kind == OpKind::Reduce) {
            if (via_transform[i].empty()) {
                // glue ahead of any dot: attach to the phase it feeds
                plan.t_ops.push_back(static_cast<int>(i));
            } else {
                for (int d : via_transform[i])
                    if (phase[static_cast<size_t>(d)] >= 1)
                        fail(ErrorCode::StagePlanAmbiguous,
                             "transform downstream of the second tensor-core stage");
                plan.c_ops.push_back(static_cast<int>(i));
            }
        } else if (op.kind == OpKind::Constant || op.kind == OpKind::IndexArith) {
            plan.c_ops.push_back(static_cast<int>(i));
        }
    }
    plan.use_u = !plan.u_ops.empty();
    plan.has_t = !plan.t_ops.empty();
    plan.has_c = false;
    for (int i : plan.c_ops) {
        OpKind k = body[static_cast<size_t>(i)].kind;
        if (k == OpKind::Elementwise || k == OpKind::Reduce) plan.has_c = true;
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Coarse-grained T/C/U schedule.
// ---------------------------------------------------------------------------

struct CoarseOptions {
    bool literal_prologue = false;
    bool skip_feasibility_check = false;
};

inline WarpSpecProgram apply_coarse_grained(const WarpSpecProgram& program, const StagePlan& plan,
                                            const KernelGraph& g, const CoarseOptions& opts = {}) {
    WarpSpecProgram prog = program;
    Region* consumer = detail::consumer_region(prog);
    if (!consumer) fail(ErrorCode::PipelineInfeasible, "program has no regions");
    if (consumer->loop.trip < 1)
        fail(ErrorCode::PipelineInfeasible, "coarse-grained schedule needs at least one trip");
    if (!plan.has_t || !plan.has_c)
        fail(ErrorCode::PipelineInfeasible,
             "coarse-grained schedule needs both a tensor-core stage and a transform stage");

    // map original body ops to the consumer region's rewritten copies by result id
    std::map<std::string, const Op*> consumer_def;
    for (const auto& op : consumer->loop.body)
        for (const auto& r : op.results) consumer_def[r] = &op;

    auto collect = [&](const std::vector<int>& idxs, CoarseStage& stage) {
        for (int i : idxs) {
            const Op& orig = g.loop.body[static_cast<size_t>(i)];
            auto it = consumer_def.find(orig.results[0]);
            if (it == consumer_def.end())
                throw InternalError("stage op %" + orig.results[0] + " missing from consumer body");
            stage.ops.push_back(*it->second);
        }
        std::set<int> reads;
        for (const auto& op : stage.ops)
            for (const auto& o : op.operands)
                for (size_t c = 0; c < prog.channels.size(); ++c)
                    for (size_t m = 0; m < prog.channels[c].members.size(); ++m)
                        if (o == detail::payload_name(static_cast<int>(c), static_cast<int>(m)))
                            reads.insert(static_cast<int>(c));
        stage.reads.assign(reads.begin(), reads.end());
    };

    CoarseSchedule cs;
    cs.trips = consumer->loop.trip;
    cs.use_u = plan.use_u;
    cs.literal_prologue = opts.literal_prologue;
    cs.t.name = "T";
    cs.c.name = "C";
    cs.u.name = "U";
    collect(plan.t_ops, cs.t);
    collect(plan.c_ops, cs.c);
    collect(plan.u_ops, cs.u);

    if (!cs.c.reads.empty())
        fail(ErrorCode::StagePlanAmbiguous,
             "the transform stage reads a channel; the schedule has no slot for it");

    // get(stage[j]) precedes consumed(stage[j-1]), so two slots are always
    // live per channel read by a staged schedule
    if (!opts.skip_feasibility_check) {
        for (const CoarseStage* st : {&cs.t, &cs.u})
            for (int c : st->reads)
                if (prog.channels[static_cast<size_t>(c)].depth < 2)
                    fail(ErrorCode::PipelineInfeasible,
                         "coarse-grained schedule needs channel depth D >= 2");
    }

    const Op* yield = nullptr;
    for (const auto& op : consumer->loop.body)
        if (op.kind == OpKind::Yield) yield = &op;
    if (yield)
        cs.carry_next = yield->operands;
    else if (!consumer->loop.iter_args.empty())
        throw InternalError("consumer loop with iter args lacks a yield");

    consumer->loop.body.clear();
    consumer->coarse = std::move(cs);
    return prog;
}

// ---------------------------------------------------------------------------
// Static pipeline analysis over an expanded consumer stream.
// ---------------------------------------------------------------------------

struct PipelineAnalysis {
    int max_in_flight = 0;      // issue groups live at any program point
    bool all_issues_waited = true;
    std::map<int, int64_t> gets_per_channel;
    std::map<int, int64_t> consumeds_per_channel;
    bool consumed_matches_get = true;
};

inline PipelineAnalysis analyze_mma_pipeline(const std::vector<InstOp>& stream) {
    PipelineAnalysis a;
    std::set<int> in_flight;
    std::map<int, std::map<int64_t, int64_t>> get_insts, cns_insts;  // channel -> instance -> n
    for (const auto& io : stream) {
        switch (io.op.kind) {
            case OpKind::MmaIssue:
                in_flight.insert(io.group);
                a.max_in_flight = std::max(a.max_in_flight, static_cast<int>(in_flight.size()));
                break;
            case OpKind::MmaWait: {
                if (io.wait_group >= 0) {
                    in_flight.erase(io.wait_group);
                } else {
                    int bound = std::max(io.op.pendings - 1, 0);
                    // groups retire oldest-first
                    while (static_cast<int>(in_flight.size()) > bound)
                        in_flight.erase(in_flight.begin());
                }
                break;
            }
            case OpKind::Get:
                ++a.gets_per_channel[io.op.channel];
                ++get_insts[io.op.channel][io.iter];
                break;
            case OpKind::Consumed:
                ++a.consumeds_per_channel[io.op.channel];
                ++cns_insts[io.op.channel][io.iter];
                break;
            default:
                break;
        }
    }
    a.all_issues_waited = in_flight.empty();
    a.consumed_matches_get = get_insts == cns_insts;
    return a;
}

}  // namespace warpspec
