#pragma once

#include <charconv>
#include <sstream>
#include <string>

#include "warpspec/ir.hpp"
#include "warpspec/schedule.hpp"

namespace warpspec {

namespace detail {

inline std::string real_str(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string slot_str(const SlotExpr& se, const std::string& induction, int depth) {
    std::string d = std::to_string(depth);
    if (!se.by_induction) return "[" + std::to_string(se.at) + " % " + d + "]";
    if (se.lag == 0) return "[%" + induction + " % " + d + "]";
    return "[(%" + induction + " - " + std::to_string(se.lag) + ") % " + d + "]";
}

inline std::string guard_str(const Op& op, const std::string& induction) {
    if (!op.guard_min_k) return "";
    return " when %" + induction + " >= " + std::to_string(*op.guard_min_k);
}

struct PrintCtx {
    const std::vector<Channel>* channels = nullptr;
    std::string induction;

    int depth_of(int ch) const {
        return channels && ch >= 0 && ch < static_cast<int>(channels->size())
                   ? (*channels)[static_cast<size_t>(ch)].depth
                   : 1;
    }
};

inline void print_op(std::ostringstream& os, const Op& op, const PrintCtx& ctx,
                     const std::string& ind) {
    os << ind;
    switch (op.kind) {
        case OpKind::Constant:
            os << "%" << op.results[0] << " = const ";
            if (op.has_tile) {
                if (op.zeros) {
                    os << "zeros : " << op.tile.str();
                } else {
                    os << "[";
                    for (int64_t r = 0; r < op.tile.rows; ++r) {
                        if (r) os << ", ";
                        os << "[";
                        for (int64_t c = 0; c < op.tile.cols; ++c) {
                            if (c) os << ", ";
                            size_t i = static_cast<size_t>(r * op.tile.cols + c);
                            if (op.tile.elem == Elem::Int)
                                os << op.int_data[i];
                            else
                                os << real_str(op.real_data[i]);
                        }
                        os << "]";
                    }
                    os << "] : " << op.tile.str();
                }
            } else {
                os << *op.int_literal;
            }
            break;
        case OpKind::IndexArith:
            if (op.sfn == ScalarFn::Pid) {
                os << "%" << op.results[0] << " = pid";
            } else {
                os << "%" << op.results[0] << " = " << scalar_fn_name(op.sfn) << " %"
                   << op.operands[0] << ", %" << op.operands[1];
            }
            break;
        case OpKind::TmaLoad:
            os << "%" << op.results[0] << " = tma_load " << op.buffer << "[%" << op.operands[0]
               << ", %" << op.operands[1] << "] : " << op.tile.str();
            break;
        case OpKind::Dot:
        case OpKind::MmaIssue:
            if (op.kind == OpKind::MmaIssue) os << "mma_issue ";
            os << "%" << op.results[0] << " = dot %" << op.operands[0] << ", %" << op.operands[1]
               << (op.trans_b ? ".T" : "") << ", acc=%" << op.operands[2];
            break;
        case OpKind::Elementwise:
            os << "%" << op.results[0] << " = ew " << ew_fn_name(op.efn) << " %" << op.operands[0];
            if (op.operands.size() > 1) os << ", %" << op.operands[1];
            break;
        case OpKind::Reduce:
            os << "%" << op.results[0] << " = reduce " << reduce_fn_name(op.rfn) << " %"
               << op.operands[0] << " axis=" << op.axis;
            break;
        case OpKind::Store:
            os << "store " << op.buffer << "[%" << op.operands[1] << ", %" << op.operands[2]
               << "] = %" << op.operands[0];
            break;
        case OpKind::Yield:
            os << "yield";
            for (size_t i = 0; i < op.operands.size(); ++i)
                os << (i ? ", %" : " %") << op.operands[i];
            break;
        case OpKind::Put:
            os << "put ch" << op.channel << slot_str(op.slot, ctx.induction, ctx.depth_of(op.channel));
            for (const auto& o : op.operands) os << ", %" << o;
            os << guard_str(op, ctx.induction);
            break;
        case OpKind::Get:
            for (size_t i = 0; i < op.results.size(); ++i) os << (i ? ", %" : "%") << op.results[i];
            os << " = get ch" << op.channel
               << slot_str(op.slot, ctx.induction, ctx.depth_of(op.channel))
               << guard_str(op, ctx.induction);
            break;
        case OpKind::Consumed:
            os << "consumed ch" << op.channel
               << slot_str(op.slot, ctx.induction, ctx.depth_of(op.channel))
               << guard_str(op, ctx.induction);
            break;
        case OpKind::MmaWait:
            os << "mma_wait pendings=" << op.pendings << guard_str(op, ctx.induction);
            break;
    }
    os << "\n";
}

inline void print_loop(std::ostringstream& os, const LoopRegion& loop, PrintCtx ctx,
                       const std::string& ind) {
    if (loop.trip == 0 && loop.body.empty() && loop.iter_args.empty()) return;
    os << ind << "loop %" << loop.induction << " in 0.." << loop.trip;
    if (!loop.iter_args.empty()) {
        os << " iter (";
        for (size_t i = 0; i < loop.iter_args.size(); ++i) {
            if (i) os << ", ";
            os << "%" << loop.iter_args[i].name << " = %" << loop.iter_args[i].init;
        }
        os << ")";
    }
    os << " {\n";
    ctx.induction = loop.induction;
    for (const auto& op : loop.body) print_op(os, op, ctx, ind + "  ");
    os << ind << "}\n";
}

inline std::string param_list(const std::vector<Param>& params) {
    std::string s = "(";
    for (size_t i = 0; i < params.size(); ++i) {
        if (i) s += ", ";
        s += params[i].name + ": buf<" + params[i].type.str() + ">";
    }
    return s + ")";
}

}  // namespace detail

inline std::string print_kernel(const KernelGraph& g) {
    std::ostringstream os;
    os << "kernel " << g.name << detail::param_list(g.params) << " {\n";
    detail::PrintCtx ctx;
    for (const auto& op : g.prologue) detail::print_op(os, op, ctx, "  ");
    detail::print_loop(os, g.loop, ctx, "  ");
    for (const auto& op : g.epilogue) detail::print_op(os, op, ctx, "  ");
    os << "}\n";
    return os.str();
}

namespace detail {

inline void print_coarse(std::ostringstream& os, const Region& region, const PrintCtx& ctx,
                         const std::string& ind) {
    const CoarseSchedule& cs = *region.coarse;
    os << ind << "pipeline coarse trips=" << cs.trips << " use_u=" << (cs.use_u ? "true" : "false");
    if (cs.literal_prologue) os << " literal_prologue=true";
    os << " {\n";
    std::string ind2 = ind + "  ";
    if (!region.loop.iter_args.empty()) {
        os << ind2 << "carry (";
        for (size_t i = 0; i < region.loop.iter_args.size(); ++i) {
            if (i) os << ", ";
            os << "%" << region.loop.iter_args[i].name << " = %" << region.loop.iter_args[i].init
               << " -> %" << cs.carry_next[i];
        }
        os << ")\n";
    }
    auto print_stage = [&](const CoarseStage& st) {
        if (st.empty()) return;
        os << ind2 << "stage " << st.name;
        if (!st.reads.empty()) {
            os << " reads";
            for (size_t i = 0; i < st.reads.size(); ++i) os << (i ? ", ch" : " ch") << st.reads[i];
        }
        os << " {\n";
        PrintCtx sctx = ctx;
        sctx.induction = region.loop.induction;
        for (const auto& op : st.ops) print_op(os, op, sctx, ind2 + "  ");
        os << ind2 << "}\n";
    };
    print_stage(cs.t);
    print_stage(cs.c);
    print_stage(cs.u);

    auto stage_of = [&](char s) -> const CoarseStage& {
        return s == 'T' ? cs.t : (s == 'C' ? cs.c : cs.u);
    };
    auto emit_step = [&](const CoarseStep& st, const std::string& sind, bool steady) {
        const CoarseStage& stage = stage_of(st.stage);
        bool wrapper = st.kind == StepKind::Get || st.kind == StepKind::Consumed;
        if (wrapper && stage.reads.empty()) return;
        const char* verb = st.kind == StepKind::Get       ? "get"
                           : st.kind == StepKind::Issue   ? "issue"
                           : st.kind == StepKind::Wait    ? "wait"
                           : st.kind == StepKind::Consumed ? "consumed"
                                                           : "compute";
        os << sind << verb << " " << st.stage << "[";
        if (steady) {
            os << "%j";
            if (st.index > 0) os << " - " << st.index;
        } else {
            os << st.index;
        }
        os << "]\n";
    };

    os << ind2 << "schedule {\n";
    std::string ind3 = ind2 + "  ";
    os << ind3 << "prologue {\n";
    for (const auto& st : coarse_prologue_steps(cs.literal_prologue)) emit_step(st, ind3 + "  ", false);
    os << ind3 << "}\n";
    if (cs.trips > 1) {
        os << ind3 << "steady %j in 1.." << cs.trips << " {\n";
        for (const auto& st : coarse_steady_steps(cs.use_u)) emit_step(st, ind3 + "  ", true);
        os << ind3 << "}\n";
    }
    os << ind3 << "epilogue {\n";
    for (const auto& st : coarse_epilogue_steps(cs.use_u, cs.trips)) emit_step(st, ind3 + "  ", false);
    os << ind3 << "}\n";
    os << ind2 << "}\n";
    os << ind << "}\n";
}

}  // namespace detail

inline std::string print_program(const WarpSpecProgram& prog) {
    std::ostringstream os;
    os << "program " << prog.name << detail::param_list(prog.params) << " {\n";
    for (const auto& ch : prog.channels) {
        os << "  channel ch" << ch.id << " : depth " << ch.depth << ", tuple<";
        for (size_t i = 0; i < ch.members.size(); ++i) {
            if (i) os << ", ";
            os << ch.members[i].str();
        }
        os << ">\n";
    }
    detail::PrintCtx ctx;
    ctx.channels = &prog.channels;
    for (size_t r = 0; r < prog.regions.size(); ++r) {
        const Region& region = prog.regions[r];
        os << "  warp_group " << r << " partition=" << region.partition << " {\n";
        for (const auto& op : region.prologue) detail::print_op(os, op, ctx, "    ");
        if (region.coarse) {
            detail::print_coarse(os, region, ctx, "    ");
        } else {
            detail::print_loop(os, region.loop, ctx, "    ");
        }
        for (const auto& op : region.epilogue) detail::print_op(os, op, ctx, "    ");
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace warpspec
