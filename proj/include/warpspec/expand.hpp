#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "warpspec/ir.hpp"
#include "warpspec/schedule.hpp"

namespace warpspec {

// One fully concrete op instance: loop-body ids renamed per iteration,
// channel slots and barrier parities resolved, guards applied.
struct InstOp {
    Op op;
    int64_t iter = -1;    // source iteration / stage instance
    int64_t slot = -1;    // resolved channel slot
    int64_t parity = -1;  // (instance / D) mod 2
    int group = -1;       // mma issue group (MmaIssue)
    int wait_group = -1;  // completion wait on a named group; -1 = pendings wait
    std::string label;
};

namespace detail {

inline std::string inst_name(const std::string& id, int64_t k) {
    return id + "@" + std::to_string(k);
}

struct Renamer {
    const std::map<std::string, std::string>* fixed = nullptr;  // iter-arg bindings
    const std::map<std::string, bool>* body_defs = nullptr;     // ids renamed per iteration
    int64_t iter = -1;

    std::string operator()(const std::string& id) const {
        if (fixed) {
            auto it = fixed->find(id);
            if (it != fixed->end()) return it->second;
        }
        if (body_defs && body_defs->count(id)) return inst_name(id, iter);
        return id;  // prologue/epilogue value
    }
};

inline void rename_op(Op& op, const Renamer& rn) {
    for (auto& o : op.operands) o = rn(o);
    for (auto& r : op.results) r = rn(r);
}

}  // namespace detail

class RegionExpander {
  public:
    RegionExpander(const Region& region, const std::vector<Channel>& channels)
        : region_(region), channels_(channels) {}

    std::vector<InstOp> run() {
        out_.clear();
        for (const auto& op : region_.prologue) emit_plain(op);
        if (region_.coarse)
            expand_coarse();
        else
            expand_loop();
        for (auto op : region_.epilogue) {
            detail::Renamer rn;
            rn.fixed = &final_bindings_;
            detail::rename_op(op, rn);
            emit_resolved(op, -1);
        }
        return std::move(out_);
    }

  private:
    int depth_of(int ch) const { return channels_[static_cast<size_t>(ch)].depth; }

    void emit_plain(const Op& op) {
        InstOp io;
        io.op = op;
        out_.push_back(std::move(io));
    }

    // Resolves channel slot/parity from the concrete instance index.
    void emit_resolved(Op op, int64_t iter) {
        InstOp io;
        io.iter = iter;
        if (op.kind == OpKind::Put || op.kind == OpKind::Get || op.kind == OpKind::Consumed) {
            int64_t inst = op.slot.by_induction ? iter - op.slot.lag : op.slot.at;
            if (inst < 0) throw InternalError("channel op instance index is negative");
            int d = depth_of(op.channel);
            io.slot = inst % d;
            io.parity = (inst / d) % 2;
            io.iter = inst;
        }
        io.op = std::move(op);
        out_.push_back(std::move(io));
    }

    void expand_loop() {
        const LoopRegion& loop = region_.loop;
        std::map<std::string, bool> body_defs;
        for (const auto& op : loop.body)
            for (const auto& r : op.results) body_defs[r] = true;

        std::map<std::string, std::string> bindings;  // iter arg -> current value id
        for (const auto& a : loop.iter_args) bindings[a.name] = a.init;

        bool uses_induction = false;
        for (const auto& op : loop.body)
            for (const auto& o : op.operands)
                if (o == loop.induction) uses_induction = true;

        for (int64_t k = 0; k < loop.trip; ++k) {
            if (uses_induction) {
                Op c;
                c.kind = OpKind::Constant;
                c.int_literal = k;
                c.results = {detail::inst_name(loop.induction, k)};
                emit_plain(c);
            }
            std::map<std::string, std::string> fixed = bindings;
            fixed[loop.induction] = detail::inst_name(loop.induction, k);
            detail::Renamer rn{&fixed, &body_defs, k};

            std::vector<std::string> next;
            int iter_group = -1;  // all issues of one iteration form one commit group
            for (const auto& op : loop.body) {
                if (op.guard_min_k && k < *op.guard_min_k) continue;
                if (op.kind == OpKind::Yield) {
                    for (const auto& o : op.operands) next.push_back(rn(o));
                    continue;
                }
                Op copy = op;
                detail::rename_op(copy, rn);
                if (copy.kind == OpKind::MmaIssue) {
                    InstOp io;
                    io.op = std::move(copy);
                    io.iter = k;
                    if (iter_group < 0) iter_group = next_group_++;
                    io.group = iter_group;
                    out_.push_back(std::move(io));
                } else {
                    emit_resolved(std::move(copy), k);
                }
            }
            for (size_t i = 0; i < next.size(); ++i) bindings[loop.iter_args[i].name] = next[i];
        }
        final_bindings_ = bindings;
    }

    void expand_coarse() {
        const CoarseSchedule& cs = *region_.coarse;
        const LoopRegion& loop = region_.loop;

        std::map<std::string, bool> stage_defs;
        for (const CoarseStage* st : {&cs.t, &cs.c, &cs.u}) {
            for (const auto& op : st->ops)
                for (const auto& r : op.results) stage_defs[r] = true;
            for (int ch : st->reads)
                for (size_t m = 0; m < channels_[static_cast<size_t>(ch)].members.size(); ++m)
                    stage_defs["ch" + std::to_string(ch) + "_" + std::to_string(m)] = true;
        }

        auto carry_binding = [&](int64_t inst) {
            std::map<std::string, std::string> fixed;
            for (size_t i = 0; i < loop.iter_args.size(); ++i) {
                const auto& a = loop.iter_args[i];
                fixed[a.name] = inst == 0 ? a.init : detail::inst_name(cs.carry_next[i], inst - 1);
            }
            return fixed;
        };

        auto stage_of = [&](char s) -> const CoarseStage& {
            return s == 'T' ? cs.t : (s == 'C' ? cs.c : cs.u);
        };

        for (const CoarseStep& step : coarse_all_steps(cs.use_u, cs.literal_prologue, cs.trips)) {
            const CoarseStage& stage = stage_of(step.stage);
            int64_t i = step.index;
            std::map<std::string, std::string> fixed = carry_binding(i);
            detail::Renamer rn{&fixed, &stage_defs, i};
            switch (step.kind) {
                case StepKind::Get:
                    for (int ch : stage.reads) {
                        Op g;
                        g.kind = OpKind::Get;
                        g.channel = ch;
                        g.slot = SlotExpr{false, 0, i};
                        const auto& members = channels_[static_cast<size_t>(ch)].members;
                        for (size_t m = 0; m < members.size(); ++m)
                            g.results.push_back(detail::inst_name(
                                "ch" + std::to_string(ch) + "_" + std::to_string(m), i));
                        emit_resolved(std::move(g), i);
                    }
                    break;
                case StepKind::Consumed:
                    for (int ch : stage.reads) {
                        Op c;
                        c.kind = OpKind::Consumed;
                        c.channel = ch;
                        c.slot = SlotExpr{false, 0, i};
                        emit_resolved(std::move(c), i);
                    }
                    break;
                case StepKind::Issue: {
                    int group = next_group_++;
                    stage_groups_[{step.stage, i}] = group;
                    for (const auto& op : stage.ops) {
                        Op copy = op;
                        detail::rename_op(copy, rn);
                        InstOp io;
                        io.iter = i;
                        io.label = std::string(1, step.stage) + "[" + std::to_string(i) + "]";
                        if (copy.kind == OpKind::Dot || copy.kind == OpKind::MmaIssue) {
                            copy.kind = OpKind::MmaIssue;
                            io.group = group;
                        }
                        io.op = std::move(copy);
                        out_.push_back(std::move(io));
                    }
                    break;
                }
                case StepKind::Wait: {
                    Op w;
                    w.kind = OpKind::MmaWait;
                    w.pendings = 0;
                    InstOp io;
                    io.op = std::move(w);
                    io.iter = i;
                    auto it = stage_groups_.find({step.stage, i});
                    io.wait_group = it == stage_groups_.end() ? -1 : it->second;
                    io.label = std::string("wait ") + step.stage + "[" + std::to_string(i) + "]";
                    out_.push_back(std::move(io));
                    break;
                }
                case StepKind::Compute:
                    for (const auto& op : stage.ops) {
                        Op copy = op;
                        detail::rename_op(copy, rn);
                        InstOp io;
                        io.iter = i;
                        io.label = std::string("C[") + std::to_string(i) + "]";
                        io.op = std::move(copy);
                        out_.push_back(std::move(io));
                    }
                    break;
            }
        }

        for (size_t i = 0; i < loop.iter_args.size(); ++i)
            final_bindings_[loop.iter_args[i].name] =
                cs.trips == 0 ? loop.iter_args[i].init
                              : detail::inst_name(cs.carry_next[i], cs.trips - 1);
    }

    const Region& region_;
    const std::vector<Channel>& channels_;
    std::vector<InstOp> out_;
    std::map<std::string, std::string> final_bindings_;
    std::map<std::pair<char, int64_t>, int> stage_groups_;
    int next_group_ = 0;
};

inline std::vector<InstOp> expand_region(const Region& region,
                                         const std::vector<Channel>& channels) {
    return RegionExpander(region, channels).run();
}

}  // namespace warpspec
