#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "warpspec/aref.hpp"
#include "warpspec/expand.hpp"
#include "warpspec/interp.hpp"

namespace warpspec {

struct CoExecResult {
    Buffers outputs;
    bool deadlocked = false;
    std::string blocked;  // description of stuck agents

    struct ChannelStats {
        int64_t puts = 0, gets = 0, consumeds = 0;
        int64_t max_lead = 0;  // puts ahead of consumeds, bounded by D
        int64_t lint_warnings = 0;
    };
    std::vector<ChannelStats> channels;
};

// Cooperative execution of all warp-group regions under blocking aref
// semantics: agents advance round-robin and suspend on unavailable credits.
inline CoExecResult co_execute(const WarpSpecProgram& prog, const Buffers& inputs,
                               const ExecContext& ctx = {}) {
    CoExecResult res;
    res.outputs = prepare_buffers(prog.params, inputs);

    std::vector<ArefChannel<std::vector<Tile>>> channels;
    channels.reserve(prog.channels.size());
    for (const auto& ch : prog.channels) channels.emplace_back(ch.depth);
    res.channels.resize(prog.channels.size());

    struct Agent {
        std::vector<InstOp> stream;
        size_t pc = 0;
        Env env;
        // issued-but-unretired mma groups, oldest first; values materialize
        // when the retiring wait passes, matching the asynchronous model
        std::vector<std::pair<int, const InstOp*>> pending_mma;
        bool done() const { return pc >= stream.size(); }

        void retire_mma(const Buffers& bufs, const ExecContext& ctx, int named_group,
                        int pendings) {
            size_t cut = pending_mma.size();  // entries [0, cut) retire, oldest first
            if (named_group >= 0) {
                bool found = false;
                for (size_t i = 0; i < pending_mma.size(); ++i)
                    if (pending_mma[i].first == named_group) {
                        cut = i + 1;
                        found = true;
                    }
                if (!found) return;  // already retired (e.g. a repeated wait)
            } else {
                // keep at most pendings-1 whole groups in flight
                int keep_groups = std::max(pendings - 1, 0);
                std::set<int> kept;
                size_t i = pending_mma.size();
                while (i > 0) {
                    int gp = pending_mma[i - 1].first;
                    if (!kept.count(gp)) {
                        if (static_cast<int>(kept.size()) == keep_groups) break;
                        kept.insert(gp);
                    }
                    --i;
                }
                cut = i;
            }
            for (size_t i = 0; i < cut; ++i)
                eval_pure_op(pending_mma[i].second->op, env, bufs, ctx);
            pending_mma.erase(pending_mma.begin(), pending_mma.begin() + static_cast<long>(cut));
        }
    };
    std::vector<Agent> agents;
    for (const auto& region : prog.regions) {
        Agent a;
        a.stream = expand_region(region, prog.channels);
        agents.push_back(std::move(a));
    }

    auto all_done = [&] {
        for (const auto& a : agents)
            if (!a.done()) return false;
        return true;
    };

    while (!all_done()) {
        bool progress = false;
        for (auto& a : agents) {
            while (!a.done()) {
                const InstOp& io = a.stream[a.pc];
                const Op& op = io.op;
                if (op.kind == OpKind::Put) {
                    auto& ch = channels[static_cast<size_t>(op.channel)];
                    if (!ch.slot(io.slot).can_put()) break;
                    std::vector<Tile> payload;
                    for (const auto& o : op.operands)
                        payload.push_back(detail::lookup(a.env, o).t);
                    ch.slot(io.slot).put(std::move(payload));
                    auto& st = res.channels[static_cast<size_t>(op.channel)];
                    ++st.puts;
                    int64_t lead = st.puts - st.consumeds;
                    if (lead > st.max_lead) st.max_lead = lead;
                } else if (op.kind == OpKind::Get) {
                    auto& ch = channels[static_cast<size_t>(op.channel)];
                    if (!ch.slot(io.slot).can_get()) break;
                    std::vector<Tile> payload = ch.slot(io.slot).get();
                    for (size_t m = 0; m < op.results.size(); ++m)
                        a.env[op.results[m]] = RValue::tile(payload[m]);
                    ++res.channels[static_cast<size_t>(op.channel)].gets;
                } else if (op.kind == OpKind::Consumed) {
                    auto& ch = channels[static_cast<size_t>(op.channel)];
                    auto& st = res.channels[static_cast<size_t>(op.channel)];
                    if (ch.slot(io.slot).consumed()) ++st.lint_warnings;
                    ++st.consumeds;
                } else if (op.kind == OpKind::MmaIssue) {
                    a.pending_mma.emplace_back(io.group, &io);
                } else if (op.kind == OpKind::MmaWait) {
                    a.retire_mma(res.outputs, ctx, io.wait_group, op.pendings);
                } else if (op.kind == OpKind::Store) {
                    exec_store(op, a.env, res.outputs);
                } else {
                    eval_pure_op(op, a.env, res.outputs, ctx);
                }
                ++a.pc;
                progress = true;
            }
            if (a.done() && !a.pending_mma.empty()) a.retire_mma(res.outputs, ctx, -1, 0);
        }
        if (!progress) {
            res.deadlocked = true;
            std::string desc;
            for (size_t i = 0; i < agents.size(); ++i) {
                if (agents[i].done()) continue;
                const InstOp& io = agents[i].stream[agents[i].pc];
                desc += "wg" + std::to_string(i) + " blocked on ch" +
                        std::to_string(io.op.channel) + " slot " + std::to_string(io.slot) + "; ";
            }
            res.blocked = desc;
            return res;
        }
    }
    return res;
}

}  // namespace warpspec
