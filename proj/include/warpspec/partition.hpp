#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "warpspec/ir.hpp"
#include "warpspec/validate.hpp"

namespace warpspec {

// Producer/consumer role of each statement. Address generation feeds the
// load warp group; tile transforms feed the compute warp group. Pure ops
// needed on both sides are duplicated into both regions.
enum class StmtTag { Iteration, Tile };

struct OpTag {
    StmtTag tag = StmtTag::Tile;
    bool shared = false;
};

struct Annotation {
    std::vector<OpTag> prologue, body, epilogue;
    // bit 0: carried by the producer loop; bit 1: carried by the consumer loop
    std::vector<int> iter_arg_side;
    std::set<std::string> producer_need, consumer_need;
};

namespace detail {

inline bool is_tile_stmt_kind(OpKind k) {
    return k == OpKind::Dot || k == OpKind::Elementwise || k == OpKind::Reduce ||
           k == OpKind::Store || k == OpKind::MmaIssue;
}

struct DefSite {
    int list = -1;  // 0 prologue, 1 body, 2 epilogue
    int index = -1;
};

struct DefIndex {
    std::map<std::string, DefSite> defs;
    const KernelGraph* g;

    explicit DefIndex(const KernelGraph& graph) : g(&graph) {
        auto scan = [&](const std::vector<Op>& ops, int list) {
            for (size_t i = 0; i < ops.size(); ++i)
                for (const auto& r : ops[i].results)
                    defs[r] = {list, static_cast<int>(i)};
        };
        scan(graph.prologue, 0);
        scan(graph.loop.body, 1);
        scan(graph.epilogue, 2);
    }

    const Op* def_op(const std::string& id) const {
        auto it = defs.find(id);
        if (it == defs.end()) return nullptr;
        const auto& s = it->second;
        const std::vector<Op>& ops =
            s.list == 0 ? g->prologue : (s.list == 1 ? g->loop.body : g->epilogue);
        return &ops[static_cast<size_t>(s.index)];
    }
};

}  // namespace detail

// Backward traversal along use-def chains. The fixed point: TmaLoad offsets
// and producer-carried loop updates pull values into the producer side; tile
// transforms, stores, and the epilogue pull values into the consumer side.
inline Annotation annotate(const KernelGraph& g) {
    require_valid(g);
    detail::DefIndex defs(g);

    const Op* yield = nullptr;
    for (const auto& op : g.loop.body)
        if (op.kind == OpKind::Yield) yield = &op;

    std::set<std::string> pn, cn;
    auto seed = [&](std::set<std::string>& s, const std::string& id) { s.insert(id); };

    for (const auto& op : g.loop.body) {
        if (op.kind == OpKind::TmaLoad)
            for (const auto& o : op.operands) seed(pn, o);
        if (detail::is_tile_stmt_kind(op.kind))
            for (const auto& o : op.operands) seed(cn, o);
    }
    for (const auto& op : g.epilogue)
        for (const auto& o : op.operands) seed(cn, o);

    auto iter_index = [&](const std::string& id) -> int {
        for (size_t i = 0; i < g.loop.iter_args.size(); ++i)
            if (g.loop.iter_args[i].name == id) return static_cast<int>(i);
        return -1;
    };

    // close both need sets over pure scalar defs and loop carries
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::set<std::string>* s : {&pn, &cn}) {
            std::vector<std::string> work(s->begin(), s->end());
            for (const auto& id : work) {
                int ai = iter_index(id);
                if (ai >= 0) {
                    if (s->insert(g.loop.iter_args[static_cast<size_t>(ai)].init).second)
                        changed = true;
                    if (yield && ai < static_cast<int>(yield->operands.size()))
                        if (s->insert(yield->operands[static_cast<size_t>(ai)]).second)
                            changed = true;
                    continue;
                }
                const Op* def = defs.def_op(id);
                if (!def) continue;
                if (def->kind == OpKind::Constant || def->kind == OpKind::IndexArith) {
                    for (const auto& o : def->operands)
                        if (s->insert(o).second) changed = true;
                } else if (s == &pn) {
                    // a tile computation feeding an address: the cut would run
                    // backwards from consumer to producer
                    if (detail::is_tile_stmt_kind(def->kind))
                        fail(ErrorCode::UnsupportedKernel,
                             "%" + id + " feeds both a tile computation and a tma_load offset");
                }
            }
        }
    }

    Annotation ann;
    ann.producer_need = pn;
    ann.consumer_need = cn;
    auto tag_list = [&](const std::vector<Op>& ops, std::vector<OpTag>& out) {
        for (const auto& op : ops) {
            OpTag t;
            if (op.kind == OpKind::TmaLoad) {
                t.tag = StmtTag::Iteration;
            } else if (detail::is_tile_stmt_kind(op.kind) || op.kind == OpKind::Yield) {
                t.tag = StmtTag::Tile;
            } else {
                bool in_p = false, in_c = false;
                for (const auto& r : op.results) {
                    in_p = in_p || pn.count(r);
                    in_c = in_c || cn.count(r);
                }
                if (in_p) {
                    t.tag = StmtTag::Iteration;
                    t.shared = in_c;
                } else {
                    t.tag = StmtTag::Tile;
                }
            }
            out.push_back(t);
        }
    };
    tag_list(g.prologue, ann.prologue);
    tag_list(g.loop.body, ann.body);
    tag_list(g.epilogue, ann.epilogue);

    for (const auto& a : g.loop.iter_args) {
        int side = 0;
        if (pn.count(a.name)) side |= 1;
        if (cn.count(a.name)) side |= 2;
        if (side == 0) side = 2;  // dead carries stay with the consumer
        ann.iter_arg_side.push_back(side);
    }
    return ann;
}

// ---------------------------------------------------------------------------
// Channel planning: loads grouped per first tile-statement user, so loads
// consumed by the same dot share one tuple channel.
// ---------------------------------------------------------------------------

struct ChannelSpec {
    std::vector<int> producer_ops;  // body indices of the member TmaLoads
    int consumer_op = -1;           // body index of the first tile-statement user
    int depth = 2;
    std::vector<TileType> payload;
};

inline std::vector<ChannelSpec> plan_channels(const KernelGraph& g, const Annotation& ann,
                                              int depth) {
    (void)ann;
    if (depth < 1) fail(ErrorCode::PipelineInfeasible, "channel depth must be >= 1");
    std::vector<ChannelSpec> specs;
    std::map<int, int> consumer_to_spec;  // first-user body index -> spec
    for (size_t i = 0; i < g.loop.body.size(); ++i) {
        const Op& op = g.loop.body[i];
        if (op.kind != OpKind::TmaLoad) continue;
        int first_user = -1;
        for (size_t j = 0; j < g.loop.body.size() && first_user < 0; ++j) {
            const Op& u = g.loop.body[j];
            if (!detail::is_tile_stmt_kind(u.kind)) continue;
            for (const auto& o : u.operands)
                if (o == op.results[0]) first_user = static_cast<int>(j);
        }
        int spec_idx;
        auto it = first_user >= 0 ? consumer_to_spec.find(first_user) : consumer_to_spec.end();
        if (it != consumer_to_spec.end()) {
            spec_idx = it->second;
        } else {
            spec_idx = static_cast<int>(specs.size());
            specs.push_back(ChannelSpec{});
            specs.back().consumer_op = first_user;
            specs.back().depth = depth;
            if (first_user >= 0) consumer_to_spec[first_user] = spec_idx;
        }
        specs[static_cast<size_t>(spec_idx)].producer_ops.push_back(static_cast<int>(i));
        specs[static_cast<size_t>(spec_idx)].payload.push_back(op.tile);
    }
    return specs;
}

// ---------------------------------------------------------------------------
// Loop distribution around the cut.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string payload_name(int ch, int member) {
    return "ch" + std::to_string(ch) + "_" + std::to_string(member);
}

}  // namespace detail

inline WarpSpecProgram distribute(const KernelGraph& g, const Annotation& ann,
                                  const std::vector<ChannelSpec>& specs) {
    WarpSpecProgram prog;
    prog.name = g.name;
    prog.params = g.params;
    for (size_t i = 0; i < specs.size(); ++i) {
        Channel ch;
        ch.id = static_cast<int>(i);
        ch.depth = specs[i].depth;
        ch.members = specs[i].payload;
        prog.channels.push_back(ch);
    }

    // load result id -> (channel, member); membership drives operand rewrites
    std::map<std::string, std::pair<int, int>> payload_of;
    std::map<int, int> put_after;  // body index of last member load -> channel
    for (size_t c = 0; c < specs.size(); ++c) {
        int last = -1;
        for (size_t m = 0; m < specs[c].producer_ops.size(); ++m) {
            int bi = specs[c].producer_ops[m];
            payload_of[g.loop.body[static_cast<size_t>(bi)].results[0]] = {static_cast<int>(c),
                                                                           static_cast<int>(m)};
            last = last > bi ? last : bi;
        }
        put_after[last] = static_cast<int>(c);
    }

    if (specs.empty()) {
        // nothing crosses a partition boundary: one compute region, unchanged
        Region only;
        only.partition = 1;
        only.prologue = g.prologue;
        only.loop = g.loop;
        only.epilogue = g.epilogue;
        prog.regions.push_back(std::move(only));
        return prog;
    }

    Region producer;
    producer.partition = 0;
    Region consumer;
    consumer.partition = 1;

    for (size_t i = 0; i < g.prologue.size(); ++i) {
        const OpTag& t = ann.prologue[i];
        if (t.tag == StmtTag::Iteration || t.shared) producer.prologue.push_back(g.prologue[i]);
        if (t.tag == StmtTag::Tile || t.shared) consumer.prologue.push_back(g.prologue[i]);
    }

    producer.loop.induction = g.loop.induction;
    producer.loop.trip = g.loop.trip;
    consumer.loop.induction = g.loop.induction;
    consumer.loop.trip = g.loop.trip;

    const Op* yield = nullptr;
    for (const auto& op : g.loop.body)
        if (op.kind == OpKind::Yield) yield = &op;

    std::vector<std::string> prod_yield, cons_yield;
    for (size_t i = 0; i < g.loop.iter_args.size(); ++i) {
        int side = ann.iter_arg_side[i];
        if (side & 1) {
            producer.loop.iter_args.push_back(g.loop.iter_args[i]);
            prod_yield.push_back(yield->operands[i]);
        }
        if (side & 2) {
            consumer.loop.iter_args.push_back(g.loop.iter_args[i]);
            cons_yield.push_back(yield->operands[i]);
        }
    }

    // producer body: iteration statements with a put after each channel's
    // final member load
    for (size_t i = 0; i < g.loop.body.size(); ++i) {
        const Op& op = g.loop.body[i];
        const OpTag& t = ann.body[i];
        if (op.kind == OpKind::Yield) continue;
        if (t.tag == StmtTag::Iteration || t.shared) producer.loop.body.push_back(op);
        auto pa = put_after.find(static_cast<int>(i));
        if (pa != put_after.end()) {
            Op put;
            put.kind = OpKind::Put;
            put.channel = pa->second;
            put.slot = SlotExpr{true, 0, 0};
            for (int bi : specs[static_cast<size_t>(pa->second)].producer_ops)
                put.operands.push_back(g.loop.body[static_cast<size_t>(bi)].results[0]);
            producer.loop.body.push_back(std::move(put));
        }
    }
    if (!producer.loop.iter_args.empty()) {
        Op y;
        y.kind = OpKind::Yield;
        y.operands = prod_yield;
        producer.loop.body.push_back(std::move(y));
    }

    // consumer body: gets first, tile statements with payload operands
    // rewritten to read the aref buffer, consumed after each payload's last use
    for (size_t c = 0; c < prog.channels.size(); ++c) {
        Op get;
        get.kind = OpKind::Get;
        get.channel = static_cast<int>(c);
        get.slot = SlotExpr{true, 0, 0};
        for (size_t m = 0; m < prog.channels[c].members.size(); ++m)
            get.results.push_back(detail::payload_name(static_cast<int>(c), static_cast<int>(m)));
        consumer.loop.body.push_back(std::move(get));
    }
    std::vector<Op> tile_ops;
    for (size_t i = 0; i < g.loop.body.size(); ++i) {
        const Op& op = g.loop.body[i];
        const OpTag& t = ann.body[i];
        if (op.kind == OpKind::Yield || op.kind == OpKind::TmaLoad) continue;
        if (t.tag != StmtTag::Tile && !t.shared) continue;
        Op copy = op;
        for (auto& o : copy.operands) {
            auto it = payload_of.find(o);
            if (it != payload_of.end())
                o = detail::payload_name(it->second.first, it->second.second);
        }
        tile_ops.push_back(std::move(copy));
    }
    // last use per channel over the rewritten tile ops
    std::vector<int> last_use(prog.channels.size(), -1);
    for (size_t i = 0; i < tile_ops.size(); ++i)
        for (const auto& o : tile_ops[i].operands)
            for (size_t c = 0; c < prog.channels.size(); ++c)
                for (size_t m = 0; m < prog.channels[c].members.size(); ++m)
                    if (o == detail::payload_name(static_cast<int>(c), static_cast<int>(m)))
                        last_use[c] = static_cast<int>(i);
    auto emit_consumed_after = [&](int idx) {
        for (size_t c = 0; c < prog.channels.size(); ++c) {
            if (last_use[c] != idx) continue;
            Op cns;
            cns.kind = OpKind::Consumed;
            cns.channel = static_cast<int>(c);
            cns.slot = SlotExpr{true, 0, 0};
            consumer.loop.body.push_back(std::move(cns));
        }
    };
    emit_consumed_after(-1);  // channels whose payload is never read
    for (size_t i = 0; i < tile_ops.size(); ++i) {
        consumer.loop.body.push_back(tile_ops[i]);
        emit_consumed_after(static_cast<int>(i));
    }
    if (!consumer.loop.iter_args.empty()) {
        Op y;
        y.kind = OpKind::Yield;
        y.operands = cons_yield;
        consumer.loop.body.push_back(std::move(y));
    }

    for (size_t i = 0; i < g.epilogue.size(); ++i) consumer.epilogue.push_back(g.epilogue[i]);

    prog.regions.push_back(std::move(producer));
    prog.regions.push_back(std::move(consumer));
    return prog;
}

// Single-region program with loads left inline: the unspecialized baseline.
inline WarpSpecProgram sequentialize(const KernelGraph& g) {
    require_valid(g);
    WarpSpecProgram prog;
    prog.name = g.name;
    prog.params = g.params;
    Region only;
    only.partition = 1;
    only.prologue = g.prologue;
    only.loop = g.loop;
    only.epilogue = g.epilogue;
    prog.regions.push_back(std::move(only));
    return prog;
}

// Convenience wrapper: annotate, plan, distribute.
inline WarpSpecProgram partition_kernel(const KernelGraph& g, int depth) {
    Annotation ann = annotate(g);
    auto specs = plan_channels(g, ann, depth);
    return distribute(g, ann, specs);
}

}  // namespace warpspec
