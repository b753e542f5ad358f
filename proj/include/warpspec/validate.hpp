#pragma once

#include <string>
#include <vector>

#include "warpspec/ir.hpp"
#include "warpspec/parse.hpp"

namespace warpspec {

struct Diagnostic {
    std::string at;  // value id or op description
    std::string message;
    int line = 0;

    std::string str() const {
        std::string s;
        if (line) s += "line " + std::to_string(line) + ": ";
        if (!at.empty()) s += at + ": ";
        return s + message;
    }
};

namespace detail {

struct Checker {
    std::vector<Diagnostic>* diags;
    TypeMap types;
    const std::vector<Param>* params = nullptr;
    const std::vector<Channel>* channels = nullptr;

    void diag(const Op& op, const std::string& msg) {
        std::string at = op.results.empty() ? "" : "%" + op.results[0];
        diags->push_back({at, msg, op.line});
    }

    const Param* find_param(const std::string& n) const {
        for (const auto& p : *params)
            if (p.name == n) return &p;
        return nullptr;
    }

    bool have(const std::string& id) const { return types.count(id) != 0; }

    // Returns nullptr and reports when the operand is unusable.
    const VType* use(const Op& op, const std::string& id) {
        auto it = types.find(id);
        if (it == types.end()) {
            diag(op, "use of undefined value %" + id);
            return nullptr;
        }
        return &it->second;
    }

    const VType* use_scalar(const Op& op, const std::string& id) {
        const VType* t = use(op, id);
        if (t && t->is_tile) {
            diag(op, "%" + id + " must be scalar, got " + t->str());
            return nullptr;
        }
        return t;
    }

    const VType* use_tile(const Op& op, const std::string& id) {
        const VType* t = use(op, id);
        if (t && !t->is_tile) {
            diag(op, "%" + id + " must be a tile, got scalar");
            return nullptr;
        }
        return t;
    }

    void define(const Op& op, const std::string& id, VType t) {
        if (types.count(id)) {
            diag(op, "redefinition of %" + id);
            return;
        }
        types.emplace(id, t);
    }

    void check_op(const Op& op, bool in_body, bool in_epilogue) {
        switch (op.kind) {
            case OpKind::Constant:
                if (op.has_tile) {
                    if (op.tile.rows < 1 || op.tile.cols < 1)
                        diag(op, "tile dimensions must be positive");
                    define(op, op.results[0], VType::of_tile(op.tile));
                } else {
                    define(op, op.results[0], VType::scalar());
                }
                break;
            case OpKind::IndexArith: {
                if (op.sfn != ScalarFn::Pid)
                    for (const auto& o : op.operands) use_scalar(op, o);
                define(op, op.results[0], VType::scalar());
                break;
            }
            case OpKind::TmaLoad: {
                if (!in_body) diag(op, "tma_load only allowed in the loop body");
                const Param* p = find_param(op.buffer);
                if (!p) {
                    diag(op, "unknown buffer '" + op.buffer + "'");
                } else {
                    if (p->type.elem != op.tile.elem)
                        diag(op, "element kind mismatch: buffer is " +
                                     std::string(elem_name(p->type.elem)));
                    if (op.tile.rows > p->type.rows || op.tile.cols > p->type.cols)
                        diag(op, "tile " + op.tile.str() + " exceeds buffer " + p->type.str());
                }
                for (const auto& o : op.operands) use_scalar(op, o);
                define(op, op.results[0], VType::of_tile(op.tile));
                break;
            }
            case OpKind::Dot:
            case OpKind::MmaIssue: {
                const VType* a = use_tile(op, op.operands[0]);
                const VType* b = use_tile(op, op.operands[1]);
                const VType* acc = use_tile(op, op.operands[2]);
                if (a && b && acc) {
                    int64_t inner_a = a->tile.cols;
                    int64_t inner_b = op.trans_b ? b->tile.cols : b->tile.rows;
                    int64_t n = op.trans_b ? b->tile.rows : b->tile.cols;
                    if (inner_a != inner_b)
                        diag(op, "dot inner dimensions disagree: " + a->tile.str() + " vs " +
                                     b->tile.str() + (op.trans_b ? " (transposed)" : ""));
                    if (acc->tile.rows != a->tile.rows || acc->tile.cols != n)
                        diag(op, "dot accumulator shape mismatch");
                    if (a->tile.elem != b->tile.elem || a->tile.elem != acc->tile.elem)
                        diag(op, "dot element kinds disagree");
                    define(op, op.results[0], *acc);
                } else {
                    define(op, op.results[0], VType::of_tile(TileType{1, 1, Elem::Int}));
                }
                break;
            }
            case OpKind::Elementwise: {
                const VType* a = use_tile(op, op.operands[0]);
                if (op.operands.size() == 1) {
                    if (a) {
                        if (op.efn == EwFn::Exp && a->tile.elem == Elem::Int)
                            diag(op, "ew exp is not defined on int tiles");
                        define(op, op.results[0], *a);
                    } else {
                        define(op, op.results[0], VType::of_tile(TileType{1, 1, Elem::Int}));
                    }
                } else {
                    const VType* b = use_tile(op, op.operands[1]);
                    if (a && b) {
                        if (!broadcast_compatible(a->tile, b->tile))
                            diag(op, "ew shapes incompatible: " + a->tile.str() + " vs " +
                                         b->tile.str());
                        define(op, op.results[0],
                               VType::of_tile(broadcast_shape(a->tile, b->tile)));
                    } else {
                        define(op, op.results[0], VType::of_tile(TileType{1, 1, Elem::Int}));
                    }
                }
                break;
            }
            case OpKind::Reduce: {
                const VType* a = use_tile(op, op.operands[0]);
                if (a) {
                    TileType t = a->tile;
                    if (op.axis == 0)
                        t.rows = 1;
                    else
                        t.cols = 1;
                    define(op, op.results[0], VType::of_tile(t));
                } else {
                    define(op, op.results[0], VType::of_tile(TileType{1, 1, Elem::Int}));
                }
                break;
            }
            case OpKind::Store: {
                if (!in_epilogue) diag(op, "store only allowed in the epilogue");
                const Param* p = find_param(op.buffer);
                const VType* v = use_tile(op, op.operands[0]);
                if (!p) {
                    diag(op, "unknown buffer '" + op.buffer + "'");
                } else if (v) {
                    if (v->tile.elem != p->type.elem) diag(op, "element kind mismatch on store");
                    if (v->tile.rows > p->type.rows || v->tile.cols > p->type.cols)
                        diag(op, "stored tile exceeds buffer shape");
                }
                use_scalar(op, op.operands[1]);
                use_scalar(op, op.operands[2]);
                break;
            }
            case OpKind::Yield:
                // arity and types checked by the loop walker
                for (const auto& o : op.operands) use(op, o);
                break;
            case OpKind::Put: {
                if (!channels || op.channel < 0 ||
                    op.channel >= static_cast<int>(channels->size())) {
                    diag(op, "unknown channel ch" + std::to_string(op.channel));
                    break;
                }
                const Channel& ch = (*channels)[static_cast<size_t>(op.channel)];
                if (op.operands.size() != ch.members.size()) {
                    diag(op, "put arity mismatch with channel payload");
                    break;
                }
                for (size_t i = 0; i < op.operands.size(); ++i) {
                    const VType* t = use_tile(op, op.operands[i]);
                    if (t && t->tile != ch.members[i])
                        diag(op, "put member " + std::to_string(i) + " type mismatch");
                }
                break;
            }
            case OpKind::Get: {
                if (!channels || op.channel < 0 ||
                    op.channel >= static_cast<int>(channels->size())) {
                    diag(op, "unknown channel ch" + std::to_string(op.channel));
                    break;
                }
                const Channel& ch = (*channels)[static_cast<size_t>(op.channel)];
                if (op.results.size() != ch.members.size()) {
                    diag(op, "get arity mismatch with channel payload");
                    break;
                }
                for (size_t i = 0; i < op.results.size(); ++i)
                    define(op, op.results[i], VType::of_tile(ch.members[i]));
                break;
            }
            case OpKind::Consumed:
                if (!channels || op.channel < 0 ||
                    op.channel >= static_cast<int>(channels->size()))
                    diag(op, "unknown channel ch" + std::to_string(op.channel));
                break;
            case OpKind::MmaWait:
                if (op.pendings < 0) diag(op, "mma_wait needs pendings >= 0");
                break;
        }
    }

    void check_loop(const LoopRegion& loop) {
        if (loop.trip < 0) diags->push_back({"", "negative trip count", 0});
        define_plain(loop.induction, VType::scalar());
        std::vector<VType> arg_types;
        for (const auto& a : loop.iter_args) {
            auto it = types.find(a.init);
            if (it == types.end()) {
                diags->push_back({"%" + a.name, "iter init %" + a.init + " is undefined", 0});
                arg_types.push_back(VType::scalar());
            } else {
                arg_types.push_back(it->second);
            }
            define_plain(a.name, arg_types.back());
        }
        const Op* yield = nullptr;
        for (size_t i = 0; i < loop.body.size(); ++i) {
            const Op& op = loop.body[i];
            if (op.kind == OpKind::Yield) {
                if (i + 1 != loop.body.size())
                    diag(op, "yield must be the last statement of the loop body");
                yield = &op;
            }
            check_op(op, true, false);
        }
        if (!loop.iter_args.empty()) {
            if (!yield) {
                diags->push_back({"", "loop with iter args must end in yield", 0});
            } else if (yield->operands.size() != loop.iter_args.size()) {
                diag(*yield, "yield arity does not match iter args");
            } else {
                for (size_t i = 0; i < yield->operands.size(); ++i) {
                    auto it = types.find(yield->operands[i]);
                    if (it != types.end() && !(it->second == arg_types[i]))
                        diag(*yield, "yield operand " + std::to_string(i) +
                                         " type mismatch: " + it->second.str() + " vs " +
                                         arg_types[i].str());
                }
            }
        } else if (yield) {
            diag(*yield, "yield in a loop without iter args");
        }
    }

    void define_plain(const std::string& id, VType t) {
        if (types.count(id))
            diags->push_back({"%" + id, "redefinition", 0});
        else
            types.emplace(id, t);
    }
};

}  // namespace detail

inline std::vector<Diagnostic> validate(const KernelGraph& g, TypeMap* out_types = nullptr) {
    std::vector<Diagnostic> diags;
    detail::Checker ck;
    ck.diags = &diags;
    ck.params = &g.params;
    for (const auto& op : g.prologue) ck.check_op(op, false, false);
    ck.check_loop(g.loop);
    for (const auto& op : g.epilogue) ck.check_op(op, false, true);
    if (out_types) *out_types = std::move(ck.types);
    return diags;
}

// Per-region validation; each warp group is an independent scope.
inline std::vector<Diagnostic> validate(const WarpSpecProgram& prog,
                                        std::vector<TypeMap>* out_types = nullptr) {
    std::vector<Diagnostic> diags;
    if (out_types) out_types->clear();
    for (const auto& region : prog.regions) {
        detail::Checker ck;
        ck.diags = &diags;
        ck.params = &prog.params;
        ck.channels = &prog.channels;
        for (const auto& op : region.prologue) ck.check_op(op, false, false);
        if (region.coarse) {
            // stage ops share the loop scope
            ck.define_plain(region.loop.induction, VType::scalar());
            for (const auto& a : region.loop.iter_args) {
                auto it = ck.types.find(a.init);
                ck.define_plain(a.name, it == ck.types.end() ? VType::scalar() : it->second);
            }
            for (const CoarseStage* st :
                 {&region.coarse->t, &region.coarse->c, &region.coarse->u}) {
                for (int c : st->reads) {
                    const Channel& ch = prog.channels[static_cast<size_t>(c)];
                    for (size_t m = 0; m < ch.members.size(); ++m)
                        ck.define_plain("ch" + std::to_string(c) + "_" + std::to_string(m),
                                        VType::of_tile(ch.members[m]));
                }
                for (const auto& op : st->ops) ck.check_op(op, true, false);
            }
        } else {
            ck.check_loop(region.loop);
        }
        for (const auto& op : region.epilogue) ck.check_op(op, false, true);
    }
    return diags;
}

inline void require_valid(const KernelGraph& g) {
    auto diags = validate(g);
    if (!diags.empty()) fail(ErrorCode::Type, diags[0].str());
}

inline void require_valid(const WarpSpecProgram& prog) {
    auto diags = validate(prog);
    if (!diags.empty()) fail(ErrorCode::Type, diags[0].str());
}

// Parse + validate; the entry point for kernel sources.
inline KernelGraph parse_kernel(const std::string& text) {
    KernelGraph g = parse_kernel_text(text);
    require_valid(g);
    return g;
}

}  // namespace warpspec
