#pragma once

#include <map>
#include <string>
#include <vector>

#include "warpspec/ir.hpp"
#include "warpspec/validate.hpp"

namespace warpspec {

struct RValue {
    bool is_tile = false;
    int64_t s = 0;
    Tile t;

    static RValue scalar(int64_t v) {
        RValue r;
        r.s = v;
        return r;
    }
    static RValue tile(Tile v) {
        RValue r;
        r.is_tile = true;
        r.t = std::move(v);
        return r;
    }
};

using Env = std::map<std::string, RValue>;
using Buffers = std::map<std::string, Tile>;

struct ExecContext {
    int64_t pid = 0;
};

inline int64_t eval_scalar_fn(ScalarFn f, int64_t a, int64_t b) {
    switch (f) {
        case ScalarFn::Add: return wrap_add(a, b);
        case ScalarFn::Sub: return wrap_sub(a, b);
        case ScalarFn::Mul: return wrap_mul(a, b);
        case ScalarFn::Div:
            if (b == 0) fail(ErrorCode::Eval, "division by zero");
            return a / b;
        case ScalarFn::Mod:
            if (b == 0) fail(ErrorCode::Eval, "modulo by zero");
            return a % b;
        case ScalarFn::Pid: break;
    }
    throw InternalError("eval_scalar_fn");
}

namespace detail {

inline const RValue& lookup(const Env& env, const std::string& id) {
    auto it = env.find(id);
    if (it == env.end()) fail(ErrorCode::Eval, "unbound value %" + id);
    return it->second;
}

inline Tile make_const_tile(const Op& op) {
    Tile t(op.tile);
    if (!op.zeros) {
        if (op.tile.elem == Elem::Int)
            t.iv = op.int_data;
        else
            t.rv = op.real_data;
    }
    return t;
}

}  // namespace detail

// Evaluates one side-effect-free op into env. Store and channel ops are the
// caller's business.
inline void eval_pure_op(const Op& op, Env& env, const Buffers& buffers, const ExecContext& ctx) {
    switch (op.kind) {
        case OpKind::Constant:
            if (op.has_tile)
                env[op.results[0]] = RValue::tile(detail::make_const_tile(op));
            else
                env[op.results[0]] = RValue::scalar(*op.int_literal);
            return;
        case OpKind::IndexArith: {
            if (op.sfn == ScalarFn::Pid) {
                env[op.results[0]] = RValue::scalar(ctx.pid);
                return;
            }
            int64_t a = detail::lookup(env, op.operands[0]).s;
            int64_t b = detail::lookup(env, op.operands[1]).s;
            env[op.results[0]] = RValue::scalar(eval_scalar_fn(op.sfn, a, b));
            return;
        }
        case OpKind::TmaLoad: {
            auto it = buffers.find(op.buffer);
            if (it == buffers.end()) fail(ErrorCode::Eval, "no input buffer '" + op.buffer + "'");
            int64_t r0 = detail::lookup(env, op.operands[0]).s;
            int64_t c0 = detail::lookup(env, op.operands[1]).s;
            env[op.results[0]] = RValue::tile(slice_tile(it->second, r0, c0, op.tile));
            return;
        }
        case OpKind::Dot:
        case OpKind::MmaIssue: {
            const Tile& a = detail::lookup(env, op.operands[0]).t;
            const Tile& b = detail::lookup(env, op.operands[1]).t;
            const Tile& acc = detail::lookup(env, op.operands[2]).t;
            env[op.results[0]] = RValue::tile(eval_dot(a, b, acc, op.trans_b));
            return;
        }
        case OpKind::Elementwise: {
            const Tile& a = detail::lookup(env, op.operands[0]).t;
            if (op.operands.size() == 1)
                env[op.results[0]] = RValue::tile(eval_ew_unary(op.efn, a));
            else
                env[op.results[0]] = RValue::tile(
                    eval_ew_binary(op.efn, a, detail::lookup(env, op.operands[1]).t));
            return;
        }
        case OpKind::Reduce: {
            const Tile& a = detail::lookup(env, op.operands[0]).t;
            env[op.results[0]] = RValue::tile(eval_reduce(op.rfn, a, op.axis));
            return;
        }
        default: break;
    }
    throw InternalError("eval_pure_op: op kind has side effects");
}

inline void exec_store(const Op& op, Env& env, Buffers& buffers) {
    auto it = buffers.find(op.buffer);
    if (it == buffers.end()) fail(ErrorCode::Eval, "no buffer '" + op.buffer + "'");
    const Tile& v = detail::lookup(env, op.operands[0]).t;
    int64_t r0 = detail::lookup(env, op.operands[1]).s;
    int64_t c0 = detail::lookup(env, op.operands[2]).s;
    store_tile(it->second, r0, c0, v);
}

// Prepares the working buffer set: inputs must match parameter shapes;
// missing parameters start zeroed.
inline Buffers prepare_buffers(const std::vector<Param>& params, const Buffers& inputs) {
    Buffers bufs;
    for (const auto& p : params) {
        auto it = inputs.find(p.name);
        if (it == inputs.end()) {
            bufs.emplace(p.name, Tile(p.type));
        } else {
            if (it->second.type != p.type)
                fail(ErrorCode::Eval, "input '" + p.name + "' has shape " +
                                          it->second.type.str() + ", expected " + p.type.str());
            bufs.emplace(p.name, it->second);
        }
    }
    return bufs;
}

// Reference semantics: prologue, loop iterations in order, epilogue.
inline Buffers interpret_sequential(const KernelGraph& g, const Buffers& inputs,
                                    const ExecContext& ctx = {}) {
    Buffers bufs = prepare_buffers(g.params, inputs);
    Env env;
    for (const auto& op : g.prologue) eval_pure_op(op, env, bufs, ctx);

    for (const auto& a : g.loop.iter_args) env[a.name] = detail::lookup(env, a.init);
    for (int64_t k = 0; k < g.loop.trip; ++k) {
        env[g.loop.induction] = RValue::scalar(k);
        std::vector<RValue> yielded;
        for (const auto& op : g.loop.body) {
            if (op.kind == OpKind::Yield) {
                for (const auto& o : op.operands) yielded.push_back(detail::lookup(env, o));
            } else {
                eval_pure_op(op, env, bufs, ctx);
            }
        }
        for (size_t i = 0; i < g.loop.iter_args.size(); ++i)
            env[g.loop.iter_args[i].name] = yielded.at(i);
    }

    for (const auto& op : g.epilogue) {
        if (op.kind == OpKind::Store)
            exec_store(op, env, bufs);
        else
            eval_pure_op(op, env, bufs, ctx);
    }
    return bufs;
}

}  // namespace warpspec
