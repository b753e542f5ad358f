#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include <warpspec/interp.hpp>
#include <warpspec/ir.hpp>

namespace testing {

// Small GEMM: c[m x n] = a[m x (kk*trip)] . b[n x (kk*trip)]^T, tiles m x kk.
inline std::string gemm_src(int64_t m, int64_t n, int64_t kk, int64_t trip) {
    std::ostringstream os;
    os << "kernel gemm(a: buf<" << m << "x" << kk * trip << " int>, b: buf<" << n << "x"
       << kk * trip << " int>, c: buf<" << m << "x" << n << " int>) {\n";
    os << "  %z = const zeros : " << m << "x" << n << " int\n";
    os << "  %k0 = const 0\n";
    os << "  loop %k in 0.." << trip << " iter (%acc = %z, %ok = %k0) {\n";
    os << "    %ta = tma_load a[0, %ok] : " << m << "x" << kk << " int\n";
    os << "    %tb = tma_load b[0, %ok] : " << n << "x" << kk << " int\n";
    os << "    %acc1 = dot %ta, %tb.T, acc=%acc\n";
    os << "    %ok1 = add %ok, " << kk << "\n";
    os << "    yield %acc1, %ok1\n";
    os << "  }\n";
    os << "  store c[0, 0] = %acc\n";
    os << "}\n";
    return os.str();
}

inline const char* gemm_2x2_src() {
    static std::string src = gemm_src(2, 2, 2, 2);
    return src.c_str();
}

// Two dots with elementwise/reduce glue in between (attention shape).
inline const char* attention_small_src() {
    return "kernel attn(q: buf<4x4 int>, kt: buf<4x8 int>, v: buf<8x4 int>, o: buf<4x4 int>) {\n"
           "  %zs = const zeros : 4x4 int\n"
           "  %zacc = const zeros : 4x4 int\n"
           "  %k0 = const 0\n"
           "  loop %k in 0..2 iter (%acc = %zacc, %ok = %k0) {\n"
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
           "}\n";
}

// GEMM with an in-loop elementwise transform of the accumulator (T + C, no U).
inline const char* gemm_act_src() {
    return "kernel gemm_act(a: buf<4x8 int>, b: buf<4x8 int>, c: buf<4x4 int>) {\n"
           "  %z = const zeros : 4x4 int\n"
           "  %k0 = const 0\n"
           "  loop %k in 0..2 iter (%acc = %z, %last = %z, %ok = %k0) {\n"
           "    %ta = tma_load a[0, %ok] : 4x4 int\n"
           "    %tb = tma_load b[0, %ok] : 4x4 int\n"
           "    %acc1 = dot %ta, %tb.T, acc=%acc\n"
           "    %rl = ew relu %acc1\n"
           "    %ok1 = add %ok, 4\n"
           "    yield %acc1, %rl, %ok1\n"
           "  }\n"
           "  store c[0, 0] = %last\n"
           "}\n";
}

// Attention shape with a parameterized trip count.
inline std::string attention_n_src(int64_t r, int64_t trip) {
    std::ostringstream os;
    os << "kernel attn" << trip << "(q: buf<" << r << "x" << r << " int>, kt: buf<" << r << "x"
       << r * trip << " int>, v: buf<" << r * trip << "x" << r << " int>, o: buf<" << r << "x"
       << r << " int>) {\n";
    os << "  %zs = const zeros : " << r << "x" << r << " int\n";
    os << "  %zacc = const zeros : " << r << "x" << r << " int\n";
    os << "  %k0 = const 0\n";
    os << "  loop %k in 0.." << trip << " iter (%acc = %zacc, %ok = %k0) {\n";
    os << "    %tq = tma_load q[0, 0] : " << r << "x" << r << " int\n";
    os << "    %tk = tma_load kt[0, %ok] : " << r << "x" << r << " int\n";
    os << "    %tv = tma_load v[%ok, 0] : " << r << "x" << r << " int\n";
    os << "    %s = dot %tq, %tk.T, acc=%zs\n";
    os << "    %m = reduce max %s axis=1\n";
    os << "    %sub = ew sub %s, %m\n";
    os << "    %acc1 = dot %sub, %tv, acc=%acc\n";
    os << "    %ok1 = add %ok, " << r << "\n";
    os << "    yield %acc1, %ok1\n";
    os << "  }\n";
    os << "  store o[0, 0] = %acc\n";
    os << "}\n";
    return os.str();
}

// GEMM plus an in-loop activation, parameterized trip count.
inline std::string gemm_act_n_src(int64_t m, int64_t kk, int64_t trip) {
    std::ostringstream os;
    os << "kernel gemm_act" << trip << "(a: buf<" << m << "x" << kk * trip << " int>, b: buf<"
       << m << "x" << kk * trip << " int>, c: buf<" << m << "x" << m << " int>) {\n";
    os << "  %z = const zeros : " << m << "x" << m << " int\n";
    os << "  %k0 = const 0\n";
    os << "  loop %k in 0.." << trip << " iter (%acc = %z, %last = %z, %ok = %k0) {\n";
    os << "    %ta = tma_load a[0, %ok] : " << m << "x" << kk << " int\n";
    os << "    %tb = tma_load b[0, %ok] : " << m << "x" << kk << " int\n";
    os << "    %acc1 = dot %ta, %tb.T, acc=%acc\n";
    os << "    %rl = ew relu %acc1\n";
    os << "    %ok1 = add %ok, " << kk << "\n";
    os << "    yield %acc1, %rl, %ok1\n";
    os << "  }\n";
    os << "  store c[0, 0] = %last\n";
    os << "}\n";
    return os.str();
}

// Grid-addressed GEMM: pid selects one output tile on a tiles_m x tiles_n
// grid; c = a . b^T overall.
inline std::string gemm_tiled_src(int64_t tiles_m, int64_t tiles_n, int64_t tr, int64_t tc,
                                  int64_t kk, int64_t trip) {
    std::ostringstream os;
    int64_t rows_a = tiles_m * tr, rows_b = tiles_n * tc, depth = kk * trip;
    os << "kernel gemm_tiled(a: buf<" << rows_a << "x" << depth << " int>, b: buf<" << rows_b
       << "x" << depth << " int>, c: buf<" << rows_a << "x" << rows_b << " int>) {\n";
    os << "  %p = pid\n";
    os << "  %pm = mod %p, " << tiles_m << "\n";
    os << "  %pn = div %p, " << tiles_m << "\n";
    os << "  %r = mul %pm, " << tr << "\n";
    os << "  %cn = mul %pn, " << tc << "\n";
    os << "  %z = const zeros : " << tr << "x" << tc << " int\n";
    os << "  %k0 = const 0\n";
    os << "  loop %k in 0.." << trip << " iter (%acc = %z, %ok = %k0) {\n";
    os << "    %ta = tma_load a[%r, %ok] : " << tr << "x" << kk << " int\n";
    os << "    %tb = tma_load b[%cn, %ok] : " << tc << "x" << kk << " int\n";
    os << "    %acc1 = dot %ta, %tb.T, acc=%acc\n";
    os << "    %ok1 = add %ok, " << kk << "\n";
    os << "    yield %acc1, %ok1\n";
    os << "  }\n";
    os << "  store c[%r, %cn] = %acc\n";
    os << "}\n";
    return os.str();
}

// Tile-by-tile sequential oracle over a work queue of pids.
inline warpspec::Buffers interpret_tiles(const warpspec::KernelGraph& g,
                                         const warpspec::Buffers& inputs, int64_t tiles) {
    warpspec::Buffers bufs = warpspec::prepare_buffers(g.params, inputs);
    for (int64_t t = 0; t < tiles; ++t) {
        warpspec::ExecContext ctx;
        ctx.pid = t;
        bufs = warpspec::interpret_sequential(g, bufs, ctx);
    }
    return bufs;
}

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Small integer inputs, stable across platforms and reruns.
inline warpspec::Buffers deterministic_inputs(const warpspec::KernelGraph& g, uint64_t seed) {
    warpspec::Buffers bufs;
    for (const auto& p : g.params) {
        warpspec::Tile t(p.type);
        std::mt19937_64 rng(seed ^ fnv1a(p.name));
        for (auto& v : t.iv) v = static_cast<int64_t>(rng() % 19) - 9;
        for (auto& v : t.rv) v = (static_cast<double>(rng() % 33) - 16.0) / 4.0;
        bufs.emplace(p.name, std::move(t));
    }
    return bufs;
}

}  // namespace testing
