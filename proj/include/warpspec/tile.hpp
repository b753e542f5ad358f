#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "warpspec/errors.hpp"

namespace warpspec {

enum class Elem { Int, Real };

inline const char* elem_name(Elem e) { return e == Elem::Int ? "int" : "real"; }

// Byte widths are a cost-model convention used for shared-memory planning and
// transaction counts, not value semantics.
inline int64_t elem_bytes(Elem e) { return e == Elem::Int ? 4 : 8; }

struct TileType {
    int64_t rows = 0;
    int64_t cols = 0;
    Elem elem = Elem::Int;

    int64_t elems() const { return rows * cols; }
    int64_t bytes() const { return elems() * elem_bytes(elem); }

    bool operator==(const TileType& o) const {
        return rows == o.rows && cols == o.cols && elem == o.elem;
    }
    bool operator!=(const TileType& o) const { return !(*this == o); }

    std::string str() const {
        return std::to_string(rows) + "x" + std::to_string(cols) + " " + elem_name(elem);
    }
};

// Dense row-major tile. Integer payloads use 64-bit wrapping arithmetic so
// results are exact and platform-independent; real payloads use double.
struct Tile {
    TileType type;
    std::vector<int64_t> iv;
    std::vector<double> rv;

    Tile() = default;
    explicit Tile(TileType t) : type(t) {
        if (t.elem == Elem::Int)
            iv.assign(static_cast<size_t>(t.elems()), 0);
        else
            rv.assign(static_cast<size_t>(t.elems()), 0.0);
    }

    int64_t& at_i(int64_t r, int64_t c) { return iv[static_cast<size_t>(r * type.cols + c)]; }
    int64_t at_i(int64_t r, int64_t c) const { return iv[static_cast<size_t>(r * type.cols + c)]; }
    double& at_r(int64_t r, int64_t c) { return rv[static_cast<size_t>(r * type.cols + c)]; }
    double at_r(int64_t r, int64_t c) const { return rv[static_cast<size_t>(r * type.cols + c)]; }

    bool operator==(const Tile& o) const {
        return type == o.type && iv == o.iv && rv == o.rv;
    }
};

inline int64_t wrap_add(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
inline int64_t wrap_sub(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
inline int64_t wrap_mul(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

enum class EwFn { Add, Sub, Mul, Max, Min, Relu, Exp };

inline const char* ew_fn_name(EwFn f) {
    switch (f) {
        case EwFn::Add: return "add";
        case EwFn::Sub: return "sub";
        case EwFn::Mul: return "mul";
        case EwFn::Max: return "max";
        case EwFn::Min: return "min";
        case EwFn::Relu: return "relu";
        case EwFn::Exp: return "exp";
    }
    return "?";
}

inline bool ew_fn_unary(EwFn f) { return f == EwFn::Relu || f == EwFn::Exp; }

enum class ReduceFn { Add, Max, Min };

inline const char* reduce_fn_name(ReduceFn f) {
    switch (f) {
        case ReduceFn::Add: return "add";
        case ReduceFn::Max: return "max";
        case ReduceFn::Min: return "min";
    }
    return "?";
}

// Shapes combine NumPy-style along each axis: equal, or one side is 1.
inline bool broadcast_compatible(const TileType& a, const TileType& b) {
    bool r = a.rows == b.rows || a.rows == 1 || b.rows == 1;
    bool c = a.cols == b.cols || a.cols == 1 || b.cols == 1;
    return r && c && a.elem == b.elem;
}

inline TileType broadcast_shape(const TileType& a, const TileType& b) {
    TileType t;
    t.rows = a.rows > b.rows ? a.rows : b.rows;
    t.cols = a.cols > b.cols ? a.cols : b.cols;
    t.elem = a.elem;
    return t;
}

namespace detail {
template <class T>
T ew_apply(EwFn f, T a, T b) {
    switch (f) {
        case EwFn::Add:
            if constexpr (std::is_same_v<T, int64_t>) return wrap_add(a, b);
            else return a + b;
        case EwFn::Sub:
            if constexpr (std::is_same_v<T, int64_t>) return wrap_sub(a, b);
            else return a - b;
        case EwFn::Mul:
            if constexpr (std::is_same_v<T, int64_t>) return wrap_mul(a, b);
            else return a * b;
        case EwFn::Max: return a > b ? a : b;
        case EwFn::Min: return a < b ? a : b;
        default: break;
    }
    throw InternalError("ew_apply: not a binary fn");
}
}  // namespace detail

inline Tile eval_ew_unary(EwFn f, const Tile& a) {
    Tile out(a.type);
    for (int64_t r = 0; r < a.type.rows; ++r) {
        for (int64_t c = 0; c < a.type.cols; ++c) {
            if (a.type.elem == Elem::Int) {
                int64_t v = a.at_i(r, c);
                switch (f) {
                    case EwFn::Relu: out.at_i(r, c) = v > 0 ? v : 0; break;
                    default: fail(ErrorCode::Eval, "unary ew fn not defined on int tiles");
                }
            } else {
                double v = a.at_r(r, c);
                switch (f) {
                    case EwFn::Relu: out.at_r(r, c) = v > 0 ? v : 0; break;
                    case EwFn::Exp: out.at_r(r, c) = std::exp(v); break;
                    default: fail(ErrorCode::Eval, "bad unary ew fn");
                }
            }
        }
    }
    return out;
}

inline Tile eval_ew_binary(EwFn f, const Tile& a, const Tile& b) {
    if (!broadcast_compatible(a.type, b.type))
        fail(ErrorCode::Eval, "ew shapes incompatible: " + a.type.str() + " vs " + b.type.str());
    Tile out(broadcast_shape(a.type, b.type));
    for (int64_t r = 0; r < out.type.rows; ++r) {
        int64_t ar = a.type.rows == 1 ? 0 : r;
        int64_t br = b.type.rows == 1 ? 0 : r;
        for (int64_t c = 0; c < out.type.cols; ++c) {
            int64_t ac = a.type.cols == 1 ? 0 : c;
            int64_t bc = b.type.cols == 1 ? 0 : c;
            if (out.type.elem == Elem::Int)
                out.at_i(r, c) = detail::ew_apply<int64_t>(f, a.at_i(ar, ac), b.at_i(br, bc));
            else
                out.at_r(r, c) = detail::ew_apply<double>(f, a.at_r(ar, ac), b.at_r(br, bc));
        }
    }
    return out;
}

// axis=0 collapses rows (result 1xC), axis=1 collapses cols (result Rx1).
inline Tile eval_reduce(ReduceFn f, const Tile& a, int axis) {
    TileType rt = a.type;
    if (axis == 0)
        rt.rows = 1;
    else
        rt.cols = 1;
    Tile out(rt);
    for (int64_t r = 0; r < rt.rows; ++r) {
        for (int64_t c = 0; c < rt.cols; ++c) {
            int64_t extent = axis == 0 ? a.type.rows : a.type.cols;
            if (a.type.elem == Elem::Int) {
                int64_t acc = 0;
                for (int64_t i = 0; i < extent; ++i) {
                    int64_t v = axis == 0 ? a.at_i(i, c) : a.at_i(r, i);
                    if (i == 0 && f != ReduceFn::Add) acc = v;
                    else if (f == ReduceFn::Add) acc = wrap_add(acc, v);
                    else if (f == ReduceFn::Max) acc = v > acc ? v : acc;
                    else acc = v < acc ? v : acc;
                }
                out.at_i(r, c) = acc;
            } else {
                double acc = 0;
                for (int64_t i = 0; i < extent; ++i) {
                    double v = axis == 0 ? a.at_r(i, c) : a.at_r(r, i);
                    if (i == 0 && f != ReduceFn::Add) acc = v;
                    else if (f == ReduceFn::Add) acc = acc + v;
                    else if (f == ReduceFn::Max) acc = v > acc ? v : acc;
                    else acc = v < acc ? v : acc;
                }
                out.at_r(r, c) = acc;
            }
        }
    }
    return out;
}

// MxK times KxN (or NxK when trans_b) plus an MxN accumulator.
inline Tile eval_dot(const Tile& a, const Tile& b, const Tile& acc, bool trans_b) {
    int64_t m = a.type.rows, kk = a.type.cols;
    int64_t n = trans_b ? b.type.rows : b.type.cols;
    int64_t bk = trans_b ? b.type.cols : b.type.rows;
    if (kk != bk)
        fail(ErrorCode::Eval, "dot inner dimensions disagree");
    if (acc.type.rows != m || acc.type.cols != n)
        fail(ErrorCode::Eval, "dot accumulator shape mismatch");
    Tile out = acc;
    for (int64_t r = 0; r < m; ++r) {
        for (int64_t c = 0; c < n; ++c) {
            if (a.type.elem == Elem::Int) {
                int64_t s = out.at_i(r, c);
                for (int64_t i = 0; i < kk; ++i) {
                    int64_t bv = trans_b ? b.at_i(c, i) : b.at_i(i, c);
                    s = wrap_add(s, wrap_mul(a.at_i(r, i), bv));
                }
                out.at_i(r, c) = s;
            } else {
                double s = out.at_r(r, c);
                for (int64_t i = 0; i < kk; ++i) {
                    double bv = trans_b ? b.at_r(c, i) : b.at_r(i, c);
                    s += a.at_r(r, i) * bv;
                }
                out.at_r(r, c) = s;
            }
        }
    }
    return out;
}

inline Tile slice_tile(const Tile& buf, int64_t r0, int64_t c0, TileType shape) {
    if (shape.elem != buf.type.elem)
        fail(ErrorCode::Eval, "element kind mismatch on buffer access");
    if (r0 < 0 || c0 < 0 || r0 + shape.rows > buf.type.rows || c0 + shape.cols > buf.type.cols)
        fail(ErrorCode::Eval, "tile access out of bounds: [" + std::to_string(r0) + ", " +
                                  std::to_string(c0) + "] " + shape.str() + " in " + buf.type.str());
    Tile out(shape);
    for (int64_t r = 0; r < shape.rows; ++r)
        for (int64_t c = 0; c < shape.cols; ++c) {
            if (shape.elem == Elem::Int)
                out.at_i(r, c) = buf.at_i(r0 + r, c0 + c);
            else
                out.at_r(r, c) = buf.at_r(r0 + r, c0 + c);
        }
    return out;
}

inline void store_tile(Tile& buf, int64_t r0, int64_t c0, const Tile& v) {
    if (v.type.elem != buf.type.elem)
        fail(ErrorCode::Eval, "element kind mismatch on store");
    if (r0 < 0 || c0 < 0 || r0 + v.type.rows > buf.type.rows || c0 + v.type.cols > buf.type.cols)
        fail(ErrorCode::Eval, "store out of bounds");
    for (int64_t r = 0; r < v.type.rows; ++r)
        for (int64_t c = 0; c < v.type.cols; ++c) {
            if (v.type.elem == Elem::Int)
                buf.at_i(r0 + r, c0 + c) = v.at_i(r, c);
            else
                buf.at_r(r0 + r, c0 + c) = v.at_r(r, c);
        }
}

}  // namespace warpspec
