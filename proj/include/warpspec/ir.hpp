#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warpspec/tile.hpp"

namespace warpspec {

enum class OpKind {
    Constant,
    IndexArith,
    TmaLoad,
    Dot,
    Elementwise,
    Reduce,
    Store,
    Yield,
    // warp-specialized extensions
    Put,
    Get,
    Consumed,
    MmaIssue,  // a Dot issued asynchronously
    MmaWait,
};

enum class ScalarFn { Add, Sub, Mul, Div, Mod, Pid };

inline const char* scalar_fn_name(ScalarFn f) {
    switch (f) {
        case ScalarFn::Add: return "add";
        case ScalarFn::Sub: return "sub";
        case ScalarFn::Mul: return "mul";
        case ScalarFn::Div: return "div";
        case ScalarFn::Mod: return "mod";
        case ScalarFn::Pid: return "pid";
    }
    return "?";
}

// Channel slot selector: either (k - lag) mod D over the loop induction
// variable, or a concrete iteration index for straight-line contexts.
struct SlotExpr {
    bool by_induction = true;
    int64_t lag = 0;
    int64_t at = 0;
};

struct Op {
    OpKind kind{};
    std::vector<std::string> operands;
    std::vector<std::string> results;

    // Constant
    std::optional<int64_t> int_literal;
    bool zeros = false;
    bool has_tile = false;
    TileType tile{};  // Constant tile / TmaLoad result type
    std::vector<int64_t> int_data;
    std::vector<double> real_data;

    ScalarFn sfn{};
    EwFn efn{};
    ReduceFn rfn{};
    int axis = 0;
    bool trans_b = false;
    std::string buffer;  // TmaLoad / Store

    int channel = -1;
    SlotExpr slot{};
    int pendings = -1;                     // MmaWait
    std::optional<int64_t> guard_min_k;    // op materializes only when k >= guard

    int line = 0;
};

struct IterArg {
    std::string name;
    std::string init;  // value id defined before the loop
};

struct LoopRegion {
    std::string induction;
    int64_t trip = 0;
    std::vector<IterArg> iter_args;
    std::vector<Op> body;  // a trailing Yield op when iter_args is non-empty
};

struct Param {
    std::string name;
    TileType type;
};

struct KernelGraph {
    std::string name;
    std::vector<Param> params;
    std::vector<Op> prologue;
    LoopRegion loop;
    std::vector<Op> epilogue;

    const Param* find_param(const std::string& n) const {
        for (const auto& p : params)
            if (p.name == n) return &p;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Warp-specialized program
// ---------------------------------------------------------------------------

struct Channel {
    int id = 0;
    int depth = 1;
    std::vector<TileType> members;

    int64_t slot_bytes() const {
        int64_t b = 0;
        for (const auto& m : members) b += m.bytes();
        return b;
    }
};

// One stage of the coarse-grained schedule. `reads` lists channels whose
// payloads the stage consumes; get/consumed wrappers are emitted only for
// those.
struct CoarseStage {
    std::string name;
    std::vector<Op> ops;
    std::vector<int> reads;
    bool empty() const { return ops.empty(); }
};

struct CoarseSchedule {
    int64_t trips = 0;
    bool use_u = false;
    bool literal_prologue = false;
    CoarseStage t, c, u;
    // Loop-carried values: iter args come from the region loop header;
    // carry_next[i] names the value that feeds iter arg i on the next trip.
    std::vector<std::string> carry_next;
};

struct Region {
    int partition = 0;
    std::vector<Op> prologue;
    LoopRegion loop;
    std::vector<Op> epilogue;  // fine-grained drain ops land at the front
    std::optional<CoarseSchedule> coarse;
};

struct WarpSpecProgram {
    std::string name;
    std::vector<Param> params;
    std::vector<Channel> channels;
    std::vector<Region> regions;

    const Param* find_param(const std::string& n) const {
        for (const auto& p : params)
            if (p.name == n) return &p;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Value types for checking
// ---------------------------------------------------------------------------

struct VType {
    bool is_tile = false;
    TileType tile{};

    static VType scalar() { return VType{}; }
    static VType of_tile(TileType t) { return VType{true, t}; }

    bool operator==(const VType& o) const {
        if (is_tile != o.is_tile) return false;
        return !is_tile || tile == o.tile;
    }

    std::string str() const { return is_tile ? "tile<" + tile.str() + ">" : "scalar"; }
};

using TypeMap = std::map<std::string, VType>;

}  // namespace warpspec
