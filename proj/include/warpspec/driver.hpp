#pragma once

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "warpspec/grid.hpp"
#include "warpspec/lower.hpp"
#include "warpspec/machine.hpp"
#include "warpspec/partition.hpp"
#include "warpspec/pipeline.hpp"
#include "warpspec/print.hpp"
#include "warpspec/sim.hpp"
#include "warpspec/trace.hpp"
#include "warpspec/validate.hpp"

namespace warpspec {

enum class PipelineMode { Auto, Fine, Coarse, None };

inline const char* pipeline_mode_name(PipelineMode m) {
    switch (m) {
        case PipelineMode::Auto: return "auto";
        case PipelineMode::Fine: return "fine";
        case PipelineMode::Coarse: return "coarse";
        case PipelineMode::None: return "none";
    }
    return "?";
}

inline PipelineMode parse_pipeline_mode(const std::string& s) {
    if (s == "auto") return PipelineMode::Auto;
    if (s == "fine") return PipelineMode::Fine;
    if (s == "coarse") return PipelineMode::Coarse;
    if (s == "none") return PipelineMode::None;
    fail(ErrorCode::Parse, "unknown pipeline mode '" + s + "'");
}

struct RunSpec {
    std::string kernel_path;
    std::string machine_path;
    int d = 2;
    int p = 1;
    PipelineMode mode = PipelineMode::Auto;
    int coop_wgs = 1;
    bool persistent = false;
    int64_t tiles = 1;
    std::string trace_out;
    std::string listing_out;
    bool want_gantt = false;
    bool literal_prologue = false;
    bool test_drop_consumed = false;  // test hook: delete releases before lowering
    uint64_t seed = 2026;
};

inline uint64_t env_seed() {
    if (const char* s = std::getenv("WARPSPEC_SEED")) {
        try {
            return std::stoull(s);
        } catch (...) {
        }
    }
    return 2026;
}

// Deterministic small-integer inputs derived from the seed and buffer name.
inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline Buffers generate_inputs(const std::vector<Param>& params, uint64_t seed) {
    Buffers bufs;
    for (const auto& p : params) {
        Tile t(p.type);
        std::mt19937_64 rng(seed ^ fnv1a64(p.name));
        for (auto& v : t.iv) v = static_cast<int64_t>(rng() % 19) - 9;
        for (auto& v : t.rv) v = (static_cast<double>(rng() % 33) - 16.0) / 4.0;
        bufs.emplace(p.name, std::move(t));
    }
    return bufs;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot write '" + path + "'");
    f << content;
}

// ---------------------------------------------------------------------------
// The pass pipeline: parse -> partition -> pipeline -> lower -> grid opts.
// ---------------------------------------------------------------------------

struct CompileOutput {
    KernelGraph graph;
    WarpSpecProgram program;
    LoweredModule module;
    std::string mode_applied;  // none | ws | fine | coarse
};

inline CompileOutput compile_kernel(const KernelGraph& g, const MachineConfig& mc,
                                    const RunSpec& spec) {
    if (spec.d < 1) fail(ErrorCode::PipelineInfeasible, "D must be >= 1");
    if (spec.p < 1) fail(ErrorCode::PipelineInfeasible, "P must be >= 1");
    CompileOutput out;
    out.graph = g;

    if (spec.mode == PipelineMode::None) {
        out.program = sequentialize(g);
        out.mode_applied = "none";
    } else {
        WarpSpecProgram ws = partition_kernel(g, spec.d);
        StagePlan plan = identify_stages(g);
        bool auto_mode = spec.mode == PipelineMode::Auto;
        PipelineMode mode = spec.mode;
        if (auto_mode) {
            if (plan.has_t && plan.has_c && g.loop.trip >= 1)
                mode = PipelineMode::Coarse;
            else if (plan.has_t && g.loop.trip >= 1)
                mode = PipelineMode::Fine;
        }
        out.mode_applied = "ws";  // plain warp specialization unless a pass applies
        if (mode == PipelineMode::Coarse) {
            CoarseOptions opts;
            opts.literal_prologue = spec.literal_prologue;
            if (auto_mode) {
                // a staged schedule that does not fit (e.g. D=1) degrades to
                // the unpipelined warp-specialized program
                try {
                    out.program = apply_coarse_grained(ws, plan, g, opts);
                    out.mode_applied = "coarse";
                } catch (const CompileError& e) {
                    if (e.code() != ErrorCode::PipelineInfeasible) throw;
                    out.program = std::move(ws);
                }
            } else {
                out.program = apply_coarse_grained(ws, plan, g, opts);
                out.mode_applied = "coarse";
            }
        } else if (mode == PipelineMode::Fine) {
            // an explicit P past the feasibility region is rejected, never
            // silently weakened
            MmaPipelineConfig cfg;
            cfg.p = spec.p;
            out.program = apply_fine_grained(ws, cfg);
            out.mode_applied = "fine";
        } else {
            out.program = std::move(ws);
        }
    }

    if (spec.test_drop_consumed)
        for (auto& region : out.program.regions) {
            auto strip = [](std::vector<Op>& ops) {
                std::vector<Op> kept;
                for (auto& op : ops)
                    if (op.kind != OpKind::Consumed) kept.push_back(std::move(op));
                ops = std::move(kept);
            };
            strip(region.loop.body);
            strip(region.prologue);
            strip(region.epilogue);
        }

    out.module = lower(out.program, LowerOptions{spec.p});
    if (spec.coop_wgs > 1) {
        CooperativeConfig cc;
        cc.num_consumer_wgs = spec.coop_wgs;
        out.module = apply_cooperative(out.module, cc);
    }
    if (spec.persistent) out.module = apply_persistent(out.module, spec.tiles);
    check_register_budget(out.module, mc);
    return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct RunOutput {
    std::string verdict;  // completed | deadlock | race-detected | mismatch
    std::string mode_applied;
    int64_t cycles = 0;
    int64_t launch_cycles = 0;
    std::map<std::string, double> util;
    bool oracle_checked = false;
    bool oracle_match = false;
    std::string detail;
    SimTrace trace;
    Buffers outputs;
};

inline CompileOutput cmd_compile(const RunSpec& spec, const MachineConfig& mc) {
    KernelGraph g = parse_kernel(read_file(spec.kernel_path));
    CompileOutput out = compile_kernel(g, mc, spec);
    if (!spec.listing_out.empty()) write_file(spec.listing_out, print_lowered(out.module));
    return out;
}

inline RunOutput run_compiled(const CompileOutput& co, const MachineConfig& mc,
                              const RunSpec& spec) {
    Buffers inputs = generate_inputs(co.graph.params, spec.seed);
    RunOutput out;
    out.mode_applied = co.mode_applied;

    Verdict verdict;
    if (spec.tiles == 1 && !spec.persistent) {
        SimResult r = simulate(co.module, mc, inputs, SimOptions{});
        verdict = r.verdict;
        out.cycles = r.cycles;
        out.launch_cycles = 0;
        out.trace = std::move(r.trace);
        out.outputs = std::move(r.outputs);
        out.detail = r.detail;
    } else {
        GridResult r = run_grid(co.module, mc, inputs, spec.tiles);
        verdict = r.verdict;
        out.cycles = r.cycles;
        out.launch_cycles = r.launch_cycles;
        out.trace = std::move(r.trace);
        out.outputs = std::move(r.outputs);
        out.detail = r.detail;
    }
    out.util = utilization(out.trace, out.cycles);
    out.verdict = verdict_name(verdict);

    if (verdict == Verdict::Completed) {
        out.oracle_checked = true;
        Buffers want = prepare_buffers(co.graph.params, inputs);
        for (int64_t t = 0; t < spec.tiles; ++t) {
            ExecContext ctx;
            ctx.pid = t;
            want = interpret_sequential(co.graph, want, ctx);
        }
        out.oracle_match = want == out.outputs;
        if (!out.oracle_match) {
            out.verdict = "mismatch";
            for (const auto& [name, tile] : want) {
                const Tile& got = out.outputs.at(name);
                for (int64_t r = 0; r < tile.type.rows && out.detail.empty(); ++r)
                    for (int64_t c = 0; c < tile.type.cols && out.detail.empty(); ++c) {
                        bool diff = tile.type.elem == Elem::Int
                                        ? got.at_i(r, c) != tile.at_i(r, c)
                                        : got.at_r(r, c) != tile.at_r(r, c);
                        if (diff)
                            out.detail = "first mismatch at " + name + "[" + std::to_string(r) +
                                         ", " + std::to_string(c) + "]";
                    }
            }
        }
    }
    return out;
}

inline RunOutput cmd_run(const RunSpec& spec, const MachineConfig& mc) {
    CompileOutput co = cmd_compile(spec, mc);
    RunOutput out = run_compiled(co, mc, spec);
    if (!spec.trace_out.empty()) {
        RunSummary s;
        s.cycles = out.cycles;
        s.verdict = out.verdict;
        s.util = out.util;
        s.launch_cycles = out.launch_cycles;
        s.oracle_checked = out.oracle_checked;
        s.oracle_match = out.oracle_match;
        s.detail = out.detail;
        write_file(spec.trace_out, trace_json(out.trace, s).dump(2) + "\n");
    }
    return out;
}

inline std::string format_summary(const RunOutput& out) {
    std::ostringstream os;
    os << "mode: " << out.mode_applied << "\n";
    os << "verdict: " << out.verdict << "\n";
    os << "cycles: " << out.cycles << "\n";
    os << "launch_cycles: " << out.launch_cycles << "\n";
    if (out.oracle_checked) os << "oracle_match: " << (out.oracle_match ? "true" : "false") << "\n";
    char buf[64];
    for (const auto& [unit, frac] : out.util) {
        std::snprintf(buf, sizeof(buf), "%.6f", frac);
        os << "util " << unit << ": " << buf << "\n";
    }
    if (!out.detail.empty()) os << "detail: " << out.detail << "\n";
    return os.str();
}

// One row per (D, P, persistent); infeasible cells are marked, not fatal.
inline std::string cmd_sweep(const RunSpec& base, const MachineConfig& mc, int d_lo, int d_hi,
                             int p_lo, int p_hi) {
    std::ostringstream os;
    os << "D,P,persistent,mode,status,cycles\n";
    for (int d = d_lo; d <= d_hi; ++d)
        for (int p = p_lo; p <= p_hi; ++p)
            for (int pers = 0; pers <= 1; ++pers) {
                RunSpec spec = base;
                spec.d = d;
                spec.p = p;
                spec.persistent = pers == 1;
                spec.trace_out.clear();
                spec.listing_out.clear();
                os << d << "," << p << "," << pers << ",";
                try {
                    CompileOutput co = cmd_compile(spec, mc);
                    RunOutput r = run_compiled(co, mc, spec);
                    os << r.mode_applied << "," << r.verdict << "," << r.cycles << "\n";
                } catch (const CompileError& e) {
                    os << pipeline_mode_name(spec.mode) << ",infeasible:"
                       << error_code_name(e.code()) << ",\n";
                }
            }
    return os.str();
}

// The optimization ladder: baseline, +warp specialization, +cooperative WGs
// (optionally with a larger tile), +persistent kernel, +best aref size.
struct AblateOptions {
    std::string large_kernel_path;  // larger-tile variant of the same kernel
    int64_t large_tiles = 0;        // its tile count (0: same as base)
};

inline std::string cmd_ablate(const RunSpec& base, const MachineConfig& mc,
                              const AblateOptions& opts = {}) {
    std::ostringstream os;
    os << "rung,label,kernel,mode,D,P,coop_wgs,persistent,tiles,cycles,verdict\n";
    int rung = 0;
    auto row = [&](const std::string& label, const RunSpec& spec) -> int64_t {
        CompileOutput co = cmd_compile(spec, mc);
        RunOutput r = run_compiled(co, mc, spec);
        os << rung++ << "," << label << "," << spec.kernel_path << "," << r.mode_applied << ","
           << spec.d << "," << spec.p << "," << spec.coop_wgs << ","
           << (spec.persistent ? 1 : 0) << "," << spec.tiles << "," << r.cycles << ","
           << r.verdict << "\n";
        return r.cycles;
    };

    RunSpec s = base;
    s.trace_out.clear();
    s.listing_out.clear();

    RunSpec r1 = s;
    r1.mode = PipelineMode::None;
    r1.coop_wgs = 1;
    r1.persistent = false;
    row("baseline", r1);

    RunSpec r2 = s;
    r2.mode = PipelineMode::Auto;
    r2.d = 2;
    r2.p = 1;
    r2.coop_wgs = 1;
    r2.persistent = false;
    row("+auto-ws", r2);

    RunSpec r3 = r2;
    r3.coop_wgs = 2;
    bool large = !opts.large_kernel_path.empty();
    if (large) {
        r3.kernel_path = opts.large_kernel_path;
        if (opts.large_tiles > 0) r3.tiles = opts.large_tiles;
    }
    row(large ? "+coop-wgs+large-tile" : "+coop-wgs", r3);

    RunSpec r4 = r3;
    r4.persistent = true;
    row("+persistent", r4);

    // best aref size from a mini-sweep over D
    RunSpec best = r4;
    int64_t best_cycles = -1;
    for (int d = 1; d <= 4; ++d) {
        RunSpec cand = r4;
        cand.d = d;
        try {
            CompileOutput co = cmd_compile(cand, mc);
            RunOutput r = run_compiled(co, mc, cand);
            if (r.verdict == "completed" && (best_cycles < 0 || r.cycles < best_cycles)) {
                best_cycles = r.cycles;
                best = cand;
            }
        } catch (const CompileError&) {
            continue;
        }
    }
    row("+best-aref-size", best);
    return os.str();
}

}  // namespace warpspec
