#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "warpspec/errors.hpp"

namespace warpspec {

// Cost-model knobs for the simulated SM. Latencies are per reference tile
// and scale linearly with element count; none of the acceptance checks
// depend on the absolute numbers, only on orderings.
struct MachineConfig {
    int64_t tma_latency_per_tile = 400;
    int64_t tma_engine_count = 2;
    int64_t mma_latency_per_tile = 128;
    int64_t cuda_op_latency = 32;
    int64_t smem_bytes = 228 * 1024;
    int64_t regs_per_wg = 768;
    int64_t num_sms = 4;
    int64_t cta_launch_overhead = 1000;
    int64_t warp_group_size = 4;
    int64_t ref_tile_rows = 64;
    int64_t ref_tile_cols = 64;

    int64_t ref_elems() const { return ref_tile_rows * ref_tile_cols; }

    int64_t scaled(int64_t base_latency, int64_t elems) const {
        int64_t ref = ref_elems();
        return std::max<int64_t>(1, (base_latency * elems + ref - 1) / ref);
    }

    int64_t tma_cost(int64_t elems) const { return scaled(tma_latency_per_tile, elems); }
    int64_t mma_cost(int64_t elems) const { return scaled(mma_latency_per_tile, elems); }
    int64_t cuda_cost(int64_t elems) const { return scaled(cuda_op_latency, elems); }
};

inline MachineConfig parse_machine_config(const std::string& text) {
    MachineConfig mc;
    std::map<std::string, int64_t*> fields{
        {"tma_latency_per_tile", &mc.tma_latency_per_tile},
        {"tma_engine_count", &mc.tma_engine_count},
        {"mma_latency_per_tile", &mc.mma_latency_per_tile},
        {"cuda_op_latency", &mc.cuda_op_latency},
        {"smem_bytes", &mc.smem_bytes},
        {"regs_per_wg", &mc.regs_per_wg},
        {"num_sms", &mc.num_sms},
        {"cta_launch_overhead", &mc.cta_launch_overhead},
        {"warp_group_size", &mc.warp_group_size},
        {"ref_tile_rows", &mc.ref_tile_rows},
        {"ref_tile_cols", &mc.ref_tile_cols},
    };
    std::istringstream is(text);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
            if (!blank)
                fail(ErrorCode::Parse, "machine config line " + std::to_string(n) +
                                           ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto it = fields.find(key);
        if (it == fields.end())
            fail(ErrorCode::Parse, "machine config: unknown key '" + key + "'");
        try {
            *it->second = std::stoll(val);
        } catch (...) {
            fail(ErrorCode::Parse, "machine config: bad value for '" + key + "'");
        }
    }
    if (mc.tma_latency_per_tile < 1 || mc.mma_latency_per_tile < 1 || mc.cuda_op_latency < 1)
        fail(ErrorCode::Parse, "machine config: latencies must be >= 1");
    if (mc.smem_bytes <= 0) fail(ErrorCode::Parse, "machine config: smem_bytes must be positive");
    if (mc.tma_engine_count < 1 || mc.num_sms < 1)
        fail(ErrorCode::Parse, "machine config: counts must be >= 1");
    return mc;
}

inline MachineConfig load_machine_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::Io, "cannot open machine config '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return parse_machine_config(os.str());
}

}  // namespace warpspec
