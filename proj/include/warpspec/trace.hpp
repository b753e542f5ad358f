#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "warpspec/sim.hpp"

namespace warpspec {

// Busy fraction per unit instance over the run's makespan.
inline std::map<std::string, double> utilization(const SimTrace& trace, int64_t cycles) {
    std::map<std::string, double> out;
    std::map<std::string, int64_t> busy;
    for (const auto& iv : trace.intervals) busy[iv.unit] += iv.end - iv.start;
    for (const auto& [unit, b] : busy)
        out[unit] = cycles > 0 ? static_cast<double>(b) / static_cast<double>(cycles) : 0.0;
    return out;
}

// Fixed-width text timeline, one row per unit instance.
inline std::string gantt(const SimTrace& trace, int64_t cycles, int width = 80) {
    std::map<std::string, std::vector<std::pair<int64_t, int64_t>>> rows;
    for (const auto& iv : trace.intervals) rows[iv.unit].emplace_back(iv.start, iv.end);
    std::string out;
    out += "cycles: " + std::to_string(cycles) + ", one column = " +
           std::to_string(cycles > 0 ? std::max<int64_t>(1, (cycles + width - 1) / width) : 1) +
           " cycle(s)\n";
    if (rows.empty()) return out;
    size_t name_w = 0;
    for (const auto& [unit, _] : rows) name_w = std::max(name_w, unit.size());
    int64_t bucket = cycles > 0 ? std::max<int64_t>(1, (cycles + width - 1) / width) : 1;
    for (const auto& [unit, ivs] : rows) {
        std::string line(static_cast<size_t>(width), '.');
        for (const auto& [s, e] : ivs) {
            int64_t b0 = s / bucket;
            int64_t b1 = (e - 1) / bucket;
            for (int64_t b = b0; b <= b1 && b < width; ++b)
                line[static_cast<size_t>(b)] = '#';
        }
        out += unit + std::string(name_w - unit.size(), ' ') + " |" + line + "|\n";
    }
    return out;
}

struct RunSummary {
    int64_t cycles = 0;
    std::string verdict;
    std::map<std::string, double> util;
    int64_t launch_cycles = 0;
    bool oracle_checked = false;
    bool oracle_match = false;
    std::string detail;
};

inline nlohmann::ordered_json trace_json(const SimTrace& trace, const RunSummary& summary) {
    nlohmann::ordered_json j;
    j["intervals"] = nlohmann::ordered_json::array();
    for (const auto& iv : trace.intervals)
        j["intervals"].push_back({{"unit", iv.unit},
                                  {"wg", iv.wg},
                                  {"start", iv.start},
                                  {"end", iv.end},
                                  {"label", iv.label}});
    j["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : trace.blocks)
        j["blocks"].push_back(
            {{"wg", b.wg}, {"start", b.start}, {"end", b.end}, {"reason", b.reason}});
    nlohmann::ordered_json s;
    s["cycles"] = summary.cycles;
    s["verdict"] = summary.verdict;
    nlohmann::ordered_json u;
    for (const auto& [unit, frac] : summary.util) u[unit] = frac;
    s["utilization"] = u;
    s["launch_cycles"] = summary.launch_cycles;
    if (summary.oracle_checked) s["oracle_match"] = summary.oracle_match;
    if (!summary.detail.empty()) s["detail"] = summary.detail;
    j["summary"] = s;
    return j;
}

}  // namespace warpspec
