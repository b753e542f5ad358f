#pragma once

#include <cstdint>
#include <vector>

namespace warpspec {

// One step of the coarse-grained three-stage schedule. Get/Consumed steps are
// wrappers: emitted only when the stage reads a cross-warp-group channel.
enum class StepKind { Get, Issue, Wait, Consumed, Compute };

struct CoarseStep {
    StepKind kind{};
    char stage = 'T';  // 'T', 'C', or 'U'
    int64_t index = 0; // concrete instance, or offset from j inside the steady body
};

inline std::vector<CoarseStep> coarse_prologue_steps(bool literal_prologue) {
    std::vector<CoarseStep> v;
    v.push_back({StepKind::Get, 'T', 0});
    v.push_back({StepKind::Issue, 'T', 0});
    if (literal_prologue) {
        v.push_back({StepKind::Wait, 'T', 0});
        v.push_back({StepKind::Consumed, 'T', 0});
        v.push_back({StepKind::Compute, 'C', 0});
    }
    return v;
}

// Offsets are subtracted from the steady induction j: 0 means stage[j],
// 1 means stage[j-1].
inline std::vector<CoarseStep> coarse_steady_steps(bool use_u) {
    std::vector<CoarseStep> v;
    v.push_back({StepKind::Get, 'T', 0});
    v.push_back({StepKind::Issue, 'T', 0});
    if (use_u) {
        v.push_back({StepKind::Get, 'U', 1});
        v.push_back({StepKind::Issue, 'U', 1});
    }
    v.push_back({StepKind::Wait, 'T', 1});
    v.push_back({StepKind::Consumed, 'T', 1});
    v.push_back({StepKind::Compute, 'C', 1});
    if (use_u) {
        v.push_back({StepKind::Wait, 'U', 1});
        v.push_back({StepKind::Consumed, 'U', 1});
    }
    return v;
}

inline std::vector<CoarseStep> coarse_epilogue_steps(bool use_u, int64_t n) {
    std::vector<CoarseStep> v;
    v.push_back({StepKind::Wait, 'T', n - 1});
    v.push_back({StepKind::Consumed, 'T', n - 1});
    v.push_back({StepKind::Compute, 'C', n - 1});
    if (use_u) {
        v.push_back({StepKind::Get, 'U', n - 1});
        v.push_back({StepKind::Issue, 'U', n - 1});
        v.push_back({StepKind::Wait, 'U', n - 1});
        v.push_back({StepKind::Consumed, 'U', n - 1});
    }
    return v;
}

// Fully unrolled instance sequence for analysis and lowering.
inline std::vector<CoarseStep> coarse_all_steps(bool use_u, bool literal_prologue, int64_t n) {
    std::vector<CoarseStep> v = coarse_prologue_steps(literal_prologue);
    for (int64_t j = 1; j < n; ++j)
        for (CoarseStep s : coarse_steady_steps(use_u)) {
            s.index = j - s.index;
            v.push_back(s);
        }
    for (const CoarseStep& s : coarse_epilogue_steps(use_u, n)) v.push_back(s);
    return v;
}

}  // namespace warpspec
