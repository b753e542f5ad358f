#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "warpspec/interp.hpp"
#include "warpspec/lower.hpp"
#include "warpspec/machine.hpp"

namespace warpspec {

struct TraceInterval {
    std::string unit;
    int wg = -1;
    int64_t start = 0;
    int64_t end = 0;
    std::string label;
};

struct BlockEvent {
    int wg = 0;
    int64_t start = 0;
    int64_t end = 0;
    std::string reason;
};

struct SimTrace {
    std::vector<TraceInterval> intervals;
    std::vector<BlockEvent> blocks;
    // (barrier id, completion time, completed count) in completion order
    std::vector<std::tuple<int, int64_t, int64_t>> barrier_log;
};

enum class Verdict { Completed, Deadlock, RaceDetected };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Completed: return "completed";
        case Verdict::Deadlock: return "deadlock";
        case Verdict::RaceDetected: return "race-detected";
    }
    return "?";
}

struct DeadlockEntry {
    int wg = 0;
    std::string waiting_on;
    int want_parity = -1;
    int64_t completed = -1;
};

struct SimResult {
    Verdict verdict = Verdict::Completed;
    int64_t cycles = 0;
    Buffers outputs;
    SimTrace trace;
    std::string detail;
    std::vector<DeadlockEntry> blocked;
};

struct SimOptions {
    int64_t pid = 0;
    std::vector<int64_t> tile_queue;  // persistent mode: tiles this CTA executes
};

// ---------------------------------------------------------------------------
// Deterministic cooperative simulator of one SM. Agents execute their
// instruction streams lowest-index-first; asynchronous work (TMA transfers,
// tensor-core groups) completes through a timestamped event queue.
// ---------------------------------------------------------------------------

class Simulator {
  public:
    Simulator(const LoweredModule& mod, const MachineConfig& mc, const Buffers& inputs,
              const SimOptions& opts)
        : mod_(mod), mc_(mc), opts_(opts) {
        if (mod.smem_total > mc.smem_bytes)
            fail(ErrorCode::SmemOverflow,
                 "shared-memory plan " + std::to_string(mod.smem_total) + " bytes exceeds " +
                     std::to_string(mc.smem_bytes));
        buffers_ = prepare_buffers(mod.params, inputs);
        barriers_.resize(mod.barriers.size());
        for (size_t i = 0; i < mod.barriers.size(); ++i) {
            // the initial empty credit is a phase completed before time zero
            barriers_[i].completed = mod.barriers[i].kind == BarrierKind::Empty ? 1 : 0;
            if (barriers_[i].completed)
                trace_.barrier_log.emplace_back(static_cast<int>(i), 0, 1);
        }
        agents_.resize(mod.streams.size());
        tma_free_.assign(static_cast<size_t>(mc.tma_engine_count), 0);
        if (mod.persistent && !opts_.tile_queue.empty())
            cur_pid_ = opts_.tile_queue[0];
        else
            cur_pid_ = opts_.pid;
    }

    SimResult run() {
        advance_agents();
        while (!events_.empty() && verdict_ == Verdict::Completed) {
            Event ev = events_.top();
            events_.pop();
            clock_ = ev.time;
            apply_event(ev);
            advance_agents();
        }
        SimResult res;
        res.verdict = verdict_;
        if (verdict_ == Verdict::Completed && !all_done()) {
            res.verdict = Verdict::Deadlock;
            collect_deadlock(res);
        }
        res.cycles = clock_;
        res.outputs = std::move(buffers_);
        res.trace = std::move(trace_);
        res.detail = detail_;
        return res;
    }

  private:
    struct BarState {
        int64_t completed = 0;
        int64_t arrivals = 0;
        int64_t tx_accum = 0;
        int64_t expected_tx = 0;
    };

    struct MmaGroup {
        int outstanding = 0;  // issues not yet completed by the tensor core
        bool issued = false;
    };

    enum class BlockKind { None, Barrier, MmaNamed, MmaPendings, SelfBusy, WorkLoop };

    struct Agent {
        size_t pc = 0;
        Env regs;
        BlockKind block = BlockKind::None;
        int block_barrier = -1;
        int block_parity = -1;
        int block_group = -1;
        int block_pendings = -1;
        int64_t block_start = 0;
        bool finished = false;
        std::vector<std::pair<int, const LInstr*>> pending_mma;
        std::map<int, MmaGroup> groups;  // issue-group state, stream-local ids
        std::set<int> live_groups;       // issued, not yet complete
    };

    struct Event {
        int64_t time = 0;
        int64_t seq = 0;
        enum class Kind { TmaComplete, MmaComplete, AgentWake } kind{};
        int agent = -1;
        int group = -1;
        int barrier = -1;
        int64_t tx_bytes = 0;
        SlotRef dst;
        Tile payload;

        bool operator>(const Event& o) const {
            return std::tie(time, seq) > std::tie(o.time, o.seq);
        }
    };

    // --- helpers -----------------------------------------------------------

    bool all_done() const {
        for (const auto& a : agents_)
            if (!a.finished) return false;
        return true;
    }

    const Stream& stream_of(size_t i) const { return mod_.streams[i]; }

    int64_t band_elems(const Stream& s, const TileType& t) const {
        return std::max<int64_t>(1, t.elems() / s.band_count);
    }

    void push_event(Event ev) {
        ev.seq = next_seq_++;
        events_.push(std::move(ev));
    }

    void busy(const std::string& unit, int wg, int64_t start, int64_t end,
              const std::string& label) {
        trace_.intervals.push_back({unit, wg, start, end, label});
    }

    // slot state from its two barriers; the empty side starts one phase ahead
    bool slot_writable(int channel, int slot) const {
        const Barrier* e = mod_.find_barrier(BarrierKind::Empty, channel, slot);
        const Barrier* f = mod_.find_barrier(BarrierKind::Full, channel, slot);
        return barriers_[static_cast<size_t>(e->id)].completed ==
               barriers_[static_cast<size_t>(f->id)].completed + 1;
    }
    bool slot_readable(int channel, int slot) const {
        const Barrier* e = mod_.find_barrier(BarrierKind::Empty, channel, slot);
        const Barrier* f = mod_.find_barrier(BarrierKind::Full, channel, slot);
        return barriers_[static_cast<size_t>(e->id)].completed ==
               barriers_[static_cast<size_t>(f->id)].completed;
    }

    void race(const std::string& what) {
        verdict_ = Verdict::RaceDetected;
        detail_ = "slot race at cycle " + std::to_string(clock_) + ": " + what;
    }

    bool check_reads(const LInstr& li) {
        for (const auto& [id, ref] : li.slot_operands) {
            if (!slot_readable(ref.channel, ref.slot)) {
                race("read of " + ref.str() + " outside its full window (%" + id + ")");
                return false;
            }
        }
        return true;
    }

    void bind_slot_operands(Agent& a, const LInstr& li) {
        for (const auto& [id, ref] : li.slot_operands) {
            auto it = slot_mem_.find(ref);
            if (it == slot_mem_.end())
                fail(ErrorCode::Eval, "read of unwritten slot " + ref.str());
            a.regs[id] = RValue::tile(it->second);
        }
    }

    void eval_instr_value(Agent& a, const LInstr& li) {
        if (!check_reads(li)) return;
        bind_slot_operands(a, li);
        ExecContext ctx{cur_pid_};
        eval_pure_op(li.op, a.regs, buffers_, ctx);
    }

    void retire_mma(Agent& a, int named_group, int pendings) {
        size_t cut = a.pending_mma.size();
        if (named_group >= 0) {
            bool found = false;
            for (size_t i = 0; i < a.pending_mma.size(); ++i)
                if (a.pending_mma[i].first == named_group) {
                    cut = i + 1;
                    found = true;
                }
            if (!found) return;
        } else {
            int keep_groups = std::max(pendings - 1, 0);
            std::set<int> kept;
            size_t i = a.pending_mma.size();
            while (i > 0) {
                int gp = a.pending_mma[i - 1].first;
                if (!kept.count(gp)) {
                    if (static_cast<int>(kept.size()) == keep_groups) break;
                    kept.insert(gp);
                }
                --i;
            }
            cut = i;
        }
        for (size_t i = 0; i < cut && verdict_ == Verdict::Completed; ++i)
            eval_instr_value(a, *a.pending_mma[i].second);
        a.pending_mma.erase(a.pending_mma.begin(), a.pending_mma.begin() + static_cast<long>(cut));
    }

    void block(Agent& a, BlockKind kind, const std::string& reason) {
        a.block = kind;
        a.block_start = clock_;
        block_reason_[&a - agents_.data()] = reason;
    }

    void unblock(Agent& a) {
        if (a.block == BlockKind::None) return;
        size_t idx = static_cast<size_t>(&a - agents_.data());
        // self-busy intervals are compute time, not waiting; keep them out
        if (a.block != BlockKind::SelfBusy && block_reason_.count(idx) &&
            !block_reason_[idx].empty())
            trace_.blocks.push_back({static_cast<int>(idx), a.block_start, clock_,
                                     block_reason_[idx]});
        a.block = BlockKind::None;
    }

    bool barrier_wait_passes(int barrier, int parity) const {
        return barriers_[static_cast<size_t>(barrier)].completed % 2 != parity;
    }

    // A phase completes when arrivals reach the threshold and the expected
    // transaction bytes have landed; counters roll over into the next phase.
    void arrive(int barrier, int64_t count, int64_t tx) {
        BarState& b = barriers_[static_cast<size_t>(barrier)];
        b.arrivals += count;
        b.tx_accum += tx;
        const Barrier& def = mod_.barriers[static_cast<size_t>(barrier)];
        while (b.arrivals >= def.threshold && b.tx_accum >= b.expected_tx) {
            b.arrivals -= def.threshold;
            b.tx_accum -= b.expected_tx;
            b.expected_tx = 0;
            b.completed += 1;
            trace_.barrier_log.emplace_back(barrier, clock_, b.completed);
        }
    }

    // --- instruction execution ---------------------------------------------
    // Returns true when the agent advanced past the instruction.

    bool exec(size_t ai) {
        Agent& a = agents_[ai];
        const Stream& s = stream_of(ai);
        const LInstr& li = s.instrs[a.pc];
        switch (li.kind) {
            case InstrKind::BarWaitPhase: {
                if (!barrier_wait_passes(li.barrier, li.parity)) {
                    block(a, BlockKind::Barrier,
                          "wait " + mod_.barriers[static_cast<size_t>(li.barrier)].name() +
                              " parity " + std::to_string(li.parity));
                    a.block_barrier = li.barrier;
                    a.block_parity = li.parity;
                    return false;
                }
                return true;
            }
            case InstrKind::BarExpectTx: {
                BarState& b = barriers_[static_cast<size_t>(li.barrier)];
                b.expected_tx += li.tx_bytes;
                arrive(li.barrier, 1, 0);
                return true;
            }
            case InstrKind::BarArrive: {
                arrive(li.barrier, 1, li.tx_bytes);
                return true;
            }
            case InstrKind::TmaAsyncLoad: {
                // offsets are read at issue; the copy lands at completion
                ExecContext ctx{cur_pid_};
                int64_t r0 = detail::lookup(a.regs, li.op.operands[0]).s;
                int64_t c0 = detail::lookup(a.regs, li.op.operands[1]).s;
                auto bit = buffers_.find(li.op.buffer);
                if (bit == buffers_.end())
                    fail(ErrorCode::Eval, "no buffer '" + li.op.buffer + "'");
                Tile payload = slice_tile(bit->second, r0, c0, li.op.tile);
                (void)ctx;
                size_t engine = 0;
                for (size_t e = 1; e < tma_free_.size(); ++e)
                    if (tma_free_[e] < tma_free_[engine]) engine = e;
                int64_t start = std::max(clock_, tma_free_[engine]);
                int64_t end = start + mc_.tma_cost(li.op.tile.elems());
                tma_free_[engine] = end;
                busy("tma" + std::to_string(engine), static_cast<int>(ai), start, end,
                     li.label.empty() ? li.op.buffer : li.label);
                Event ev;
                ev.time = end;
                ev.kind = Event::Kind::TmaComplete;
                ev.barrier = li.barrier;
                ev.tx_bytes = li.op.tile.bytes();
                ev.dst = li.dst;
                ev.payload = std::move(payload);
                push_event(std::move(ev));
                return true;
            }
            case InstrKind::MmaIssue: {
                if (!check_reads(li)) return false;
                // result shape equals the accumulator operand's shape
                int64_t elems = issue_elems(a, li);
                int64_t c = mc_.mma_cost(std::max<int64_t>(1, elems / s.band_count));
                int64_t start = std::max(clock_, tc_free_);
                int64_t end = start + c;
                tc_free_ = end;
                busy("tensor_core", static_cast<int>(ai), start, end,
                     li.label.empty() ? ("g" + std::to_string(li.group)) : li.label);
                a.groups[li.group].issued = true;
                a.groups[li.group].outstanding += 1;
                a.live_groups.insert(li.group);
                a.pending_mma.emplace_back(li.group, &li);
                Event ev;
                ev.time = end;
                ev.kind = Event::Kind::MmaComplete;
                ev.agent = static_cast<int>(ai);
                ev.group = li.group;
                push_event(std::move(ev));
                return true;
            }
            case InstrKind::MmaWaitGroup: {
                bool pass;
                if (li.wait_group >= 0) {
                    auto it = a.groups.find(li.wait_group);
                    pass = it == a.groups.end() || !it->second.issued ||
                           it->second.outstanding == 0;
                } else {
                    int bound = std::max(li.pendings - 1, 0);
                    pass = static_cast<int>(a.live_groups.size()) <= bound;
                }
                if (!pass) {
                    block(a, li.wait_group >= 0 ? BlockKind::MmaNamed : BlockKind::MmaPendings,
                          li.wait_group >= 0 ? "mma group " + std::to_string(li.wait_group)
                                             : "mma pendings " + std::to_string(li.pendings));
                    a.block_group = li.wait_group;
                    a.block_pendings = li.pendings;
                    return false;
                }
                retire_mma(a, li.wait_group, li.pendings);
                return verdict_ == Verdict::Completed;
            }
            case InstrKind::CudaOp: {
                if (!check_reads(li)) return false;
                int64_t elems = 1;
                if (!li.op.results.empty() && result_is_tile(a, li)) elems = result_elems(a, li);
                int64_t cost = li.op.kind == OpKind::Constant || li.op.kind == OpKind::IndexArith
                                   ? 1
                                   : mc_.cuda_cost(std::max<int64_t>(1, elems / s.band_count));
                eval_instr_value(a, li);
                if (verdict_ != Verdict::Completed) return false;
                int64_t end = clock_ + cost;
                busy("cuda_wg" + std::to_string(ai), static_cast<int>(ai), clock_, end,
                     li.op.results.empty() ? "cuda" : li.op.results[0]);
                block(a, BlockKind::SelfBusy, "");
                Event ev;
                ev.time = end;
                ev.kind = Event::Kind::AgentWake;
                ev.agent = static_cast<int>(ai);
                push_event(std::move(ev));
                a.pc += 1;  // resume after the wake
                return false;
            }
            case InstrKind::StoreGlobal: {
                if (!check_reads(li)) return false;
                bind_slot_operands(a, li);
                const Tile& v = detail::lookup(a.regs, li.op.operands[0]).t;
                int64_t r0 = detail::lookup(a.regs, li.op.operands[1]).s;
                int64_t c0 = detail::lookup(a.regs, li.op.operands[2]).s;
                auto bit = buffers_.find(li.op.buffer);
                if (bit == buffers_.end())
                    fail(ErrorCode::Eval, "no buffer '" + li.op.buffer + "'");
                // cooperative streams store only their row band
                int64_t rows = v.type.rows / s.band_count;
                int64_t band_r0 = static_cast<int64_t>(s.band_index) * rows;
                Tile band(TileType{rows, v.type.cols, v.type.elem});
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < v.type.cols; ++c) {
                        if (v.type.elem == Elem::Int)
                            band.at_i(r, c) = v.at_i(band_r0 + r, c);
                        else
                            band.at_r(r, c) = v.at_r(band_r0 + r, c);
                    }
                store_tile(bit->second, r0 + band_r0, c0, band);
                int64_t cost = mc_.cuda_cost(std::max<int64_t>(1, v.type.elems() / s.band_count));
                int64_t end = clock_ + cost;
                busy("cuda_wg" + std::to_string(ai), static_cast<int>(ai), clock_, end,
                     "store " + li.op.buffer);
                block(a, BlockKind::SelfBusy, "");
                Event ev;
                ev.time = end;
                ev.kind = Event::Kind::AgentWake;
                ev.agent = static_cast<int>(ai);
                push_event(std::move(ev));
                a.pc += 1;
                return false;
            }
            case InstrKind::WorkLoopNext: {
                block(a, BlockKind::WorkLoop, "work loop barrier");
                ++workloop_arrived_;
                if (workloop_arrived_ == static_cast<int>(agents_.size())) next_tile();
                return false;
            }
        }
        return false;
    }

    bool operand_tile_type(Agent& a, const LInstr& li, const std::string& id,
                           TileType* out) const {
        auto it = a.regs.find(id);
        if (it != a.regs.end() && it->second.is_tile) {
            *out = it->second.t.type;
            return true;
        }
        auto sit = li.slot_operands.find(id);
        if (sit != li.slot_operands.end()) {
            *out = mod_.channels[static_cast<size_t>(sit->second.channel)]
                       .members[static_cast<size_t>(sit->second.member)];
            return true;
        }
        return false;
    }

    int64_t issue_elems(Agent& a, const LInstr& li) {
        // dot result shape equals the accumulator's; the accumulator of a
        // chained dot may still be in flight, so fall back to a x b
        TileType t;
        if (operand_tile_type(a, li, li.op.operands[2], &t)) return t.elems();
        TileType ta, tb;
        if (operand_tile_type(a, li, li.op.operands[0], &ta) &&
            operand_tile_type(a, li, li.op.operands[1], &tb))
            return ta.rows * (li.op.trans_b ? tb.rows : tb.cols);
        return 1;
    }

    bool result_is_tile(Agent& a, const LInstr& li) {
        if (li.op.kind == OpKind::Elementwise || li.op.kind == OpKind::Reduce) return true;
        (void)a;
        return false;
    }

    int64_t result_elems(Agent& a, const LInstr& li) {
        // operand tile sizes dominate elementwise/reduce cost
        int64_t best = 1;
        for (const auto& o : li.op.operands) {
            auto it = a.regs.find(o);
            if (it != a.regs.end() && it->second.is_tile)
                best = std::max(best, it->second.t.type.elems());
            auto sit = li.slot_operands.find(o);
            if (sit != li.slot_operands.end())
                best = std::max(best, mod_.channels[static_cast<size_t>(sit->second.channel)]
                                          .members[static_cast<size_t>(sit->second.member)]
                                          .elems());
        }
        return best;
    }

    void next_tile() {
        state_changed_ = true;  // the pass that resets us counts as progress
        ++tile_index_;
        workloop_arrived_ = 0;
        if (tile_index_ >= static_cast<int64_t>(opts_.tile_queue.size())) {
            for (auto& a : agents_) {
                unblock(a);
                a.finished = true;
                a.pc = stream_of(static_cast<size_t>(&a - agents_.data())).instrs.size();
            }
            return;
        }
        cur_pid_ = opts_.tile_queue[static_cast<size_t>(tile_index_)];
        // the work-loop boundary re-initializes channel state for the next tile
        for (size_t i = 0; i < barriers_.size(); ++i) {
            barriers_[i] = BarState{};
            barriers_[i].completed = mod_.barriers[i].kind == BarrierKind::Empty ? 1 : 0;
        }
        slot_mem_.clear();
        for (auto& a : agents_) {
            unblock(a);
            a.pc = 0;
            a.regs.clear();
            a.pending_mma.clear();
            a.groups.clear();
            a.live_groups.clear();
        }
    }

    void apply_event(const Event& ev) {
        switch (ev.kind) {
            case Event::Kind::TmaComplete: {
                if (!slot_writable(ev.dst.channel, ev.dst.slot)) {
                    race("write of " + ev.dst.str() + " outside its empty window");
                    return;
                }
                slot_mem_[ev.dst] = ev.payload;
                arrive(ev.barrier, 0, ev.tx_bytes);
                break;
            }
            case Event::Kind::MmaComplete: {
                Agent& owner = agents_[static_cast<size_t>(ev.agent)];
                auto it = owner.groups.find(ev.group);
                if (it != owner.groups.end()) {
                    it->second.outstanding -= 1;
                    if (it->second.outstanding == 0) owner.live_groups.erase(ev.group);
                }
                break;
            }
            case Event::Kind::AgentWake:
                unblock(agents_[static_cast<size_t>(ev.agent)]);
                break;
        }
    }

    bool agent_unblocked(Agent& a) {
        switch (a.block) {
            case BlockKind::None: return true;
            case BlockKind::SelfBusy: return false;  // cleared by its wake event
            case BlockKind::Barrier:
                if (barrier_wait_passes(a.block_barrier, a.block_parity)) {
                    unblock(a);
                    return true;
                }
                return false;
            case BlockKind::MmaNamed: {
                auto it = a.groups.find(a.block_group);
                if (it == a.groups.end() || it->second.outstanding == 0) {
                    unblock(a);
                    retire_mma(a, a.block_group, -1);
                    return verdict_ == Verdict::Completed;
                }
                return false;
            }
            case BlockKind::MmaPendings: {
                int bound = std::max(a.block_pendings - 1, 0);
                if (static_cast<int>(a.live_groups.size()) <= bound) {
                    unblock(a);
                    retire_mma(a, -1, a.block_pendings);
                    return verdict_ == Verdict::Completed;
                }
                return false;
            }
            case BlockKind::WorkLoop: return false;  // cleared by next_tile
        }
        return false;
    }

    void advance_agents() {
        bool progress = true;
        while ((progress || state_changed_) && verdict_ == Verdict::Completed) {
            state_changed_ = false;
            progress = false;
            for (size_t i = 0; i < agents_.size(); ++i) {
                Agent& a = agents_[i];
                if (a.finished) continue;
                if (!agent_unblocked(a)) continue;
                while (verdict_ == Verdict::Completed) {
                    if (a.pc >= stream_of(i).instrs.size()) {
                        a.finished = true;
                        retire_mma(a, -1, 0);
                        progress = true;
                        break;
                    }
                    bool advanced = exec(i);
                    if (!advanced) break;
                    a.pc += 1;
                    progress = true;
                }
            }
        }
    }

    void collect_deadlock(SimResult& res) {
        std::string d = "deadlock:";
        for (size_t i = 0; i < agents_.size(); ++i) {
            const Agent& a = agents_[i];
            if (a.finished) continue;
            DeadlockEntry e;
            e.wg = static_cast<int>(i);
            if (a.block == BlockKind::Barrier) {
                const Barrier& b = mod_.barriers[static_cast<size_t>(a.block_barrier)];
                e.waiting_on = b.name();
                e.want_parity = a.block_parity;
                e.completed = barriers_[static_cast<size_t>(a.block_barrier)].completed;
                d += " wg" + std::to_string(i) + " waits " + b.name() + " parity " +
                     std::to_string(a.block_parity) + " (completed " +
                     std::to_string(e.completed) + ");";
            } else if (a.block == BlockKind::MmaNamed || a.block == BlockKind::MmaPendings) {
                e.waiting_on = "mma";
                d += " wg" + std::to_string(i) + " waits mma;";
            } else if (a.block == BlockKind::WorkLoop) {
                e.waiting_on = "work_loop";
                d += " wg" + std::to_string(i) + " waits work loop;";
            } else {
                e.waiting_on = "runnable";
                d += " wg" + std::to_string(i) + " stalled at pc " + std::to_string(a.pc) +
                     " block " + std::to_string(static_cast<int>(a.block)) + ";";
            }
            res.blocked.push_back(e);
        }
        detail_ = d;
        res.detail = d;
    }

    const LoweredModule& mod_;
    const MachineConfig& mc_;
    SimOptions opts_;
    Buffers buffers_;
    std::vector<BarState> barriers_;
    std::vector<Agent> agents_;
    std::map<size_t, std::string> block_reason_;
    std::map<SlotRef, Tile> slot_mem_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
    std::vector<int64_t> tma_free_;
    int64_t tc_free_ = 0;
    int64_t clock_ = 0;
    int64_t next_seq_ = 0;
    int64_t cur_pid_ = 0;
    int64_t tile_index_ = 0;
    int workloop_arrived_ = 0;
    bool state_changed_ = false;
    Verdict verdict_ = Verdict::Completed;
    std::string detail_;
    SimTrace trace_;
};

inline SimResult simulate(const LoweredModule& mod, const MachineConfig& mc,
                          const Buffers& inputs, const SimOptions& opts = {}) {
    return Simulator(mod, mc, inputs, opts).run();
}

}  // namespace warpspec
