#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "warpspec/expand.hpp"
#include "warpspec/ir.hpp"
#include "warpspec/validate.hpp"

namespace warpspec {

enum class BarrierKind { Empty, Full, Quiesce };

struct Barrier {
    int id = 0;
    BarrierKind kind = BarrierKind::Empty;
    int channel = -1;
    int slot = -1;
    int threshold = 1;  // arrivals completing a phase

    std::string name() const {
        switch (kind) {
            case BarrierKind::Empty:
                return "empty" + std::to_string(channel) + "_" + std::to_string(slot);
            case BarrierKind::Full:
                return "full" + std::to_string(channel) + "_" + std::to_string(slot);
            case BarrierKind::Quiesce: return "quiesce";
        }
        return "?";
    }
};

struct SlotRef {
    int channel = -1;
    int slot = -1;
    int member = -1;

    bool valid() const { return channel >= 0; }
    bool operator<(const SlotRef& o) const {
        return std::tie(channel, slot, member) < std::tie(o.channel, o.slot, o.member);
    }
    std::string str() const {
        return "ch" + std::to_string(channel) + ".s" + std::to_string(slot) + ".m" +
               std::to_string(member);
    }
};

enum class InstrKind {
    BarWaitPhase,
    BarExpectTx,
    BarArrive,
    TmaAsyncLoad,
    MmaIssue,
    MmaWaitGroup,
    CudaOp,
    StoreGlobal,
    WorkLoopNext,
};

struct LInstr {
    InstrKind kind{};
    int barrier = -1;
    int parity = -1;     // BarWaitPhase
    int64_t tx_bytes = 0;  // BarExpectTx: expected; BarArrive: carried
    Op op;               // semantic payload for value-carrying instructions
    std::map<std::string, SlotRef> slot_operands;  // operand ids that read slot memory
    SlotRef dst;         // TmaAsyncLoad destination
    int group = -1;      // MmaIssue
    int pendings = -1;   // MmaWaitGroup (pendings form)
    int wait_group = -1; // MmaWaitGroup (named form)
    std::string label;
};

struct Stream {
    int wg = 0;
    std::string role;
    std::vector<LInstr> instrs;
    size_t epilogue_start = 0;   // first instruction of the store epilogue
    int64_t acc_reg_bytes = 0;   // carried accumulator footprint
    int64_t out_tile_rows = 0;   // accumulator rows; the cooperative split axis
    int band_index = 0;          // cooperative row band
    int band_count = 1;
};

struct SlotLayout {
    int channel = 0;
    int slot = 0;
    int64_t offset = 0;
    int64_t bytes = 0;
};

struct LoweredModule {
    std::string name;
    std::vector<Param> params;
    std::vector<Channel> channels;       // program channels plus staging channels
    std::vector<bool> channel_staging;   // true for synthesized load-staging channels
    std::vector<Barrier> barriers;
    std::vector<SlotLayout> smem;
    int64_t smem_total = 0;
    std::vector<Stream> streams;
    int p = 1;
    bool persistent = false;
    int64_t tiles = 1;
    int64_t reg_overhead = 128;

    int64_t reg_estimate(const Stream& s) const {
        return s.acc_reg_bytes / s.band_count + reg_overhead;
    }

    const Barrier* find_barrier(BarrierKind kind, int channel, int slot) const {
        for (const auto& b : barriers)
            if (b.kind == kind && b.channel == channel && b.slot == slot) return &b;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

struct LowerOptions {
    int p = 1;  // recorded for the listing header
};

namespace lowering_detail {

struct RegionLowerer {
    const WarpSpecProgram& prog;
    LoweredModule& mod;
    Stream& stream;
    const Region& region;
    std::map<std::string, int>& staging_channel_of;  // load base id -> channel

    std::map<std::string, SlotRef> slot_of;          // value id -> slot memory
    std::map<std::string, const InstOp*> pending_load;
    std::map<int, std::string> staging_outstanding;  // channel -> loaded value id
    int next_group = 1000;  // plain dots; pipelined groups come from expansion

    int barrier_id(BarrierKind kind, int channel, int slot) const {
        const Barrier* b = mod.find_barrier(kind, channel, slot);
        if (!b) throw InternalError("missing barrier for " + std::to_string(channel));
        return b->id;
    }

    void attach_slot_operands(LInstr& li) {
        for (const auto& o : li.op.operands) {
            auto it = slot_of.find(o);
            if (it != slot_of.end()) li.slot_operands.emplace(o, it->second);
        }
    }

    void emit(LInstr li) { stream.instrs.push_back(std::move(li)); }

    void release_staging(int ch) {
        auto it = staging_outstanding.find(ch);
        if (it == staging_outstanding.end()) return;
        LInstr arr;
        arr.kind = InstrKind::BarArrive;
        arr.barrier = barrier_id(BarrierKind::Empty, ch, 0);
        arr.label = "release " + it->second;
        emit(std::move(arr));
        staging_outstanding.erase(it);
    }

    // Load with no put: staged through a private depth-1 channel and waited
    // immediately, the synchronous baseline shape.
    void lower_inline_load(const InstOp& io) {
        const std::string base = io.op.results[0].substr(0, io.op.results[0].find('@'));
        int ch = staging_channel_of.at(base);
        release_staging(ch);
        int64_t inst = io.iter < 0 ? 0 : io.iter;
        int parity = static_cast<int>(inst % 2);

        LInstr w;
        w.kind = InstrKind::BarWaitPhase;
        w.barrier = barrier_id(BarrierKind::Empty, ch, 0);
        w.parity = parity;
        emit(std::move(w));

        LInstr ex;
        ex.kind = InstrKind::BarExpectTx;
        ex.barrier = barrier_id(BarrierKind::Full, ch, 0);
        ex.tx_bytes = io.op.tile.bytes();
        emit(std::move(ex));

        LInstr tma;
        tma.kind = InstrKind::TmaAsyncLoad;
        tma.op = io.op;
        tma.dst = SlotRef{ch, 0, 0};
        tma.barrier = barrier_id(BarrierKind::Full, ch, 0);
        tma.label = io.op.buffer + " -> " + tma.dst.str();
        attach_slot_operands(tma);
        emit(std::move(tma));

        LInstr fw;
        fw.kind = InstrKind::BarWaitPhase;
        fw.barrier = barrier_id(BarrierKind::Full, ch, 0);
        fw.parity = parity;
        emit(std::move(fw));

        slot_of[io.op.results[0]] = SlotRef{ch, 0, 0};
        staging_outstanding[ch] = io.op.results[0];
    }

    void lower_put(const InstOp& io) {
        int ch = io.op.channel;
        int slot = static_cast<int>(io.slot);
        const Channel& channel = prog.channels[static_cast<size_t>(ch)];

        LInstr w;
        w.kind = InstrKind::BarWaitPhase;
        w.barrier = barrier_id(BarrierKind::Empty, ch, slot);
        w.parity = static_cast<int>(io.parity);
        w.label = "put ch" + std::to_string(ch) + "[" + std::to_string(io.iter) + "]";
        emit(std::move(w));

        LInstr ex;
        ex.kind = InstrKind::BarExpectTx;
        ex.barrier = barrier_id(BarrierKind::Full, ch, slot);
        for (const auto& m : channel.members) ex.tx_bytes += m.bytes();
        emit(std::move(ex));

        for (size_t m = 0; m < io.op.operands.size(); ++m) {
            auto it = pending_load.find(io.op.operands[m]);
            if (it == pending_load.end())
                fail(ErrorCode::UnloweredAref,
                     "put operand %" + io.op.operands[m] + " is not an in-flight tma_load");
            LInstr tma;
            tma.kind = InstrKind::TmaAsyncLoad;
            tma.op = it->second->op;
            tma.dst = SlotRef{ch, slot, static_cast<int>(m)};
            tma.barrier = barrier_id(BarrierKind::Full, ch, slot);
            tma.label = tma.op.buffer + " -> " + tma.dst.str();
            attach_slot_operands(tma);
            emit(std::move(tma));
            pending_load.erase(it);
        }
    }

    void run() {
        auto stream_ops = expand_region(region, prog.channels);
        for (const auto& io : stream_ops) {
            switch (io.op.kind) {
                case OpKind::TmaLoad: {
                    std::string base = io.op.results[0].substr(0, io.op.results[0].find('@'));
                    if (staging_channel_of.count(base))
                        lower_inline_load(io);
                    else
                        pending_load.emplace(io.op.results[0], &io);
                    break;
                }
                case OpKind::Put:
                    lower_put(io);
                    break;
                case OpKind::Get: {
                    LInstr w;
                    w.kind = InstrKind::BarWaitPhase;
                    w.barrier =
                        barrier_id(BarrierKind::Full, io.op.channel, static_cast<int>(io.slot));
                    w.parity = static_cast<int>(io.parity);
                    w.label = "get ch" + std::to_string(io.op.channel) + "[" +
                              std::to_string(io.iter) + "]";
                    emit(std::move(w));
                    for (size_t m = 0; m < io.op.results.size(); ++m)
                        slot_of[io.op.results[m]] =
                            SlotRef{io.op.channel, static_cast<int>(io.slot), static_cast<int>(m)};
                    break;
                }
                case OpKind::Consumed: {
                    LInstr a;
                    a.kind = InstrKind::BarArrive;
                    a.barrier =
                        barrier_id(BarrierKind::Empty, io.op.channel, static_cast<int>(io.slot));
                    a.label = "consumed ch" + std::to_string(io.op.channel) + "[" +
                              std::to_string(io.iter) + "]";
                    emit(std::move(a));
                    break;
                }
                case OpKind::Dot: {
                    // synchronous form: issue and wait the same group
                    LInstr mi;
                    mi.kind = InstrKind::MmaIssue;
                    mi.op = io.op;
                    mi.op.kind = OpKind::MmaIssue;
                    mi.group = next_group++;
                    mi.label = io.label;
                    attach_slot_operands(mi);
                    int g = mi.group;
                    emit(std::move(mi));
                    LInstr mw;
                    mw.kind = InstrKind::MmaWaitGroup;
                    mw.wait_group = g;
                    emit(std::move(mw));
                    break;
                }
                case OpKind::MmaIssue: {
                    LInstr mi;
                    mi.kind = InstrKind::MmaIssue;
                    mi.op = io.op;
                    mi.group = io.group;
                    mi.label = io.label;
                    attach_slot_operands(mi);
                    emit(std::move(mi));
                    break;
                }
                case OpKind::MmaWait: {
                    LInstr mw;
                    mw.kind = InstrKind::MmaWaitGroup;
                    mw.pendings = io.wait_group >= 0 ? -1 : io.op.pendings;
                    mw.wait_group = io.wait_group;
                    mw.label = io.label;
                    emit(std::move(mw));
                    break;
                }
                case OpKind::Store: {
                    LInstr st;
                    st.kind = InstrKind::StoreGlobal;
                    st.op = io.op;
                    st.label = "store " + io.op.buffer;
                    attach_slot_operands(st);
                    emit(std::move(st));
                    break;
                }
                case OpKind::Constant:
                case OpKind::IndexArith:
                case OpKind::Elementwise:
                case OpKind::Reduce: {
                    LInstr c;
                    c.kind = InstrKind::CudaOp;
                    c.op = io.op;
                    c.label = io.label;
                    attach_slot_operands(c);
                    emit(std::move(c));
                    break;
                }
                case OpKind::Yield:
                    break;
            }
        }
        if (!pending_load.empty())
            fail(ErrorCode::UnloweredAref,
                 "tma_load %" + pending_load.begin()->first + " never reaches a put");
        // release whatever staging slot is still checked out
        std::vector<int> open;
        for (const auto& kv : staging_outstanding) open.push_back(kv.first);
        for (int ch : open) release_staging(ch);
    }
};

}  // namespace lowering_detail

inline LoweredModule lower(const WarpSpecProgram& prog, const LowerOptions& opts = {}) {
    require_valid(prog);
    LoweredModule mod;
    mod.name = prog.name;
    mod.params = prog.params;
    mod.channels = prog.channels;
    mod.channel_staging.assign(prog.channels.size(), false);
    mod.p = opts.p;

    // loads that never flow into a put stage through private depth-1 channels
    std::map<std::string, int> staging_channel_of;
    for (const auto& region : prog.regions) {
        std::set<std::string> put_operands;
        auto scan_puts = [&](const std::vector<Op>& ops) {
            for (const auto& op : ops)
                if (op.kind == OpKind::Put)
                    for (const auto& o : op.operands) put_operands.insert(o);
        };
        scan_puts(region.loop.body);
        scan_puts(region.prologue);
        scan_puts(region.epilogue);
        auto scan_loads = [&](const std::vector<Op>& ops) {
            for (const auto& op : ops) {
                if (op.kind != OpKind::TmaLoad) continue;
                if (put_operands.count(op.results[0])) continue;
                Channel ch;
                ch.id = static_cast<int>(mod.channels.size());
                ch.depth = 1;
                ch.members = {op.tile};
                staging_channel_of[op.results[0]] = ch.id;
                mod.channels.push_back(ch);
                mod.channel_staging.push_back(true);
            }
        };
        scan_loads(region.loop.body);
        scan_loads(region.prologue);
        scan_loads(region.epilogue);
    }

    // barriers: two per channel slot; the empty side starts with one phase
    // already complete, encoding the initial empty credit
    for (const auto& ch : mod.channels) {
        for (int s = 0; s < ch.depth; ++s) {
            Barrier e;
            e.id = static_cast<int>(mod.barriers.size());
            e.kind = BarrierKind::Empty;
            e.channel = ch.id;
            e.slot = s;
            mod.barriers.push_back(e);
            Barrier f;
            f.id = static_cast<int>(mod.barriers.size());
            f.kind = BarrierKind::Full;
            f.channel = ch.id;
            f.slot = s;
            mod.barriers.push_back(f);
        }
    }

    // shared-memory plan: one contiguous block per channel slot, 16B aligned
    int64_t offset = 0;
    for (const auto& ch : mod.channels) {
        for (int s = 0; s < ch.depth; ++s) {
            SlotLayout sl;
            sl.channel = ch.id;
            sl.slot = s;
            sl.offset = offset;
            sl.bytes = ch.slot_bytes();
            mod.smem.push_back(sl);
            offset += (sl.bytes + 15) / 16 * 16;
        }
    }
    mod.smem_total = offset;

    for (size_t r = 0; r < prog.regions.size(); ++r) {
        const Region& region = prog.regions[r];
        Stream stream;
        stream.wg = static_cast<int>(r);
        stream.role = prog.regions.size() == 1 ? "serial"
                      : region.partition == 0  ? "producer"
                                               : "consumer";
        for (const auto& a : region.loop.iter_args) {
            // the carried accumulator footprint drives the register estimate
            for (const auto& op : region.prologue)
                for (const auto& res : op.results)
                    if (res == a.init && op.has_tile) {
                        stream.acc_reg_bytes += op.tile.bytes();
                        stream.out_tile_rows = std::max(stream.out_tile_rows, op.tile.rows);
                    }
        }

        lowering_detail::RegionLowerer rl{prog, mod, stream, region, staging_channel_of};
        rl.run();

        // epilogue boundary: the trailing address-math + store run
        stream.epilogue_start = stream.instrs.size();
        bool saw_store = false;
        for (size_t i = stream.instrs.size(); i > 0; --i) {
            InstrKind k = stream.instrs[i - 1].kind;
            if (k == InstrKind::StoreGlobal) saw_store = true;
            if (k != InstrKind::StoreGlobal && k != InstrKind::CudaOp) break;
            stream.epilogue_start = i - 1;
        }
        if (!saw_store) stream.epilogue_start = stream.instrs.size();
        mod.streams.push_back(std::move(stream));
    }
    return mod;
}

// ---------------------------------------------------------------------------
// Erasure check: no aref op survives, barrier counts match channel depths,
// and each stream's wait/arrive multiset matches the original channel ops.
// ---------------------------------------------------------------------------

struct VerifyReport {
    std::vector<std::string> violations;
    int64_t residual_aref = 0;
    std::map<int, int> barriers_per_channel;

    bool clean() const { return violations.empty() && residual_aref == 0; }

    std::string str() const {
        if (clean()) return "lowering verified: no residual aref ops, barriers consistent\n";
        std::string s;
        for (const auto& v : violations) s += v + "\n";
        return s;
    }
};

inline VerifyReport verify_lowering(const LoweredModule& mod, const WarpSpecProgram& original) {
    VerifyReport rep;

    for (const auto& stream : mod.streams)
        for (const auto& li : stream.instrs) {
            OpKind k = li.op.kind;
            if (k == OpKind::Put || k == OpKind::Get || k == OpKind::Consumed) ++rep.residual_aref;
        }
    if (rep.residual_aref)
        rep.violations.push_back("residual aref ops: " + std::to_string(rep.residual_aref));

    for (const auto& b : mod.barriers)
        if (b.channel >= 0) ++rep.barriers_per_channel[b.channel];
    for (const auto& ch : original.channels) {
        int want = 2 * ch.depth;
        int got = rep.barriers_per_channel.count(ch.id) ? rep.barriers_per_channel[ch.id] : 0;
        if (got != want)
            rep.violations.push_back("channel ch" + std::to_string(ch.id) + ": " +
                                     std::to_string(got) + " barriers, expected " +
                                     std::to_string(want));
    }

    // expected put/get/consumed multisets from the program's own expansion
    std::map<int, int64_t> puts, gets, consumeds;
    for (const auto& region : original.regions)
        for (const auto& io : expand_region(region, original.channels)) {
            if (io.op.kind == OpKind::Put) ++puts[io.op.channel];
            if (io.op.kind == OpKind::Get) ++gets[io.op.channel];
            if (io.op.kind == OpKind::Consumed) ++consumeds[io.op.channel];
        }

    std::map<int, int64_t> empty_waits, expects, full_waits, empty_arrives;
    for (const auto& stream : mod.streams)
        for (const auto& li : stream.instrs) {
            if (li.barrier < 0) continue;
            const Barrier& b = mod.barriers[static_cast<size_t>(li.barrier)];
            if (b.channel < 0 || mod.channel_staging[static_cast<size_t>(b.channel)]) continue;
            if (li.kind == InstrKind::BarWaitPhase && b.kind == BarrierKind::Empty)
                ++empty_waits[b.channel];
            if (li.kind == InstrKind::BarWaitPhase && b.kind == BarrierKind::Full)
                ++full_waits[b.channel];
            if (li.kind == InstrKind::BarExpectTx) ++expects[b.channel];
            if (li.kind == InstrKind::BarArrive && b.kind == BarrierKind::Empty)
                ++empty_arrives[b.channel];
        }

    for (const auto& ch : original.channels) {
        auto want = [&](std::map<int, int64_t>& m) { return m.count(ch.id) ? m[ch.id] : 0; };
        if (want(empty_waits) != want(puts))
            rep.violations.push_back("ch" + std::to_string(ch.id) + ": empty waits " +
                                     std::to_string(want(empty_waits)) + " != puts " +
                                     std::to_string(want(puts)));
        if (want(expects) != want(puts))
            rep.violations.push_back("ch" + std::to_string(ch.id) + ": expect_tx " +
                                     std::to_string(want(expects)) + " != puts " +
                                     std::to_string(want(puts)));
        if (want(full_waits) != want(gets))
            rep.violations.push_back("ch" + std::to_string(ch.id) + ": full waits " +
                                     std::to_string(want(full_waits)) + " != gets " +
                                     std::to_string(want(gets)));
        if (want(empty_arrives) != want(consumeds))
            rep.violations.push_back("ch" + std::to_string(ch.id) + ": empty arrives " +
                                     std::to_string(want(empty_arrives)) + " != consumeds " +
                                     std::to_string(want(consumeds)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Assembly-like listing, one instruction per line.
// ---------------------------------------------------------------------------

inline std::string print_lowered(const LoweredModule& mod) {
    std::ostringstream os;
    os << "module " << mod.name << " P=" << mod.p << " wgs=" << mod.streams.size();
    if (mod.persistent) os << " persistent tiles=" << mod.tiles;
    os << "\n";
    os << "smem total=" << mod.smem_total << "\n";
    for (const auto& sl : mod.smem)
        os << "  ch" << sl.channel << " slot" << sl.slot << ": off=" << sl.offset
           << " size=" << sl.bytes << (mod.channel_staging[static_cast<size_t>(sl.channel)]
                                           ? " (staging)\n"
                                           : "\n");
    os << "barriers\n";
    for (const auto& b : mod.barriers)
        os << "  b" << b.id << " = " << b.name() << " threshold=" << b.threshold << "\n";
    for (const auto& stream : mod.streams) {
        os << "== WG" << stream.wg << " " << stream.role;
        if (stream.band_count > 1)
            os << " band " << stream.band_index << "/" << stream.band_count;
        os << " ==\n";
        for (size_t i = 0; i < stream.instrs.size(); ++i) {
            const LInstr& li = stream.instrs[i];
            os << "  ";
            switch (li.kind) {
                case InstrKind::BarWaitPhase:
                    os << "bar_wait b" << li.barrier << " parity=" << li.parity;
                    break;
                case InstrKind::BarExpectTx:
                    os << "bar_expect_tx b" << li.barrier << " bytes=" << li.tx_bytes;
                    break;
                case InstrKind::BarArrive:
                    os << "bar_arrive b" << li.barrier;
                    break;
                case InstrKind::TmaAsyncLoad:
                    os << "tma_async " << li.op.buffer << "[%" << li.op.operands[0] << ", %"
                       << li.op.operands[1] << "] -> " << li.dst.str() << " arrive b"
                       << li.barrier;
                    break;
                case InstrKind::MmaIssue:
                    os << "mma_issue g" << li.group << ": %" << li.op.results[0];
                    break;
                case InstrKind::MmaWaitGroup:
                    if (li.wait_group >= 0)
                        os << "mma_wait g" << li.wait_group;
                    else
                        os << "mma_wait pendings=" << li.pendings;
                    break;
                case InstrKind::CudaOp:
                    os << "cuda %" << li.op.results[0];
                    break;
                case InstrKind::StoreGlobal:
                    os << "st_global " << li.op.buffer << " <- %" << li.op.operands[0];
                    break;
                case InstrKind::WorkLoopNext:
                    os << "work_loop_next";
                    break;
            }
            if (!li.label.empty()) os << "    # " << li.label;
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace warpspec
