#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "warpspec/errors.hpp"

namespace warpspec {

// One-slot channel with empty/full credits. State machine over (E, F):
//   (1,0) --put--> (0,1) --get--> (0,0) --consumed--> (1,0)
// E and F never hold a credit simultaneously. In strict mode a violated
// precondition is an error; blocking callers poll can_put/can_get instead.
template <class T>
class ArefSlot {
  public:
    bool empty_credit() const { return e_; }
    bool full_credit() const { return f_; }
    bool can_put() const { return e_; }
    bool can_get() const { return f_; }
    bool borrowed() const { return !e_ && !f_; }
    const std::optional<T>& buf() const { return buf_; }

    void put(T v) {
        if (!e_) fail(ErrorCode::ProtocolViolation, "put on a slot without the empty credit");
        buf_ = std::move(v);
        e_ = false;
        f_ = true;
        check();
    }

    T get() {
        if (!f_) fail(ErrorCode::ProtocolViolation, "get on a slot without the full credit");
        f_ = false;
        e_ = false;
        check();
        return *buf_;  // retained until consumed
    }

    // The release rule has no precondition; releasing an already-empty slot
    // is suspicious but legal, so it only counts as a lint warning.
    bool consumed() {
        bool warn = e_;
        f_ = false;
        e_ = true;
        check();
        return warn;
    }

  private:
    void check() const {
        if (e_ && f_) throw InternalError("aref slot holds both credits");
    }

    bool e_ = true;
    bool f_ = false;
    std::optional<T> buf_;
};

// Depth-D cyclic buffer of slots; iteration k lands in slot k mod D.
template <class T>
class ArefChannel {
  public:
    explicit ArefChannel(int depth) : slots_(static_cast<size_t>(depth)) {
        if (depth < 1) fail(ErrorCode::ProtocolViolation, "channel depth must be positive");
    }

    int depth() const { return static_cast<int>(slots_.size()); }

    int64_t slot_index(int64_t k) const {
        if (k < 0) fail(ErrorCode::ProtocolViolation, "negative iteration index");
        return k % depth();
    }

    ArefSlot<T>& slot(int64_t i) { return slots_[static_cast<size_t>(i)]; }
    const ArefSlot<T>& slot(int64_t i) const { return slots_[static_cast<size_t>(i)]; }

    ArefSlot<T>& slot_for(int64_t k) { return slot(slot_index(k)); }

    // Handshake counters for bounded-lead and FIFO properties.
    int64_t puts = 0;
    int64_t gets = 0;
    int64_t consumeds = 0;
    int64_t lint_warnings = 0;

    void counted_put(int64_t k, T v) {
        slot_for(k).put(std::move(v));
        ++puts;
    }
    T counted_get(int64_t k) {
        T v = slot_for(k).get();
        ++gets;
        return v;
    }
    void counted_consumed(int64_t k) {
        if (slot_for(k).consumed()) ++lint_warnings;
        ++consumeds;
    }

  private:
    std::vector<ArefSlot<T>> slots_;
};

}  // namespace warpspec
