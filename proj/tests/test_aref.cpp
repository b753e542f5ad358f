#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <warpspec/aref.hpp>

#include <random>
#include <set>
#include <tuple>
#include <vector>

using namespace warpspec;

using Slot = ArefSlot<int>;

TEST_CASE("put publishes: (1,0) -> (0,1)") {
    Slot s;
    CHECK(s.empty_credit());
    CHECK(!s.full_credit());
    CHECK(!s.buf());
    s.put(42);
    CHECK(!s.empty_credit());
    CHECK(s.full_credit());
    CHECK(*s.buf() == 42);
}

TEST_CASE("put without the empty credit is a protocol violation") {
    Slot s;
    s.put(1);
    CHECK_THROWS_AS(s.put(2), CompileError);
}

TEST_CASE("get borrows: (0,1) -> (0,0), value preserved") {
    Slot s;
    s.put(7);
    CHECK(s.get() == 7);
    CHECK(!s.empty_credit());
    CHECK(!s.full_credit());
    CHECK(s.borrowed());
}

TEST_CASE("get on a fresh slot violates") {
    Slot s;
    CHECK_THROWS_AS(s.get(), CompileError);
}

TEST_CASE("double get violates: a publication carries a single credit") {
    Slot s;
    s.put(3);
    (void)s.get();
    CHECK_THROWS_AS(s.get(), CompileError);
}

TEST_CASE("consumed releases and the slot is reusable") {
    Slot s;
    s.put(1);
    (void)s.get();
    CHECK(!s.consumed());
    s.put(9);
    CHECK(s.get() == 9);
}

TEST_CASE("consumed with E already set is a lint warning, not an error") {
    Slot s;
    CHECK(s.consumed());
}

TEST_CASE("channel slot index is k mod D") {
    ArefChannel<int> ch2(2), ch3(3);
    CHECK(ch2.slot_index(5) == 1);
    CHECK(ch2.slot_index(0) == 0);
    CHECK(ch3.slot_index(7) == 1);
    CHECK(ch3.slot_index(0) == 0);
}

namespace {

// Exhaustive exploration of one slot under all legal op applications.
std::set<std::pair<bool, bool>> reachable_states() {
    std::set<std::pair<bool, bool>> seen;
    std::vector<Slot> frontier{Slot{}};
    seen.insert({true, false});
    while (!frontier.empty()) {
        std::vector<Slot> next;
        for (const Slot& s : frontier) {
            auto expand = [&](Slot t) {
                auto key = std::make_pair(t.empty_credit(), t.full_credit());
                if (seen.insert(key).second) next.push_back(t);
            };
            if (s.can_put()) {
                Slot t = s;
                t.put(0);
                expand(t);
            }
            if (s.can_get()) {
                Slot t = s;
                (void)t.get();
                expand(t);
            }
            {
                Slot t = s;
                (void)t.consumed();
                expand(t);
            }
        }
        frontier = std::move(next);
    }
    return seen;
}

}  // namespace

TEST_CASE("reachable state set is exactly {(1,0),(0,1),(0,0)}") {
    auto states = reachable_states();
    std::set<std::pair<bool, bool>> want{{true, false}, {false, true}, {false, false}};
    CHECK(states == want);
}

TEST_CASE("random legal sequences never reach E=F=1 and preserve per-slot FIFO") {
    std::mt19937_64 rng(20260811);
    for (int trial = 0; trial < 20; ++trial) {
        Slot s;
        int produced = 0;
        int expected_get = 0;
        for (int step = 0; step < 1000; ++step) {
            int pick = static_cast<int>(rng() % 3);
            if (pick == 0 && s.can_put()) {
                s.put(produced++);
            } else if (pick == 1 && s.can_get()) {
                int v = s.get();
                CHECK(v == expected_get);
                ++expected_get;
            } else if (pick == 2 && s.borrowed()) {
                (void)s.consumed();
            }
            CHECK(!(s.empty_credit() && s.full_credit()));
        }
    }
}
