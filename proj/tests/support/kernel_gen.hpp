#pragma once

#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"

namespace testing {

// Random single-loop kernels over integer payloads: tiles up to 8x8, trip
// counts up to 8, spanning the dot-chain, staged, and load-free shapes.
inline std::string random_kernel_src(std::mt19937_64& rng) {
    auto pick = [&](std::initializer_list<int64_t> xs) {
        auto it = xs.begin();
        std::advance(it, static_cast<long>(rng() % xs.size()));
        return *it;
    };
    int64_t trip = 1 + static_cast<int64_t>(rng() % 8);
    switch (rng() % 5) {
        case 0:  // plain gemm, possibly non-square
            return gemm_src(pick({1, 2, 3, 4, 8}), pick({1, 2, 4, 8}), pick({1, 2, 4, 8}), trip);
        case 1:  // attention shape: dot / transform / dot
            return attention_n_src(pick({2, 4, 8}), trip);
        case 2:  // dot followed by an elementwise transform
            return gemm_act_n_src(pick({2, 4, 8}), pick({1, 2, 4}), trip);
        case 3: {  // no loads at all: pure elementwise accumulation
            int64_t r = pick({1, 2, 4, 8});
            const char* fn = pick({0, 1, 2}) == 0 ? "add" : (pick({0, 1}) == 0 ? "max" : "min");
            std::ostringstream os;
            os << "kernel pure(c: buf<" << r << "x" << r << " int>) {\n";
            os << "  %z = const zeros : " << r << "x" << r << " int\n";
            os << "  %w = const [[";
            for (int64_t i = 0; i < r; ++i) {
                if (i) os << "], [";
                for (int64_t j = 0; j < r; ++j)
                    os << (j ? ", " : "") << static_cast<int64_t>(rng() % 9) - 4;
            }
            os << "]] : " << r << "x" << r << " int\n";
            os << "  loop %k in 0.." << trip << " iter (%acc = %z) {\n";
            os << "    %acc1 = ew " << fn << " %acc, %w\n";
            os << "    yield %acc1\n";
            os << "  }\n";
            os << "  store c[0, 0] = %acc\n";
            os << "}\n";
            return os.str();
        }
        default: {  // two independent dot chains, two channels
            int64_t m = pick({2, 4});
            int64_t kk = pick({2, 4});
            std::ostringstream os;
            os << "kernel twochain(a: buf<" << m << "x" << kk * trip << " int>, b: buf<" << m
               << "x" << kk * trip << " int>, c: buf<" << m << "x" << m << " int>, d: buf<" << m
               << "x" << m << " int>) {\n";
            os << "  %z1 = const zeros : " << m << "x" << m << " int\n";
            os << "  %z2 = const zeros : " << m << "x" << m << " int\n";
            os << "  %k0 = const 0\n";
            os << "  loop %k in 0.." << trip
               << " iter (%u = %z1, %v = %z2, %ok = %k0) {\n";
            os << "    %ta = tma_load a[0, %ok] : " << m << "x" << kk << " int\n";
            os << "    %tb = tma_load b[0, %ok] : " << m << "x" << kk << " int\n";
            os << "    %u1 = dot %ta, %ta.T, acc=%u\n";
            os << "    %v1 = dot %tb, %tb.T, acc=%v\n";
            os << "    %ok1 = add %ok, " << kk << "\n";
            os << "    yield %u1, %v1, %ok1\n";
            os << "  }\n";
            os << "  store c[0, 0] = %u\n";
            os << "  store d[0, 0] = %v\n";
            os << "}\n";
            return os.str();
        }
    }
}

}  // namespace testing
