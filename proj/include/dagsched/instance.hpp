#pragma once

#include <cstdint>
#include <string>

#include "dagsched/dag.hpp"

namespace dagsched {

// Virtual channel index: carries internal (co-located) transfers without
// contention. Real channels are 1..channels, machines are 1..machines.
inline constexpr int kVirtualChannel = 0;

struct Instance {
    JobGraph graph;
    int machines = 1;
    int channels = 1;
    Time t_max = 0;  // scheduling horizon; every activity must end by t_max
};

// FNV-1a over a canonical field serialization; identifies an instance in
// exported artifacts independently of file formatting.
inline std::uint64_t instance_hash(const Instance& inst) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](std::int64_t value) {
        auto bits = static_cast<std::uint64_t>(value);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (bits >> (8 * byte)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    mix(inst.graph.task_count());
    mix(inst.graph.edge_count());
    mix(inst.machines);
    mix(inst.channels);
    mix(inst.t_max);
    for (Time p : inst.graph.processing) mix(p);
    for (const Edge& e : inst.graph.edges) {
        mix(e.u);
        mix(e.v);
        mix(e.q);
        mix(e.r);
    }
    return h;
}

inline std::string instance_hash_hex(const Instance& inst) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = instance_hash(inst);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace dagsched
