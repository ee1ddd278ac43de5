#pragma once

#include <vector>

#include "dagsched/rng.hpp"
#include "dagsched/schedule.hpp"

namespace dagsched::testing {

struct RandomGraphParams {
    int min_tasks = 2;
    int max_tasks = 6;
    Time p_lo = 1, p_hi = 8;
    Time q_lo = 0, q_hi = 6;
    Time r_lo = 0, r_hi = 2;
    double edge_probability = 0.4;
};

inline JobGraph random_graph(Rng& rng, const RandomGraphParams& params = {}) {
    JobGraph g;
    const int n = static_cast<int>(rng.uniform_int(params.min_tasks, params.max_tasks));
    g.processing.resize(n);
    for (int j = 0; j < n; ++j) g.processing[j] = rng.uniform_int(params.p_lo, params.p_hi);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.bernoulli(params.edge_probability))
                g.edges.push_back({u, v, rng.uniform_int(params.q_lo, params.q_hi),
                                   rng.uniform_int(params.r_lo, params.r_hi)});
    return g;
}

inline Instance random_instance(Rng& rng, const RandomGraphParams& params = {}, int max_machines = 3,
                                int max_channels = 2) {
    Instance inst;
    inst.graph = random_graph(rng, params);
    inst.machines = static_cast<int>(rng.uniform_int(1, max_machines));
    inst.channels = static_cast<int>(rng.uniform_int(1, max_channels));
    inst.t_max = default_horizon(inst.graph);
    return inst;
}

// A uniformly random topological order, built by repeatedly popping a random
// ready task.
inline std::vector<TaskId> random_topo_order(Rng& rng, const JobGraph& g) {
    const int n = g.task_count();
    std::vector<int> indegree(n, 0);
    for (const Edge& e : g.edges) ++indegree[e.v];
    std::vector<TaskId> ready;
    for (int j = 0; j < n; ++j)
        if (indegree[j] == 0) ready.push_back(j);
    std::vector<TaskId> order;
    while (!ready.empty()) {
        const auto pick = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(ready.size()) - 1));
        const TaskId u = ready[pick];
        ready.erase(ready.begin() + static_cast<long>(pick));
        order.push_back(u);
        for (const Edge& e : g.edges)
            if (e.u == u && --indegree[e.v] == 0) ready.push_back(e.v);
    }
    return order;
}

struct ConsistentInputs {
    std::vector<int> placement;
    std::vector<std::vector<TaskId>> machine_orders;
    std::vector<std::vector<int>> channel_orders;
};

// Random placement with sequences read off one global topological order, so
// the combined activity network is always acyclic.
inline ConsistentInputs random_consistent_inputs(Rng& rng, const Instance& inst) {
    ConsistentInputs in;
    const int n = inst.graph.task_count();
    in.placement.resize(n);
    for (int j = 0; j < n; ++j) in.placement[j] = static_cast<int>(rng.uniform_int(1, inst.machines));
    const auto order = random_topo_order(rng, inst.graph);
    std::vector<int> position(n);
    for (int i = 0; i < n; ++i) position[order[i]] = i;
    in.machine_orders.resize(inst.machines);
    for (TaskId j : order) in.machine_orders[in.placement[j] - 1].push_back(j);
    in.channel_orders.resize(inst.channels);
    std::vector<int> external;
    for (int e = 0; e < inst.graph.edge_count(); ++e)
        if (in.placement[inst.graph.edges[e].u] != in.placement[inst.graph.edges[e].v]) external.push_back(e);
    std::sort(external.begin(), external.end(), [&](int a, int b) {
        return std::make_pair(position[inst.graph.edges[a].u], a) <
               std::make_pair(position[inst.graph.edges[b].u], b);
    });
    for (int e : external)
        in.channel_orders[rng.uniform_int(0, inst.channels - 1)].push_back(e);
    return in;
}

}  // namespace dagsched::testing
