#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dagsched/dag.hpp"
#include "dagsched/errors.hpp"
#include "dagsched/instance.hpp"
#include "dagsched/rng.hpp"
#include "dagsched/schedule.hpp"

namespace dagsched {

enum class HeuristicKind { Random, List, GList, Partition };

inline const char* to_string(HeuristicKind kind) {
    switch (kind) {
        case HeuristicKind::Random: return "random";
        case HeuristicKind::List: return "list";
        case HeuristicKind::GList: return "glist";
        case HeuristicKind::Partition: return "partition";
    }
    return "?";
}

// Uniform machine draw per task (in task order), then greedy construction in
// topological order. Each inbound external transfer is booked first-come
// first-served on the channel that frees earliest (ties: lowest index).
inline Schedule schedule_random(const Instance& inst, std::uint64_t seed) {
    Rng rng(seed);
    const JobGraph& g = inst.graph;
    const int n = g.task_count();
    std::vector<int> placement(n);
    for (int j = 0; j < n; ++j) placement[j] = static_cast<int>(rng.uniform_int(1, inst.machines));

    const auto adj = detail::adjacency(g);
    std::vector<std::vector<TaskId>> machine_orders(inst.machines);
    std::vector<std::vector<int>> channel_orders(inst.channels);
    std::vector<Time> machine_free(inst.machines + 1, 0), channel_free(inst.channels + 1, 0);
    std::vector<Time> task_end(n, 0);
    for (TaskId v : topo_order(g)) {
        Time start = machine_free[placement[v]];
        for (int e : adj.in[v]) {
            const Edge& edge = g.edges[e];
            Time arrival;
            if (placement[edge.u] == placement[v]) {
                arrival = task_end[edge.u] + edge.r;
            } else {
                int best = 1;
                for (int k = 2; k <= inst.channels; ++k)
                    if (channel_free[k] < channel_free[best]) best = k;
                const Time flow_start = std::max(channel_free[best], task_end[edge.u]);
                channel_free[best] = flow_start + edge.q;
                channel_orders[static_cast<size_t>(best) - 1].push_back(e);
                arrival = flow_start + edge.q;
            }
            start = std::max(start, arrival);
        }
        machine_orders[static_cast<size_t>(placement[v]) - 1].push_back(v);
        task_end[v] = start + g.processing[v];
        machine_free[placement[v]] = task_end[v];
    }
    return earliest_start_schedule(inst, placement, machine_orders, channel_orders);
}

namespace detail {

// Book external flows onto channels in a fixed order: each flow takes the
// channel where it could begin earliest given the producer end times
// (ties: lowest index). Used to realize placement-only plans.
inline std::vector<std::vector<int>> book_channels_fcfs(const Instance& inst, const std::vector<int>& flows,
                                                        const std::vector<Time>& producer_end) {
    const JobGraph& g = inst.graph;
    std::vector<std::vector<int>> channel_orders(inst.channels);
    std::vector<Time> channel_free(inst.channels + 1, 0);
    for (int e : flows) {
        const Time ready = producer_end[g.edges[e].u];
        int best = 1;
        for (int k = 2; k <= inst.channels; ++k)
            if (std::max(channel_free[k], ready) < std::max(channel_free[best], ready)) best = k;
        channel_free[best] = std::max(channel_free[best], ready) + g.edges[e].q;
        channel_orders[static_cast<size_t>(best) - 1].push_back(e);
    }
    return channel_orders;
}

}  // namespace detail

// Placement-only event-driven greedy: repeatedly dispatch the (ready task,
// machine) pair that can start earliest, breaking ties by longest remaining
// critical path, then task id, then machine index. Transfers are charged r
// when co-located and q otherwise, with channel contention ignored during
// the simulation; the committed orders are then realized against the real
// channels.
inline Schedule schedule_list(const Instance& inst) {
    const JobGraph& g = inst.graph;
    const int n = g.task_count();
    const auto adj = detail::adjacency(g);
    const auto tails = critical_tails(g);

    std::vector<int> placement(n, 0), preds_left(n, 0);
    std::vector<char> placed(n, 0);
    std::vector<Time> task_end(n, 0), machine_free(inst.machines + 1, 0);
    std::vector<std::vector<TaskId>> machine_orders(inst.machines);
    for (int j = 0; j < n; ++j) preds_left[j] = static_cast<int>(adj.in[j].size());

    for (int step = 0; step < n; ++step) {
        int best_task = -1, best_machine = 1;
        Time best_start = 0;
        for (int v = 0; v < n; ++v) {
            if (placed[v] || preds_left[v] > 0) continue;
            for (int i = 1; i <= inst.machines; ++i) {
                Time start = machine_free[i];
                for (int e : adj.in[v]) {
                    const Edge& edge = g.edges[e];
                    start = std::max(start, task_end[edge.u] + (placement[edge.u] == i ? edge.r : edge.q));
                }
                const bool better =
                    best_task < 0 || start < best_start ||
                    (start == best_start &&
                     std::make_tuple(-tails[v], v, i) < std::make_tuple(-tails[best_task], best_task, best_machine));
                if (better) {
                    best_task = v;
                    best_machine = i;
                    best_start = start;
                }
            }
        }
        placement[best_task] = best_machine;
        placed[best_task] = 1;
        task_end[best_task] = best_start + g.processing[best_task];
        machine_free[best_machine] = task_end[best_task];
        machine_orders[static_cast<size_t>(best_machine) - 1].push_back(best_task);
        for (int e : adj.out[best_task]) --preds_left[g.edges[e].v];
    }

    std::vector<int> external;
    for (int e = 0; e < g.edge_count(); ++e)
        if (placement[g.edges[e].u] != placement[g.edges[e].v]) external.push_back(e);
    std::sort(external.begin(), external.end(), [&](int a, int b) {
        return std::make_pair(task_end[g.edges[a].u], a) < std::make_pair(task_end[g.edges[b].u], b);
    });
    return earliest_start_schedule(inst, placement, machine_orders,
                                   detail::book_channels_fcfs(inst, external, task_end));
}

// Communication-aware greedy: repeatedly take the ready task with the longest
// remaining critical path (ties: lowest id) and commit it to the machine
// minimizing its finish time, where each required external transfer is
// tentatively booked on the channel offering the earliest transfer start
// (ties: lowest index). The serial plan is kept as a candidate: if the greedy
// result loses to the single-machine baseline, the baseline is returned.
inline Schedule schedule_glist(const Instance& inst) {
    const JobGraph& g = inst.graph;
    const int n = g.task_count();
    const auto adj = detail::adjacency(g);
    const auto tails = critical_tails(g);

    std::vector<int> placement(n, 0), preds_left(n, 0);
    std::vector<char> placed(n, 0);
    std::vector<Time> task_end(n, 0), machine_free(inst.machines + 1, 0), channel_free(inst.channels + 1, 0);
    std::vector<std::vector<TaskId>> machine_orders(inst.machines);
    std::vector<std::vector<int>> channel_orders(inst.channels);
    for (int j = 0; j < n; ++j) preds_left[j] = static_cast<int>(adj.in[j].size());

    // Transfer bookings for task v on machine i; mutates free/orders.
    auto arrival_bound = [&](int v, int i, std::vector<Time>& free, std::vector<std::vector<int>>* orders) {
        Time latest = 0;
        for (int e : adj.in[v]) {
            const Edge& edge = g.edges[e];
            if (placement[edge.u] == i) {
                latest = std::max(latest, task_end[edge.u] + edge.r);
                continue;
            }
            int best = 1;
            for (int k = 2; k <= inst.channels; ++k)
                if (std::max(free[k], task_end[edge.u]) < std::max(free[best], task_end[edge.u])) best = k;
            const Time flow_start = std::max(free[best], task_end[edge.u]);
            free[best] = flow_start + edge.q;
            if (orders) (*orders)[static_cast<size_t>(best) - 1].push_back(e);
            latest = std::max(latest, flow_start + edge.q);
        }
        return latest;
    };

    for (int step = 0; step < n; ++step) {
        int v = -1;
        for (int j = 0; j < n; ++j) {
            if (placed[j] || preds_left[j] > 0) continue;
            if (v < 0 || std::make_pair(-tails[j], j) < std::make_pair(-tails[v], v)) v = j;
        }
        int best_machine = 1;
        Time best_finish = std::numeric_limits<Time>::max();
        for (int i = 1; i <= inst.machines; ++i) {
            std::vector<Time> trial_free = channel_free;
            const Time start = std::max(machine_free[i], arrival_bound(v, i, trial_free, nullptr));
            const Time finish = start + g.processing[v];
            if (finish < best_finish) {
                best_finish = finish;
                best_machine = i;
            }
        }
        const Time start = std::max(machine_free[best_machine],
                                    arrival_bound(v, best_machine, channel_free, &channel_orders));
        placement[v] = best_machine;
        placed[v] = 1;
        task_end[v] = start + g.processing[v];
        machine_free[best_machine] = task_end[v];
        machine_orders[static_cast<size_t>(best_machine) - 1].push_back(v);
        for (int e : adj.out[v]) --preds_left[g.edges[e].v];
    }

    const Schedule greedy = earliest_start_schedule(inst, placement, machine_orders, channel_orders);
    const Schedule serial = single_machine_baseline(inst);
    return greedy.makespan <= serial.makespan ? greedy : serial;
}

namespace detail {

// Pack clusters onto machines: heaviest cluster first (ties: lowest id) onto
// the least-loaded machine (ties: lowest index). Returns per-cluster machine
// and the resulting maximum machine load.
struct Packing {
    std::vector<int> machine_of;  // indexed by cluster id
    Time max_load = 0;
};

inline Packing pack_clusters(const std::vector<int>& cluster_ids, const std::vector<Time>& cluster_load,
                             int machines) {
    Packing packing;
    packing.machine_of.assign(cluster_load.size(), 0);
    std::vector<int> order = cluster_ids;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::make_pair(-cluster_load[a], a) < std::make_pair(-cluster_load[b], b);
    });
    std::vector<Time> load(static_cast<size_t>(machines) + 1, 0);
    for (int c : order) {
        int best = 1;
        for (int i = 2; i <= machines; ++i)
            if (load[i] < load[best]) best = i;
        packing.machine_of[static_cast<size_t>(c)] = best;
        load[best] += cluster_load[c];
        packing.max_load = std::max(packing.max_load, load[best]);
    }
    return packing;
}

}  // namespace detail

// Cluster-and-pack scheme: tasks start as singleton clusters; connected
// cluster pairs are merged while that strictly lowers the plan proxy
// (max machine load after packing + total q crossing machines), keeping
// heavy transfers internal without starving parallelism. Clusters are packed
// onto machines, tasks sequenced in topological order, and external flows
// spread round-robin over the channels.
inline Schedule schedule_partition(const Instance& inst) {
    const JobGraph& g = inst.graph;
    const int n = g.task_count();
    std::vector<int> cluster_of(n);
    std::iota(cluster_of.begin(), cluster_of.end(), 0);

    auto proxy_cost = [&](const std::vector<int>& clusters) {
        std::vector<Time> load(n, 0);
        std::vector<int> ids;
        for (int j = 0; j < n; ++j) {
            if (load[clusters[j]] == 0) ids.push_back(clusters[j]);
            load[clusters[j]] += g.processing[j];
        }
        const auto packing = detail::pack_clusters(ids, load, inst.machines);
        Time crossing = 0;
        for (const Edge& e : g.edges)
            if (packing.machine_of[clusters[e.u]] != packing.machine_of[clusters[e.v]]) crossing += e.q;
        return std::make_pair(packing.max_load + crossing, packing);
    };

    Time best_cost = proxy_cost(cluster_of).first;
    while (true) {
        std::vector<std::pair<int, int>> candidates;
        for (const Edge& e : g.edges) {
            const int a = std::min(cluster_of[e.u], cluster_of[e.v]);
            const int b = std::max(cluster_of[e.u], cluster_of[e.v]);
            if (a != b) candidates.emplace_back(a, b);
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        Time merged_cost = best_cost;
        std::pair<int, int> merged{-1, -1};
        for (const auto& [a, b] : candidates) {
            std::vector<int> trial = cluster_of;
            for (int& c : trial)
                if (c == b) c = a;
            const Time cost = proxy_cost(trial).first;
            if (cost < merged_cost) {
                merged_cost = cost;
                merged = {a, b};
            }
        }
        if (merged.first < 0) break;
        for (int& c : cluster_of)
            if (c == merged.second) c = merged.first;
        best_cost = merged_cost;
    }

    const auto packing = proxy_cost(cluster_of).second;
    std::vector<int> placement(n);
    for (int j = 0; j < n; ++j) placement[j] = packing.machine_of[cluster_of[j]];

    std::vector<int> position(n);
    const auto order = topo_order(g);
    for (int i = 0; i < n; ++i) position[order[i]] = i;
    std::vector<std::vector<TaskId>> machine_orders(inst.machines);
    for (TaskId j : order) machine_orders[static_cast<size_t>(placement[j]) - 1].push_back(j);

    std::vector<int> external;
    for (int e = 0; e < g.edge_count(); ++e)
        if (placement[g.edges[e].u] != placement[g.edges[e].v]) external.push_back(e);
    std::sort(external.begin(), external.end(), [&](int a, int b) {
        return std::make_pair(position[g.edges[a].u], a) < std::make_pair(position[g.edges[b].u], b);
    });
    std::vector<std::vector<int>> channel_orders(inst.channels);
    for (size_t i = 0; i < external.size(); ++i)
        channel_orders[i % static_cast<size_t>(inst.channels)].push_back(external[i]);

    return earliest_start_schedule(inst, placement, machine_orders, channel_orders);
}

inline Schedule run_heuristic(HeuristicKind kind, const Instance& inst, std::uint64_t seed) {
    switch (kind) {
        case HeuristicKind::Random: return schedule_random(inst, seed);
        case HeuristicKind::List: return schedule_list(inst);
        case HeuristicKind::GList: return schedule_glist(inst);
        case HeuristicKind::Partition: return schedule_partition(inst);
    }
    throw InvalidParamsError("unknown heuristic kind");
}

}  // namespace dagsched
