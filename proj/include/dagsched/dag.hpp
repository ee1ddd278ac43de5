#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dagsched/errors.hpp"

namespace dagsched {

using Time = std::int64_t;
using TaskId = int;

// A dependency edge u -> v. The payload can be handed over in two ways:
// internally when both tasks share a machine (r slots, contention-free) or
// externally over a communication channel (q slots, channels are exclusive).
struct Edge {
    TaskId u = 0;
    TaskId v = 0;
    Time q = 0;  // external transfer duration
    Time r = 0;  // internal transfer duration
};

struct JobGraph {
    std::vector<Time> processing;  // processing[j] = slots task j occupies a machine
    std::vector<Edge> edges;

    int task_count() const { return static_cast<int>(processing.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

enum class GraphViolation {
    Cycle,
    NonpositiveDuration,
    NegativeWeight,
    SelfLoop,
    DuplicateEdge,
    InvalidTaskId,
};

inline const char* to_string(GraphViolation code) {
    switch (code) {
        case GraphViolation::Cycle: return "CYCLE";
        case GraphViolation::NonpositiveDuration: return "NONPOSITIVE_DURATION";
        case GraphViolation::NegativeWeight: return "NEGATIVE_WEIGHT";
        case GraphViolation::SelfLoop: return "SELF_LOOP";
        case GraphViolation::DuplicateEdge: return "DUPLICATE_EDGE";
        case GraphViolation::InvalidTaskId: return "INVALID_TASK_ID";
    }
    return "?";
}

struct ValidationReport {
    bool ok = true;
    std::vector<std::pair<GraphViolation, std::string>> violations;

    void add(GraphViolation code, std::string message) {
        ok = false;
        violations.emplace_back(code, std::move(message));
    }

    std::string message() const {
        std::string out;
        for (const auto& [code, text] : violations) {
            if (!out.empty()) out += "; ";
            out += to_string(code);
            out += ": ";
            out += text;
        }
        return out;
    }
};

namespace detail {

// Adjacency as successor/predecessor edge-index lists.
struct Adjacency {
    std::vector<std::vector<int>> out;  // out[u] = edge indices leaving u
    std::vector<std::vector<int>> in;   // in[v]  = edge indices entering v
};

inline Adjacency adjacency(const JobGraph& g) {
    Adjacency adj;
    adj.out.resize(g.task_count());
    adj.in.resize(g.task_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        adj.out[g.edges[e].u].push_back(e);
        adj.in[g.edges[e].v].push_back(e);
    }
    return adj;
}

}  // namespace detail

inline ValidationReport validate(const JobGraph& g) {
    ValidationReport report;
    const int n = g.task_count();
    for (int j = 0; j < n; ++j) {
        if (g.processing[j] <= 0)
            report.add(GraphViolation::NonpositiveDuration,
                       "task " + std::to_string(j) + " has p = " + std::to_string(g.processing[j]));
    }
    std::set<std::pair<TaskId, TaskId>> seen;
    bool endpoints_ok = true;
    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edges[e];
        const std::string label = "edge " + std::to_string(edge.u) + "->" + std::to_string(edge.v);
        if (edge.u < 0 || edge.u >= n || edge.v < 0 || edge.v >= n) {
            report.add(GraphViolation::InvalidTaskId, label + " references a missing task");
            endpoints_ok = false;
            continue;
        }
        if (edge.u == edge.v) {
            report.add(GraphViolation::SelfLoop, label);
            endpoints_ok = false;
        }
        if (edge.q < 0 || edge.r < 0)
            report.add(GraphViolation::NegativeWeight, label + " has q = " + std::to_string(edge.q) +
                                                           ", r = " + std::to_string(edge.r));
        if (!seen.insert({edge.u, edge.v}).second)
            report.add(GraphViolation::DuplicateEdge, label);
    }
    if (endpoints_ok) {
        // Kahn's algorithm; leftover tasks sit on a cycle.
        std::vector<int> indegree(n, 0);
        for (const Edge& edge : g.edges) ++indegree[edge.v];
        std::vector<TaskId> frontier;
        for (int j = 0; j < n; ++j)
            if (indegree[j] == 0) frontier.push_back(j);
        const auto adj = detail::adjacency(g);
        int visited = 0;
        while (!frontier.empty()) {
            const TaskId u = frontier.back();
            frontier.pop_back();
            ++visited;
            for (int e : adj.out[u])
                if (--indegree[g.edges[e].v] == 0) frontier.push_back(g.edges[e].v);
        }
        if (visited != n) {
            std::string stuck;
            for (int j = 0; j < n; ++j)
                if (indegree[j] > 0) stuck += (stuck.empty() ? "" : ",") + std::to_string(j);
            report.add(GraphViolation::Cycle, "tasks {" + stuck + "} lie on a cycle");
        }
    }
    return report;
}

// Topological order with ties broken by ascending task id.
inline std::vector<TaskId> topo_order(const JobGraph& g) {
    const int n = g.task_count();
    std::vector<int> indegree(n, 0);
    for (const Edge& edge : g.edges) ++indegree[edge.v];
    const auto adj = detail::adjacency(g);
    std::priority_queue<TaskId, std::vector<TaskId>, std::greater<>> ready;
    for (int j = 0; j < n; ++j)
        if (indegree[j] == 0) ready.push(j);
    std::vector<TaskId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const TaskId u = ready.top();
        ready.pop();
        order.push_back(u);
        for (int e : adj.out[u])
            if (--indegree[g.edges[e].v] == 0) ready.push(g.edges[e].v);
    }
    if (static_cast<int>(order.size()) != n) throw CyclicGraphError("graph contains a cycle");
    return order;
}

// Longest remaining path from each task to any sink, counting the task's own
// processing time and min(q, r) per edge: the transfer cost no placement can
// avoid. tails[j] lower-bounds the span from the start of j to the end of the
// job, so max(tails) lower-bounds every feasible makespan.
inline std::vector<Time> critical_tails(const JobGraph& g) {
    const auto order = topo_order(g);
    const auto adj = detail::adjacency(g);
    std::vector<Time> tails(g.task_count(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const TaskId u = *it;
        Time best = 0;
        for (int e : adj.out[u]) {
            const Edge& edge = g.edges[e];
            best = std::max(best, std::min(edge.q, edge.r) + tails[edge.v]);
        }
        tails[u] = g.processing[u] + best;
    }
    return tails;
}

inline Time critical_path_bound(const JobGraph& g) {
    Time best = 0;
    for (Time t : critical_tails(g)) best = std::max(best, t);
    return best;
}

// reach[u][v] == true iff a directed path u -> ... -> v exists (u != v).
inline std::vector<std::vector<bool>> reachability(const JobGraph& g) {
    const int n = g.task_count();
    const auto order = topo_order(g);
    const auto adj = detail::adjacency(g);
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const TaskId u = *it;
        for (int e : adj.out[u]) {
            const TaskId v = g.edges[e].v;
            reach[u][v] = true;
            for (int w = 0; w < n; ++w)
                if (reach[v][w]) reach[u][w] = true;
        }
    }
    return reach;
}

// Groups of interchangeable tasks: equal processing time, identical
// predecessor and successor sets, and pairwise-equal (q, r) on the shared
// edges. Swapping two members of a class (together with the placements of
// their incident flows) maps feasible schedules to feasible schedules of the
// same makespan. Only classes with at least two members are returned, ordered
// by their smallest member; members are sorted ascending.
inline std::vector<std::vector<TaskId>> equivalent_siblings(const JobGraph& g) {
    const int n = g.task_count();
    using Signature = std::tuple<Time, std::vector<std::tuple<TaskId, Time, Time>>,
                                 std::vector<std::tuple<TaskId, Time, Time>>>;
    std::map<Signature, std::vector<TaskId>> classes;
    const auto adj = detail::adjacency(g);
    for (int j = 0; j < n; ++j) {
        std::vector<std::tuple<TaskId, Time, Time>> preds, succs;
        for (int e : adj.in[j]) preds.emplace_back(g.edges[e].u, g.edges[e].q, g.edges[e].r);
        for (int e : adj.out[j]) succs.emplace_back(g.edges[e].v, g.edges[e].q, g.edges[e].r);
        std::sort(preds.begin(), preds.end());
        std::sort(succs.begin(), succs.end());
        classes[{g.processing[j], std::move(preds), std::move(succs)}].push_back(j);
    }
    std::vector<std::vector<TaskId>> result;
    for (auto& [sig, members] : classes) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        result.push_back(std::move(members));
    }
    std::sort(result.begin(), result.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return result;
}

}  // namespace dagsched
