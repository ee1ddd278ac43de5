#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dagsched/errors.hpp"
#include "dagsched/instance.hpp"

namespace dagsched {

struct TaskPlacement {
    int machine = 1;  // 1..machines
    Time start = 0;
};

struct FlowPlacement {
    int channel = kVirtualChannel;  // 0 = virtual, 1..channels = real
    Time start = 0;

    bool is_virtual() const { return channel == kVirtualChannel; }
};

// flows[e] places the transfer belonging to graph.edges[e]. A flow occupies
// its channel for the half-open interval [start, start + duration) where the
// duration is r on the virtual channel and q on a real one; tasks occupy
// [start, start + p) on their machine.
struct Schedule {
    std::vector<TaskPlacement> tasks;
    std::vector<FlowPlacement> flows;
    Time makespan = 0;
};

inline Time flow_duration(const Edge& edge, const FlowPlacement& f) {
    return f.is_virtual() ? edge.r : edge.q;
}

// Violation ids:
//   C1  task machine index valid and the task ends by t_max
//   C2  flow channel index valid and the flow ends by t_max
//   C3  task start nonnegative
//   C4  tasks on one machine do not overlap
//   C5  a flow is virtual exactly when its endpoints share a machine
//   C6  internal flow fits between producer and consumer (r slots)
//   C7  external flow starts after its producer ends
//   C8  external flow delivers q slots before its consumer starts
//   C9  flow start nonnegative
//   C10 flows on one real channel do not overlap
struct FeasibilityReport {
    bool feasible = true;
    std::vector<std::pair<std::string, std::string>> violations;  // (id, detail)

    void add(const char* id, std::string detail) {
        feasible = false;
        violations.emplace_back(id, std::move(detail));
    }

    std::string message() const {
        std::string out;
        for (const auto& [id, detail] : violations) {
            if (!out.empty()) out += "; ";
            out += id;
            out += ": ";
            out += detail;
        }
        return out;
    }
};

namespace detail {

inline void require_shape(const Instance& inst, const Schedule& s) {
    if (static_cast<int>(s.tasks.size()) != inst.graph.task_count())
        throw ShapeMismatchError("schedule has " + std::to_string(s.tasks.size()) + " task placements, instance has " +
                                 std::to_string(inst.graph.task_count()) + " tasks");
    if (static_cast<int>(s.flows.size()) != inst.graph.edge_count())
        throw ShapeMismatchError("schedule has " + std::to_string(s.flows.size()) + " flow placements, instance has " +
                                 std::to_string(inst.graph.edge_count()) + " edges");
}

}  // namespace detail

inline Time makespan(const Instance& inst, const Schedule& s) {
    detail::require_shape(inst, s);
    Time end = 0;
    for (int j = 0; j < inst.graph.task_count(); ++j)
        end = std::max(end, s.tasks[j].start + inst.graph.processing[j]);
    for (int e = 0; e < inst.graph.edge_count(); ++e)
        end = std::max(end, s.flows[e].start + flow_duration(inst.graph.edges[e], s.flows[e]));
    return end;
}

inline FeasibilityReport check_feasible(const Instance& inst, const Schedule& s) {
    detail::require_shape(inst, s);
    const JobGraph& g = inst.graph;
    FeasibilityReport report;
    auto task_label = [](int j) { return "task " + std::to_string(j); };
    auto flow_label = [&g](int e) {
        return "flow " + std::to_string(g.edges[e].u) + "->" + std::to_string(g.edges[e].v);
    };

    for (int j = 0; j < g.task_count(); ++j) {
        const TaskPlacement& t = s.tasks[j];
        if (t.machine < 1 || t.machine > inst.machines)
            report.add("C1", task_label(j) + " on machine " + std::to_string(t.machine));
        if (t.start + g.processing[j] > inst.t_max)
            report.add("C1", task_label(j) + " ends at " + std::to_string(t.start + g.processing[j]) +
                                 " past horizon " + std::to_string(inst.t_max));
        if (t.start < 0) report.add("C3", task_label(j) + " starts at " + std::to_string(t.start));
    }
    for (int e = 0; e < g.edge_count(); ++e) {
        const FlowPlacement& f = s.flows[e];
        if (f.channel < 0 || f.channel > inst.channels)
            report.add("C2", flow_label(e) + " on channel " + std::to_string(f.channel));
        if (f.start + flow_duration(g.edges[e], f) > inst.t_max)
            report.add("C2", flow_label(e) + " ends past horizon " + std::to_string(inst.t_max));
        if (f.start < 0) report.add("C9", flow_label(e) + " starts at " + std::to_string(f.start));
    }

    // C4: per machine, sort by start and test adjacent intervals.
    std::vector<std::vector<int>> on_machine(inst.machines + 1);
    for (int j = 0; j < g.task_count(); ++j) {
        const int m = s.tasks[j].machine;
        if (m >= 1 && m <= inst.machines) on_machine[m].push_back(j);
    }
    for (int m = 1; m <= inst.machines; ++m) {
        auto& tasks = on_machine[m];
        std::sort(tasks.begin(), tasks.end(), [&s](int a, int b) {
            return std::make_pair(s.tasks[a].start, a) < std::make_pair(s.tasks[b].start, b);
        });
        for (size_t i = 1; i < tasks.size(); ++i) {
            const int a = tasks[i - 1], b = tasks[i];
            if (s.tasks[a].start + g.processing[a] > s.tasks[b].start)
                report.add("C4", task_label(a) + " and " + task_label(b) + " overlap on machine " + std::to_string(m));
        }
    }

    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edges[e];
        const FlowPlacement& f = s.flows[e];
        const Time end_u = s.tasks[edge.u].start + g.processing[edge.u];
        const Time start_v = s.tasks[edge.v].start;
        const bool colocated = s.tasks[edge.u].machine == s.tasks[edge.v].machine;
        if (f.is_virtual() != colocated) {
            report.add("C5", flow_label(e) + (colocated ? " is external but endpoints share machine "
                                                        : " is virtual but endpoints are on machines ") +
                                 std::to_string(s.tasks[edge.u].machine) +
                                 (colocated ? "" : " and " + std::to_string(s.tasks[edge.v].machine)));
        }
        if (f.is_virtual()) {
            if (end_u > f.start)
                report.add("C6", flow_label(e) + " starts before producer ends");
            if (f.start + edge.r > start_v)
                report.add("C6", flow_label(e) + " delivers after consumer starts");
        } else {
            if (end_u > f.start) report.add("C7", flow_label(e) + " starts before producer ends");
            if (f.start + edge.q > start_v) report.add("C8", flow_label(e) + " delivers after consumer starts");
        }
    }

    // C10: per real channel, adjacent-interval test. Half-open occupation
    // means zero-duration flows can never conflict.
    std::vector<std::vector<int>> on_channel(inst.channels + 1);
    for (int e = 0; e < g.edge_count(); ++e) {
        const int k = s.flows[e].channel;
        if (k >= 1 && k <= inst.channels && g.edges[e].q > 0) on_channel[k].push_back(e);
    }
    for (int k = 1; k <= inst.channels; ++k) {
        auto& flows = on_channel[k];
        std::sort(flows.begin(), flows.end(), [&s](int a, int b) {
            return std::make_pair(s.flows[a].start, a) < std::make_pair(s.flows[b].start, b);
        });
        for (size_t i = 1; i < flows.size(); ++i) {
            const int a = flows[i - 1], b = flows[i];
            if (s.flows[a].start + g.edges[a].q > s.flows[b].start)
                report.add("C10", flow_label(a) + " and " + flow_label(b) + " overlap on channel " + std::to_string(k));
        }
    }
    return report;
}

// Earliest start times for fixed placements and fixed per-resource sequences.
// machine_orders[m-1] lists the tasks of machine m in execution order;
// channel_orders[k-1] lists the external flows (edge indices) of channel k in
// transmission order. Internal flows ride the virtual channel and must not
// appear in any channel order. Starts are the componentwise-minimal ones:
// longest paths in the activity network of precedence and sequence arcs.
inline Schedule earliest_start_schedule(const Instance& inst, const std::vector<int>& placement,
                                        const std::vector<std::vector<TaskId>>& machine_orders,
                                        const std::vector<std::vector<int>>& channel_orders) {
    const JobGraph& g = inst.graph;
    const int n = g.task_count();
    const int f_count = g.edge_count();
    if (static_cast<int>(placement.size()) != n)
        throw ShapeMismatchError("placement covers " + std::to_string(placement.size()) + " of " +
                                 std::to_string(n) + " tasks");
    if (static_cast<int>(machine_orders.size()) != inst.machines)
        throw ShapeMismatchError("expected " + std::to_string(inst.machines) + " machine orders");
    if (static_cast<int>(channel_orders.size()) != inst.channels)
        throw ShapeMismatchError("expected " + std::to_string(inst.channels) + " channel orders");
    for (int j = 0; j < n; ++j)
        if (placement[j] < 1 || placement[j] > inst.machines)
            throw ShapeMismatchError("task " + std::to_string(j) + " placed on machine " +
                                     std::to_string(placement[j]));

    std::vector<int> task_seen(n, 0);
    for (int m = 0; m < inst.machines; ++m)
        for (TaskId j : machine_orders[m]) {
            if (j < 0 || j >= n || placement[j] != m + 1)
                throw ShapeMismatchError("machine order " + std::to_string(m + 1) +
                                         " lists task " + std::to_string(j));
            ++task_seen[j];
        }
    for (int j = 0; j < n; ++j)
        if (task_seen[j] != 1)
            throw ShapeMismatchError("task " + std::to_string(j) + " appears " +
                                     std::to_string(task_seen[j]) + " times in machine orders");

    std::vector<int> flow_seen(f_count, 0);
    for (int k = 0; k < inst.channels; ++k)
        for (int e : channel_orders[k]) {
            if (e < 0 || e >= f_count) throw ShapeMismatchError("channel order lists flow " + std::to_string(e));
            ++flow_seen[e];
        }
    std::vector<int> flow_channel(f_count, kVirtualChannel);
    for (int e = 0; e < f_count; ++e) {
        const bool external = placement[g.edges[e].u] != placement[g.edges[e].v];
        if (external != (flow_seen[e] == 1))
            throw ShapeMismatchError(std::string(external ? "external" : "internal") + " flow " +
                                     std::to_string(e) + " listed " + std::to_string(flow_seen[e]) +
                                     " times in channel orders");
    }
    for (int k = 0; k < inst.channels; ++k)
        for (int e : channel_orders[k]) flow_channel[e] = k + 1;

    // Activity nodes 0..n-1 = tasks, n..n+f_count-1 = flows.
    const int activities = n + f_count;
    std::vector<std::vector<std::pair<int, Time>>> arcs(activities);  // arcs[a] = (b, weight): s_b >= s_a + weight
    std::vector<int> indegree(activities, 0);
    auto add_arc = [&](int a, int b, Time w) {
        arcs[a].emplace_back(b, w);
        ++indegree[b];
    };
    for (int e = 0; e < f_count; ++e) {
        const Edge& edge = g.edges[e];
        const Time dur = flow_channel[e] == kVirtualChannel ? edge.r : edge.q;
        add_arc(edge.u, n + e, g.processing[edge.u]);
        add_arc(n + e, edge.v, dur);
    }
    for (int m = 0; m < inst.machines; ++m)
        for (size_t i = 1; i < machine_orders[m].size(); ++i) {
            const TaskId a = machine_orders[m][i - 1];
            add_arc(a, machine_orders[m][i], g.processing[a]);
        }
    for (int k = 0; k < inst.channels; ++k)
        for (size_t i = 1; i < channel_orders[k].size(); ++i) {
            const int a = channel_orders[k][i - 1];
            add_arc(n + a, n + channel_orders[k][i], g.edges[a].q);
        }

    std::vector<Time> start(activities, 0);
    std::vector<int> frontier;
    for (int a = 0; a < activities; ++a)
        if (indegree[a] == 0) frontier.push_back(a);
    int visited = 0;
    while (!frontier.empty()) {
        const int a = frontier.back();
        frontier.pop_back();
        ++visited;
        for (const auto& [b, w] : arcs[a]) {
            start[b] = std::max(start[b], start[a] + w);
            if (--indegree[b] == 0) frontier.push_back(b);
        }
    }
    if (visited != activities)
        throw InconsistentOrderError("resource sequences contradict precedence: no consistent start times");

    Schedule s;
    s.tasks.resize(n);
    s.flows.resize(f_count);
    for (int j = 0; j < n; ++j) s.tasks[j] = {placement[j], start[j]};
    for (int e = 0; e < f_count; ++e) s.flows[e] = {flow_channel[e], start[n + e]};
    s.makespan = makespan(inst, s);
    return s;
}

// Every task on machine 1 in topological order, every transfer internal. The
// reference plan any scheme must beat to be worth multiple machines.
inline Schedule single_machine_baseline(const Instance& inst) {
    Instance serial = inst;
    serial.machines = 1;
    serial.channels = std::max(inst.channels, 1);
    serial.t_max = std::numeric_limits<Time>::max() / 4;
    std::vector<int> placement(inst.graph.task_count(), 1);
    std::vector<std::vector<TaskId>> machine_orders = {topo_order(inst.graph)};
    std::vector<std::vector<int>> channel_orders(serial.channels);
    Schedule s = earliest_start_schedule(serial, placement, machine_orders, channel_orders);
    s.makespan = makespan(inst, s);
    return s;
}

inline Time single_machine_baseline_makespan(const JobGraph& g) {
    Instance inst{g, 1, 1, 0};
    inst.t_max = std::numeric_limits<Time>::max() / 4;
    return single_machine_baseline(inst).makespan;
}

// Horizon that accommodates the serial baseline plus every transfer in its
// slower mode; any placement's earliest-start schedule fits below it.
inline Time default_horizon(const JobGraph& g) {
    Time h = single_machine_baseline_makespan(g);
    for (const Edge& e : g.edges) h += std::max(e.q, e.r);
    return h;
}

inline double normalized_makespan(const Instance& inst, const Schedule& s) {
    const FeasibilityReport report = check_feasible(inst, s);
    if (!report.feasible) throw InfeasibleScheduleError("cannot normalize infeasible schedule: " + report.message());
    return static_cast<double>(makespan(inst, s)) /
           static_cast<double>(single_machine_baseline_makespan(inst.graph));
}

}  // namespace dagsched
