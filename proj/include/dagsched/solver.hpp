#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dagsched/dag.hpp"
#include "dagsched/errors.hpp"
#include "dagsched/instance.hpp"
#include "dagsched/schedule.hpp"

namespace dagsched {

struct SolveOptions {
    bool enable_chain_pruning = true;      // pre-fix orders implied by the dependency graph
    bool enable_interval_pruning = true;   // start-time windows against the incumbent
    bool enable_symmetry_breaking = true;  // machine pin, channel lexicon, sibling priorities
    std::int64_t node_limit = 0;           // 0 = unlimited
    std::int64_t time_limit_ms = 0;        // 0 = unlimited
    bool deterministic = false;            // reporting hint; the search itself is always reproducible
};

enum class SolveStatus { Optimal, FeasibleIncumbent, Infeasible };

inline const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::FeasibleIncumbent: return "incumbent";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

struct PruneCounts {
    std::int64_t bound = 0;        // node lower bound reached the incumbent
    std::int64_t window = 0;       // an activity's start window emptied
    std::int64_t order = 0;        // accumulated orders became contradictory
    std::int64_t symmetry = 0;     // symmetric children suppressed / sibling pairs pre-ordered
    std::int64_t chain_fixed = 0;  // pairs pre-ordered from the dependency graph
};

struct SolveReport {
    SolveStatus status = SolveStatus::Optimal;
    Time best_makespan = 0;
    std::int64_t nodes_explored = 0;
    PruneCounts prunes;
    std::vector<std::pair<std::int64_t, Time>> lb_trajectory;  // (node index, bound)
    std::vector<std::pair<std::int64_t, Time>> ub_trajectory;
    double wall_time_ms = 0.0;
};

struct SolveResult {
    Schedule schedule;
    SolveReport report;
};

// lb: machine-capacity and critical-path floors. ub: the warm start, never
// worse than running everything serially.
inline std::pair<Time, Time> initial_bounds(const Instance& inst, const Schedule& warm) {
    const FeasibilityReport feas = check_feasible(inst, warm);
    if (!feas.feasible) throw InfeasibleWarmStartError("warm start infeasible: " + feas.message());
    const Time total = std::accumulate(inst.graph.processing.begin(), inst.graph.processing.end(), Time{0});
    const Time lb = std::max((total + inst.machines - 1) / inst.machines, critical_path_bound(inst.graph));
    const Time ub = std::min(makespan(inst, warm), single_machine_baseline_makespan(inst.graph));
    return {lb, ub};
}

struct FixedPrecedences {
    std::vector<std::pair<TaskId, TaskId>> task_pairs;  // (u, v): u runs before v in every schedule
    std::vector<std::pair<int, int>> flow_pairs;        // edge indices (e, f): e's transfer before f's
};

// Orders forced by the dependency graph alone: u before v whenever v is
// reachable from u, and flow e before flow f whenever e's consumer is (or
// reaches) f's producer. Both relations are transitively closed by
// construction.
inline FixedPrecedences fixed_precedences(const JobGraph& g) {
    FixedPrecedences fixed;
    const auto reach = reachability(g);
    const int n = g.task_count();
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v && reach[u][v]) fixed.task_pairs.emplace_back(u, v);
    for (int e = 0; e < g.edge_count(); ++e)
        for (int f = 0; f < g.edge_count(); ++f) {
            if (e == f) continue;
            const TaskId handoff = g.edges[e].v, source = g.edges[f].u;
            if (handoff == source || reach[handoff][source]) fixed.flow_pairs.emplace_back(e, f);
        }
    return fixed;
}

struct TimeWindows {
    bool pruned = false;  // some activity has an empty window under this ub
    std::vector<std::pair<Time, Time>> task_windows;
    std::vector<std::pair<Time, Time>> flow_windows;  // transfer charged min(q, r): no placement can beat it
};

// Root-level start-time windows: EST by forward longest path, LST = ub minus
// the activity's duration minus the longest chain that must follow it.
inline TimeWindows tighten_intervals(const Instance& inst, Time ub) {
    const JobGraph& g = inst.graph;
    const int n = g.task_count(), f_count = g.edge_count();
    auto dur_flow = [&g](int e) { return std::min(g.edges[e].q, g.edges[e].r); };

    std::vector<Time> task_est(n, 0), flow_est(f_count, 0);
    std::vector<Time> task_tail(n, 0), flow_tail(f_count, 0);
    const auto order = topo_order(g);
    const auto adj = detail::adjacency(g);
    for (TaskId u : order)
        for (int e : adj.out[u]) {
            flow_est[e] = std::max(flow_est[e], task_est[u] + g.processing[u]);
            task_est[g.edges[e].v] = std::max(task_est[g.edges[e].v], flow_est[e] + dur_flow(e));
        }
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (int e : adj.in[*it]) {
            flow_tail[e] = g.processing[*it] + task_tail[*it];
            task_tail[g.edges[e].u] = std::max(task_tail[g.edges[e].u], dur_flow(e) + flow_tail[e]);
        }

    TimeWindows windows;
    for (int j = 0; j < n; ++j) {
        windows.task_windows.emplace_back(task_est[j], ub - g.processing[j] - task_tail[j]);
        if (windows.task_windows.back().first > windows.task_windows.back().second) windows.pruned = true;
    }
    for (int e = 0; e < f_count; ++e) {
        windows.flow_windows.emplace_back(flow_est[e], ub - dur_flow(e) - flow_tail[e]);
        if (windows.flow_windows.back().first > windows.flow_windows.back().second) windows.pruned = true;
    }
    return windows;
}

struct SymmetryConstraints {
    TaskId pinned_task = 0;  // forced onto machine 1; machines are interchangeable
    bool lexicographic_channels = true;  // a flow may only open the lowest unused channel
    std::vector<std::pair<TaskId, TaskId>> sibling_pairs;  // interchangeable tasks, ordered by id
};

inline SymmetryConstraints symmetry_constraints(const Instance& inst) {
    SymmetryConstraints sym;
    sym.pinned_task = inst.graph.task_count() > 0 ? topo_order(inst.graph)[0] : 0;
    for (const auto& members : equivalent_siblings(inst.graph))
        for (size_t i = 0; i < members.size(); ++i)
            for (size_t j = i + 1; j < members.size(); ++j)
                sym.sibling_pairs.emplace_back(members[i], members[j]);
    return sym;
}

struct BruteForceCaps {
    int max_tasks = 6;
    int max_machines = 3;
    int max_channels = 2;
};

// Exhaustive oracle: every placement x every dependency-consistent order per
// machine x every channel assignment x every chain-consistent order per
// channel, each evaluated at its earliest starts. Deliberately independent of
// the branch-and-bound machinery.
inline Schedule solve_bruteforce(const Instance& inst, const BruteForceCaps& caps = {}) {
    const JobGraph& g = inst.graph;
    const int n = g.task_count();
    if (n > caps.max_tasks || inst.machines > caps.max_machines || inst.channels > caps.max_channels)
        throw TooLargeError("instance exceeds brute-force caps (" + std::to_string(caps.max_tasks) + " tasks, " +
                            std::to_string(caps.max_machines) + " machines, " +
                            std::to_string(caps.max_channels) + " channels)");

    const auto reach = reachability(g);
    Schedule best;
    Time best_makespan = std::numeric_limits<Time>::max();

    std::vector<int> placement(n, 1);
    std::vector<std::vector<TaskId>> machine_orders(inst.machines);
    std::vector<int> external;
    std::vector<int> flow_channel;  // parallel to external
    std::vector<std::vector<int>> channel_orders(inst.channels);

    auto evaluate = [&] {
        try {
            Schedule s = earliest_start_schedule(inst, placement, machine_orders, channel_orders);
            if (s.makespan < best_makespan) {
                best_makespan = s.makespan;
                best = std::move(s);
            }
        } catch (const InconsistentOrderError&) {
            // machine and channel orders deadlock; unrealizable combination
        }
    };

    // Orders of `pool` consistent with `before`, appended to `out`.
    auto permute_orders = [&](auto&& self, std::vector<TaskId>& pool, std::vector<TaskId>& out,
                              auto&& before, auto&& done) -> void {
        if (pool.empty()) {
            done();
            return;
        }
        for (size_t pick = 0; pick < pool.size(); ++pick) {
            const TaskId candidate = pool[pick];
            bool minimal = true;
            for (TaskId other : pool)
                if (other != candidate && before(other, candidate)) minimal = false;
            if (!minimal) continue;
            pool.erase(pool.begin() + static_cast<long>(pick));
            out.push_back(candidate);
            self(self, pool, out, before, done);
            out.pop_back();
            pool.insert(pool.begin() + static_cast<long>(pick), candidate);
        }
    };

    auto enumerate_channel_orders = [&](auto&& self, size_t k, auto&& done) -> void {
        if (k == static_cast<size_t>(inst.channels)) {
            done();
            return;
        }
        std::vector<int> pool;
        for (size_t i = 0; i < external.size(); ++i)
            if (flow_channel[i] == static_cast<int>(k) + 1) pool.push_back(external[i]);
        auto before = [&](int e, int f) {
            return g.edges[e].v == g.edges[f].u || reach[g.edges[e].v][g.edges[f].u];
        };
        permute_orders(permute_orders, pool, channel_orders[k], before, [&] { self(self, k + 1, done); });
    };

    auto enumerate_assignments = [&](auto&& self, size_t i) -> void {
        if (i == external.size()) {
            enumerate_channel_orders(enumerate_channel_orders, 0, evaluate);
            return;
        }
        for (int k = 1; k <= inst.channels; ++k) {
            flow_channel[i] = k;
            self(self, i + 1);
        }
    };

    auto enumerate_machine_orders = [&](auto&& self, int i) -> void {
        if (i == inst.machines) {
            external.clear();
            for (int e = 0; e < g.edge_count(); ++e)
                if (placement[g.edges[e].u] != placement[g.edges[e].v]) external.push_back(e);
            flow_channel.assign(external.size(), 1);
            enumerate_assignments(enumerate_assignments, 0);
            return;
        }
        std::vector<TaskId> pool;
        for (int j = 0; j < n; ++j)
            if (placement[j] == i + 1) pool.push_back(j);
        auto before = [&](TaskId a, TaskId b) { return reach[a][b]; };
        permute_orders(permute_orders, pool, machine_orders[static_cast<size_t>(i)], before,
                       [&] { self(self, i + 1); });
    };

    auto enumerate_placements = [&](auto&& self, int j) -> void {
        if (j == n) {
            enumerate_machine_orders(enumerate_machine_orders, 0);
            return;
        }
        for (int i = 1; i <= inst.machines; ++i) {
            placement[j] = i;
            self(self, j + 1);
        }
    };
    enumerate_placements(enumerate_placements, 0);
    return best;
}

namespace detail {

// Depth-first branch and bound over placements, channel assignments, and the
// pairwise ordering of activities that share a machine or a channel.
class ExactSolver {
  public:
    ExactSolver(const Instance& inst, const SolveOptions& opt, Schedule incumbent, Time root_lb)
        : inst_(inst),
          opt_(opt),
          g_(inst.graph),
          adj_(adjacency(inst.graph)),
          n_(inst.graph.task_count()),
          f_count_(inst.graph.edge_count()),
          activity_count_(n_ + f_count_),
          reach_(reachability(inst.graph)),
          topo_(topo_order(inst.graph)),
          incumbent_(std::move(incumbent)),
          ub_(incumbent_.makespan),
          root_lb_(root_lb) {
        const Time total = std::accumulate(g_.processing.begin(), g_.processing.end(), Time{0});
        load_lb_ = (total + inst_.machines - 1) / inst_.machines;
        placement_.assign(n_, 0);
        flow_mode_.assign(f_count_, Mode::Open);
        flow_channel_.assign(f_count_, 0);
        task_decided_.assign(static_cast<size_t>(n_) * static_cast<size_t>(n_), 0);
        flow_decided_.assign(static_cast<size_t>(f_count_) * static_cast<size_t>(f_count_), 0);
        arc_out_.assign(activity_count_, {});
        est_.assign(activity_count_, 0);
        static_est_.assign(activity_count_, 0);
        tail_.assign(activity_count_, 0);
        static_key_.assign(activity_count_, 0);
        indegree_.assign(activity_count_, 0);
        kahn_order_.reserve(activity_count_);
        if (opt_.enable_symmetry_breaking) sym_ = symmetry_constraints(inst_);
        report_.lb_trajectory.emplace_back(0, root_lb_);
        report_.ub_trajectory.emplace_back(0, ub_);
    }

    SolveResult run() {
        start_ = std::chrono::steady_clock::now();
        dfs();
        report_.status = limit_hit_ ? SolveStatus::FeasibleIncumbent : SolveStatus::Optimal;
        report_.best_makespan = ub_;
        if (report_.status == SolveStatus::Optimal) report_.lb_trajectory.emplace_back(report_.nodes_explored, ub_);
        report_.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        return {std::move(incumbent_), std::move(report_)};
    }

  private:
    enum class Mode : signed char { Open, Virtual, External };

    // --- durations and decision bookkeeping -------------------------------

    Time dur(int x) const {
        if (x < n_) return g_.processing[x];
        const Edge& e = g_.edges[x - n_];
        switch (flow_mode_[static_cast<size_t>(x - n_)]) {
            case Mode::Virtual: return e.r;
            case Mode::External: return e.q;
            case Mode::Open: break;
        }
        return std::min(e.q, e.r);
    }

    signed char& task_entry(int a, int b) {
        return task_decided_[static_cast<size_t>(a) * static_cast<size_t>(n_) + static_cast<size_t>(b)];
    }
    signed char& flow_entry(int e, int f) {
        return flow_decided_[static_cast<size_t>(e) * static_cast<size_t>(f_count_) + static_cast<size_t>(f)];
    }

    struct Mutation {
        enum Kind : signed char { TaskPair, FlowPair, Arc, FlowMode } kind;
        int a = 0, b = 0;
    };

    void decide_tasks(int a, int b) {  // a runs before b; stored on the (min, max) slot
        task_entry(std::min(a, b), std::max(a, b)) = a < b ? 1 : 2;
        journal_.push_back({Mutation::TaskPair, std::min(a, b), std::max(a, b)});
    }
    void decide_flows(int e, int f) {
        flow_entry(std::min(e, f), std::max(e, f)) = e < f ? 1 : 2;
        journal_.push_back({Mutation::FlowPair, std::min(e, f), std::max(e, f)});
    }
    void push_arc(int x, int y) {
        arc_out_[static_cast<size_t>(x)].push_back(y);
        journal_.push_back({Mutation::Arc, x, y});
    }
    void set_flow_mode(int e, Mode mode, int channel) {
        flow_mode_[static_cast<size_t>(e)] = mode;
        flow_channel_[static_cast<size_t>(e)] = channel;
        journal_.push_back({Mutation::FlowMode, e, 0});
    }

    void rewind(size_t mark) {
        while (journal_.size() > mark) {
            const Mutation m = journal_.back();
            journal_.pop_back();
            switch (m.kind) {
                case Mutation::TaskPair: task_entry(m.a, m.b) = 0; break;
                case Mutation::FlowPair: flow_entry(m.a, m.b) = 0; break;
                case Mutation::Arc: arc_out_[static_cast<size_t>(m.a)].pop_back(); break;
                case Mutation::FlowMode:
                    flow_mode_[static_cast<size_t>(m.a)] = Mode::Open;
                    flow_channel_[static_cast<size_t>(m.a)] = 0;
                    break;
            }
        }
    }

    // --- earliest starts over structural + decision arcs ------------------

    // est[y] = max over arcs x->y of est[x] + dur(x); structural arcs are
    // task->its outgoing flows and flow->its consumer. Returns false on a
    // cycle (contradictory orders).
    bool compute_est(bool include_decisions, std::vector<Time>& est) {
        std::fill(indegree_.begin(), indegree_.end(), 0);
        for (int e = 0; e < f_count_; ++e) {
            ++indegree_[static_cast<size_t>(n_ + e)];
            ++indegree_[static_cast<size_t>(g_.edges[e].v)];
        }
        if (include_decisions)
            for (int x = 0; x < activity_count_; ++x)
                for (int y : arc_out_[static_cast<size_t>(x)]) ++indegree_[static_cast<size_t>(y)];
        kahn_order_.clear();
        std::fill(est.begin(), est.end(), 0);
        for (int x = 0; x < activity_count_; ++x)
            if (indegree_[static_cast<size_t>(x)] == 0) kahn_order_.push_back(x);
        auto relax = [&](int x, int y) {
            est[static_cast<size_t>(y)] = std::max(est[static_cast<size_t>(y)], est[static_cast<size_t>(x)] + dur(x));
            if (--indegree_[static_cast<size_t>(y)] == 0) kahn_order_.push_back(y);
        };
        for (size_t head = 0; head < kahn_order_.size(); ++head) {
            const int x = kahn_order_[head];
            if (x < n_) {
                for (int e : adj_.out[x]) relax(x, n_ + e);
            } else {
                relax(x, g_.edges[x - n_].v);
            }
            if (include_decisions)
                for (int y : arc_out_[static_cast<size_t>(x)]) relax(x, y);
        }
        return kahn_order_.size() == static_cast<size_t>(activity_count_);
    }

    // tail[x] = longest duration chain strictly after x ends; walks the Kahn
    // order of the latest compute_est backwards.
    void compute_tails() {
        std::fill(tail_.begin(), tail_.end(), 0);
        for (auto it = kahn_order_.rbegin(); it != kahn_order_.rend(); ++it) {
            const int x = *it;
            auto pull = [&](int y) {
                tail_[static_cast<size_t>(x)] = std::max(tail_[static_cast<size_t>(x)], dur(y) + tail_[static_cast<size_t>(y)]);
            };
            if (x < n_) {
                for (int e : adj_.out[x]) pull(n_ + e);
            } else {
                pull(g_.edges[x - n_].v);
            }
            for (int y : arc_out_[static_cast<size_t>(x)]) pull(y);
        }
    }

    Time lower_bound() {
        Time lb = std::max(load_lb_, root_lb_);
        for (int x = 0; x < activity_count_; ++x) lb = std::max(lb, est_[static_cast<size_t>(x)] + dur(x));
        std::vector<Time> m_load(static_cast<size_t>(inst_.machines) + 1, 0),
            m_min(static_cast<size_t>(inst_.machines) + 1, std::numeric_limits<Time>::max());
        for (int j = 0; j < n_; ++j) {
            if (placement_[static_cast<size_t>(j)] == 0) continue;
            const auto i = static_cast<size_t>(placement_[static_cast<size_t>(j)]);
            m_load[i] += g_.processing[static_cast<size_t>(j)];
            m_min[i] = std::min(m_min[i], est_[static_cast<size_t>(j)]);
        }
        for (size_t i = 1; i < m_load.size(); ++i)
            if (m_load[i] > 0) lb = std::max(lb, m_min[i] + m_load[i]);
        std::vector<Time> c_load(static_cast<size_t>(inst_.channels) + 1, 0),
            c_min(static_cast<size_t>(inst_.channels) + 1, std::numeric_limits<Time>::max());
        for (int e = 0; e < f_count_; ++e) {
            if (flow_mode_[static_cast<size_t>(e)] != Mode::External || flow_channel_[static_cast<size_t>(e)] == 0)
                continue;
            const auto k = static_cast<size_t>(flow_channel_[static_cast<size_t>(e)]);
            c_load[k] += g_.edges[static_cast<size_t>(e)].q;
            c_min[k] = std::min(c_min[k], est_[static_cast<size_t>(n_ + e)]);
        }
        for (size_t k = 1; k < c_load.size(); ++k)
            if (c_load[k] > 0) lb = std::max(lb, c_min[k] + c_load[k]);
        return lb;
    }

    // --- pairs sharing a resource ------------------------------------------

    bool same_machine(int a, int b) const {
        return placement_[static_cast<size_t>(a)] != 0 && placement_[static_cast<size_t>(a)] == placement_[static_cast<size_t>(b)];
    }
    bool same_channel(int e, int f) const {
        return flow_channel_[static_cast<size_t>(e)] >= 1 && flow_channel_[static_cast<size_t>(e)] == flow_channel_[static_cast<size_t>(f)];
    }

    template <typename Fn>
    void for_each_open_pair(Fn&& fn) {  // undecided pairs on a shared, decided resource
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < n_; ++b)
                if (same_machine(a, b) && task_entry(a, b) == 0) fn(a, b, false);
        for (int e = 0; e < f_count_; ++e)
            for (int f = e + 1; f < f_count_; ++f)
                if (same_channel(e, f) && flow_entry(e, f) == 0) fn(n_ + e, n_ + f, true);
    }

    void decide_activities(int x, int y) {  // x before y (activity ids)
        if (x < n_)
            decide_tasks(x, y);
        else
            decide_flows(x - n_, y - n_);
        push_arc(x, y);
    }

    // --- node processing ----------------------------------------------------

    // Bound checks and (optionally) window deductions; false = prune.
    bool process_node() {
        while (true) {
            if (!compute_est(true, est_)) {
                ++report_.prunes.order;
                return false;
            }
            if (lower_bound() >= ub_) {
                ++report_.prunes.bound;
                return false;
            }
            if (!opt_.enable_interval_pruning) return true;
            compute_tails();
            auto lst = [&](int x) { return ub_ - dur(x) - tail_[static_cast<size_t>(x)]; };
            for (int x = 0; x < activity_count_; ++x)
                if (est_[static_cast<size_t>(x)] > lst(x)) {
                    ++report_.prunes.window;
                    return false;
                }
            bool contradiction = false;
            int forced = 0;
            for_each_open_pair([&](int x, int y, bool) {
                if (contradiction) return;
                const bool x_first_impossible = est_[static_cast<size_t>(x)] + dur(x) > lst(y);
                const bool y_first_impossible = est_[static_cast<size_t>(y)] + dur(y) > lst(x);
                if (x_first_impossible && y_first_impossible) {
                    contradiction = true;
                } else if (x_first_impossible) {
                    decide_activities(y, x);
                    ++forced;
                } else if (y_first_impossible) {
                    decide_activities(x, y);
                    ++forced;
                }
            });
            if (contradiction) {
                ++report_.prunes.window;
                return false;
            }
            if (forced == 0) return true;
        }
    }

    bool out_of_budget() {
        if (limit_hit_) return true;
        if (opt_.node_limit > 0 && report_.nodes_explored >= opt_.node_limit) limit_hit_ = true;
        if (!limit_hit_ && opt_.time_limit_ms > 0 && (report_.nodes_explored & 63) == 0) {
            const auto elapsed =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
            if (elapsed.count() >= opt_.time_limit_ms) limit_hit_ = true;
        }
        return limit_hit_;
    }

    void dfs() {
        if (out_of_budget()) return;
        ++report_.nodes_explored;
        const size_t mark = journal_.size();
        if (process_node()) branch();
        rewind(mark);
    }

    void branch() {
        // Placement phase: tasks in topological order, machines ascending.
        for (TaskId j : topo_) {
            if (placement_[static_cast<size_t>(j)] != 0) continue;
            const bool pinned = opt_.enable_symmetry_breaking && j == sym_.pinned_task;
            const int machine_count = pinned ? 1 : inst_.machines;
            report_.prunes.symmetry += inst_.machines - machine_count;
            for (int i = 1; i <= machine_count; ++i) {
                const size_t child_mark = journal_.size();
                place_task(j, i);
                dfs();
                rewind(child_mark);
                placement_[static_cast<size_t>(j)] = 0;
                if (limit_hit_) return;
            }
            return;
        }
        // Channel phase: external flows in edge order, channels ascending.
        for (int e = 0; e < f_count_; ++e) {
            if (flow_mode_[static_cast<size_t>(e)] != Mode::External || flow_channel_[static_cast<size_t>(e)] != 0)
                continue;
            int allowed = inst_.channels;
            if (opt_.enable_symmetry_breaking) {
                int used = 0;
                for (int f = 0; f < f_count_; ++f) used = std::max(used, flow_channel_[static_cast<size_t>(f)]);
                allowed = std::min(inst_.channels, used + 1);
            }
            report_.prunes.symmetry += inst_.channels - allowed;
            for (int k = 1; k <= allowed; ++k) {
                flow_channel_[static_cast<size_t>(e)] = k;
                dfs();
                flow_channel_[static_cast<size_t>(e)] = 0;
                if (limit_hit_) return;
            }
            return;
        }
        // Sequencing phase. The first node with everything placed initializes
        // the subtree: static selection keys, graph-implied pair orders, and
        // sibling priorities.
        const size_t fix_mark = journal_.size();
        bool did_init = false;
        if (!sequencing_ready_) {
            init_sequencing();
            did_init = true;
            if (!compute_est(true, est_)) {  // sibling arcs contradicted earlier forced orders
                ++report_.prunes.order;
                sequencing_ready_ = false;
                rewind(fix_mark);
                return;
            }
        }

        int best_x = -1, best_y = -1;
        std::tuple<Time, int, int, int> best_key{};
        for_each_open_pair([&](int x, int y, bool is_flow) {
            const auto key =
                std::make_tuple(std::min(static_key_[static_cast<size_t>(x)], static_key_[static_cast<size_t>(y)]),
                                is_flow ? 1 : 0, x, y);
            if (best_x < 0 || key < best_key) {
                best_key = key;
                best_x = x;
                best_y = y;
            }
        });

        if (best_x < 0) {
            record_leaf();
        } else {
            int first = best_x, second = best_y;
            if (std::make_pair(static_key_[static_cast<size_t>(second)], second) <
                std::make_pair(static_key_[static_cast<size_t>(first)], first))
                std::swap(first, second);
            for (int round = 0; round < 2 && !limit_hit_; ++round) {
                const size_t child_mark = journal_.size();
                decide_activities(round == 0 ? first : second, round == 0 ? second : first);
                dfs();
                rewind(child_mark);
            }
        }
        if (did_init) {
            sequencing_ready_ = false;
            rewind(fix_mark);
        }
    }

    void place_task(TaskId j, int machine) {
        placement_[static_cast<size_t>(j)] = machine;
        auto settle = [&](int e) {
            const Edge& edge = g_.edges[static_cast<size_t>(e)];
            if (placement_[static_cast<size_t>(edge.u)] == 0 || placement_[static_cast<size_t>(edge.v)] == 0) return;
            if (placement_[static_cast<size_t>(edge.u)] == placement_[static_cast<size_t>(edge.v)])
                set_flow_mode(e, Mode::Virtual, kVirtualChannel);
            else
                set_flow_mode(e, Mode::External, 0);  // channel branched later
        };
        for (int e : adj_.out[j]) settle(e);
        for (int e : adj_.in[j]) settle(e);
    }

    // One-time setup at the root of each sequencing subtree: static selection
    // keys from the structural network, graph-implied pair orders (already
    // enforced by structural paths, so no arcs), and sibling priorities
    // (arcs; applied only when the siblings' transfers landed on mirrored
    // channels, so reordering them is a pure start swap).
    void init_sequencing() {
        compute_est(false, static_est_);
        for (int x = 0; x < activity_count_; ++x) static_key_[static_cast<size_t>(x)] = static_est_[static_cast<size_t>(x)];
        if (opt_.enable_chain_pruning) {
            for_each_open_pair([&](int x, int y, bool is_flow) {
                if (!is_flow) {
                    if (reach_[static_cast<size_t>(x)][static_cast<size_t>(y)]) {
                        decide_tasks(x, y);
                        ++report_.prunes.chain_fixed;
                    } else if (reach_[static_cast<size_t>(y)][static_cast<size_t>(x)]) {
                        decide_tasks(y, x);
                        ++report_.prunes.chain_fixed;
                    }
                    return;
                }
                const Edge& ee = g_.edges[static_cast<size_t>(x - n_)];
                const Edge& ef = g_.edges[static_cast<size_t>(y - n_)];
                if (ee.v == ef.u || reach_[static_cast<size_t>(ee.v)][static_cast<size_t>(ef.u)]) {
                    decide_flows(x - n_, y - n_);
                    ++report_.prunes.chain_fixed;
                } else if (ef.v == ee.u || reach_[static_cast<size_t>(ef.v)][static_cast<size_t>(ee.u)]) {
                    decide_flows(y - n_, x - n_);
                    ++report_.prunes.chain_fixed;
                }
            });
        }
        if (opt_.enable_symmetry_breaking) {
            for (const auto& [a, b] : sym_.sibling_pairs) {
                if (!same_machine(a, b) || task_entry(a, b) != 0) continue;
                if (!mirrored_channels(a, b)) continue;
                decide_tasks(a, b);
                push_arc(a, b);
                ++report_.prunes.symmetry;
            }
        }
        sequencing_ready_ = true;
    }

    // Swapping a and b must keep every channel's occupancy intact: each
    // common neighbor's two transfers need the same channel.
    bool mirrored_channels(TaskId a, TaskId b) const {
        auto channel_to = [&](TaskId u, TaskId v) {
            for (int e = 0; e < f_count_; ++e)
                if (g_.edges[static_cast<size_t>(e)].u == u && g_.edges[static_cast<size_t>(e)].v == v)
                    return flow_channel_[static_cast<size_t>(e)];
            return -1;
        };
        for (int e : adj_.in[a]) {
            const TaskId u = g_.edges[static_cast<size_t>(e)].u;
            if (flow_channel_[static_cast<size_t>(e)] != channel_to(u, b)) return false;
        }
        for (int e : adj_.out[a]) {
            const TaskId w = g_.edges[static_cast<size_t>(e)].v;
            if (flow_channel_[static_cast<size_t>(e)] != channel_to(b, w)) return false;
        }
        return true;
    }

    void record_leaf() {
        Time value = 0;
        for (int x = 0; x < activity_count_; ++x) value = std::max(value, est_[static_cast<size_t>(x)] + dur(x));
        if (value >= ub_) return;
        ub_ = value;
        incumbent_.tasks.resize(static_cast<size_t>(n_));
        incumbent_.flows.resize(static_cast<size_t>(f_count_));
        for (int j = 0; j < n_; ++j)
            incumbent_.tasks[static_cast<size_t>(j)] = {placement_[static_cast<size_t>(j)], est_[static_cast<size_t>(j)]};
        for (int e = 0; e < f_count_; ++e)
            incumbent_.flows[static_cast<size_t>(e)] = {flow_channel_[static_cast<size_t>(e)],
                                                        est_[static_cast<size_t>(n_ + e)]};
        incumbent_.makespan = value;
        report_.ub_trajectory.emplace_back(report_.nodes_explored, value);
    }

    const Instance& inst_;
    const SolveOptions& opt_;
    const JobGraph& g_;
    Adjacency adj_;
    int n_, f_count_, activity_count_;
    std::vector<std::vector<bool>> reach_;
    std::vector<TaskId> topo_;
    SymmetryConstraints sym_;

    Schedule incumbent_;
    Time ub_;
    Time root_lb_;
    Time load_lb_ = 0;

    std::vector<int> placement_;
    std::vector<Mode> flow_mode_;
    std::vector<int> flow_channel_;
    std::vector<signed char> task_decided_, flow_decided_;
    std::vector<std::vector<int>> arc_out_;
    std::vector<Mutation> journal_;

    std::vector<Time> est_, static_est_, tail_, static_key_;
    std::vector<int> indegree_;
    std::vector<int> kahn_order_;

    bool sequencing_ready_ = false;
    bool limit_hit_ = false;
    SolveReport report_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline SolveResult solve_exact(const Instance& inst, const SolveOptions& options, const Schedule& warm) {
    if (options.node_limit < 0 || options.time_limit_ms < 0)
        throw InvalidParamsError("solve_exact: limits must be nonnegative");
    const ValidationReport graph_report = validate(inst.graph);
    if (!graph_report.ok) throw ValidationFailedError("solve_exact: invalid graph: " + graph_report.message());
    const auto [lb, ub] = initial_bounds(inst, warm);
    (void)ub;

    // Incumbent: the better of the warm start and the serial baseline; ties go
    // to the warm start, and the baseline only counts if it fits the horizon.
    Schedule incumbent = warm;
    incumbent.makespan = makespan(inst, warm);
    Schedule baseline = single_machine_baseline(inst);
    if (baseline.makespan < incumbent.makespan && baseline.makespan <= inst.t_max) incumbent = std::move(baseline);

    detail::ExactSolver solver(inst, options, std::move(incumbent), lb);
    return solver.run();
}

}  // namespace dagsched
