#include "dagsched/dag.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "dagsched/rng.hpp"
#include "test_util.hpp"

namespace dagsched {
namespace {

JobGraph chain_graph() {
    // 0 -(q=4, r=1)-> 1
    return {{2, 3}, {{0, 1, 4, 1}}};
}

JobGraph fork_join_graph() {
    // 0 -> {1, 2} -> 3, all transfers (q=2, r=0)
    return {{1, 4, 4, 1}, {{0, 1, 2, 0}, {0, 2, 2, 0}, {1, 3, 2, 0}, {2, 3, 2, 0}}};
}

bool has_violation(const ValidationReport& report, GraphViolation code) {
    return std::any_of(report.violations.begin(), report.violations.end(),
                       [code](const auto& v) { return v.first == code; });
}

TEST(Validate, AcceptsWellFormedGraphs) {
    EXPECT_TRUE(validate(chain_graph()).ok);
    EXPECT_TRUE(validate(fork_join_graph()).ok);
    EXPECT_TRUE(validate(JobGraph{{5}, {}}).ok);
}

TEST(Validate, FlagsNonpositiveDuration) {
    const JobGraph g{{2, 0}, {{0, 1, 1, 1}}};
    const auto report = validate(g);
    EXPECT_FALSE(report.ok);
    EXPECT_TRUE(has_violation(report, GraphViolation::NonpositiveDuration));
}

TEST(Validate, FlagsCycle) {
    const JobGraph g{{1, 1, 1}, {{0, 1, 1, 1}, {1, 2, 1, 1}, {2, 0, 1, 1}}};
    const auto report = validate(g);
    EXPECT_FALSE(report.ok);
    EXPECT_TRUE(has_violation(report, GraphViolation::Cycle));
}

TEST(Validate, FlagsSelfLoopDuplicateAndNegativeWeight) {
    const JobGraph g{{1, 1}, {{0, 0, 1, 1}, {0, 1, -3, 0}, {0, 1, 2, 2}, {0, 1, 2, 2}}};
    const auto report = validate(g);
    EXPECT_TRUE(has_violation(report, GraphViolation::SelfLoop));
    EXPECT_TRUE(has_violation(report, GraphViolation::NegativeWeight));
    EXPECT_TRUE(has_violation(report, GraphViolation::DuplicateEdge));
}

TEST(Validate, FlagsInvalidTaskId) {
    const JobGraph g{{1, 1}, {{0, 7, 1, 1}}};
    EXPECT_TRUE(has_violation(validate(g), GraphViolation::InvalidTaskId));
}

TEST(TopoOrder, ChainAndTieBreaks) {
    EXPECT_EQ(topo_order(chain_graph()), (std::vector<TaskId>{0, 1}));
    EXPECT_EQ(topo_order(fork_join_graph()), (std::vector<TaskId>{0, 1, 2, 3}));
}

TEST(TopoOrder, TiesByAscendingIdNotEdgeOrder) {
    // Roots {2, 0, 1} all ready at once; ascending id wins.
    const JobGraph g{{1, 1, 1, 1}, {{2, 3, 1, 1}, {0, 3, 1, 1}, {1, 3, 1, 1}}};
    EXPECT_EQ(topo_order(g), (std::vector<TaskId>{0, 1, 2, 3}));
}

TEST(TopoOrder, HandlesBackwardIdEdges) {
    // Acyclic but 2 -> 1 runs against id order.
    const JobGraph g{{1, 1, 1}, {{0, 2, 1, 1}, {2, 1, 1, 1}}};
    EXPECT_EQ(topo_order(g), (std::vector<TaskId>{0, 2, 1}));
}

TEST(TopoOrder, ThrowsOnCycle) {
    const JobGraph g{{1, 1}, {{0, 1, 1, 1}, {1, 0, 1, 1}}};
    EXPECT_THROW(topo_order(g), CyclicGraphError);
}

TEST(CriticalPath, ChainUsesCheaperTransferMode) {
    // 2 + min(4, 1) + 3
    EXPECT_EQ(critical_path_bound(chain_graph()), 6);
}

TEST(CriticalPath, IndependentTasksGiveMaxProcessing) {
    EXPECT_EQ(critical_path_bound(JobGraph{{5, 7}, {}}), 7);
}

TEST(CriticalPath, ForkJoinMatchesPathEnumeration) {
    const JobGraph g = fork_join_graph();
    // Oracle: enumerate the four source-to-sink paths explicitly.
    Time best = 0;
    for (const std::vector<TaskId>& path :
         {std::vector<TaskId>{0, 1, 3}, std::vector<TaskId>{0, 2, 3}, std::vector<TaskId>{0, 1},
          std::vector<TaskId>{0, 2}}) {
        Time length = 0;
        for (size_t i = 0; i < path.size(); ++i) {
            length += g.processing[path[i]];
            if (i + 1 < path.size()) {
                for (const Edge& e : g.edges)
                    if (e.u == path[i] && e.v == path[i + 1]) length += std::min(e.q, e.r);
            }
        }
        best = std::max(best, length);
    }
    EXPECT_EQ(best, 6);
    EXPECT_EQ(critical_path_bound(g), best);
}

TEST(CriticalPath, TailsIncludeOwnProcessing) {
    const auto tails = critical_tails(fork_join_graph());
    EXPECT_EQ(tails[3], 1);
    EXPECT_EQ(tails[1], 5);  // 4 + min(2,0) + 1
    EXPECT_EQ(tails[0], 6);
}

TEST(Reachability, TransitiveClosure) {
    const auto reach = reachability(fork_join_graph());
    EXPECT_TRUE(reach[0][3]);
    EXPECT_TRUE(reach[0][1]);
    EXPECT_FALSE(reach[1][2]);
    EXPECT_FALSE(reach[3][0]);
    EXPECT_FALSE(reach[0][0]);
}

TEST(EquivalentSiblings, SymmetricForkBranches) {
    const auto classes = equivalent_siblings(fork_join_graph());
    ASSERT_EQ(classes.size(), 1u);
    EXPECT_EQ(classes[0], (std::vector<TaskId>{1, 2}));
}

TEST(EquivalentSiblings, BrokenByProcessingTime) {
    JobGraph g = fork_join_graph();
    g.processing[2] = 5;
    EXPECT_TRUE(equivalent_siblings(g).empty());
}

TEST(EquivalentSiblings, BrokenByEdgeWeights) {
    JobGraph g = fork_join_graph();
    g.edges[1].q = 9;  // 0 -> 2 transfer differs from 0 -> 1
    EXPECT_TRUE(equivalent_siblings(g).empty());
}

TEST(EquivalentSiblings, AgreesWithPairwiseDefinition) {
    // Oracle: direct pairwise comparison of predecessor/successor profiles.
    Rng rng(20260814);
    for (int round = 0; round < 200; ++round) {
        const JobGraph g = testing::random_graph(rng);
        const int n = g.task_count();
        auto profile = [&g](TaskId j) {
            std::vector<std::tuple<TaskId, Time, Time>> preds, succs;
            for (const Edge& e : g.edges) {
                if (e.v == j) preds.emplace_back(e.u, e.q, e.r);
                if (e.u == j) succs.emplace_back(e.v, e.q, e.r);
            }
            std::sort(preds.begin(), preds.end());
            std::sort(succs.begin(), succs.end());
            return std::make_pair(preds, succs);
        };
        std::vector<std::vector<bool>> same(n, std::vector<bool>(n, false));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                same[a][b] = g.processing[a] == g.processing[b] && profile(a) == profile(b);
        const auto classes = equivalent_siblings(g);
        std::vector<int> cls(n, -1);
        for (size_t c = 0; c < classes.size(); ++c)
            for (TaskId j : classes[c]) cls[j] = static_cast<int>(c);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                const bool grouped = cls[a] >= 0 && cls[a] == cls[b];
                EXPECT_EQ(grouped, same[a][b]) << "tasks " << a << "," << b << " round " << round;
            }
    }
}

TEST(CriticalPath, LowerBoundsEveryFeasibleSchedule) {
    Rng rng(7);
    for (int round = 0; round < 300; ++round) {
        const Instance inst = testing::random_instance(rng);
        const auto inputs = testing::random_consistent_inputs(rng, inst);
        const Schedule s =
            earliest_start_schedule(inst, inputs.placement, inputs.machine_orders, inputs.channel_orders);
        ASSERT_TRUE(check_feasible(inst, s).feasible);
        EXPECT_LE(critical_path_bound(inst.graph), s.makespan);
    }
}

}  // namespace
}  // namespace dagsched
