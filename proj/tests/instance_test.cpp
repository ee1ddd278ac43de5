#include "dagsched/instgen.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "test_util.hpp"

namespace dagsched {
namespace {

bool same_instance(const Instance& a, const Instance& b) {
    if (a.machines != b.machines || a.channels != b.channels || a.t_max != b.t_max) return false;
    if (a.graph.processing != b.graph.processing) return false;
    if (a.graph.edge_count() != b.graph.edge_count()) return false;
    for (int e = 0; e < a.graph.edge_count(); ++e) {
        const Edge &x = a.graph.edges[e], &y = b.graph.edges[e];
        if (x.u != y.u || x.v != y.v || x.q != y.q || x.r != y.r) return false;
    }
    return true;
}

// Layer of each task under the documented numbering: consecutive blocks, the
// first task_count % layers blocks one larger.
std::vector<int> layer_assignment(int tasks, int layers) {
    std::vector<int> layer_of(tasks);
    const int base = tasks / layers, extra = tasks % layers;
    int next = 0;
    for (int layer = 0; layer < layers; ++layer)
        for (int i = 0; i < base + (layer < extra ? 1 : 0); ++i) layer_of[next++] = layer;
    return layer_of;
}

TEST(Generate, DeterministicInParamsAndSeed) {
    GenParams params;
    params.machines = 3;
    params.channels = 2;
    const Instance a = generate(params, 7);
    const Instance b = generate(params, 7);
    EXPECT_TRUE(same_instance(a, b));
    EXPECT_EQ(instance_hash(a), instance_hash(b));
    const Instance c = generate(params, 8);
    EXPECT_FALSE(same_instance(a, c));
}

TEST(Generate, SingleTaskHasNoEdges) {
    GenParams params;
    params.task_count = 1;
    params.layers = 1;
    const Instance inst = generate(params, 3);
    EXPECT_EQ(inst.graph.task_count(), 1);
    EXPECT_EQ(inst.graph.edge_count(), 0);
    EXPECT_GE(inst.graph.processing[0], 1);
}

TEST(Generate, SingleLayerYieldsIndependentTasks) {
    GenParams params;
    params.task_count = 5;
    params.layers = 1;
    params.edge_probability = 1.0;
    const Instance inst = generate(params, 11);
    EXPECT_EQ(inst.graph.edge_count(), 0);
}

TEST(Generate, EdgesClimbLayersAndWeightsStayInRange) {
    GenParams params;  // defaults: 10 tasks, 3 layers
    const auto layer_of = layer_assignment(params.task_count, params.layers);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Instance inst = generate(params, seed);
        EXPECT_TRUE(validate(inst.graph).ok);
        EXPECT_EQ(inst.t_max, default_horizon(inst.graph));
        for (Time p : inst.graph.processing) {
            EXPECT_GE(p, 1);
            EXPECT_LE(p, 100);
        }
        for (const Edge& e : inst.graph.edges) {
            EXPECT_LT(layer_of[e.u], layer_of[e.v]);
            EXPECT_GE(e.q, 1);
            EXPECT_LE(e.q, 50);
            EXPECT_EQ(e.r, 0);
        }
    }
}

TEST(Generate, RepairsIsolatedTasks) {
    GenParams params;
    params.task_count = 6;
    params.layers = 3;
    params.edge_probability = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Instance inst = generate(params, seed);
        std::vector<int> degree(6, 0);
        for (const Edge& e : inst.graph.edges) {
            ++degree[e.u];
            ++degree[e.v];
        }
        for (int j = 0; j < 6; ++j) EXPECT_GE(degree[j], 1) << "seed " << seed << " task " << j;
        EXPECT_TRUE(validate(inst.graph).ok);
    }
}

TEST(Generate, RejectsBadParams) {
    const GenParams base;
    auto expect_invalid = [](GenParams params) { EXPECT_THROW(generate(params, 1), InvalidParamsError); };
    GenParams p = base;
    p.task_count = 0;
    expect_invalid(p);
    p = base;
    p.layers = 11;  // > task_count
    expect_invalid(p);
    p = base;
    p.edge_probability = 1.5;
    expect_invalid(p);
    p = base;
    p.p_range = {0, 10};
    expect_invalid(p);
    p = base;
    p.q_range = {-1, 5};
    expect_invalid(p);
    p = base;
    p.r_range = {4, 2};
    expect_invalid(p);
    p = base;
    p.machines = 0;
    expect_invalid(p);
    p = base;
    p.channels = 0;
    expect_invalid(p);
}

TEST(ExampleInstance, ShapeAndValidity) {
    const Instance inst = example_instance();
    EXPECT_EQ(inst.graph.task_count(), 6);
    EXPECT_EQ(inst.graph.edge_count(), 8);
    EXPECT_EQ(inst.machines, 2);
    EXPECT_EQ(inst.channels, 1);
    EXPECT_TRUE(validate(inst.graph).ok);
    // Serial run: sum of p plus the two r=1 hand-off gaps inside the branches.
    EXPECT_EQ(single_machine_baseline_makespan(inst.graph), 20);
    EXPECT_EQ(inst.t_max, default_horizon(inst.graph));
    EXPECT_EQ(inst.t_max, 42);
}

TEST(RoundTrip, WriteReadIdentity) {
    Rng rng(2024);
    for (int round = 0; round < 60; ++round) {
        const Instance original = testing::random_instance(rng);
        std::stringstream buffer;
        write_instance(original, buffer);
        const Instance reread = read_instance(buffer);
        EXPECT_TRUE(same_instance(original, reread)) << "round " << round;
    }
    std::stringstream buffer;
    write_instance(example_instance(), buffer);
    EXPECT_TRUE(same_instance(example_instance(), read_instance(buffer)));
}

TEST(RoundTrip, WriteIsByteDeterministic) {
    const Instance inst = generate(GenParams{}, 42);
    std::stringstream a, b;
    write_instance(inst, a);
    write_instance(inst, b);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Read, DefaultsHorizonWhenAbsent) {
    std::stringstream doc(R"({"version": 1, "machines": 2, "channels": 1,
        "tasks": [{"id": 0, "p": 2}, {"id": 1, "p": 3}],
        "edges": [{"u": 0, "v": 1, "q": 4, "r": 1}]})");
    const Instance inst = read_instance(doc);
    EXPECT_EQ(inst.t_max, default_horizon(inst.graph));
    EXPECT_EQ(inst.t_max, 10);  // serial baseline 6 (r=1 gap) + max(q,r) 4
}

TEST(Read, AcceptsTasksInAnyOrder) {
    std::stringstream doc(R"({"version": 1, "machines": 1, "channels": 1,
        "tasks": [{"id": 1, "p": 3}, {"id": 0, "p": 2}], "edges": []})");
    const Instance inst = read_instance(doc);
    EXPECT_EQ(inst.graph.processing, (std::vector<Time>{2, 3}));
}

TEST(Read, RejectsMalformedDocuments) {
    auto expect_parse_error = [](const char* text) {
        std::stringstream doc(text);
        EXPECT_THROW(read_instance(doc), ParseError) << text;
    };
    expect_parse_error("{");
    expect_parse_error("[]");
    expect_parse_error(R"({"version": 2, "machines": 1, "channels": 1, "tasks": [], "edges": []})");
    expect_parse_error(R"({"machines": 1, "channels": 1, "tasks": [], "edges": []})");
    expect_parse_error(R"({"version": 1, "channels": 1, "tasks": [], "edges": []})");
    expect_parse_error(R"({"version": 1, "machines": 0, "channels": 1, "tasks": [], "edges": []})");
    expect_parse_error(R"({"version": 1, "machines": 1, "channels": 1, "tasks": [], "edges": [], "extra": 0})");
    expect_parse_error(
        R"({"version": 1, "machines": 1, "channels": 1, "tasks": [{"id": 0, "p": 1, "x": 2}], "edges": []})");
    expect_parse_error(
        R"({"version": 1, "machines": 1, "channels": 1, "tasks": [{"id": 0, "p": 1.5}], "edges": []})");
    expect_parse_error(  // ids must be dense 0-based
        R"({"version": 1, "machines": 1, "channels": 1,
            "tasks": [{"id": 0, "p": 1}, {"id": 2, "p": 1}], "edges": []})");
    expect_parse_error(  // duplicate id
        R"({"version": 1, "machines": 1, "channels": 1,
            "tasks": [{"id": 0, "p": 1}, {"id": 0, "p": 2}], "edges": []})");
    expect_parse_error(  // q must be an integer, not a string
        R"({"version": 1, "machines": 1, "channels": 1,
            "tasks": [{"id": 0, "p": 1}, {"id": 1, "p": 1}],
            "edges": [{"u": 0, "v": 1, "q": "-3", "r": 0}]})");
    expect_parse_error(  // t_max below the serial baseline
        R"({"version": 1, "machines": 1, "channels": 1, "t_max": 1,
            "tasks": [{"id": 0, "p": 2}], "edges": []})");
}

TEST(Read, RejectsInvalidGraphs) {
    auto expect_validation_error = [](const char* text) {
        std::stringstream doc(text);
        EXPECT_THROW(read_instance(doc), ValidationFailedError) << text;
    };
    expect_validation_error(  // negative transfer weight
        R"({"version": 1, "machines": 1, "channels": 1,
            "tasks": [{"id": 0, "p": 1}, {"id": 1, "p": 1}],
            "edges": [{"u": 0, "v": 1, "q": -3, "r": 0}]})");
    expect_validation_error(  // nonpositive processing time
        R"({"version": 1, "machines": 1, "channels": 1, "tasks": [{"id": 0, "p": 0}], "edges": []})");
    expect_validation_error(  // edge endpoint out of range
        R"({"version": 1, "machines": 1, "channels": 1, "tasks": [{"id": 0, "p": 1}],
            "edges": [{"u": 0, "v": 3, "q": 1, "r": 0}]})");
    expect_validation_error(  // cycle
        R"({"version": 1, "machines": 1, "channels": 1,
            "tasks": [{"id": 0, "p": 1}, {"id": 1, "p": 1}],
            "edges": [{"u": 0, "v": 1, "q": 1, "r": 0}, {"u": 1, "v": 0, "q": 1, "r": 0}]})");
}

TEST(Read, PathOverloadsRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "dagsched_instance_test.json";
    const Instance inst = example_instance();
    write_instance(inst, path);
    EXPECT_TRUE(same_instance(inst, read_instance(path)));
    std::filesystem::remove(path);
    EXPECT_THROW(read_instance(path), ParseError);
}

TEST(ScheduleIo, WriteReadIdentity) {
    Schedule s;
    s.tasks = {{1, 0}, {2, 6}};
    s.flows = {{1, 2}, {0, 7}};
    s.makespan = 9;
    std::stringstream buffer;
    write_schedule(s, buffer);
    const Schedule back = read_schedule(buffer);
    ASSERT_EQ(back.tasks.size(), 2u);
    ASSERT_EQ(back.flows.size(), 2u);
    EXPECT_EQ(back.tasks[1].machine, 2);
    EXPECT_EQ(back.tasks[1].start, 6);
    EXPECT_EQ(back.flows[0].channel, 1);
    EXPECT_EQ(back.flows[1].channel, kVirtualChannel);
    EXPECT_EQ(back.makespan, 9);
}

TEST(ScheduleIo, RejectsForeignAndMissingFields) {
    const auto expect_parse_error = [](const std::string& text) {
        std::istringstream in(text);
        EXPECT_THROW(read_schedule(in), ParseError) << text;
    };
    expect_parse_error(R"({"version": 1, "tasks": [], "flows": []})");                     // no makespan
    expect_parse_error(R"({"version": 2, "tasks": [], "flows": [], "makespan": 0})");     // bad version
    expect_parse_error(R"({"version": 1, "tasks": [], "flows": [], "makespan": 0, "x": 1})");
    expect_parse_error(R"({"version": 1, "tasks": [{"machine": 1}], "flows": [], "makespan": 0})");
    expect_parse_error(R"({"version": 1, "tasks": [{"machine": 1, "start": 0, "id": 0}],
                           "flows": [], "makespan": 1})");
    expect_parse_error("not json");
}

TEST(ScheduleIo, PathOverloadsRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "dagsched_schedule_test.json";
    Schedule s;
    s.tasks = {{1, 0}};
    s.makespan = 5;
    write_schedule(s, path);
    const Schedule back = read_schedule(path);
    EXPECT_EQ(back.tasks.size(), 1u);
    EXPECT_EQ(back.makespan, 5);
    std::filesystem::remove(path);
    EXPECT_THROW(read_schedule(path), ParseError);
}

}  // namespace
}  // namespace dagsched
