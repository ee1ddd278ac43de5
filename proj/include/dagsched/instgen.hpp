#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dagsched/dag.hpp"
#include "dagsched/errors.hpp"
#include "dagsched/instance.hpp"
#include "dagsched/rng.hpp"
#include "dagsched/schedule.hpp"

namespace dagsched {

struct Range {
    Time lo = 0;
    Time hi = 0;
};

struct GenParams {
    int task_count = 10;
    int layers = 3;
    double edge_probability = 0.35;
    Range p_range{1, 100};
    Range q_range{1, 50};
    Range r_range{0, 0};
    int machines = 1;
    int channels = 1;
};

namespace detail {

inline void check_gen_params(const GenParams& params) {
    auto fail = [](const std::string& what) { throw InvalidParamsError("generate: " + what); };
    if (params.task_count < 1) fail("task_count must be >= 1");
    if (params.layers < 1) fail("layers must be >= 1");
    if (params.layers > params.task_count) fail("layers must not exceed task_count");
    if (params.edge_probability < 0.0 || params.edge_probability > 1.0)
        fail("edge_probability must lie in [0,1]");
    if (params.p_range.lo < 1 || params.p_range.lo > params.p_range.hi)
        fail("p_range must be nonempty with lower bound >= 1");
    if (params.q_range.lo < 0 || params.q_range.lo > params.q_range.hi)
        fail("q_range must be nonempty with nonnegative bounds");
    if (params.r_range.lo < 0 || params.r_range.lo > params.r_range.hi)
        fail("r_range must be nonempty with nonnegative bounds");
    if (params.machines < 1) fail("machines must be >= 1");
    if (params.channels < 1) fail("channels must be >= 1");
}

}  // namespace detail

// Seeded layered-DAG generator. Tasks are numbered layer by layer (the first
// task_count % layers layers hold one extra task). Draw order is pinned so a
// (params, seed) pair reproduces the same instance everywhere: processing
// times in task order, then each candidate cross-layer edge (u,v) in
// lexicographic order -- a coin flip followed, when the edge is kept, by its
// q and r -- and finally one repair edge per still-isolated task in task
// order (uniform later-layer target, or uniform earlier-layer source for
// last-layer tasks).
inline Instance generate(const GenParams& params, std::uint64_t seed) {
    detail::check_gen_params(params);
    Rng rng(seed);
    const int n = params.task_count;
    const int layer_count = params.layers;

    std::vector<int> layer_of(n);
    {
        const int base = n / layer_count;
        const int extra = n % layer_count;
        int next = 0;
        for (int layer = 0; layer < layer_count; ++layer) {
            const int size = base + (layer < extra ? 1 : 0);
            for (int i = 0; i < size; ++i) layer_of[next++] = layer;
        }
    }

    Instance inst;
    inst.machines = params.machines;
    inst.channels = params.channels;
    JobGraph& g = inst.graph;
    g.processing.resize(n);
    for (int j = 0; j < n; ++j) g.processing[j] = rng.uniform_int(params.p_range.lo, params.p_range.hi);

    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (layer_of[u] >= layer_of[v]) continue;
            if (!rng.bernoulli(params.edge_probability)) continue;
            const Time q = rng.uniform_int(params.q_range.lo, params.q_range.hi);
            const Time r = rng.uniform_int(params.r_range.lo, params.r_range.hi);
            g.edges.push_back({u, v, q, r});
        }
    }

    if (layer_count > 1) {
        std::vector<char> incident(n, 0);
        for (const Edge& e : g.edges) incident[e.u] = incident[e.v] = 1;
        for (int j = 0; j < n; ++j) {
            if (incident[j]) continue;
            std::vector<TaskId> pool;
            const bool forward = layer_of[j] < layer_count - 1;
            for (int other = 0; other < n; ++other)
                if (forward ? layer_of[other] > layer_of[j] : layer_of[other] < layer_of[j])
                    pool.push_back(other);
            const TaskId pick = pool[rng.uniform_int(0, static_cast<Time>(pool.size()) - 1)];
            const Time q = rng.uniform_int(params.q_range.lo, params.q_range.hi);
            const Time r = rng.uniform_int(params.r_range.lo, params.r_range.hi);
            if (forward)
                g.edges.push_back({j, pick, q, r});
            else
                g.edges.push_back({pick, j, q, r});
            incident[j] = incident[pick] = 1;
        }
    }

    inst.t_max = default_horizon(g);
    return inst;
}

// Fixed 6-task / 8-edge fixture: one source feeding two symmetric two-task
// branches (with shortcut edges) that join in one sink. Small enough for the
// exhaustive solver, rich enough to exercise channels and sibling symmetry.
inline Instance example_instance() {
    Instance inst;
    inst.graph.processing = {2, 4, 3, 4, 3, 2};
    inst.graph.edges = {
        {0, 1, 2, 0}, {0, 3, 2, 0},  // source -> branch heads
        {1, 2, 3, 1}, {3, 4, 3, 1},  // within branches
        {2, 5, 2, 0}, {4, 5, 2, 0},  // branch tails -> sink
        {0, 2, 4, 0}, {0, 4, 4, 0},  // shortcuts past the branch heads
    };
    inst.machines = 2;
    inst.channels = 1;
    inst.t_max = default_horizon(inst.graph);
    return inst;
}

namespace detail {

// Shared strict-JSON plumbing for the two file kinds ("instance", "schedule").
struct JsonReader {
    const char* kind;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(std::string(kind) + ": " + what); }

    Time integer_field(const nlohmann::json& owner, const char* field, const std::string& where) const {
        if (!owner.contains(field)) fail(where + ": missing field '" + field + "'");
        const auto& value = owner.at(field);
        if (!value.is_number_integer()) fail(where + ": field '" + field + "' must be an integer");
        return value.get<Time>();
    }

    void reject_unknown_fields(const nlohmann::json& object, std::initializer_list<const char*> known,
                               const std::string& where) const {
        for (const auto& item : object.items()) {
            bool ok = false;
            for (const char* name : known) ok = ok || item.key() == name;
            if (!ok) fail(where + ": unknown field '" + item.key() + "'");
        }
    }

    nlohmann::json parse(std::istream& in) const {
        try {
            return nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            fail(e.what());
        }
    }
};

}  // namespace detail

inline void write_instance(const Instance& inst, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["version"] = 1;
    doc["machines"] = inst.machines;
    doc["channels"] = inst.channels;
    doc["t_max"] = inst.t_max;
    doc["tasks"] = nlohmann::ordered_json::array();
    for (int j = 0; j < inst.graph.task_count(); ++j)
        doc["tasks"].push_back({{"id", j}, {"p", inst.graph.processing[j]}});
    doc["edges"] = nlohmann::ordered_json::array();
    for (const Edge& e : inst.graph.edges)
        doc["edges"].push_back({{"u", e.u}, {"v", e.v}, {"q", e.q}, {"r", e.r}});
    out << doc.dump(2) << '\n';
}

inline void write_instance(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("instance: cannot open '" + path.string() + "' for writing");
    write_instance(inst, out);
}

inline Instance read_instance(std::istream& in) {
    const detail::JsonReader reader{"instance"};
    const nlohmann::json doc = reader.parse(in);
    if (!doc.is_object()) reader.fail("top level must be an object");
    reader.reject_unknown_fields(doc, {"version", "machines", "channels", "t_max", "tasks", "edges"},
                                 "top level");
    if (reader.integer_field(doc, "version", "top level") != 1)
        reader.fail("unsupported version (expected 1)");

    Instance inst;
    inst.machines = static_cast<int>(reader.integer_field(doc, "machines", "top level"));
    inst.channels = static_cast<int>(reader.integer_field(doc, "channels", "top level"));
    if (inst.machines < 1) reader.fail("field 'machines' must be >= 1");
    if (inst.channels < 1) reader.fail("field 'channels' must be >= 1");

    if (!doc.contains("tasks") || !doc.at("tasks").is_array()) reader.fail("missing field 'tasks' (array)");
    const auto& tasks = doc.at("tasks");
    const int n = static_cast<int>(tasks.size());
    inst.graph.processing.assign(n, 0);
    std::vector<char> seen(n, 0);
    for (const auto& entry : tasks) {
        if (!entry.is_object()) reader.fail("tasks: entries must be objects");
        reader.reject_unknown_fields(entry, {"id", "p"}, "tasks");
        const Time id = reader.integer_field(entry, "id", "tasks");
        if (id < 0 || id >= n) reader.fail("tasks: ids must be dense 0-based");
        if (seen[static_cast<size_t>(id)]) reader.fail("tasks: duplicate id " + std::to_string(id));
        seen[static_cast<size_t>(id)] = 1;
        inst.graph.processing[static_cast<size_t>(id)] = reader.integer_field(entry, "p", "tasks");
    }

    if (!doc.contains("edges") || !doc.at("edges").is_array()) reader.fail("missing field 'edges' (array)");
    for (const auto& entry : doc.at("edges")) {
        if (!entry.is_object()) reader.fail("edges: entries must be objects");
        reader.reject_unknown_fields(entry, {"u", "v", "q", "r"}, "edges");
        Edge e;
        e.u = static_cast<TaskId>(reader.integer_field(entry, "u", "edges"));
        e.v = static_cast<TaskId>(reader.integer_field(entry, "v", "edges"));
        e.q = reader.integer_field(entry, "q", "edges");
        e.r = reader.integer_field(entry, "r", "edges");
        inst.graph.edges.push_back(e);
    }

    const ValidationReport report = validate(inst.graph);
    if (!report.ok) throw ValidationFailedError("instance graph invalid: " + report.message());

    const Time baseline = single_machine_baseline_makespan(inst.graph);
    if (doc.contains("t_max")) {
        inst.t_max = reader.integer_field(doc, "t_max", "top level");
        if (inst.t_max < baseline)
            reader.fail("field 't_max' must be >= the serial baseline (" + std::to_string(baseline) + ")");
    } else {
        inst.t_max = default_horizon(inst.graph);
    }
    return inst;
}

inline Instance read_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("instance: cannot open '" + path.string() + "'");
    return read_instance(in);
}

inline void write_schedule(const Schedule& s, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["version"] = 1;
    doc["tasks"] = nlohmann::ordered_json::array();
    for (const TaskPlacement& t : s.tasks) doc["tasks"].push_back({{"machine", t.machine}, {"start", t.start}});
    doc["flows"] = nlohmann::ordered_json::array();
    for (const FlowPlacement& f : s.flows) doc["flows"].push_back({{"channel", f.channel}, {"start", f.start}});
    doc["makespan"] = s.makespan;
    out << doc.dump(2) << '\n';
}

inline void write_schedule(const Schedule& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("schedule: cannot open '" + path.string() + "' for writing");
    write_schedule(s, out);
}

inline Schedule read_schedule(std::istream& in) {
    const detail::JsonReader reader{"schedule"};
    const nlohmann::json doc = reader.parse(in);
    if (!doc.is_object()) reader.fail("top level must be an object");
    reader.reject_unknown_fields(doc, {"version", "tasks", "flows", "makespan"}, "top level");
    if (reader.integer_field(doc, "version", "top level") != 1) reader.fail("unsupported version (expected 1)");
    Schedule s;
    if (!doc.contains("tasks") || !doc.at("tasks").is_array()) reader.fail("missing field 'tasks' (array)");
    for (const auto& entry : doc.at("tasks")) {
        if (!entry.is_object()) reader.fail("tasks: entries must be objects");
        reader.reject_unknown_fields(entry, {"machine", "start"}, "tasks");
        s.tasks.push_back({static_cast<int>(reader.integer_field(entry, "machine", "tasks")),
                           reader.integer_field(entry, "start", "tasks")});
    }
    if (!doc.contains("flows") || !doc.at("flows").is_array()) reader.fail("missing field 'flows' (array)");
    for (const auto& entry : doc.at("flows")) {
        if (!entry.is_object()) reader.fail("flows: entries must be objects");
        reader.reject_unknown_fields(entry, {"channel", "start"}, "flows");
        s.flows.push_back({static_cast<int>(reader.integer_field(entry, "channel", "flows")),
                           reader.integer_field(entry, "start", "flows")});
    }
    s.makespan = reader.integer_field(doc, "makespan", "top level");
    return s;
}

inline Schedule read_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("schedule: cannot open '" + path.string() + "'");
    return read_schedule(in);
}

}  // namespace dagsched
