#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dagsched/errors.hpp"
#include "dagsched/heuristics.hpp"
#include "dagsched/instance.hpp"
#include "dagsched/instgen.hpp"
#include "dagsched/schedule.hpp"
#include "dagsched/solver.hpp"

namespace dagsched {

enum class Scheme { Random, List, GList, Partition, Exact, ExactPlain };

inline const char* to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::Random: return "random";
        case Scheme::List: return "list";
        case Scheme::GList: return "glist";
        case Scheme::Partition: return "partition";
        case Scheme::Exact: return "exact";
        case Scheme::ExactPlain: return "exact-plain";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(const std::string& name) {
    for (Scheme s : {Scheme::Random, Scheme::List, Scheme::GList, Scheme::Partition, Scheme::Exact,
                     Scheme::ExactPlain})
        if (name == to_string(s)) return s;
    return std::nullopt;
}

struct SchemeResult {
    Schedule schedule;
    std::string status;            // ok | optimal | incumbent
    std::int64_t nodes = -1;       // -1: not a tree search
    double wall_time_ms = 0.0;
};

// Runs one scheme on one instance. Exact schemes warm-start from the
// best-effort greedy and differ only in which pruning strategies are active;
// limit fields of `options` pass through, the strategy toggles do not.
inline SchemeResult run_scheme(Scheme scheme, const Instance& inst, std::uint64_t seed,
                               const SolveOptions& options = {}) {
    SchemeResult out;
    if (scheme == Scheme::Exact || scheme == Scheme::ExactPlain) {
        SolveOptions opt = options;
        const bool on = scheme == Scheme::Exact;
        opt.enable_chain_pruning = on;
        opt.enable_interval_pruning = on;
        opt.enable_symmetry_breaking = on;
        const SolveResult result = solve_exact(inst, opt, schedule_glist(inst));
        out.schedule = result.schedule;
        out.status = to_string(result.report.status);
        out.nodes = result.report.nodes_explored;
        out.wall_time_ms = result.report.wall_time_ms;
        return out;
    }
    const auto started = std::chrono::steady_clock::now();
    switch (scheme) {
        case Scheme::Random: out.schedule = schedule_random(inst, seed); break;
        case Scheme::List: out.schedule = schedule_list(inst); break;
        case Scheme::GList: out.schedule = schedule_glist(inst); break;
        default: out.schedule = schedule_partition(inst); break;
    }
    out.status = "ok";
    out.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return out;
}

struct BenchConfig {
    GenParams params;                  // generator settings; `machines` is overridden by the sweep
    std::string instance_dir;          // when set, *.json files replace generated instances
    std::vector<int> machine_sweep = {1};
    std::vector<Scheme> schemes = {Scheme::Exact};
    int count = 1;
    std::uint64_t base_seed = 1;
    SolveOptions solver;               // limits + deterministic reporting for exact schemes
};

struct BenchRow {
    std::string instance_id;
    std::uint64_t seed = 0;
    std::string scheme;
    int machines = 0;
    int channels = 0;
    Time makespan = -1;                // -1: failed row
    double normalized_makespan = -1.0;
    std::int64_t nodes_explored = -1;  // -1: blank (heuristic or failed row)
    std::string status;
    std::int64_t wall_time_ms = 0;
};

inline constexpr const char* kBenchCsvHeader =
    "instance_id,seed,scheme,machines,channels,makespan,normalized_makespan,nodes_explored,status,wall_time_ms";

namespace detail {

struct BenchJob {
    std::string id;
    std::uint64_t seed;
    Instance instance;
};

inline std::vector<BenchJob> bench_jobs(const BenchConfig& config) {
    std::vector<BenchJob> jobs;
    if (!config.instance_dir.empty()) {
        std::vector<std::filesystem::path> paths;
        for (const auto& entry : std::filesystem::directory_iterator(config.instance_dir))
            if (entry.path().extension() == ".json") paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& path : paths) jobs.push_back({path.stem().string(), 0, read_instance(path)});
        return jobs;
    }
    for (int idx = 0; idx < config.count; ++idx) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(idx);
        Instance inst = generate(config.params, seed);
        jobs.push_back({"n" + std::to_string(config.params.task_count) + "_s" + std::to_string(seed), seed,
                        std::move(inst)});
    }
    return jobs;
}

}  // namespace detail

// One row per (instance, scheme, machine count), sorted by that key. A row
// that throws is recorded with status "error" and blank measurements; the
// campaign always completes.
inline std::vector<BenchRow> run_bench(const BenchConfig& config) {
    if (config.instance_dir.empty() && config.count < 1)
        throw InvalidParamsError("bench: instance count must be >= 1");
    if (config.schemes.empty()) throw InvalidParamsError("bench: scheme list must not be empty");
    if (config.machine_sweep.empty()) throw InvalidParamsError("bench: machine sweep must not be empty");
    for (int m : config.machine_sweep)
        if (m < 1) throw InvalidParamsError("bench: machine counts must be >= 1");

    std::vector<BenchRow> rows;
    for (const detail::BenchJob& job : detail::bench_jobs(config)) {
        const Time baseline = single_machine_baseline_makespan(job.instance.graph);
        for (int m : config.machine_sweep) {
            Instance inst = job.instance;
            inst.machines = m;
            for (Scheme scheme : config.schemes) {
                BenchRow row;
                row.instance_id = job.id;
                row.seed = job.seed;
                row.scheme = to_string(scheme);
                row.machines = m;
                row.channels = inst.channels;
                try {
                    const SchemeResult result = run_scheme(scheme, inst, job.seed, config.solver);
                    row.makespan = result.schedule.makespan;
                    row.normalized_makespan = static_cast<double>(row.makespan) / static_cast<double>(baseline);
                    row.nodes_explored = result.nodes;
                    row.status = result.status;
                    row.wall_time_ms =
                        config.solver.deterministic ? 0 : static_cast<std::int64_t>(std::llround(result.wall_time_ms));
                } catch (const std::exception&) {
                    row.status = "error";
                }
                rows.push_back(std::move(row));
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        return std::tie(a.instance_id, a.scheme, a.machines) < std::tie(b.instance_id, b.scheme, b.machines);
    });
    return rows;
}

namespace detail {

inline std::string csv_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.6f", value);
    return buffer;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace detail

inline void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << kBenchCsvHeader << "\n";
    for (const BenchRow& row : rows) {
        out << row.instance_id << "," << row.seed << "," << row.scheme << "," << row.machines << ","
            << row.channels << ",";
        if (row.makespan >= 0) out << row.makespan;
        out << ",";
        if (row.normalized_makespan >= 0) out << detail::csv_double(row.normalized_makespan);
        out << ",";
        if (row.nodes_explored >= 0) out << row.nodes_explored;
        out << "," << row.status << "," << row.wall_time_ms << "\n";
    }
    if (!out) throw SinkFailureError("write_bench_csv: stream write failed");
}

inline std::vector<BenchRow> read_bench_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kBenchCsvHeader)
        throw ParseError("bench csv: missing or mismatched header");
    std::vector<BenchRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 10)
            throw ParseError("bench csv: expected 10 fields, got " + std::to_string(fields.size()));
        try {
            BenchRow row;
            row.instance_id = fields[0];
            row.seed = std::stoull(fields[1]);
            row.scheme = fields[2];
            row.machines = std::stoi(fields[3]);
            row.channels = std::stoi(fields[4]);
            if (!fields[5].empty()) row.makespan = std::stoll(fields[5]);
            if (!fields[6].empty()) row.normalized_makespan = std::stod(fields[6]);
            if (!fields[7].empty()) row.nodes_explored = std::stoll(fields[7]);
            row.status = fields[8];
            row.wall_time_ms = std::stoll(fields[9]);
            rows.push_back(std::move(row));
        } catch (const std::invalid_argument&) {
            throw ParseError("bench csv: malformed numeric field in: " + line);
        } catch (const std::out_of_range&) {
            throw ParseError("bench csv: numeric field out of range in: " + line);
        }
    }
    return rows;
}

struct AggregateRow {
    std::string scheme;
    int key = 0;  // machine count or task-count bucket
    double mean = 0.0;
    std::int64_t rows = 0;

    bool operator==(const AggregateRow&) const = default;
};

// Mean normalized makespan per (scheme, machines); failed rows are skipped.
inline std::vector<AggregateRow> aggregate_normalized(const std::vector<BenchRow>& rows) {
    std::map<std::pair<std::string, int>, std::pair<double, std::int64_t>> acc;
    for (const BenchRow& row : rows) {
        if (row.normalized_makespan < 0) continue;
        auto& [sum, count] = acc[{row.scheme, row.machines}];
        sum += row.normalized_makespan;
        ++count;
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, value] : acc)
        out.push_back({key.first, key.second, value.first / static_cast<double>(value.second), value.second});
    return out;
}

namespace detail {

// Task count baked into generated ids as "n<tasks>_s<seed>"; foreign ids
// have no bucket.
inline int task_bucket(const std::string& instance_id) {
    if (instance_id.size() < 2 || instance_id[0] != 'n') return -1;
    size_t end = 1;
    while (end < instance_id.size() && std::isdigit(static_cast<unsigned char>(instance_id[end]))) ++end;
    if (end == 1 || end == instance_id.size() || instance_id[end] != '_') return -1;
    return std::stoi(instance_id.substr(1, end - 1));
}

}  // namespace detail

// Mean explored nodes per (scheme, task count) over tree-search rows.
inline std::vector<AggregateRow> aggregate_nodes(const std::vector<BenchRow>& rows) {
    std::map<std::pair<std::string, int>, std::pair<double, std::int64_t>> acc;
    for (const BenchRow& row : rows) {
        if (row.nodes_explored < 0) continue;
        const int bucket = detail::task_bucket(row.instance_id);
        if (bucket < 0) continue;
        auto& [sum, count] = acc[{row.scheme, bucket}];
        sum += static_cast<double>(row.nodes_explored);
        ++count;
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, value] : acc)
        out.push_back({key.first, key.second, value.first / static_cast<double>(value.second), value.second});
    return out;
}

inline void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& key_name,
                                const std::string& mean_name, std::ostream& out) {
    out << "scheme," << key_name << "," << mean_name << ",rows\n";
    for (const AggregateRow& row : rows)
        out << row.scheme << "," << row.key << "," << detail::csv_double(row.mean) << "," << row.rows << "\n";
    if (!out) throw SinkFailureError("write_aggregate_csv: stream write failed");
}

}  // namespace dagsched
