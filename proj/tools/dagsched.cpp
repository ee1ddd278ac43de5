#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dagsched/bench.hpp"
#include "dagsched/dag.hpp"
#include "dagsched/errors.hpp"
#include "dagsched/heuristics.hpp"
#include "dagsched/ilp.hpp"
#include "dagsched/instgen.hpp"
#include "dagsched/schedule.hpp"
#include "dagsched/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct GenArgs {
    int tasks = 10;
    int count = 1;
    std::uint64_t seed = 1;
    int machines = 1;
    int channels = 1;
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    dagsched::GenParams params;
    params.task_count = args.tasks;
    params.machines = args.machines;
    params.channels = args.channels;
    std::filesystem::create_directories(args.out);
    for (int idx = 0; idx < args.count; ++idx) {
        const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(idx);
        const dagsched::Instance inst = dagsched::generate(params, seed);
        const auto path = std::filesystem::path(args.out) /
                          ("n" + std::to_string(args.tasks) + "_s" + std::to_string(seed) + ".json");
        dagsched::write_instance(inst, path);
    }
    std::cout << "wrote " << args.count << " instance(s) to " << args.out << "\n";
    return kExitOk;
}

struct SolveArgs {
    std::string instance_file;
    std::string scheme = "exact";
    std::uint64_t seed = 1;
    std::int64_t node_limit = 0;
    std::int64_t time_limit_ms = 0;
    bool deterministic = false;
    std::string out;
};

int cmd_solve(const SolveArgs& args) {
    const auto scheme = dagsched::parse_scheme(args.scheme);
    if (!scheme) {
        std::cerr << "unknown scheme '" << args.scheme << "'\n";
        return kExitUsage;
    }
    const dagsched::Instance inst = dagsched::read_instance(std::filesystem::path(args.instance_file));
    dagsched::SolveOptions options;
    options.node_limit = args.node_limit;
    options.time_limit_ms = args.time_limit_ms;
    options.deterministic = args.deterministic;
    const dagsched::SchemeResult result = dagsched::run_scheme(*scheme, inst, args.seed, options);

    std::ostream* sink = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) throw dagsched::SinkFailureError("solve: cannot open '" + args.out + "' for writing");
        sink = &file;
    }
    dagsched::write_schedule(result.schedule, *sink);
    std::ostream& report = args.out.empty() ? std::cerr : std::cout;
    report << "scheme=" << args.scheme << " status=" << result.status << " makespan=" << result.schedule.makespan;
    if (result.nodes >= 0) report << " nodes=" << result.nodes;
    if (!args.deterministic)
        report << " wall_ms=" << static_cast<std::int64_t>(std::llround(result.wall_time_ms));
    report << "\n";
    return kExitOk;
}

int cmd_check(const std::string& instance_file, const std::string& schedule_file) {
    const dagsched::Instance inst = dagsched::read_instance(std::filesystem::path(instance_file));
    const dagsched::Schedule s = dagsched::read_schedule(std::filesystem::path(schedule_file));
    const dagsched::FeasibilityReport report = dagsched::check_feasible(inst, s);
    for (const auto& [id, detail] : report.violations) std::cout << id << ": " << detail << "\n";
    if (report.feasible) std::cout << "feasible\n";
    return report.feasible ? kExitOk : kExitInfeasible;
}

struct ExportArgs {
    std::string instance_file;
    std::int64_t t_max = 0;  // 0: use the instance horizon
    std::string out;
};

int cmd_export_lp(const ExportArgs& args) {
    const dagsched::Instance inst = dagsched::read_instance(std::filesystem::path(args.instance_file));
    const dagsched::Time horizon = args.t_max > 0 ? args.t_max : inst.t_max;
    const dagsched::IlpModel model = dagsched::build_p2(inst, horizon);
    if (args.out.empty()) {
        dagsched::export_lp(model, std::cout);
    } else {
        dagsched::export_lp(model, args.out);
    }
    std::ostream& table = args.out.empty() ? std::cerr : std::cout;
    std::int64_t total = 0;
    for (const auto& [family, count] : dagsched::constraint_counts(model)) {
        table << family << "," << count << "\n";
        total += count;
    }
    table << "total," << total << "\n";
    return kExitOk;
}

struct BenchArgs {
    int tasks = 10;
    int count = 1;
    std::uint64_t seed = 1;
    std::vector<int> machines = {1};
    int channels = 1;
    std::vector<std::string> schemes = {"exact"};
    std::string instance_dir;
    std::int64_t node_limit = 0;
    std::int64_t time_limit_ms = 0;
    bool deterministic = false;
    std::string out;
};

int cmd_bench(const BenchArgs& args) {
    if (args.deterministic && args.time_limit_ms > 0) {
        std::cerr << "--time-limit breaks reproducibility; drop it or --deterministic\n";
        return kExitUsage;
    }
    dagsched::BenchConfig config;
    config.params.task_count = args.tasks;
    config.params.channels = args.channels;
    config.instance_dir = args.instance_dir;
    config.machine_sweep = args.machines;
    config.count = args.count;
    config.base_seed = args.seed;
    config.solver.node_limit = args.node_limit;
    config.solver.time_limit_ms = args.time_limit_ms;
    config.solver.deterministic = args.deterministic;
    config.schemes.clear();
    for (const std::string& name : args.schemes) {
        const auto scheme = dagsched::parse_scheme(name);
        if (!scheme) {
            std::cerr << "unknown scheme '" << name << "'\n";
            return kExitUsage;
        }
        config.schemes.push_back(*scheme);
    }
    const std::vector<dagsched::BenchRow> rows = dagsched::run_bench(config);
    if (args.out.empty()) {
        dagsched::write_bench_csv(rows, std::cout);
    } else {
        std::ofstream out(args.out);
        if (!out) throw dagsched::SinkFailureError("bench: cannot open '" + args.out + "' for writing");
        dagsched::write_bench_csv(rows, out);
    }
    return kExitOk;
}

int cmd_report(const std::string& csv_file, const std::string& out_dir) {
    std::ifstream in(csv_file);
    if (!in) throw dagsched::ParseError("report: cannot open '" + csv_file + "'");
    const std::vector<dagsched::BenchRow> rows = dagsched::read_bench_csv(in);
    const auto normalized = dagsched::aggregate_normalized(rows);
    const auto nodes = dagsched::aggregate_nodes(rows);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(std::filesystem::path(out_dir) / "mean_normalized_makespan.csv");
        if (!out) throw dagsched::SinkFailureError("report: cannot write mean_normalized_makespan.csv");
        dagsched::write_aggregate_csv(normalized, "machines", "mean_normalized_makespan", out);
    }
    {
        std::ofstream out(std::filesystem::path(out_dir) / "mean_nodes_explored.csv");
        if (!out) throw dagsched::SinkFailureError("report: cannot write mean_nodes_explored.csv");
        dagsched::write_aggregate_csv(nodes, "tasks", "mean_nodes_explored", out);
    }
    dagsched::write_aggregate_csv(normalized, "machines", "mean_normalized_makespan", std::cout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"schedulers and benchmarks for dual-weighted DAG jobs"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate instance files");
    gen_cmd->add_option("--tasks", gen.tasks, "tasks per instance")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--count", gen.count, "number of instances")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "seed of the first instance");
    gen_cmd->add_option("--machines", gen.machines, "machine count stored in the files")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--channels", gen.channels, "channel count stored in the files")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    SolveArgs solve;
    CLI::App* solve_cmd = app.add_subcommand("solve", "schedule one instance");
    solve_cmd->add_option("instance", solve.instance_file, "instance file")->required();
    solve_cmd->add_option("--scheme", solve.scheme, "random|list|glist|partition|exact|exact-plain");
    solve_cmd->add_option("--seed", solve.seed, "seed for the random scheme");
    solve_cmd->add_option("--node-limit", solve.node_limit, "stop the exact search after this many nodes");
    solve_cmd->add_option("--time-limit", solve.time_limit_ms, "stop the exact search after this many ms");
    solve_cmd->add_flag("--deterministic", solve.deterministic, "suppress wall-clock output");
    solve_cmd->add_option("--out", solve.out, "schedule file (default: stdout)");

    std::string check_instance, check_schedule;
    CLI::App* check_cmd = app.add_subcommand("check", "verify a schedule against an instance");
    check_cmd->add_option("instance", check_instance, "instance file")->required();
    check_cmd->add_option("schedule", check_schedule, "schedule file")->required();

    ExportArgs export_args;
    CLI::App* export_cmd = app.add_subcommand("export-lp", "write the integer model in LP text form");
    export_cmd->add_option("instance", export_args.instance_file, "instance file")->required();
    export_cmd->add_option("--t-max", export_args.t_max, "horizon override")->check(CLI::PositiveNumber);
    export_cmd->add_option("--out", export_args.out, "LP file (default: stdout)");

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run a scheme-comparison campaign");
    bench_cmd->add_option("--tasks", bench.tasks, "tasks per generated instance")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--count", bench.count, "number of instances")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench.seed, "base seed");
    bench_cmd->add_option("--machines", bench.machines, "machine counts to sweep")->delimiter(',');
    bench_cmd->add_option("--channels", bench.channels, "channel count")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--scheme", bench.schemes, "schemes to run")->delimiter(',');
    bench_cmd->add_option("--dir", bench.instance_dir, "benchmark *.json instances from this directory");
    bench_cmd->add_option("--node-limit", bench.node_limit, "per-solve node budget");
    bench_cmd->add_option("--time-limit", bench.time_limit_ms, "per-solve wall budget in ms");
    bench_cmd->add_flag("--deterministic", bench.deterministic, "zero wall times for byte-stable CSV");
    bench_cmd->add_option("--out", bench.out, "CSV file (default: stdout)");

    std::string report_csv, report_out = ".";
    CLI::App* report_cmd = app.add_subcommand("report", "aggregate a campaign CSV");
    report_cmd->add_option("csv", report_csv, "campaign CSV file")->required();
    report_cmd->add_option("--out", report_out, "directory for the aggregate CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen);
        if (*solve_cmd) return cmd_solve(solve);
        if (*check_cmd) return cmd_check(check_instance, check_schedule);
        if (*export_cmd) return cmd_export_lp(export_args);
        if (*bench_cmd) return cmd_bench(bench);
        if (*report_cmd) return cmd_report(report_csv, report_out);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
