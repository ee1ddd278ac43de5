#include "dagsched/bench.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace dagsched {
namespace {

GenParams small_params(int tasks) {
    GenParams params;
    params.task_count = tasks;
    params.layers = 2;
    params.p_range = {1, 8};
    params.q_range = {1, 6};
    params.r_range = {0, 1};
    params.channels = 1;
    return params;
}

BenchConfig small_config() {
    BenchConfig config;
    config.params = small_params(5);
    config.machine_sweep = {1, 2};
    config.schemes = {Scheme::GList, Scheme::Random};
    config.count = 2;
    config.base_seed = 11;
    config.solver.deterministic = true;
    return config;
}

TEST(SchemeNames, RoundTripThroughTheParser) {
    for (Scheme s : {Scheme::Random, Scheme::List, Scheme::GList, Scheme::Partition, Scheme::Exact,
                     Scheme::ExactPlain}) {
        const auto parsed = parse_scheme(to_string(s));
        ASSERT_TRUE(parsed.has_value());
        EXPECT_EQ(*parsed, s);
    }
    EXPECT_FALSE(parse_scheme("greedy").has_value());
    EXPECT_FALSE(parse_scheme("").has_value());
}

TEST(RunScheme, ExactCertifiesAndHeuristicsStayFeasible) {
    Instance inst;
    inst.graph.processing = {2, 3};
    inst.graph.edges = {{0, 1, 4, 1}};
    inst.machines = 2;
    inst.channels = 1;
    inst.t_max = default_horizon(inst.graph);

    const SchemeResult exact = run_scheme(Scheme::Exact, inst, 7);
    EXPECT_EQ(exact.schedule.makespan, 6);
    EXPECT_EQ(exact.status, "optimal");
    EXPECT_GE(exact.nodes, 1);
    const SchemeResult plain = run_scheme(Scheme::ExactPlain, inst, 7);
    EXPECT_EQ(plain.schedule.makespan, 6);
    EXPECT_EQ(plain.status, "optimal");

    for (Scheme s : {Scheme::Random, Scheme::List, Scheme::GList, Scheme::Partition}) {
        const SchemeResult result = run_scheme(s, inst, 7);
        EXPECT_EQ(result.status, "ok");
        EXPECT_EQ(result.nodes, -1);
        EXPECT_TRUE(check_feasible(inst, result.schedule).feasible) << to_string(s);
    }
}

TEST(RunBench, OneRowPerInstanceSchemeAndMachineCount) {
    const std::vector<BenchRow> rows = run_bench(small_config());
    ASSERT_EQ(rows.size(), 8u);  // 2 instances x 2 schemes x 2 machine counts
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto key = [](const BenchRow& r) { return std::tie(r.instance_id, r.scheme, r.machines); };
        EXPECT_LT(key(rows[i - 1]), key(rows[i]));
    }
    std::map<std::string, int> per_instance;
    for (const BenchRow& row : rows) {
        EXPECT_TRUE(row.instance_id == "n5_s11" || row.instance_id == "n5_s12") << row.instance_id;
        EXPECT_EQ(row.seed, row.instance_id == "n5_s11" ? 11u : 12u);
        EXPECT_EQ(row.channels, 1);
        EXPECT_EQ(row.status, "ok");
        EXPECT_EQ(row.nodes_explored, -1);
        EXPECT_EQ(row.wall_time_ms, 0);  // deterministic mode
        EXPECT_GT(row.makespan, 0);
        ++per_instance[row.instance_id];
    }
    EXPECT_EQ(per_instance.size(), 2u);
}

TEST(RunBench, SerialExactRowsNormalizeToOne) {
    BenchConfig config;
    config.params = small_params(5);
    config.params.r_range = {0, 0};  // internal transfers are free, so serial = baseline
    config.machine_sweep = {1};
    config.schemes = {Scheme::Exact};
    config.count = 3;
    config.base_seed = 5;
    config.solver.deterministic = true;
    for (const BenchRow& row : run_bench(config)) {
        EXPECT_EQ(row.status, "optimal");
        EXPECT_DOUBLE_EQ(row.normalized_makespan, 1.0);
    }
}

TEST(RunBench, ExactRowsDominateEveryOtherScheme) {
    BenchConfig config;
    config.params = small_params(5);
    config.machine_sweep = {1, 2};
    config.schemes = {Scheme::Random, Scheme::List, Scheme::GList, Scheme::Partition, Scheme::Exact,
                      Scheme::ExactPlain};
    config.count = 3;
    config.base_seed = 21;
    config.solver.deterministic = true;
    const auto rows = run_bench(config);
    ASSERT_EQ(rows.size(), 3u * 2u * 6u);
    std::map<std::pair<std::string, int>, std::map<std::string, Time>> by_key;
    for (const BenchRow& row : rows) by_key[{row.instance_id, row.machines}][row.scheme] = row.makespan;
    for (const auto& [key, schemes] : by_key) {
        const Time exact = schemes.at("exact");
        EXPECT_EQ(exact, schemes.at("exact-plain"));
        for (const auto& [name, makespan] : schemes) EXPECT_LE(exact, makespan) << name;
    }
    for (const BenchRow& row : rows)
        if (row.scheme == "exact" || row.scheme == "exact-plain") {
            EXPECT_EQ(row.status, "optimal");
            EXPECT_GE(row.nodes_explored, 1);
        }
}

TEST(RunBench, RejectsDegenerateConfigs) {
    BenchConfig config = small_config();
    config.count = 0;
    EXPECT_THROW(run_bench(config), InvalidParamsError);
    config = small_config();
    config.schemes.clear();
    EXPECT_THROW(run_bench(config), InvalidParamsError);
    config = small_config();
    config.machine_sweep = {2, 0};
    EXPECT_THROW(run_bench(config), InvalidParamsError);
}

TEST(RunBench, DirectoryModeIdsRowsByFileStem) {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "bench_dir_test";
    std::filesystem::create_directories(dir);
    write_instance(generate(small_params(4), 1), dir / "alpha.json");
    write_instance(generate(small_params(4), 2), dir / "beta.json");
    BenchConfig config;
    config.instance_dir = dir.string();
    config.machine_sweep = {2};
    config.schemes = {Scheme::GList};
    config.solver.deterministic = true;
    const auto rows = run_bench(config);
    std::filesystem::remove_all(dir);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].instance_id, "alpha");
    EXPECT_EQ(rows[1].instance_id, "beta");
    EXPECT_EQ(rows[0].seed, 0u);
    EXPECT_EQ(rows[0].machines, 2);
}

TEST(Csv, WriteThenReadKeepsEveryField) {
    BenchConfig config = small_config();
    config.schemes = {Scheme::GList, Scheme::Exact};
    const auto rows = run_bench(config);
    std::stringstream buffer;
    write_bench_csv(rows, buffer);
    const auto back = read_bench_csv(buffer);
    ASSERT_EQ(back.size(), rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].instance_id, rows[i].instance_id);
        EXPECT_EQ(back[i].seed, rows[i].seed);
        EXPECT_EQ(back[i].scheme, rows[i].scheme);
        EXPECT_EQ(back[i].machines, rows[i].machines);
        EXPECT_EQ(back[i].channels, rows[i].channels);
        EXPECT_EQ(back[i].makespan, rows[i].makespan);
        EXPECT_NEAR(back[i].normalized_makespan, rows[i].normalized_makespan, 1e-6);
        EXPECT_EQ(back[i].nodes_explored, rows[i].nodes_explored);
        EXPECT_EQ(back[i].status, rows[i].status);
        EXPECT_EQ(back[i].wall_time_ms, rows[i].wall_time_ms);
    }
}

TEST(Csv, DeterministicModeReproducesBytes) {
    const BenchConfig config = small_config();
    std::stringstream first, second;
    write_bench_csv(run_bench(config), first);
    write_bench_csv(run_bench(config), second);
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(first.str().rfind(kBenchCsvHeader, 0), 0u);
}

TEST(Csv, RejectsForeignHeadersAndShapes) {
    std::stringstream bad_header("instance,stuff\n");
    EXPECT_THROW(read_bench_csv(bad_header), ParseError);
    std::stringstream short_row(std::string(kBenchCsvHeader) + "\nonly,three,fields\n");
    EXPECT_THROW(read_bench_csv(short_row), ParseError);
    std::stringstream bad_number(std::string(kBenchCsvHeader) + "\nid,x,glist,1,1,5,1.0,,ok,0\n");
    EXPECT_THROW(read_bench_csv(bad_number), ParseError);
}

TEST(Aggregates, MeansGroupBySchemeAndMachines) {
    std::vector<BenchRow> rows;
    BenchRow row;
    row.scheme = "glist";
    row.machines = 1;
    row.normalized_makespan = 1.0;
    rows.push_back(row);
    row.normalized_makespan = 2.0;
    rows.push_back(row);
    row.machines = 2;
    row.normalized_makespan = 1.25;
    rows.push_back(row);
    row.scheme = "random";
    row.normalized_makespan = -1.0;  // failed row: skipped
    row.status = "error";
    rows.push_back(row);
    const auto table = aggregate_normalized(rows);
    const std::vector<AggregateRow> expected = {{"glist", 1, 1.5, 2}, {"glist", 2, 1.25, 1}};
    EXPECT_EQ(table, expected);
}

TEST(Aggregates, NodeMeansBucketByTaskCount) {
    std::vector<BenchRow> rows;
    BenchRow row;
    row.scheme = "exact";
    row.instance_id = "n5_s1";
    row.nodes_explored = 10;
    rows.push_back(row);
    row.instance_id = "n5_s2";
    row.nodes_explored = 20;
    rows.push_back(row);
    row.instance_id = "n7_s1";
    row.nodes_explored = 40;
    rows.push_back(row);
    row.instance_id = "foreign";  // unbucketable id: skipped
    rows.push_back(row);
    row.instance_id = "n5_s3";
    row.nodes_explored = -1;  // heuristic row: skipped
    rows.push_back(row);
    const auto table = aggregate_nodes(rows);
    const std::vector<AggregateRow> expected = {{"exact", 5, 15.0, 2}, {"exact", 7, 40.0, 1}};
    EXPECT_EQ(table, expected);
}

TEST(Aggregates, ReportingIsAPureFunctionOfTheCsv) {
    BenchConfig config = small_config();
    config.schemes = {Scheme::GList, Scheme::Exact};
    const auto rows = run_bench(config);
    std::stringstream buffer;
    write_bench_csv(rows, buffer);
    const auto reread = read_bench_csv(buffer);
    EXPECT_EQ(aggregate_normalized(reread), aggregate_normalized(reread));  // idempotent on parsed rows
    EXPECT_EQ(aggregate_nodes(rows), aggregate_nodes(reread));
    const auto direct = aggregate_normalized(rows);
    const auto parsed = aggregate_normalized(reread);
    ASSERT_EQ(direct.size(), parsed.size());
    for (size_t i = 0; i < direct.size(); ++i) {
        EXPECT_EQ(direct[i].scheme, parsed[i].scheme);
        EXPECT_EQ(direct[i].key, parsed[i].key);
        EXPECT_EQ(direct[i].rows, parsed[i].rows);
        EXPECT_NEAR(direct[i].mean, parsed[i].mean, 1e-6);  // CSV keeps six decimals
    }

    std::stringstream table;
    write_aggregate_csv(aggregate_normalized(rows), "machines", "mean_normalized_makespan", table);
    EXPECT_EQ(table.str().rfind("scheme,machines,mean_normalized_makespan,rows\n", 0), 0u);
}

}  // namespace
}  // namespace dagsched
