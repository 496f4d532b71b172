#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gspsim/runner.h"

using namespace gspsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig tiny_scenario() {
    auto r = parse_scenario(
        "name = tiny\n"
        "duration = 3s\n"
        "seed = 5\n"
        "link.capacity = 100Mbit\n"
        "link.buffer = 150kB\n"
        "flows[0].count = 4\n"
        "flows[0].flavor = cubic\n"
        "flows[0].rtt0 = 50ms\n"
        "flows[0].start_window = 200ms\n");
    REQUIRE(r.ok());
    return *r.config;
}

fs::path temp_dir(const std::string& leaf) {
    fs::path dir = fs::temp_directory_path() / "gspsim_tests" / leaf;
    fs::remove_all(dir);
    return dir;
}

// p95 of the delay samples recorded at or after t_from (steady state, past
// the slow-start transient).
double steady_p95(const fs::path& dir, double t_from) {
    std::ifstream in(dir / "delay.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> delays;
    while (std::getline(in, line)) {
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 + 1);
        if (std::stod(line.substr(0, c1)) >= t_from) delays.push_back(std::stod(line.substr(c2 + 1)));
    }
    REQUIRE(!delays.empty());
    return *quantile(delays, 0.95);
}

}  // namespace

TEST_CASE("run_scenario writes every requested output") {
    const fs::path dir = temp_dir("run_outputs");
    RunReport report = run_scenario(tiny_scenario(), dir.string());

    REQUIRE(report.csv_paths.size() == 5);  // delay, drops, util, qlen, summary
    for (const auto& path : report.csv_paths) {
        CAPTURE(path);
        CHECK(fs::exists(path));
        CHECK(fs::file_size(path) > 0);
    }
    CHECK(fs::exists(dir / "config.scn"));
    CHECK(report.stats.mean_utilization > 0.5);
    CHECK(report.stats.mean_delay_s.has_value());
    CHECK(report.wall_seconds > 0.0);

    const std::string summary = slurp((dir / "summary.csv").string());
    CHECK(summary.find(summary_csv_header()) == 0);
}

TEST_CASE("zero-duration scenario produces empty but well-formed outputs") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.duration = SimTime();
    const fs::path dir = temp_dir("zero_duration");
    RunReport report = run_scenario(cfg, dir.string());

    for (const auto& path : report.csv_paths) {
        const std::string text = slurp(path);
        CHECK(text.find(',') != std::string::npos);  // a header row is present
    }
    CHECK_FALSE(report.stats.mean_delay_s.has_value());
    CHECK(report.stats.mean_utilization == 0.0);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    const fs::path dir_a = temp_dir("determinism_a");
    const fs::path dir_b = temp_dir("determinism_b");
    ScenarioConfig cfg = tiny_scenario();
    run_scenario(cfg, dir_a.string());
    run_scenario(cfg, dir_b.string());

    for (const char* name : {"delay.csv", "drops.csv", "util.csv", "qlen.csv", "summary.csv"}) {
        CAPTURE(name);
        CHECK(slurp((dir_a / name).string()) == slurp((dir_b / name).string()));
    }
}

TEST_CASE("report recomputes the summary from the CSVs") {
    const fs::path dir = temp_dir("report");
    RunReport report = run_scenario(tiny_scenario(), dir.string());
    SummaryStats recomputed = report_from_dir(dir.string());

    CHECK(*recomputed.mean_delay_s ==
          doctest::Approx(*report.stats.mean_delay_s).epsilon(1e-6));
    CHECK(*recomputed.median_delay_s ==
          doctest::Approx(*report.stats.median_delay_s).epsilon(1e-6));
    CHECK(recomputed.mean_utilization ==
          doctest::Approx(report.stats.mean_utilization).epsilon(1e-6));
    CHECK(recomputed.drops_overflow == report.stats.drops_overflow);
    CHECK(recomputed.drops_threshold == report.stats.drops_threshold);
}

TEST_CASE("sweep runs one scenario per value and merges the table") {
    const fs::path dir = temp_dir("sweep");
    ScenarioConfig base = tiny_scenario();
    base.duration = SimTime::from_seconds(2);

    SweepResult result = sweep(base, "flows[0].rtt0", {"20ms", "50ms"}, dir.string(), false);
    REQUIRE(result.reports.size() == 2);
    CHECK(result.reports[0].name == "tiny_20ms");
    CHECK(result.reports[1].name == "tiny_50ms");

    const std::string table = slurp(result.combined_csv);
    CHECK(table.find("axis,value,") == 0);
    CHECK(table.find("flows[0].rtt0,20ms,") != std::string::npos);
    CHECK(table.find("flows[0].rtt0,50ms,") != std::string::npos);

    SUBCASE("empty value list is an error") {
        CHECK_THROWS_AS(sweep(base, "flows[0].rtt0", {}, dir.string(), false),
                        std::invalid_argument);
    }
    SUBCASE("non-sweepable axis is an error") {
        CHECK_THROWS_AS(sweep(base, "outputs", {"delay"}, dir.string(), false),
                        std::invalid_argument);
    }
}

TEST_CASE("codel and pie baselines run and keep the queue sane") {
    for (const char* kind : {"codel", "pie"}) {
        CAPTURE(kind);
        ScenarioConfig cfg = tiny_scenario();
        cfg.duration = SimTime::from_seconds(10);
        set_scenario_field(cfg, "aqm.kind", kind);
        set_scenario_field(cfg, "link.buffer", "1MB");
        const fs::path dir = temp_dir(std::string("baseline_") + kind);
        RunReport report = run_scenario(cfg, dir.string());

        CHECK(report.stats.mean_utilization > 0.7);
        // past the slow-start transient the AQM keeps the tail delay well
        // under the 80 ms a full 1 MB buffer would impose
        CHECK(steady_p95(dir, 5.0) < 0.03);
        const int64_t aqm_drops =
            kind == std::string("codel") ? report.stats.drops_codel : report.stats.drops_pie;
        CHECK(aqm_drops > 0);
    }
}

TEST_CASE("gsp basic scenario holds the queue near the threshold") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.duration = SimTime::from_seconds(10);
    set_scenario_field(cfg, "link.buffer", "1MB");
    set_scenario_field(cfg, "aqm.threshold", "10ms");
    set_scenario_field(cfg, "aqm.kind", "gsp_basic");
    const fs::path dir = temp_dir("gsp_basic_smoke");
    RunReport report = run_scenario(cfg, dir.string());

    CHECK(report.stats.drops_threshold > 0);
    CHECK(report.stats.mean_utilization > 0.8);
    // bang-bang around the 10 ms threshold once slow start settles
    CHECK(steady_p95(dir, 5.0) < 0.02);

    // buffer overflow is physical while slow start overshoots; afterwards the
    // threshold drops keep the queue away from the limit
    std::ifstream drops(dir / "drops.csv");
    std::string line;
    std::getline(drops, line);  // header
    while (std::getline(drops, line)) {
        const auto comma = line.find(',');
        const double t = std::stod(line.substr(0, comma));
        if (line.find("overflow") != std::string::npos) CHECK(t < 3.0);
    }
}
