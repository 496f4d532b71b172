#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gspsim/aqm.h"
#include "gspsim/runner.h"
#include "gspsim/scenario.h"

using namespace gspsim;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig load_scenario(const std::string& path) {
    ParseResult parsed = parse_scenario(read_file(path));
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors)
            std::cerr << path << ":" << e.line << ": " << (e.key.empty() ? "(line)" : e.key) << ": "
                      << e.message << "\n";
        throw std::runtime_error("scenario has " + std::to_string(parsed.errors.size()) + " error(s)");
    }
    return *parsed.config;
}

void print_report(const RunReport& r) {
    std::cout << "scenario " << r.name << " finished in " << r.wall_seconds << " s\n";
    std::cout << summary_csv_header() << "\n" << summary_csv_row(r.stats) << "\n";
    for (const auto& p : r.csv_paths) std::cout << "wrote " << p << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GSP queue management experiment runner"};
    app.require_subcommand(1);

    // run
    std::string run_file, run_out = "out";
    int64_t run_seed = -1;
    auto* run_cmd = app.add_subcommand("run", "run one scenario file");
    run_cmd->add_option("scenario", run_file, "scenario file")->required();
    run_cmd->add_option("--out", run_out, "output directory");
    run_cmd->add_option("--seed", run_seed, "override the scenario seed");

    // sweep
    std::string sweep_file, sweep_axis, sweep_values, sweep_out = "out", seed_policy = "same";
    auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario once per axis value");
    sweep_cmd->add_option("scenario", sweep_file, "scenario file")->required();
    sweep_cmd->add_option("--axis", sweep_axis, "config key to vary")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory");
    sweep_cmd->add_option("--seed-policy", seed_policy, "same | increment")
        ->check(CLI::IsMember({"same", "increment"}));

    // report
    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "recompute the summary from CSVs");
    report_cmd->add_option("dir", report_dir, "directory with run outputs")->required();

    // sizing
    std::string sz_capacity, sz_rtt, sz_beta;
    auto* sizing_cmd = app.add_subcommand("sizing", "buffer sizing from capacity, RTT and beta");
    sizing_cmd->add_option("--capacity", sz_capacity, "link capacity (e.g. 100Mbit or bytes/s)")->required();
    sizing_cmd->add_option("--rtt", sz_rtt, "propagation RTT (e.g. 100ms)")->required();
    sizing_cmd->add_option("--beta", sz_beta, "multiplicative decrease ratio")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            ScenarioConfig cfg = load_scenario(run_file);
            if (run_seed >= 0) cfg.seed = static_cast<uint64_t>(run_seed);
            print_report(run_scenario(cfg, run_out));
        } else if (*sweep_cmd) {
            ScenarioConfig cfg = load_scenario(sweep_file);
            SweepResult result = sweep(cfg, sweep_axis, split_list(sweep_values), sweep_out,
                                       seed_policy == "increment");
            for (const auto& r : result.reports) print_report(r);
            std::cout << "wrote " << result.combined_csv << "\n";
        } else if (*report_cmd) {
            SummaryStats stats = report_from_dir(report_dir);
            std::cout << summary_csv_header() << "\n" << summary_csv_row(stats) << "\n";
        } else if (*sizing_cmd) {
            const double capacity = static_cast<double>(parse_rate_value(sz_capacity));
            const double rtt0 = parse_time_value(sz_rtt).seconds();
            const double beta = std::stod(sz_beta);
            const BufferSizing s = make_buffer_sizing(capacity, rtt0, beta);
            std::printf("capacity_Bps %.0f\n", s.capacity_bps);
            std::printf("rtt0_s %g\n", s.rtt0);
            std::printf("beta %g\n", s.beta);
            std::printf("delay_budget_s %.9g\n", s.delay_budget_s);
            std::printf("min_buffer_bytes %" PRId64 "\n", s.min_buffer_bytes);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
