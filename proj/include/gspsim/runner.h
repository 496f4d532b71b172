#ifndef GSPSIM_RUNNER_H
#define GSPSIM_RUNNER_H

#include <string>
#include <vector>

#include "gspsim/metrics.h"
#include "gspsim/scenario.h"

namespace gspsim {

struct RunReport {
    std::string name;
    SummaryStats stats;
    std::vector<std::string> csv_paths;  // every requested output, written atomically
    std::string config_echo;             // canonical scenario text
    double wall_seconds = 0;
};

// Runs one scenario deterministically and writes the requested CSVs into
// out_dir. Internal simulator faults surface as std::runtime_error carrying
// the tail of the event trace.
RunReport run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

struct SweepResult {
    std::vector<RunReport> reports;
    std::string combined_csv;  // path of the merged comparison table
};

// One run per value of a single scalar config field. Seeds are shared unless
// increment_seed is set, in which case run i uses base seed + i.
SweepResult sweep(const ScenarioConfig& base, const std::string& axis,
                  const std::vector<std::string>& values, const std::string& out_dir,
                  bool increment_seed);

// Recomputes summary statistics from previously written CSVs.
SummaryStats report_from_dir(const std::string& dir);

std::string summary_csv_header();
std::string summary_csv_row(const SummaryStats& s);

}  // namespace gspsim

#endif
