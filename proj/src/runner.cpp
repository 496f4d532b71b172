#include "gspsim/runner.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gspsim/netsim.h"

namespace fs = std::filesystem;

namespace gspsim {

namespace {

std::string fmt_time_s(SimTime t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", t.seconds());
    return buf;
}

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt9(*v) : "nan"; }

const char* drop_reason_name(DropReason r) {
    switch (r) {
        case DropReason::Threshold: return "threshold";
        case DropReason::Overflow: return "overflow";
        case DropReason::CodelMark: return "codel";
        case DropReason::PieMark: return "pie";
    }
    return "?";
}

// Write-then-rename so readers never observe a half-written file.
void write_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

std::vector<OutputKind> effective_outputs(const ScenarioConfig& cfg) {
    if (!cfg.outputs.empty()) return cfg.outputs;
    std::vector<OutputKind> out = {OutputKind::Delay, OutputKind::Drops, OutputKind::Util,
                                   OutputKind::Qlen, OutputKind::Summary};
    if (cfg.aqm.kind == AqmKind::GspAdaptive) out.push_back(OutputKind::Gsp);
    return out;
}

std::string render_output(OutputKind kind, const ScenarioConfig& cfg, const Metrics& m,
                          const SummaryStats& stats) {
    std::ostringstream out;
    switch (kind) {
        case OutputKind::Delay:
            out << "time_s,flow_id,delay_s\n";
            for (const auto& d : m.delays)
                out << fmt_time_s(d.time) << ',' << d.flow_id << ',' << fmt9(d.delay_s) << '\n';
            break;
        case OutputKind::Drops:
            out << "time_s,flow_id,reason\n";
            for (const auto& d : m.drops)
                out << fmt_time_s(d.time) << ',' << d.flow_id << ',' << drop_reason_name(d.reason) << '\n';
            break;
        case OutputKind::Util: {
            out << "window_start_s,utilization\n";
            const auto series = utilization(m.departures, cfg.capacity, cfg.util_window, cfg.duration);
            for (size_t i = 0; i < series.values.size(); ++i) {
                const SimTime start = cfg.util_window * static_cast<int64_t>(i);
                out << fmt_time_s(start) << ',' << fmt9(series.values[i]) << '\n';
            }
            break;
        }
        case OutputKind::Qlen:
            out << "time_s,backlog_bytes\n";
            for (const auto& q : m.qlen_samples)
                out << fmt_time_s(q.time) << ',' << q.backlog_bytes << '\n';
            break;
        case OutputKind::Summary:
            out << summary_csv_header() << '\n' << summary_csv_row(stats) << '\n';
            break;
        case OutputKind::Gsp:
            out << "time_s,interval_s,cumul_time_s\n";
            for (const auto& g : m.gsp_trace)
                out << fmt_time_s(g.time) << ',' << fmt9(g.interval_s) << ',' << fmt9(g.cumul_time_s) << '\n';
            break;
    }
    return out.str();
}

const char* output_filename(OutputKind kind) {
    switch (kind) {
        case OutputKind::Delay: return "delay.csv";
        case OutputKind::Drops: return "drops.csv";
        case OutputKind::Util: return "util.csv";
        case OutputKind::Qlen: return "qlen.csv";
        case OutputKind::Summary: return "summary.csv";
        case OutputKind::Gsp: return "gsp.csv";
    }
    return "?";
}

std::string describe_event_tail(const EventQueue& ev) {
    std::ostringstream out;
    out << "; recent events:";
    for (const auto& e : ev.recent_events())
        out << " [" << fmt_time_s(e.time) << " " << event_kind_name(e.kind) << " #" << e.tie_id << "]";
    return out.str();
}

}  // namespace

std::string summary_csv_header() {
    return "mean_delay_s,median_delay_s,p5_delay_s,p95_delay_s,mean_utilization,"
           "drops_threshold,drops_overflow,drops_codel,drops_pie,empty_fraction";
}

std::string summary_csv_row(const SummaryStats& s) {
    std::ostringstream out;
    out << fmt_opt(s.mean_delay_s) << ',' << fmt_opt(s.median_delay_s) << ','
        << fmt_opt(s.p5_delay_s) << ',' << fmt_opt(s.p95_delay_s) << ','
        << fmt9(s.mean_utilization) << ',' << s.drops_threshold << ',' << s.drops_overflow << ','
        << s.drops_codel << ',' << s.drops_pie << ',' << fmt9(s.empty_fraction);
    return out.str();
}

RunReport run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
    const auto wall_start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    Simulation sim(to_sim_setup(cfg));
    try {
        sim.run();
    } catch (const std::exception& e) {
        throw std::runtime_error("scenario '" + cfg.name + "' aborted: " + e.what() +
                                 describe_event_tail(sim.events()));
    }

    const SummaryStats stats = summarize(sim.metrics(), cfg.capacity, cfg.util_window, cfg.duration);

    RunReport report;
    report.name = cfg.name;
    report.stats = stats;
    report.config_echo = emit_scenario(cfg);

    for (OutputKind kind : effective_outputs(cfg)) {
        const fs::path path = fs::path(out_dir) / output_filename(kind);
        write_atomic(path, render_output(kind, cfg, sim.metrics(), stats));
        report.csv_paths.push_back(path.string());
    }
    write_atomic(fs::path(out_dir) / "config.scn", report.config_echo);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return report;
}

SweepResult sweep(const ScenarioConfig& base, const std::string& axis,
                  const std::vector<std::string>& values, const std::string& out_dir,
                  bool increment_seed) {
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");

    SweepResult result;
    std::ostringstream table;
    table << "axis,value," << summary_csv_header() << '\n';

    for (size_t i = 0; i < values.size(); ++i) {
        ScenarioConfig cfg = base;
        set_scenario_field(cfg, axis, values[i]);
        if (increment_seed) cfg.seed = base.seed + i;

        std::string tag = values[i];
        for (char& ch : tag)
            if (ch == '/' || ch == ' ') ch = '_';
        cfg.name = base.name + "_" + tag;

        const std::string run_dir = (fs::path(out_dir) / cfg.name).string();
        RunReport report = run_scenario(cfg, run_dir);
        table << axis << ',' << values[i] << ',' << summary_csv_row(report.stats) << '\n';
        result.reports.push_back(std::move(report));
    }

    const fs::path combined = fs::path(out_dir) / "sweep.csv";
    write_atomic(combined, table.str());
    result.combined_csv = combined.string();
    return result;
}

namespace {

// Minimal CSV reader: splits a data line into fields; headers are skipped by
// the callers.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    return fields;
}

}  // namespace

SummaryStats report_from_dir(const std::string& dir) {
    SummaryStats s;
    std::string line;

    {
        std::ifstream delay(fs::path(dir) / "delay.csv");
        std::vector<double> delays;
        bool header = true;
        while (std::getline(delay, line)) {
            if (header) { header = false; continue; }
            auto f = split_csv(line);
            if (f.size() == 3) delays.push_back(std::stod(f[2]));
        }
        if (!delays.empty()) {
            double sum = 0;
            for (double d : delays) sum += d;
            s.mean_delay_s = sum / static_cast<double>(delays.size());
            s.median_delay_s = quantile(delays, 0.5);
            s.p5_delay_s = quantile(delays, 0.05);
            s.p95_delay_s = quantile(delays, 0.95);
        }
    }
    {
        std::ifstream util(fs::path(dir) / "util.csv");
        double sum = 0;
        int n = 0;
        bool header = true;
        while (std::getline(util, line)) {
            if (header) { header = false; continue; }
            auto f = split_csv(line);
            if (f.size() == 2) { sum += std::stod(f[1]); ++n; }
        }
        if (n > 0) s.mean_utilization = sum / n;
    }
    {
        std::ifstream drops(fs::path(dir) / "drops.csv");
        bool header = true;
        while (std::getline(drops, line)) {
            if (header) { header = false; continue; }
            auto f = split_csv(line);
            if (f.size() != 3) continue;
            if (f[2] == "threshold") ++s.drops_threshold;
            else if (f[2] == "overflow") ++s.drops_overflow;
            else if (f[2] == "codel") ++s.drops_codel;
            else if (f[2] == "pie") ++s.drops_pie;
        }
    }
    {
        // Tick samples approximate the exact empty-time integration the
        // simulator performs; good enough for offline re-reporting.
        std::ifstream qlen(fs::path(dir) / "qlen.csv");
        int64_t empty = 0, total = 0;
        bool header = true;
        while (std::getline(qlen, line)) {
            if (header) { header = false; continue; }
            auto f = split_csv(line);
            if (f.size() == 2) {
                ++total;
                if (std::stoll(f[1]) == 0) ++empty;
            }
        }
        if (total > 0) s.empty_fraction = static_cast<double>(empty) / static_cast<double>(total);
    }
    return s;
}

}  // namespace gspsim
