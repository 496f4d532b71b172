#include "gspsim/scenario.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gspsim {

const char* output_kind_name(OutputKind k) {
    switch (k) {
        case OutputKind::Delay: return "delay";
        case OutputKind::Drops: return "drops";
        case OutputKind::Util: return "util";
        case OutputKind::Qlen: return "qlen";
        case OutputKind::Summary: return "summary";
        case OutputKind::Gsp: return "gsp";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& s, const char* what) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": not a number: '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument(std::string(what) + ": trailing junk in '" + s + "'");
    return v;
}

int64_t parse_integer(const std::string& s, const char* what) {
    const double v = parse_number(s, what);
    const auto i = static_cast<int64_t>(std::llround(v));
    if (static_cast<double>(i) != v) throw std::invalid_argument(std::string(what) + ": expected an integer, got '" + s + "'");
    return i;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool looks_like_time(const std::string& s) {
    return ends_with(s, "ns") || ends_with(s, "us") || ends_with(s, "ms") ||
           (ends_with(s, "s") && !ends_with(s, "bps"));
}

}  // namespace

SimTime parse_time_value(const std::string& raw) {
    const std::string s = trim(raw);
    double scale = 1.0;
    std::string num = s;
    if (ends_with(s, "ns")) { scale = 1e-9; num = s.substr(0, s.size() - 2); }
    else if (ends_with(s, "us")) { scale = 1e-6; num = s.substr(0, s.size() - 2); }
    else if (ends_with(s, "ms")) { scale = 1e-3; num = s.substr(0, s.size() - 2); }
    else if (ends_with(s, "s")) { num = s.substr(0, s.size() - 1); }
    return SimTime::from_seconds(parse_number(num, "time") * scale);
}

int64_t parse_bytes_value(const std::string& raw) {
    const std::string s = trim(raw);
    double scale = 1.0;
    std::string num = s;
    if (ends_with(s, "kB")) { scale = 1e3; num = s.substr(0, s.size() - 2); }
    else if (ends_with(s, "MB")) { scale = 1e6; num = s.substr(0, s.size() - 2); }
    else if (ends_with(s, "GB")) { scale = 1e9; num = s.substr(0, s.size() - 2); }
    else if (ends_with(s, "B")) { num = s.substr(0, s.size() - 1); }
    return static_cast<int64_t>(std::llround(parse_number(num, "size") * scale));
}

int64_t parse_rate_value(const std::string& raw) {
    const std::string s = trim(raw);
    double bytes_per_s;
    if (ends_with(s, "Gbit")) bytes_per_s = parse_number(s.substr(0, s.size() - 4), "rate") * 125e6;
    else if (ends_with(s, "Mbit")) bytes_per_s = parse_number(s.substr(0, s.size() - 4), "rate") * 125e3;
    else if (ends_with(s, "kbit")) bytes_per_s = parse_number(s.substr(0, s.size() - 4), "rate") * 125.0;
    else bytes_per_s = parse_number(s, "rate");  // plain bytes per second
    return static_cast<int64_t>(std::llround(bytes_per_s));
}

namespace {

ThresholdSpec parse_threshold(const std::string& value) {
    if (looks_like_time(value)) return ThresholdSpec::delay(parse_time_value(value));
    return ThresholdSpec::bytes(parse_bytes_value(value));
}

AqmKind parse_aqm_kind(const std::string& v) {
    if (v == "taildrop") return AqmKind::TailDrop;
    if (v == "gsp_basic") return AqmKind::GspBasic;
    if (v == "gsp_adaptive") return AqmKind::GspAdaptive;
    if (v == "codel") return AqmKind::Codel;
    if (v == "pie") return AqmKind::Pie;
    throw std::invalid_argument("unknown aqm.kind '" + v + "'");
}

std::vector<OutputKind> parse_outputs(const std::string& v) {
    std::vector<OutputKind> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok == "delay") out.push_back(OutputKind::Delay);
        else if (tok == "drops") out.push_back(OutputKind::Drops);
        else if (tok == "util") out.push_back(OutputKind::Util);
        else if (tok == "qlen") out.push_back(OutputKind::Qlen);
        else if (tok == "summary") out.push_back(OutputKind::Summary);
        else if (tok == "gsp") out.push_back(OutputKind::Gsp);
        else throw std::invalid_argument("unknown output '" + tok + "'");
    }
    return out;
}

// Splits "prefix[i].field" into its parts; returns false when `key` does not
// start with "prefix[".
bool match_indexed(const std::string& key, const std::string& prefix, size_t& index, std::string& field) {
    const std::string open = prefix + "[";
    if (key.compare(0, open.size(), open) != 0) return false;
    const size_t close = key.find(']', open.size());
    if (close == std::string::npos || close + 1 >= key.size() || key[close + 1] != '.')
        throw std::invalid_argument("malformed indexed key '" + key + "'");
    const std::string idx = key.substr(open.size(), close - open.size());
    for (char c : idx)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("malformed index in '" + key + "'");
    if (idx.empty()) throw std::invalid_argument("malformed index in '" + key + "'");
    index = static_cast<size_t>(std::stoull(idx));
    field = key.substr(close + 2);
    return true;
}

template <typename T>
T& at_index(std::vector<T>& v, size_t index, const char* what) {
    if (index > 1000) throw std::invalid_argument(std::string(what) + ": index out of range");
    if (v.size() <= index) v.resize(index + 1);
    return v[index];
}

// Applies one key=value pair. Throws std::invalid_argument on unknown keys or
// malformed values; cross-field validation happens afterwards.
void apply_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
    size_t index = 0;
    std::string field;

    if (key == "name") { c.name = value; return; }
    if (key == "duration") { c.duration = parse_time_value(value); return; }
    if (key == "seed") { c.seed = static_cast<uint64_t>(parse_integer(value, "seed")); return; }
    if (key == "stats_interval") { c.stats_interval = parse_time_value(value); return; }
    if (key == "util_window") { c.util_window = parse_time_value(value); return; }
    if (key == "outputs") { c.outputs = parse_outputs(value); return; }

    if (key == "link.capacity") {
        if (c.capacity.empty()) c.capacity.push_back({SimTime(), 0});
        c.capacity[0] = {SimTime(), parse_rate_value(value)};
        return;
    }
    if (key == "link.buffer") { c.buffer_limit = parse_bytes_value(value); return; }
    if (match_indexed(key, "link.capacity", index, field)) {
        if (index == 0) throw std::invalid_argument("link.capacity[0] is set by link.capacity");
        if (c.capacity.empty()) c.capacity.push_back({SimTime(), 0});
        auto& step = at_index(c.capacity, index, "link.capacity");
        if (field == "at") step.at = parse_time_value(value);
        else if (field == "rate") step.rate_bps = parse_rate_value(value);
        else throw std::invalid_argument("unknown key '" + key + "'");
        return;
    }

    if (match_indexed(key, "flows", index, field)) {
        auto& g = at_index(c.flows, index, "flows");
        if (field == "count") g.count = static_cast<int>(parse_integer(value, "count"));
        else if (field == "flavor") g.flavor = value;
        else if (field == "beta") g.beta = parse_number(value, "beta");
        else if (field == "rtt0") g.rtt0 = parse_time_value(value);
        else if (field == "rtt0_jitter") g.rtt0_jitter = parse_time_value(value);
        else if (field == "start_window") g.start_window = parse_time_value(value);
        else if (field == "start_at") g.start_at = parse_time_value(value);
        else throw std::invalid_argument("unknown key '" + key + "'");
        return;
    }

    if (match_indexed(key, "udp", index, field)) {
        auto& u = at_index(c.udp, index, "udp");
        if (field == "rate") u.rate_bps = parse_rate_value(value);
        else if (field == "packet_size") u.packet_size = static_cast<int32_t>(parse_bytes_value(value));
        else if (field == "start") u.start = parse_time_value(value);
        else if (field == "stop") u.stop = parse_time_value(value);
        else throw std::invalid_argument("unknown key '" + key + "'");
        return;
    }

    if (key == "aqm.kind") { c.aqm.kind = parse_aqm_kind(value); return; }
    if (key == "aqm.threshold") { c.aqm.threshold = parse_threshold(value); return; }
    if (key == "aqm.preset_interval") { c.aqm.preset_interval = parse_time_value(value); return; }
    if (key == "aqm.tau") { c.aqm.tau = parse_time_value(value); return; }
    if (key == "aqm.alpha") { c.aqm.alpha = parse_number(value, "alpha"); return; }
    if (key == "aqm.max_time") { c.aqm.max_time = parse_time_value(value); return; }
    if (key == "aqm.codel_target") { c.aqm.codel.target = parse_time_value(value); return; }
    if (key == "aqm.codel_interval") { c.aqm.codel.interval = parse_time_value(value); return; }
    if (key == "aqm.pie_target") { c.aqm.pie.target = parse_time_value(value); return; }
    if (key == "aqm.pie_update") { c.aqm.pie.update_period = parse_time_value(value); return; }

    throw std::invalid_argument("unknown key '" + key + "'");
}

// Cross-field validation; each error is attributed to the key's line when known.
std::vector<ParseError> validate(const ScenarioConfig& c, const std::map<std::string, int>& key_lines) {
    std::vector<ParseError> errors;
    auto add = [&](const std::string& key, const std::string& message) {
        auto it = key_lines.find(key);
        errors.push_back({it == key_lines.end() ? 0 : it->second, key, message});
    };

    if (c.duration < SimTime()) add("duration", "duration must not be negative");
    if (!key_lines.count("duration")) add("duration", "missing required key");

    if (c.capacity.empty() || c.capacity[0].rate_bps <= 0) {
        add("link.capacity", "missing or non-positive link capacity");
    } else {
        try {
            validate_schedule(c.capacity);
        } catch (const std::exception& e) {
            add("link.capacity", e.what());
        }
    }
    if (c.buffer_limit <= 0) add("link.buffer", "missing or non-positive buffer limit");

    if (c.flows.empty() && c.udp.empty()) add("flows[0].count", "scenario has no traffic sources");

    for (size_t i = 0; i < c.flows.size(); ++i) {
        const auto& g = c.flows[i];
        const std::string p = "flows[" + std::to_string(i) + "].";
        if (g.count < 1) add(p + "count", "flow group needs count >= 1");
        if (g.flavor != "reno" && g.flavor != "cubic") add(p + "flavor", "flavor must be reno or cubic");
        if (g.beta && (*g.beta <= 0.0 || *g.beta > 1.0)) add(p + "beta", "beta must be in (0, 1]");
        if (g.rtt0 <= SimTime()) add(p + "rtt0", "rtt0 must be positive");
        if (g.rtt0_jitter < SimTime()) add(p + "rtt0_jitter", "rtt0_jitter must not be negative");
        if (g.start_window < SimTime()) add(p + "start_window", "start_window must not be negative");
        if (g.start_at < SimTime()) add(p + "start_at", "start_at must not be negative");
    }

    for (size_t i = 0; i < c.udp.size(); ++i) {
        const auto& u = c.udp[i];
        const std::string p = "udp[" + std::to_string(i) + "].";
        if (u.rate_bps <= 0) add(p + "rate", "udp rate must be positive");
        if (u.packet_size <= 0) add(p + "packet_size", "udp packet size must be positive");
        if (u.stop && *u.stop <= u.start) add(p + "stop", "udp stop must be after start");
    }

    if (c.aqm.kind == AqmKind::GspBasic || c.aqm.kind == AqmKind::GspAdaptive) {
        GspConfig g;
        g.threshold = c.aqm.threshold;
        g.preset_interval = c.aqm.preset_interval;
        g.tau = c.aqm.tau;
        g.alpha = c.aqm.alpha;
        g.max_time = c.aqm.max_time;
        g.buffer_limit = c.buffer_limit;
        g.adaptive = c.aqm.kind == AqmKind::GspAdaptive;
        try {
            g.validate();
        } catch (const std::exception& e) {
            add("aqm.threshold", e.what());
        }
    }

    if (c.stats_interval <= SimTime()) add("stats_interval", "stats_interval must be positive");
    if (c.util_window <= SimTime()) add("util_window", "util_window must be positive");
    return errors;
}

std::string fmt_time(SimTime t) {
    const int64_t ns = t.ns();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%lld.%09llds", static_cast<long long>(ns / 1000000000),
                  static_cast<long long>(ns % 1000000000));
    return buf;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ParseResult parse_scenario(const std::string& text) {
    ParseResult result;
    ScenarioConfig config;
    std::vector<ParseError> errors;
    std::map<std::string, int> key_lines;

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({lineno, "", "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            errors.push_back({lineno, "", "empty key"});
            continue;
        }

        auto [it, inserted] = key_lines.emplace(key, lineno);
        if (!inserted) {
            errors.push_back({lineno, key,
                              "duplicate key (lines " + std::to_string(it->second) + " and " +
                                  std::to_string(lineno) + ")"});
            continue;
        }

        try {
            apply_key(config, key, value);
        } catch (const std::exception& e) {
            errors.push_back({lineno, key, e.what()});
        }
    }

    auto more = validate(config, key_lines);
    errors.insert(errors.end(), more.begin(), more.end());

    if (errors.empty()) result.config = std::move(config);
    result.errors = std::move(errors);
    return result;
}

std::string emit_scenario(const ScenarioConfig& c) {
    std::ostringstream out;
    out << "name = " << c.name << "\n";
    out << "duration = " << fmt_time(c.duration) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "stats_interval = " << fmt_time(c.stats_interval) << "\n";
    out << "util_window = " << fmt_time(c.util_window) << "\n";

    if (!c.capacity.empty()) {
        out << "link.capacity = " << c.capacity[0].rate_bps << "\n";
        for (size_t i = 1; i < c.capacity.size(); ++i) {
            out << "link.capacity[" << i << "].at = " << fmt_time(c.capacity[i].at) << "\n";
            out << "link.capacity[" << i << "].rate = " << c.capacity[i].rate_bps << "\n";
        }
    }
    out << "link.buffer = " << c.buffer_limit << "\n";

    for (size_t i = 0; i < c.flows.size(); ++i) {
        const auto& g = c.flows[i];
        const std::string p = "flows[" + std::to_string(i) + "].";
        out << p << "count = " << g.count << "\n";
        out << p << "flavor = " << g.flavor << "\n";
        if (g.beta) out << p << "beta = " << fmt_double(*g.beta) << "\n";
        out << p << "rtt0 = " << fmt_time(g.rtt0) << "\n";
        if (g.rtt0_jitter > SimTime()) out << p << "rtt0_jitter = " << fmt_time(g.rtt0_jitter) << "\n";
        out << p << "start_window = " << fmt_time(g.start_window) << "\n";
        out << p << "start_at = " << fmt_time(g.start_at) << "\n";
    }
    for (size_t i = 0; i < c.udp.size(); ++i) {
        const auto& u = c.udp[i];
        const std::string p = "udp[" + std::to_string(i) + "].";
        out << p << "rate = " << u.rate_bps << "\n";
        out << p << "packet_size = " << u.packet_size << "\n";
        out << p << "start = " << fmt_time(u.start) << "\n";
        if (u.stop) out << p << "stop = " << fmt_time(*u.stop) << "\n";
    }

    out << "aqm.kind = " << aqm_kind_name(c.aqm.kind) << "\n";
    const ThresholdSpec default_threshold;
    if (!(c.aqm.threshold == default_threshold)) {
        if (c.aqm.threshold.mode == ThresholdMode::Delay)
            out << "aqm.threshold = " << fmt_time(c.aqm.threshold.delay_value) << "\n";
        else
            out << "aqm.threshold = " << c.aqm.threshold.byte_value << "\n";
    }
    out << "aqm.preset_interval = " << fmt_time(c.aqm.preset_interval) << "\n";
    out << "aqm.tau = " << fmt_time(c.aqm.tau) << "\n";
    out << "aqm.alpha = " << fmt_double(c.aqm.alpha) << "\n";
    out << "aqm.max_time = " << fmt_time(c.aqm.max_time) << "\n";
    out << "aqm.codel_target = " << fmt_time(c.aqm.codel.target) << "\n";
    out << "aqm.codel_interval = " << fmt_time(c.aqm.codel.interval) << "\n";
    out << "aqm.pie_target = " << fmt_time(c.aqm.pie.target) << "\n";
    out << "aqm.pie_update = " << fmt_time(c.aqm.pie.update_period) << "\n";

    if (!c.outputs.empty()) {
        out << "outputs = ";
        for (size_t i = 0; i < c.outputs.size(); ++i) {
            if (i) out << ",";
            out << output_kind_name(c.outputs[i]);
        }
        out << "\n";
    }
    return out.str();
}

void set_scenario_field(ScenarioConfig& c, const std::string& key, const std::string& value) {
    if (key == "outputs") throw std::invalid_argument("axis 'outputs' is not a scalar field");
    ScenarioConfig changed = c;
    apply_key(changed, key, value);
    auto errors = validate(changed, {});
    // Missing-key complaints do not apply here; the base config was complete.
    for (const auto& e : errors) {
        if (e.message == "missing required key") continue;
        throw std::invalid_argument(e.key + ": " + e.message);
    }
    c = std::move(changed);
}

SimSetup to_sim_setup(const ScenarioConfig& c) {
    SimSetup s;
    s.duration = c.duration;
    s.seed = c.seed;
    s.capacity = c.capacity;
    s.buffer_limit = c.buffer_limit;
    s.aqm = c.aqm;
    s.stats_interval = c.stats_interval;

    for (const auto& g : c.flows) {
        FlowGroupSetup f;
        f.count = g.count;
        f.flavor = g.flavor == "reno" ? TcpFlavor::reno() : TcpFlavor::cubic();
        if (g.beta) f.flavor.beta = *g.beta;
        f.rtt0 = g.rtt0;
        f.rtt0_jitter = g.rtt0_jitter;
        f.start_window = g.start_window;
        f.start_at = g.start_at;
        s.flows.push_back(f);
    }
    for (const auto& u : c.udp) {
        UdpSourceSetup setup;
        setup.rate_bps = u.rate_bps;
        setup.packet_size = u.packet_size;
        setup.start = u.start;
        setup.stop = u.stop.value_or(c.duration);
        s.udp.push_back(setup);
    }
    return s;
}

}  // namespace gspsim
