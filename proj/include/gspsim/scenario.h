#ifndef GSPSIM_SCENARIO_H
#define GSPSIM_SCENARIO_H

#include <optional>
#include <string>
#include <vector>

#include "gspsim/netsim.h"

namespace gspsim {

enum class OutputKind { Delay, Drops, Util, Qlen, Summary, Gsp };

const char* output_kind_name(OutputKind k);

struct FlowGroupSpec {
    int count = 0;
    std::string flavor = "cubic";          // reno | cubic
    std::optional<double> beta;            // override of the flavor's decrease ratio
    SimTime rtt0;
    SimTime rtt0_jitter;                   // optional per-flow path-length spread
    SimTime start_window = SimTime::from_seconds(1);
    SimTime start_at;

    bool operator==(const FlowGroupSpec&) const = default;
};

struct UdpSpec {
    int64_t rate_bps = 0;
    int32_t packet_size = 1500;
    SimTime start;
    std::optional<SimTime> stop;           // defaults to the end of the run

    bool operator==(const UdpSpec&) const = default;
};

// Declarative description of one experiment, read from the line-oriented
// `key = value` scenario format.
struct ScenarioConfig {
    std::string name = "scenario";
    SimTime duration;
    uint64_t seed = 1;
    CapacitySchedule capacity;             // link.capacity plus optional steps
    int64_t buffer_limit = 0;
    SimTime stats_interval = SimTime::from_ms(10);
    SimTime util_window = SimTime::from_ms(100);
    std::vector<FlowGroupSpec> flows;
    std::vector<UdpSpec> udp;
    AqmSettings aqm;
    std::vector<OutputKind> outputs;       // empty means the default set

    bool operator==(const ScenarioConfig&) const = default;
};

struct ParseError {
    int line = 0;  // 0 for cross-field problems
    std::string key;
    std::string message;
};

struct ParseResult {
    std::optional<ScenarioConfig> config;
    std::vector<ParseError> errors;

    bool ok() const { return config.has_value(); }
};

// Parses and fully validates scenario text. On failure the config is absent
// and every offending key is reported with its line number.
ParseResult parse_scenario(const std::string& text);

// Canonical text form; parse_scenario(emit_scenario(c)) reproduces c exactly.
std::string emit_scenario(const ScenarioConfig& c);

// Applies one `key = value` assignment to an existing config (the sweep
// mechanism). Throws std::invalid_argument for unknown or non-scalar keys and
// for values that fail validation.
void set_scenario_field(ScenarioConfig& c, const std::string& key, const std::string& value);

SimSetup to_sim_setup(const ScenarioConfig& c);

// Unit-aware value parsing, shared with the CLI. Each throws
// std::invalid_argument on malformed input.
SimTime parse_time_value(const std::string& s);    // 100ms, 1.5s, plain seconds
int64_t parse_bytes_value(const std::string& s);   // 125kB, 1MB, plain bytes
int64_t parse_rate_value(const std::string& s);    // 100Mbit, 1Gbit, plain bytes/s

}  // namespace gspsim

#endif
