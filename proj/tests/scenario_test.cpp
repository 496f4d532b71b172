#include <doctest.h>

#include <stdexcept>

#include <algorithm>

#include "gspsim/scenario.h"

using namespace gspsim;

namespace {

const char* kMinimal =
    "duration = 10s\n"
    "link.capacity = 100Mbit\n"
    "link.buffer = 1MB\n"
    "flows[0].count = 1\n"
    "flows[0].rtt0 = 100ms\n";

bool has_error_for(const ParseResult& r, const std::string& key) {
    return std::any_of(r.errors.begin(), r.errors.end(),
                       [&](const ParseError& e) { return e.key == key; });
}

}  // namespace

TEST_CASE("unit parsing") {
    CHECK(parse_time_value("100ms") == SimTime::from_ms(100));
    CHECK(parse_time_value("1.5s") == SimTime::from_ms(1500));
    CHECK(parse_time_value("0.25") == SimTime::from_ms(250));  // plain seconds
    CHECK(parse_bytes_value("125kB") == 125'000);
    CHECK(parse_bytes_value("1MB") == 1'000'000);
    CHECK(parse_bytes_value("1500") == 1500);
    CHECK(parse_rate_value("100Mbit") == 12'500'000);
    CHECK(parse_rate_value("1Gbit") == 125'000'000);
    CHECK(parse_rate_value("12500000") == 12'500'000);
    CHECK_THROWS_AS(parse_time_value("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rate_value("10Q"), std::invalid_argument);
}

TEST_CASE("minimal scenario fills defaults") {
    auto r = parse_scenario(kMinimal);
    REQUIRE(r.ok());
    const ScenarioConfig& c = *r.config;
    CHECK(c.name == "scenario");
    CHECK(c.duration == SimTime::from_seconds(10));
    CHECK(c.seed == 1);
    CHECK(c.capacity.size() == 1);
    CHECK(c.capacity[0].rate_bps == 12'500'000);
    CHECK(c.buffer_limit == 1'000'000);
    REQUIRE(c.flows.size() == 1);
    CHECK(c.flows[0].count == 1);
    CHECK(c.flows[0].flavor == "cubic");
    CHECK(c.flows[0].rtt0 == SimTime::from_ms(100));
    CHECK(c.flows[0].start_window == SimTime::from_seconds(1));
    CHECK(c.aqm.kind == AqmKind::TailDrop);
    CHECK(c.aqm.preset_interval == SimTime::from_ms(200));
    CHECK(c.aqm.tau == SimTime::from_ms(1000));
    CHECK(c.aqm.alpha == 2.0);
    CHECK(c.aqm.max_time == SimTime::from_seconds(200));
    CHECK(c.outputs.empty());
}

TEST_CASE("comments and blank lines are ignored") {
    auto r = parse_scenario(std::string("# header comment\n\n") + kMinimal +
                            "seed = 9   # trailing comment\n");
    REQUIRE(r.ok());
    CHECK(r.config->seed == 9);
}

TEST_CASE("invalid beta override is rejected") {
    auto r = parse_scenario(std::string(kMinimal) + "flows[0].beta = 1.3\n");
    CHECK_FALSE(r.ok());
    CHECK(has_error_for(r, "flows[0].beta"));
    // the error names the offending line
    for (const auto& e : r.errors)
        if (e.key == "flows[0].beta") CHECK(e.line == 6);
}

TEST_CASE("duplicate keys are reported with both lines") {
    auto r = parse_scenario(std::string(kMinimal) + "duration = 20s\n");
    CHECK_FALSE(r.ok());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].key == "duration");
    CHECK(r.errors[0].message.find("lines 1 and 6") != std::string::npos);
}

TEST_CASE("unknown keys are reported with their line") {
    auto r = parse_scenario(std::string(kMinimal) + "link.bufffer = 1MB\n");
    CHECK_FALSE(r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.line == 6 && e.message.find("unknown key") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("missing required keys are validation errors") {
    auto r = parse_scenario("duration = 1s\n");
    CHECK_FALSE(r.ok());
    CHECK(has_error_for(r, "link.capacity"));
    CHECK(has_error_for(r, "link.buffer"));
    CHECK(has_error_for(r, "flows[0].count"));
}

TEST_CASE("gsp constraints are validated") {
    SUBCASE("threshold required") {
        auto r = parse_scenario(std::string(kMinimal) + "aqm.kind = gsp_basic\n");
        CHECK_FALSE(r.ok());
        CHECK(has_error_for(r, "aqm.threshold"));
    }
    SUBCASE("byte threshold must stay below the buffer") {
        auto r = parse_scenario(std::string(kMinimal) +
                                "aqm.kind = gsp_basic\naqm.threshold = 2MB\n");
        CHECK_FALSE(r.ok());
    }
    SUBCASE("delay threshold from time units") {
        auto r = parse_scenario(std::string(kMinimal) +
                                "aqm.kind = gsp_adaptive\naqm.threshold = 10ms\n");
        REQUIRE(r.ok());
        CHECK(r.config->aqm.threshold.mode == ThresholdMode::Delay);
        CHECK(r.config->aqm.threshold.delay_value == SimTime::from_ms(10));
    }
    SUBCASE("byte threshold from size units") {
        auto r = parse_scenario(std::string(kMinimal) +
                                "aqm.kind = gsp_basic\naqm.threshold = 125kB\n");
        REQUIRE(r.ok());
        CHECK(r.config->aqm.threshold.mode == ThresholdMode::ByteLength);
        CHECK(r.config->aqm.threshold.byte_value == 125'000);
    }
}

TEST_CASE("capacity schedule parsing") {
    auto r = parse_scenario(std::string(kMinimal) +
                            "link.capacity[1].at = 30s\n"
                            "link.capacity[1].rate = 10Mbit\n"
                            "link.capacity[2].at = 60s\n"
                            "link.capacity[2].rate = 100Mbit\n");
    REQUIRE(r.ok());
    REQUIRE(r.config->capacity.size() == 3);
    CHECK(r.config->capacity[1].at == SimTime::from_seconds(30));
    CHECK(r.config->capacity[1].rate_bps == 1'250'000);

    SUBCASE("non-increasing times are rejected") {
        auto bad = parse_scenario(std::string(kMinimal) +
                                  "link.capacity[1].at = 0s\n"
                                  "link.capacity[1].rate = 10Mbit\n");
        CHECK_FALSE(bad.ok());
    }
}

TEST_CASE("round trip: parse(emit(config)) == config") {
    ScenarioConfig c;
    c.name = "roundtrip";
    c.duration = SimTime::from_seconds(42.5);
    c.seed = 77;
    c.capacity = {{SimTime(), 12'500'000}, {SimTime::from_seconds(30), 1'250'000}};
    c.buffer_limit = 500'000;
    FlowGroupSpec g;
    g.count = 10;
    g.flavor = "cubic";
    g.rtt0 = SimTime::from_ms(100);
    g.start_window = SimTime::from_ms(250);
    c.flows.push_back(g);
    FlowGroupSpec g2;
    g2.count = 3;
    g2.flavor = "reno";
    g2.beta = 0.42;
    g2.rtt0 = SimTime::from_ms(10);
    c.flows.push_back(g2);
    UdpSpec u;
    u.rate_bps = 11'250'000;
    u.packet_size = 1500;
    u.start = SimTime::from_seconds(30);
    u.stop = SimTime::from_seconds(60);
    c.udp.push_back(u);
    c.aqm.kind = AqmKind::GspAdaptive;
    c.aqm.threshold = ThresholdSpec::delay(SimTime::from_ms(10));
    c.aqm.alpha = 2.5;
    c.outputs = {OutputKind::Delay, OutputKind::Summary, OutputKind::Gsp};

    auto r = parse_scenario(emit_scenario(c));
    REQUIRE(r.ok());
    CHECK(*r.config == c);

    // byte-mode threshold round-trips too
    c.aqm.threshold = ThresholdSpec::bytes(125'000);
    auto r2 = parse_scenario(emit_scenario(c));
    REQUIRE(r2.ok());
    CHECK(*r2.config == c);
}

TEST_CASE("set_scenario_field drives sweeps") {
    auto base = parse_scenario(kMinimal);
    REQUIRE(base.ok());
    ScenarioConfig c = *base.config;

    set_scenario_field(c, "flows[0].rtt0", "20ms");
    CHECK(c.flows[0].rtt0 == SimTime::from_ms(20));

    // switching to gsp without a threshold leaves the config invalid
    CHECK_THROWS_AS(set_scenario_field(c, "aqm.kind", "gsp_adaptive"), std::invalid_argument);

    // threshold first (unused by taildrop), then the kind switch is fine
    set_scenario_field(c, "aqm.threshold", "10ms");
    set_scenario_field(c, "aqm.kind", "gsp_adaptive");
    CHECK(c.aqm.kind == AqmKind::GspAdaptive);
    CHECK(c.aqm.threshold.mode == ThresholdMode::Delay);
    CHECK_THROWS_AS(set_scenario_field(c, "aqm.alpha", "0.5"), std::invalid_argument);
    set_scenario_field(c, "aqm.alpha", "2");

    CHECK_THROWS_AS(set_scenario_field(c, "outputs", "delay"), std::invalid_argument);
    CHECK_THROWS_AS(set_scenario_field(c, "nonsense.key", "1"), std::invalid_argument);
}

TEST_CASE("negative duration is rejected") {
    auto r = parse_scenario(
        "duration = -1s\nlink.capacity = 100Mbit\nlink.buffer = 1MB\n"
        "flows[0].count = 1\nflows[0].rtt0 = 100ms\n");
    CHECK_FALSE(r.ok());
}
