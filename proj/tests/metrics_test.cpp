#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "gspsim/metrics.h"

using namespace gspsim;

TEST_CASE("nearest-rank quantile") {
    std::vector<double> one_to_hundred;
    for (int i = 1; i <= 100; ++i) one_to_hundred.push_back(i);
    CHECK(*quantile(one_to_hundred, 0.5) == 50.0);
    CHECK(*quantile(one_to_hundred, 0.0) == 1.0);
    CHECK(*quantile(one_to_hundred, 1.0) == 100.0);

    CHECK(*quantile({5.0}, 0.0) == 5.0);
    CHECK(*quantile({5.0}, 0.37) == 5.0);
    CHECK(*quantile({5.0}, 1.0) == 5.0);

    // ceil(0.95 * 4) = 4, hand-checked
    CHECK(*quantile({1.0, 2.0, 3.0, 4.0}, 0.95) == 4.0);

    CHECK_FALSE(quantile({}, 0.5).has_value());
    CHECK_THROWS_AS(quantile({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("quantile agrees with the sort-and-index oracle") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> size_dist(1, 40);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> samples(size_dist(rng));
        for (auto& s : samples) s = value(rng);
        const double q = value(rng);

        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(sorted.size())));
        if (rank < 1) rank = 1;
        REQUIRE(*quantile(samples, q) == sorted[rank - 1]);
    }
}

TEST_CASE("quantiles are ordered in q") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<double> samples(257);
    for (auto& s : samples) s = value(rng);
    double prev = *quantile(samples, 0.0);
    for (double q = 0.05; q <= 1.0; q += 0.05) {
        const double v = *quantile(samples, q);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("empirical cdf") {
    SUBCASE("single sample") {
        auto steps = cdf({0.003});
        REQUIRE(steps.size() == 1);
        CHECK(steps[0].first == 0.003);
        CHECK(steps[0].second == 1.0);
    }
    SUBCASE("duplicates merge into one step") {
        auto steps = cdf({2.0, 1.0, 2.0, 3.0});
        REQUIRE(steps.size() == 3);
        CHECK(steps[0] == std::pair{1.0, 0.25});
        CHECK(steps[1] == std::pair{2.0, 0.75});
        CHECK(steps[2] == std::pair{3.0, 1.0});
    }
    SUBCASE("first point carries its multiplicity") {
        auto steps = cdf({1.0, 1.0, 1.0, 5.0});
        CHECK(steps[0] == std::pair{1.0, 0.75});
    }
    SUBCASE("monotone with terminal value one") {
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> value(0.0, 0.01);
        std::vector<double> samples(500);
        for (auto& s : samples) s = value(rng);
        auto steps = cdf(samples);
        double prev = 0.0;
        for (auto& [v, p] : steps) {
            CHECK(p > prev);
            prev = p;
        }
        CHECK(steps.back().second == 1.0);
    }
    SUBCASE("empty input is rejected") { CHECK_THROWS_AS(cdf({}), std::invalid_argument); }
}

TEST_CASE("windowed utilization") {
    CapacitySchedule schedule{{SimTime(), 1000}};  // 1000 B/s
    std::vector<std::pair<SimTime, int64_t>> departures;

    // window 0: fully busy; window 1: idle; window 2: half
    departures.emplace_back(SimTime::from_seconds(0.2), 500);
    departures.emplace_back(SimTime::from_seconds(0.9), 500);
    departures.emplace_back(SimTime::from_seconds(2.5), 500);

    auto series = utilization(departures, schedule, SimTime::from_seconds(1), SimTime::from_seconds(3));
    REQUIRE(series.values.size() == 3);
    CHECK(series.values[0] == doctest::Approx(1.0));
    CHECK(series.values[1] == doctest::Approx(0.0));
    CHECK(series.values[2] == doctest::Approx(0.5));
    CHECK(series.mean() == doctest::Approx(0.5));
}

TEST_CASE("utilization accounts for capacity changes inside a window") {
    // 1000 B/s for the first half of the window, 3000 B/s after: the window
    // can carry 2000 bytes, so 2000 delivered bytes is full utilization.
    CapacitySchedule schedule{{SimTime(), 1000}, {SimTime::from_seconds(0.5), 3000}};
    std::vector<std::pair<SimTime, int64_t>> departures{
        {SimTime::from_seconds(0.4), 500},
        {SimTime::from_seconds(0.9), 1500},
    };
    auto series = utilization(departures, schedule, SimTime::from_seconds(1), SimTime::from_seconds(1));
    REQUIRE(series.values.size() == 1);
    CHECK(series.values[0] == doctest::Approx(1.0));
    CHECK(series.values[0] <= 1.0 + 1e-9);
}

TEST_CASE("empty fraction from a step trace") {
    const auto t = [](double s) { return SimTime::from_seconds(s); };

    SUBCASE("never empty") {
        std::vector<QlenSample> trace{{t(0), 100}};
        CHECK(empty_fraction(trace, t(0), t(10)) == doctest::Approx(0.0));
    }
    SUBCASE("always empty") {
        std::vector<QlenSample> trace;
        CHECK(empty_fraction(trace, t(0), t(10)) == doctest::Approx(1.0));
    }
    SUBCASE("empty exactly half the interval") {
        std::vector<QlenSample> trace{{t(0), 100}, {t(5), 0}};
        CHECK(empty_fraction(trace, t(0), t(10)) == doctest::Approx(0.5));
    }
    SUBCASE("multiple episodes") {
        std::vector<QlenSample> trace{{t(1), 100}, {t(2), 0}, {t(3), 100}, {t(4), 0}};
        // empty over [0,1), [2,3), [4,10) = 1 + 1 + 6 of 10
        CHECK(empty_fraction(trace, t(0), t(10)) == doctest::Approx(0.8));
    }
    SUBCASE("zero-length interval") {
        CHECK(empty_fraction({}, t(1), t(1)) == 0.0);
    }
}
