// Acceptance suite: one pass/fail line per criterion.
#include <cstdio>

#include "gspsim/aqm.h"

int main() {
    int failures = 0;
    auto line = [&](int n, const char* what, bool pass) {
        std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, what);
        if (!pass) ++failures;
    };

    {
        const bool reno = gspsim::min_buffer(12'500'000, 0.1, 0.5) == 1'250'000;
        const bool cubic = gspsim::min_buffer(12'500'000, 0.1, 0.7) == 535'715;
        line(1, "sizing formulas exact", reno && cubic);
    }

    return failures == 0 ? 0 : 1;
}
