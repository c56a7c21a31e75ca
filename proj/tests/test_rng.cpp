#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>

#include "bklab/rng.hpp"
#include "bklab/stats.hpp"

using namespace bklab;

TEST_CASE("counter stream is a pure function of its key") {
    CounterStream a(derive_key(7, StreamId::sample, 3));
    CounterStream b(derive_key(7, StreamId::sample, 3));
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("stream keys differ across seed, stream and replicate") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        for (std::uint64_t s = 1; s <= 14; ++s) {
            for (std::uint64_t r = 0; r < 50; ++r) keys.insert(derive_key(seed, s, r));
        }
    }
    CHECK(keys.size() == 3 * 14 * 50);
}

TEST_CASE("uniform stays inside (0,1) and has the right mean") {
    CounterStream s(derive_key(1, StreamId::sample, 0));
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("bits are balanced") {
    CounterStream s(derive_key(2, StreamId::sample, 0));
    int ones = 0;
    const int n = 640000;
    for (int i = 0; i < n; ++i) ones += s.bit() ? 1 : 0;
    CHECK(std::abs(ones - n / 2) < 4.0 * std::sqrt(n / 4.0));
}

TEST_CASE("compensated sum recovers cancelled small terms") {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == doctest::Approx(1000.0).epsilon(1e-15));
}

TEST_CASE("mean accumulator matches the two-pass formulas") {
    MeanAccumulator acc;
    std::vector<double> xs{1.0, 2.0, 4.0, 8.0, 16.0};
    for (double x : xs) acc.add(x);
    const auto e = acc.estimate();
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / 5.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    CHECK(e.mean == doctest::Approx(mean));
    CHECK(e.se == doctest::Approx(std::sqrt(ss / 4.0 / 5.0)));
}

TEST_CASE("batch plan covers every index once") {
    for (std::uint64_t total : {1ULL, 7ULL, 64ULL, 1000ULL}) {
        const auto plan = plan_batches(total);
        std::uint64_t covered = 0;
        for (std::size_t b = 0; b < plan.batches; ++b) {
            CHECK(plan.begin(b) <= plan.end(b));
            if (b > 0) CHECK(plan.begin(b) == plan.end(b - 1));
            covered += plan.end(b) - plan.begin(b);
        }
        CHECK(covered == total);
    }
}

TEST_CASE("run_batches visits all batches and rethrows worker failures") {
    const auto plan = plan_batches(100, 10);
    std::vector<int> seen(plan.batches, 0);
    run_batches(plan, 3, [&](std::size_t b) { seen[b] += 1; });
    for (int v : seen) CHECK(v == 1);
    CHECK_THROWS_AS(run_batches(plan, 2, [](std::size_t b) {
                        if (b == 5) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}
