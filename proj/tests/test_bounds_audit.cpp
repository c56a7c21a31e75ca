#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>

#include "bklab/bounds_audit.hpp"
#include "bklab/errors.hpp"

using namespace bklab;

namespace {

PathConfig paths(std::uint64_t horizon, std::uint64_t reps, std::uint64_t seed) {
    PathConfig c;
    c.horizon = horizon;
    c.replicates = reps;
    c.seed = seed;
    return c;
}

SeriesConfig series(std::uint64_t n_max, std::uint64_t reps, std::uint64_t seed) {
    SeriesConfig c;
    c.n_max = n_max;
    c.replicates = reps;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("prop1 on rademacher with (1+t)^2 has lhs 4 and large slack") {
    const auto r = prop1_check(Distribution::rademacher(), ModerateFunction::power(2), 0.5, paths(1024, 2000, 3));
    CHECK(r.name == "prop1");
    CHECK(r.lhs == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(r.lhs_exact);
    CHECK(r.rhs > 64.0);
    CHECK(r.slack() == doctest::Approx(r.rhs - r.lhs));
    CHECK(r.holds_within() > 0.0);
    CHECK(r.passed());
}

TEST_CASE("prop1 with constant G on uniform is exact on both sides") {
    const auto r =
        prop1_check(Distribution::uniform_symmetric(1.0), ModerateFunction::constant(), 0.5, paths(256, 500, 4));
    CHECK(r.lhs == doctest::Approx(0.5));
    CHECK(r.rhs >= 8.0);
    CHECK(r.rhs_se == 0.0);
    const double t = truncation_threshold(Distribution::uniform_symmetric(1.0), 0.5);
    CHECK(r.rhs == doctest::Approx(4.0 * (t + 2.0)));
    CHECK(r.holds_within() == std::numeric_limits<double>::infinity());
}

TEST_CASE("prop1 refuses G without a doubling constant and bad alpha") {
    const auto g = ModerateFunction::custom("sq", [](double t) { return 1.0 + t * t; }, std::nullopt, true);
    CHECK_THROWS_AS(prop1_check(Distribution::gaussian(1.0), g, 0.5, paths(64, 10, 0)), PreconditionError);
    CHECK_THROWS_AS(prop1_check(Distribution::gaussian(1.0), ModerateFunction::power(1), 1.0, paths(64, 10, 0)),
                    DomainError);
    CHECK_THROWS_AS(prop1_check(Distribution::two_sided_pareto(0.8), ModerateFunction::power(1), 0.5, paths(64, 10, 0)),
                    PreconditionError);
}

TEST_CASE("prop1 gaussian (1+t) alpha 0.25 holds") {
    const auto r = prop1_check(Distribution::gaussian(1.0), ModerateFunction::power(1), 0.25, paths(4096, 2000, 5));
    CHECK(r.lhs == doctest::Approx(1.0 + std::sqrt(2.0 / std::numbers::pi)));
    CHECK(r.holds_within() >= 0.0);
}

TEST_CASE("prop2 on rademacher with 1+t, p=2: lhs near 2(1+ln2), rhs from zeta oracle") {
    const auto r = prop2_check(Distribution::rademacher(), ModerateFunction::power(1), 2, series(64, 100, 1));
    CHECK(r.lhs == doctest::Approx(2.0 * (1.0 + std::log(2.0))).epsilon(1e-12));
    CHECK(r.lhs_exact);
    // n^2 sum_{k>=n} (1+k)/k^3 over 1+n peaks at n=1: (zeta(2)+zeta(3))/2.
    const double c_h = (boost::math::zeta(2.0) + boost::math::zeta(3.0)) / 2.0;
    // E|X|G(|X|) = 2, E[1+|X|] = 2, 4!/2^2 = 6.
    CHECK(r.rhs == doctest::Approx(2.0 + 6.0 * 2.0 * c_h * 2.0).epsilon(1e-8));
    CHECK(r.passed());
}

TEST_CASE("prop2 picks the smallest admissible p and names it on violation") {
    const auto r = prop2_check(Distribution::rademacher(), ModerateFunction::power(2), 0, series(32, 10, 1));
    REQUIRE(r.params.front().first == "p");
    CHECK(r.params.front().second == 3.0);
    try {
        prop2_check(Distribution::rademacher(), ModerateFunction::power(2), 2, series(32, 10, 1));
        FAIL("expected a condition violation");
    } catch (const ConditionViolation& e) {
        REQUIRE(e.smallest_admissible_p());
        CHECK(*e.smallest_admissible_p() == 3);
        CHECK(std::string(e.what()).find("smallest admissible p is 3") != std::string::npos);
    }
    CHECK_THROWS_AS(prop2_check(Distribution::rademacher(), ModerateFunction::power(2), 1, series(32, 10, 1)),
                    PreconditionError);
}

TEST_CASE("prop2 needs a symmetric law") {
    CHECK_THROWS_AS(
        prop2_check(Distribution::bernoulli(0.3, -0.3, 0.7), ModerateFunction::power(1), 2, series(32, 10, 1)),
        PreconditionError);
}

TEST_CASE("prop2 with constant G and p=1 uses H = pi^2/6") {
    const auto r = prop2_check(Distribution::uniform_symmetric(1.0), ModerateFunction::constant(), 1,
                               series(256, 2000, 2));
    const double c_h = std::numbers::pi * std::numbers::pi / 6.0;
    // K_1 = E|X| + (2!/2) E|X| c_H
    CHECK(r.rhs == doctest::Approx(0.5 * (1.0 + c_h)).epsilon(1e-8));
    CHECK(r.holds_within() >= -4.0);
}

TEST_CASE("prop2: every admissible p keeps the audit intact") {
    const auto g = ModerateFunction::power(1);
    for (int p = 2; p <= 5; ++p) {
        const auto r = prop2_check(Distribution::gaussian(1.0), g, p, series(512, 2000, 7));
        CHECK(r.holds_within() >= -4.0);
    }
}

TEST_CASE("prop3 on rademacher with 1+t: lhs near 3") {
    const auto r = prop3_check(Distribution::rademacher(), ModerateFunction::power(1), paths(1024, 20000, 8),
                               series(1024, 2000, 9));
    CHECK(std::abs(r.lhs - 3.0) <= 4.0 * r.lhs_se);
    CHECK(r.rhs > r.lhs);
    CHECK(r.passed());
    CHECK(r.note.find("partial sum") != std::string::npos);
}

TEST_CASE("prop3 with constant G: lhs is 1") {
    const auto r = prop3_check(Distribution::gaussian(1.0), ModerateFunction::constant(), paths(256, 500, 1),
                               series(256, 500, 2));
    CHECK(r.lhs == 1.0);
    CHECK(r.lhs_se == 0.0);
    CHECK(r.rhs >= 1.0);
    CHECK(r.passed());
    CHECK_THROWS_AS(prop3_check(Distribution::bernoulli(0.5), ModerateFunction::constant(), paths(64, 10, 1),
                                series(64, 10, 1)),
                    PreconditionError);
}

TEST_CASE("sym transfer closed forms for constant G") {
    const auto g = ModerateFunction::constant();
    SymTransferOptions o;
    o.deviation_n_max = 64;
    {
        const auto rs = sym_transfer_check(Distribution::gaussian(1.0), g, paths(256, 2000, 11), o);
        REQUIRE(rs.front().detail == "moment");
        const double half_normal = std::sqrt(2.0 / std::numbers::pi);
        CHECK(rs.front().lhs == doctest::Approx(std::sqrt(2.0) * half_normal));
        CHECK(rs.front().rhs == doctest::Approx(4.0 * half_normal));
        for (const auto& r : rs) CHECK_MESSAGE(r.passed(), r.detail);
    }
    {
        const auto rs = sym_transfer_check(Distribution::rademacher(), g, paths(256, 2000, 12), o);
        CHECK(rs.front().lhs == doctest::Approx(1.0));
        CHECK(rs.front().rhs == doctest::Approx(4.0));
        for (const auto& r : rs) {
            if (r.detail.rfind("last_exit", 0) == 0) {
                CHECK(r.lhs == 1.0);
                CHECK(r.rhs == 2.0);
            }
            CHECK_MESSAGE(r.passed(), r.detail);
        }
    }
}

TEST_CASE("sym transfer on a skewed law records n0") {
    // Centered Bernoulli(0.1): the median of U_n sits at -0.1 for small n.
    SymTransferOptions o;
    o.deviation_level = 0.3;
    o.deviation_n_max = 256;
    const auto rs = sym_transfer_check(Distribution::bernoulli(0.1, -0.1, 0.9), ModerateFunction::power(1),
                                       paths(512, 4000, 13), o);
    double n0 = 0.0;
    std::size_t deviations = 0;
    for (const auto& r : rs) {
        CHECK_MESSAGE(r.holds_within() >= -4.0, r.detail);
        if (r.detail.rfind("deviation", 0) == 0) {
            ++deviations;
            for (const auto& [k, v] : r.params)
                if (k == "n0") n0 = v;
        }
    }
    CHECK(n0 >= 1.0);
    CHECK(deviations > 0);
}

TEST_CASE("suite shares passes and matches the single checks") {
    const std::vector<ModerateFunction> gs{ModerateFunction::power(1), ModerateFunction::power(2)};
    SuiteConfig cfg;
    cfg.paths = paths(512, 3000, 21);
    cfg.series = series(512, 3000, 21);
    const auto rs = prop_suite(Distribution::uniform_symmetric(1.0), gs, cfg);
    REQUIRE(rs.size() == 6);
    const auto p1 = prop1_check(Distribution::uniform_symmetric(1.0), gs[1], 0.5, cfg.paths);
    const auto p3 = prop3_check(Distribution::uniform_symmetric(1.0), gs[1], cfg.paths, cfg.series);
    CHECK(rs[3].rhs == p1.rhs);
    CHECK(rs[5].lhs == p3.lhs);
    CHECK(rs[5].rhs == p3.rhs);
    for (const auto& r : rs) CHECK(r.passed());

    cfg.paths.threads = 3;
    cfg.series.threads = 3;
    const auto again = prop_suite(Distribution::uniform_symmetric(1.0), gs, cfg);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        CHECK(again[i].lhs == rs[i].lhs);
        CHECK(again[i].rhs == rs[i].rhs);
        CHECK(again[i].rhs_se == rs[i].rhs_se);
    }
}
