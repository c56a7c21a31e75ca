#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "bklab/errors.hpp"
#include "bklab/seqtest.hpp"

using namespace bklab;

namespace {

const double inf = std::numeric_limits<double>::infinity();

HypothesisSet coin_pair() { return HypothesisSet({0.0, 1.0}, {{0.5, 0.5}, {0.25, 0.75}}); }

ObservationSource constant_source(std::size_t y) {
    return [y] { return y; };
}

McConfig mc(std::uint64_t reps, std::uint64_t seed, std::uint64_t horizon = 100000) {
    McConfig c;
    c.reps = reps;
    c.seed = seed;
    c.horizon = horizon;
    return c;
}

} // namespace

TEST_CASE("mixture increment for a one") {
    const auto h = coin_pair();
    std::vector<double> state(2, 0.0);
    log_ratio_update(state, 1, h);
    CHECK(state[0] == doctest::Approx(std::log(1.25)));
    CHECK(state[1] == doctest::Approx(std::log(0.625 / 0.75)));
    CHECK(h.mixture_reference());
}

TEST_CASE("identical laws and a reference equal to P_1 give zero increments") {
    const HypothesisSet same({0.0, 1.0, 2.0}, {{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}});
    std::vector<double> state(2, 0.0);
    for (std::size_t y : {0, 1, 2, 2, 1}) log_ratio_update(state, y, same);
    CHECK(state[0] == 0.0);
    CHECK(state[1] == 0.0);

    const HypothesisSet ref1({0.0, 1.0}, {{0.5, 0.5}, {0.25, 0.75}}, std::vector<double>{0.5, 0.5});
    CHECK(ref1.log_ratio_increment(0, 0) == 0.0);
    CHECK(ref1.log_ratio_increment(0, 1) == 0.0);
}

TEST_CASE("support violations") {
    const HypothesisSet h({0.0, 1.0, 2.0}, {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}});
    std::vector<double> state(2, 0.0);
    log_ratio_update(state, 2, h);
    CHECK(state[0] == inf);
    CHECK(std::isfinite(state[1]));
    const HypothesisSet g({0.0, 1.0, 2.0}, {{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}});
    CHECK_THROWS_AS(log_ratio_update(state, 2, g), DataError);
    CHECK_THROWS_AS(log_ratio_update(state, 7, g), DataError);
    CHECK_THROWS_AS(g.symbol_index(3.0), DataError);
    CHECK(g.symbol_index(2.0) == 2);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(HypothesisSet({0.0, 1.0}, {{0.5, 0.5}}), ConfigError);
    CHECK_THROWS_AS(HypothesisSet({0.0, 1.0}, {{0.5, 0.5}, {0.2, 0.7}}), ConfigError);
    CHECK_THROWS_AS(HypothesisSet({0.0, 1.0}, {{0.5, 0.5}, {0.5}}), ConfigError);
    CHECK_THROWS_AS(HypothesisSet({0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}}, std::vector<double>{1.0, 0.0}),
                    ConfigError);
    CHECK_THROWS_AS(LevelVector::uniform(2, 1.0).validate(2), ConfigError);
    CHECK_THROWS_AS(LevelVector::uniform(3, 5.0).validate(2), ConfigError);
    CHECK_THROWS_AS(HypothesisSet::from_json(nlohmann::json{{"alphabet", {0, 1}}}), ConfigError);
}

TEST_CASE("json round trip") {
    const auto j = nlohmann::json::parse(R"({"alphabet":[0,1],"hypotheses":[[0.5,0.5],[0.25,0.75]]})");
    const auto h = HypothesisSet::from_json(j);
    CHECK(h.size() == 2);
    CHECK(h.reference()[1] == doctest::Approx(0.625));
    const auto back = HypothesisSet::from_json(nlohmann::json::parse(h.to_json().dump()));
    CHECK(back.law(1) == h.law(1));
}

TEST_CASE("kl values by hand") {
    const auto h = coin_pair();
    const double kl21 = 0.25 * std::log(0.25 / 0.5) + 0.75 * std::log(0.75 / 0.5);
    CHECK(h.kl(1, 0) == doctest::Approx(kl21));
    CHECK(h.kl(0, 0) == 0.0);
    CHECK(h.kl_adjusted(0, 1) == doctest::Approx(0.5 * std::log(0.375 / 0.25) + 0.5 * std::log(0.625 / 0.75)));
    CHECK(h.kl_adjusted(1, 0) == doctest::Approx(0.25 * std::log(0.375 / 0.5) + 0.75 * std::log(0.625 / 0.5)));
    const auto m = h.pairwise_kl();
    CHECK(m[0][0] == 0.0);
    CHECK(m[0][1] > 0.0);
}

TEST_CASE("all ones stream stops at 14 and decides H_2") {
    const auto h = coin_pair();
    const auto rec = run_test(h, LevelVector::uniform(2, std::exp(3.0)), constant_source(1), 1000);
    REQUIRE(rec.tau);
    CHECK(*rec.tau == static_cast<std::uint64_t>(std::ceil(3.0 / std::log(1.25))));
    CHECK(*rec.tau == 14);
    CHECK(rec.rho[0] == std::optional<std::uint64_t>(14));
    CHECK(!rec.rho[1]);
    CHECK(rec.decision == std::optional<std::size_t>(1));
    CHECK(rec.log_ratios_at_tau[0] == doctest::Approx(14 * std::log(1.25)));
}

TEST_CASE("infinite levels and identical laws censor") {
    const auto h = coin_pair();
    const auto rec = run_test(h, LevelVector::uniform(2, inf), constant_source(1), 200);
    CHECK(rec.censored);
    CHECK(!rec.tau);
    CHECK(rec.steps == 200);
    const HypothesisSet same({0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}});
    CHECK(run_test(same, LevelVector::uniform(2, 10.0), constant_source(0), 50).censored);
    const auto err = estimate_errors(same, LevelVector::uniform(2, 10.0), 0, mc(50, 1, 100));
    CHECK(!err.error_rate);
    CHECK(err.censor_rate == 1.0);
}

TEST_CASE("record invariants on random streams") {
    const HypothesisSet h({0.0, 1.0, 2.0}, {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}, {0.3, 0.4, 0.3}});
    const LevelVector lv{{20.0, 50.0, 30.0}};
    const LevelVector higher{{40.0, 100.0, 60.0}};
    // relabeled: hypotheses in order (2, 0, 1)
    const HypothesisSet perm({0.0, 1.0, 2.0}, {{0.3, 0.4, 0.3}, {0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}});
    const LevelVector perm_lv{{30.0, 20.0, 50.0}};
    const std::size_t to_perm[] = {1, 2, 0};
    for (std::uint64_t rep = 0; rep < 300; ++rep) {
        const auto rec = run_test(h, lv, iid_source(h, rep % 3, 5, rep), 5000);
        REQUIRE(!rec.censored);
        // tau from stored rho
        std::uint64_t tau = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t i = 0; i < 3; ++i) {
            std::uint64_t worst = 0;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != i) worst = std::max(worst, rec.rho[j].value_or(std::numeric_limits<std::uint64_t>::max()));
            tau = std::min(tau, worst);
        }
        CHECK(*rec.tau == tau);
        const auto k = *rec.decision;
        for (std::size_t j = 0; j < 3; ++j) {
            if (!rec.rho[k]) continue;
            REQUIRE(rec.rho[j]);
            CHECK(*rec.rho[k] >= *rec.rho[j]);
        }
        const auto up = run_test(h, higher, iid_source(h, rep % 3, 5, rep), 5000);
        CHECK(up.steps >= rec.steps);

        const auto pr = run_test(perm, perm_lv, iid_source(h, rep % 3, 5, rep), 5000);
        CHECK(pr.tau == rec.tau);
        CHECK(*pr.decision == to_perm[k]);
        for (std::size_t i = 0; i < 3; ++i) CHECK(pr.rho[to_perm[i]] == rec.rho[i]);
    }
}

TEST_CASE("two hypotheses: tau is the smaller rejecting time") {
    const auto h = coin_pair();
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
        const auto rec = run_test(h, LevelVector::uniform(2, 30.0), iid_source(h, 1, 9, rep), 10000);
        REQUIRE(rec.tau);
        const auto r0 = rec.rho[0].value_or(UINT64_MAX);
        const auto r1 = rec.rho[1].value_or(UINT64_MAX);
        CHECK(*rec.tau == std::min(r0, r1));
    }
}

TEST_CASE("Ville bound on rejection of the true hypothesis") {
    const auto h = coin_pair();
    for (double c : {10.0, 100.0}) {
        const auto r = estimate_rejection(h, c, 0, mc(20000, 3, 2000));
        CHECK(r.rate <= r.bound + 4.0 * r.se);
        CHECK(r.rate > 0.0);
    }
}

TEST_CASE("error rates stay below the level") {
    const auto h = coin_pair();
    const auto e = estimate_errors(h, LevelVector::uniform(2, 20.0), 0, mc(20000, 4));
    REQUIRE(e.error_rate);
    CHECK(*e.error_rate <= 1.0 / 20.0 + 3.0 * e.se);
    CHECK(e.censor_rate == 0.0);
    // H_1 is never rejected: every stop decides H_1.
    const auto never = estimate_errors(h, LevelVector{{inf, 20.0}}, 0, mc(5000, 4));
    REQUIRE(never.error_rate);
    CHECK(*never.error_rate == 0.0);
}

TEST_CASE("G moment: constant, deterministic, first-order Wald") {
    const auto h = coin_pair();
    const auto lv = LevelVector::uniform(2, std::exp(5.0));
    CHECK(estimate_G_moment(h, lv, 1, ModerateFunction::constant(), mc(1000, 1)).mean == 1.0);

    const auto g = ModerateFunction::power(1);
    const auto est = estimate_G_moment(h, lv, 1, g, mc(20000, 2));
    // Drift of log R^1 under P_2 with the mixture reference.
    const double wald = 1.0 + 5.0 / h.kl_adjusted(1, 0);
    CHECK(std::abs(est.mean / wald - 1.0) < 0.15);
    CHECK(!est.degraded);
}

TEST_CASE("sweep: constant G, single row, config errors") {
    const auto h = coin_pair();
    const double one[] = {0.01};
    const auto rows = optimality_sweep(h, one, 0, ModerateFunction::constant(), mc(500, 1));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ratio == 1.0);
    CHECK(rows[0].c == doctest::Approx(100.0));
    const double bad[] = {0.01, 0.1};
    CHECK_THROWS_AS(optimality_sweep(h, bad, 0, ModerateFunction::constant(), mc(10, 1)), ConfigError);
    const HypothesisSet same({0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}});
    CHECK_THROWS_AS(optimality_sweep(same, one, 0, ModerateFunction::constant(), mc(10, 1)), ConfigError);
}

TEST_CASE("sweep ratio trends down and threads do not change it") {
    const auto h = coin_pair();
    const double schedule[] = {1e-1, 1e-2, 1e-3, 1e-4};
    auto cfg = mc(20000, 11);
    const auto rows = optimality_sweep(h, schedule, 0, ModerateFunction::power(1), cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[3].ratio < rows[1].ratio);
    CHECK(rows[3].ratio >= 0.8);
    CHECK(rows[3].ratio <= 1.3);
    cfg.threads = 4;
    const auto again = optimality_sweep(h, schedule, 0, ModerateFunction::power(1), cfg);
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(again[k].mean_G_tau == rows[k].mean_G_tau);
}
