#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bklab/errors.hpp"
#include "bklab/experiment.hpp"
#include "bklab/report.hpp"

using namespace bklab;

namespace {

ExperimentSpec spec_of(const char* text) { return ExperimentSpec::from_json(nlohmann::json::parse(text)); }

const char* coin_pair = R"({"alphabet":[0,1],"hypotheses":[[0.5,0.5],[0.25,0.75]]})";

} // namespace

TEST_CASE("moderate audit of exp reports non-moderate evidence with exit 0") {
    const auto r = run_experiment(spec_of(R"({"kind":"moderate-audit","G":"exp:b=1"})"));
    CHECK(r.exit_code == 0);
    CHECK(r.document["result"]["verdict"] == "non-moderate-evidence");
    CHECK(r.document["kind"] == "moderate-audit");
    const auto p = run_experiment(spec_of(R"({"kind":"moderate-audit","G":"power:r=2"})"));
    CHECK(p.document["result"]["verdict"] == "moderate-consistent");
    CHECK(p.document["result"]["smallest_admissible_p"] == 3);
}

TEST_CASE("spec errors name the field") {
    auto message = [](const char* text) {
        try {
            run_experiment(spec_of(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(R"({"kind":"series","G":"power:r=1"})").find("'dist'") != std::string::npos);
    CHECK(message(R"({"kind":"bounds","dist":"rademacher","G":"power:r=1"})").find("'prop'") != std::string::npos);
    CHECK(message(R"({"kind":"series","dist":"rademacher","G":"power:r=1","bogus":1})").find("'bogus'") !=
          std::string::npos);
    CHECK(message(R"({"kind":"nope"})").find("nope") != std::string::npos);
    CHECK(message(R"({"kind":"series","dist":"rademacher","G":"power:r=1","reps":"many"})").find("'reps'") !=
          std::string::npos);
    CHECK(message(R"({"kind":"sprt-run"})").find("'hypotheses'") != std::string::npos);
    CHECK(message(R"({"kind":"bounds","prop":"7","dist":"rademacher","G":"power:r=1","reps":10,"horizon":16})")
              .find("'prop'") != std::string::npos);
}

TEST_CASE("spec json round trip") {
    const auto s = spec_of(R"({"kind":"bounds","prop":2,"dist":"rademacher","G":"power:r=1","seed":5,"a_grid":[0.5,1]})");
    CHECK(*s.prop == "2");
    const auto back = ExperimentSpec::from_json(nlohmann::json::parse(s.to_json().dump()));
    CHECK(back.to_json() == s.to_json());
}

TEST_CASE("bounds experiment passes and is byte-identical across thread counts") {
    const char* base = R"({"kind":"bounds","prop":"3","dist":"uniform:w=1","G":"power:r=1","reps":2000,"horizon":512,"seed":9})";
    auto s = spec_of(base);
    const auto one = run_experiment(s);
    CHECK(one.exit_code == 0);
    CHECK(one.document["result"]["name"] == "prop3");
    s.threads = 3;
    const auto three = run_experiment(s);
    CHECK(emit_json(one.document) == emit_json(three.document));
    CHECK(one.csv == three.csv);
}

TEST_CASE("bounds sym collection") {
    const auto r = run_experiment(spec_of(
        R"({"kind":"bounds","prop":"sym","dist":"gaussian:sigma=1","G":"const","reps":1000,"horizon":256,"n_max":64})"));
    CHECK(r.exit_code == 0);
    CHECK(r.document["result"]["reports"].size() > 3);
}

TEST_CASE("series and last-exit documents") {
    const auto s = run_experiment(spec_of(
        R"({"kind":"series","dist":"rademacher","G":"power:r=1","a":1,"n_max":64,"reps":10})"));
    CHECK(s.document["result"]["partial_sum"].get<double>() == doctest::Approx(2.0 * (1.0 + std::log(2.0))));
    REQUIRE(s.csv);
    CHECK(s.csv->rfind("block,n_lo,n_hi,contribution,se\n", 0) == 0);
    const auto l = run_experiment(spec_of(
        R"({"kind":"last-exit","dist":"rademacher","G":"power:r=1","a_grid":[1],"horizon":256,"reps":4000})"));
    const auto& e = l.document["result"]["estimates"][0];
    CHECK(std::abs(e["mean"].get<double>() - 3.0) < 4.0 * e["se"].get<double>());
}

TEST_CASE("sprt run on a fixed observation stream") {
    std::string text = R"({"kind":"sprt-run","hypotheses":)" + std::string(coin_pair) +
                       R"(,"levels":[20.085536923187668,20.085536923187668],"observations":[)";
    for (int k = 0; k < 30; ++k) text += k ? ",1" : "1";
    text += "]}";
    const auto r = run_experiment(spec_of(text.c_str()));
    CHECK(r.document["result"]["record"]["tau"] == 14);
    CHECK(r.document["result"]["record"]["decision"] == 1);
    const auto bad = spec_of((R"({"kind":"sprt-run","hypotheses":)" + std::string(coin_pair) +
                              R"(,"levels":[10,10],"observations":[0,2]})")
                                 .c_str());
    CHECK_THROWS_AS(run_experiment(bad), DataError);
}

TEST_CASE("sprt levels may come from the hypothesis file and include inf") {
    const auto r = run_experiment(spec_of(
        R"({"kind":"sprt-run","hypotheses":{"alphabet":[0,1],"hypotheses":[[0.5,0.5],[0.25,0.75]],"levels":["inf","inf"]},"horizon":50})"));
    CHECK(r.document["result"]["record"]["censored"] == true);
    CHECK(emit_json(r.document).find("\"inf\"") != std::string::npos);
}

TEST_CASE("sprt sweep csv") {
    const auto r = run_experiment(spec_of((R"({"kind":"sprt-sweep","hypotheses":)" + std::string(coin_pair) +
                                           R"(,"schedule":[0.1,0.01],"reps":500,"G":"const"})")
                                              .c_str()));
    REQUIRE(r.csv);
    CHECK(r.csv->rfind("target_error,c,mean_G_tau,reference_G,ratio\n", 0) == 0);
    CHECK(r.document["result"]["rows"].size() == 2);
    CHECK(r.document["result"]["rows"][1]["ratio"] == 1.0);
}

TEST_CASE("grid combination rule") {
    using E = Evidence;
    const E a[] = {E::converging, E::converging};
    const E b[] = {E::converging, E::diverging};
    const E c[] = {E::converging, E::inconclusive};
    CHECK(combine_over_grid(a) == E::converging);
    CHECK(combine_over_grid(b) == E::diverging);
    CHECK(combine_over_grid(c) == E::inconclusive);
    CHECK(combine_over_grid({}) == E::inconclusive);
}

TEST_CASE("equivalence matrix: light tails consistent-finite") {
    const auto r = run_experiment(spec_of(
        R"({"kind":"theorem1-matrix","dists":["rademacher","gaussian:sigma=1"],"Gs":["power:r=1"],"reps":2000,"horizon":4096,"seed":3})"));
    CHECK(r.exit_code == 0);
    for (const auto& c : r.document["result"]["cells"]) {
        CHECK(c["consistent"] == true);
        CHECK(c["verdicts"]["a"] == "finite");
    }
}

TEST_CASE("equivalence matrix: pareto 1.5 consistent-divergent") {
    const Distribution d[] = {Distribution::two_sided_pareto(1.5)};
    const ModerateFunction g[] = {ModerateFunction::power(1)};
    Theorem1Config cfg;
    cfg.replicates = 2000;
    cfg.horizon = cfg.n_max = 1 << 14;
    cfg.seed = 4;
    const auto rep = run_theorem1(d, g, cfg);
    REQUIRE(rep.cells.size() == 1);
    const auto& c = rep.cells[0];
    CHECK(c.moment_verdict == Evidence::diverging);
    CHECK(c.series_verdict == Evidence::diverging);
    CHECK(c.last_exit_verdict == Evidence::diverging);
    CHECK(c.consistent);
}
