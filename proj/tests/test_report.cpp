#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <limits>

#include "bklab/errors.hpp"
#include "bklab/report.hpp"

using namespace bklab;

TEST_CASE("17 significant digits and non-finite spellings") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(3.0) == "3");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    // round trip
    const double x = 2.0 * (1.0 + std::log(2.0));
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("bound report keys come first in schema order") {
    auto r = make_report("prop1", 4.0, 0.0, 10.0, 0.5);
    r.seed = 42;
    const auto j = to_json(r);
    const char* expected[] = {"name", "lhs", "lhs_se", "rhs", "rhs_se", "slack", "holds_within", "seed"};
    auto it = j.begin();
    for (const char* k : expected) {
        REQUIRE(it != j.end());
        CHECK(it.key() == k);
        ++it;
    }
    CHECK(j["slack"].get<double>() == 6.0);
    CHECK(j["holds_within"].get<double>() == 12.0);
}

TEST_CASE("emitted json parses and keeps non-finite values as strings") {
    Json j;
    j["a"] = 0.1;
    j["b"] = std::numeric_limits<double>::infinity();
    j["c"] = Json::array({1, 2, 3});
    j["d"] = Json::object();
    j["e"] = Json::array({Json{{"x", 1.5}}});
    j["s"] = "quote \" inside";
    const auto text = emit_json(j);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    const auto back = nlohmann::json::parse(text);
    CHECK(back["b"] == "inf");
    CHECK(back["c"].size() == 3);
    CHECK(back["e"][0]["x"] == 1.5);
    CHECK(back["s"] == "quote \" inside");
    CHECK(emit_json(j) == text);
}

TEST_CASE("envelope carries schema version and seed") {
    const auto doc = envelope("bounds", 7, Json{{"k", 1}});
    auto it = doc.begin();
    CHECK(it.key() == "schema_version");
    CHECK(doc["seed"] == 7);
    CHECK(doc["schema_version"] == schema_version);
    CHECK(emit_json(doc).find("time") == std::string::npos);
}

TEST_CASE("csv headers") {
    CHECK(sweep_csv({}) == "target_error,c,mean_G_tau,reference_G,ratio\n");
    SweepRow r{0.1, 10.0, 25.0, 0.1, 24.0, 25.0 / 24.0, 0.0};
    const SweepRow rows[] = {r};
    const auto csv = sweep_csv(rows);
    CHECK(csv.rfind("target_error,c,mean_G_tau,reference_G,ratio\n0.10000000000000001,10,25,24,", 0) == 0);
    SeriesEstimate e;
    e.blocks.push_back({0, 1, 1, 0.5, 0.0, true});
    CHECK(series_csv(e) == "block,n_lo,n_hi,contribution,se\n0,1,1,0.5,0\n");
    const Atom atoms[] = {{-1.0, 0.5}, {1.0, 0.5}};
    CHECK(atoms_csv(atoms) == "atom,mass\n-1,0.5\n1,0.5\n");
}

TEST_CASE("format parsing") {
    CHECK(parse_format("json") == Format::json);
    CHECK(parse_format("csv") == Format::csv);
    CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("composition counts serialize as decimal strings") {
    const auto j = to_json(count_compositions(40, 20));
    CHECK(j["count"] == "68923264410");
}
