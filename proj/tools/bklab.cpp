// Command-line front end: every subcommand builds a JSON experiment spec
// (optionally layered over --config) and hands it to run_experiment.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bklab/errors.hpp"
#include "bklab/experiment.hpp"
#include "bklab/report.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bklab::ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw bklab::ConfigError(path + ": " + e.what());
    }
}

// Flag values collected by CLI11; only the ones actually given reach the spec.
struct Knobs {
    std::optional<std::string> dist, g, prop, hypotheses;
    std::optional<std::uint64_t> horizon, reps, n_max, prefix, points, true_index;
    std::optional<double> alpha, a, t_min, t_max;
    std::optional<int> p;
    std::vector<double> a_grid, levels, schedule, observations;
    std::vector<std::string> dists, gs;

    void apply(json& j) const {
        auto put = [&](const char* k, const auto& v) {
            if (v) j[k] = *v;
        };
        auto put_list = [&](const char* k, const auto& v) {
            if (!v.empty()) j[k] = v;
        };
        put("dist", dist);
        put("G", g);
        put("prop", prop);
        put("horizon", horizon);
        put("reps", reps);
        put("n_max", n_max);
        put("prefix", prefix);
        put("points", points);
        put("true_index", true_index);
        put("alpha", alpha);
        put("a", a);
        put("t_min", t_min);
        put("t_max", t_max);
        put("p", p);
        put_list("a_grid", a_grid);
        put_list("schedule", schedule);
        put_list("observations", observations);
        put_list("dists", dists);
        put_list("Gs", gs);
        if (!levels.empty()) {
            json arr = json::array();
            for (double c : levels) {
                if (std::isinf(c)) arr.push_back("inf");
                else arr.push_back(c);
            }
            j["levels"] = arr;
        }
        if (hypotheses) j["hypotheses"] = read_json_file(*hypotheses);
    }
};

void add_dist_g(CLI::App* sub, Knobs& k, bool need_dist = true) {
    if (need_dist) sub->add_option("--dist", k.dist, "increment law, e.g. rademacher, gaussian:sigma=1, pareto2:beta=4");
    sub->add_option("--G", k.g, "function G, e.g. power:r=1, powlog:r=1,s=1, exp:b=1, const");
}

void add_paths(CLI::App* sub, Knobs& k, const char* horizon_default, const char* reps_default = "10000") {
    sub->add_option("--horizon", k.horizon, std::string("path length N (default ") + horizon_default + ")");
    sub->add_option("--reps", k.reps, std::string("Monte Carlo replicates (default ") + reps_default + ")");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moderate functions, Cesaro-mean deviation series, last-exit times, "
                 "effective bounds and Wald's sequential test"};
    app.require_subcommand(0, 1);
    app.fallthrough(); // global flags may follow the subcommand

    std::optional<std::string> config, out, format;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("--config", config, "JSON experiment spec; flags given on the command line override it");
    app.add_option("--out", out, "write the report here instead of stdout");
    app.add_option("--format", format, "json (default) or csv");
    app.add_option("--seed", seed, "root seed (default 0)");
    app.add_option("--threads", threads, "worker threads (default 1); results do not depend on it");

    Knobs k;
    std::string kind;

    auto* moderate = app.add_subcommand("moderate-audit", "doubling-ratio audit and moderation evidence for G");
    moderate->add_option("--G", k.g, "function G")->required();
    moderate->add_option("--t-min", k.t_min, "grid start (default 1e-3)");
    moderate->add_option("--t-max", k.t_max, "grid end (default 1e6)");
    moderate->add_option("--points", k.points, "geometric grid points (default 400)");

    auto* exit_cmd = app.add_subcommand("last-exit", "E[G(L_a)] by simulation");
    add_dist_g(exit_cmd, k);
    exit_cmd->add_option("--a", k.a, "deviation level (default 1)");
    exit_cmd->add_option("--a-grid", k.a_grid, "several levels, comma separated")->delimiter(',');
    add_paths(exit_cmd, k, "1024");

    auto* series = app.add_subcommand("series", "partial sums of S(X,G,a) in dyadic blocks");
    add_dist_g(series, k);
    series->add_option("--a", k.a, "deviation level (default 1)");
    series->add_option("--n-max", k.n_max, "last summand (default 1024)");
    series->add_option("--reps", k.reps, "Monte Carlo replicates (default 10000)");

    auto* bounds = app.add_subcommand("bounds", "audit one of the effective bounds (exit 1 when violated)");
    bounds->add_option("--prop", k.prop, "1, 2, 3 or sym")->required();
    add_dist_g(bounds, k);
    bounds->add_option("--alpha", k.alpha, "prop 1 truncation level (default 0.5)");
    bounds->add_option("--p", k.p, "prop 2 exponent (default: smallest admissible)");
    bounds->add_option("--n-max", k.n_max, "series length (default: horizon); sym: deviation grid end");
    bounds->add_option("--a", k.a, "sym: deviation level (default 1)");
    bounds->add_option("--a-grid", k.a_grid, "sym: last-exit levels (default 0.5,1)")->delimiter(',');
    add_paths(bounds, k, "4096");

    auto* counter = app.add_subcommand("counterexample", "normalized law with E|X|G(|X|) finite, E|X|G(2|X|) infinite");
    counter->add_option("--G", k.g, "non-moderate G (default exp)");
    counter->add_option("--prefix", k.prefix, "stored atom pairs (default 100000)");
    counter->add_option("--t-max", k.t_max, "search limit for the points t_n (default 1e6)");

    auto* sprt = app.add_subcommand("sprt", "Wald's multi-hypothesis sequential test");
    sprt->require_subcommand(1);
    auto* sprt_run = sprt->add_subcommand("run", "one run, on given observations or a simulated stream");
    auto* sprt_sweep = sprt->add_subcommand("sweep", "E_i[G(tau)] against its first-order reference (CSV rows)");
    for (auto* s : {sprt_run, sprt_sweep}) {
        s->add_option("--hypotheses", k.hypotheses, "JSON file: alphabet, hypotheses, optional reference and levels");
        s->add_option("--true-index", k.true_index, "law generating the stream (default 0)");
        s->add_option("--horizon", k.horizon, "censoring horizon (default 100000 run, 1000000 sweep)");
        s->add_option("--reps", k.reps, "replicates (run: adds error estimates; sweep default 10000)");
    }
    sprt_run->add_option("--levels", k.levels, "levels c_i > 1, comma separated, inf allowed")->delimiter(',');
    sprt_run->add_option("--observations", k.observations, "observed symbols, comma separated")->delimiter(',');
    sprt_sweep->add_option("--schedule", k.schedule, "decreasing target errors (default 1e-1,1e-2,1e-3,1e-4)")
        ->delimiter(',');
    sprt_sweep->add_option("--G", k.g, "function G (default power:r=1)");

    auto* matrix = app.add_subcommand("theorem1-matrix", "verdicts (a) moment, (b) series, (c) last exit per cell");
    matrix->add_option("--dists", k.dists, "laws (default gaussian, rademacher, pareto2 beta=4 and 1.5)")
        ->delimiter(';');
    matrix->add_option("--Gs", k.gs, "functions (default power:r=1), ';' separated")->delimiter(';');
    matrix->add_option("--a-grid", k.a_grid, "levels (default 0.5,1)")->delimiter(',');
    matrix->add_option("--n-max", k.n_max, "series length (default: horizon)");
    add_paths(matrix, k, "32768");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        json j = config ? read_json_file(*config) : json::object();
        if (j.contains("hypotheses") && j["hypotheses"].is_string())
            j["hypotheses"] = read_json_file(j["hypotheses"].get<std::string>());
        for (auto* sub : app.get_subcommands()) {
            kind = sub->get_name();
            if (kind == "sprt") kind = sprt_run->parsed() ? "sprt-run" : "sprt-sweep";
        }
        if (!kind.empty()) j["kind"] = kind;
        if (!j.contains("kind")) throw bklab::ConfigError("no subcommand given and the config has no 'kind'");
        k.apply(j);
        if (seed) j["seed"] = *seed;
        if (threads) j["threads"] = *threads;
        if (out) j["out"] = *out;
        if (format) j["format"] = *format;

        const auto spec = bklab::ExperimentSpec::from_json(j);
        const auto fmt = bklab::parse_format(spec.format.value_or("json"));
        const auto result = bklab::run_experiment(spec);
        std::string text;
        if (fmt == bklab::Format::csv) {
            if (!result.csv) throw bklab::ConfigError("kind " + bklab::to_string(spec.kind) + " has no csv form");
            text = *result.csv;
        } else {
            text = bklab::emit_json(result.document);
        }
        if (spec.out) {
            std::ofstream f(*spec.out, std::ios::binary);
            if (!f) throw bklab::ConfigError("cannot write " + *spec.out);
            f << text;
        } else {
            std::cout << text;
        }
        return result.exit_code;
    } catch (const std::logic_error& e) {
        std::cerr << "bklab: " << e.what() << '\n';
        return 2;
    } catch (const bklab::DataError& e) {
        std::cerr << "bklab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "bklab: " << e.what() << '\n';
        return 1;
    }
}
