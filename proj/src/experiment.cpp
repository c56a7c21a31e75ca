#include "bklab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "bklab/bounds_audit.hpp"
#include "bklab/errors.hpp"
#include "bklab/report.hpp"
#include "bklab/rng.hpp"
#include "bklab/seqtest.hpp"

namespace bklab {

namespace {

using Json = nlohmann::ordered_json;

const std::vector<std::string> default_matrix_dists{"gaussian:sigma=1", "rademacher", "pareto2:beta=4",
                                                    "pareto2:beta=1.5"};

template <class T>
T field(const nlohmann::json& j, const char* name) {
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("field '") + name + "' is missing or has the wrong type");
    }
}

double number_or_inf(const nlohmann::json& v, const char* name) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError(std::string("field '") + name + "' must hold numbers (or \"inf\")");
}

std::vector<double> number_list(const nlohmann::json& j, const char* name) {
    const auto& v = j.at(name);
    if (!v.is_array()) throw ConfigError(std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number_or_inf(x, name));
    return out;
}

Json number_list_json(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(x);
    return a;
}

std::string require(const std::optional<std::string>& v, const char* name, ExperimentKind k) {
    if (!v) throw ConfigError("kind " + to_string(k) + " needs field '" + name + "'");
    return *v;
}

Json cell_series_json(const SeriesEstimate& e) {
    Json j;
    j["a"] = e.a;
    j["partial_sum"] = e.partial_sum;
    j["partial_se"] = e.partial_se;
    j["verdict"] = series_label(e.verdict);
    Json blocks = Json::array();
    for (const auto& b : e.blocks) blocks.push_back(b.contribution);
    j["block_contributions"] = blocks;
    return j;
}

// ---------------------------------------------------------------------------

ExperimentResult run_moderate_audit(const ExperimentSpec& spec) {
    const auto g = ModerateFunction::parse(require(spec.g, "G", spec.kind));
    GridSpec grid = geometric_grid(spec.t_min.value_or(1e-3), spec.t_max.value_or(1e6),
                                   static_cast<std::size_t>(spec.points.value_or(400)));
    grid.validate();
    const auto audit = doubling_ratio_sup(g, grid);
    const auto verdict = is_moderate_numeric(g, grid);
    const auto p = smallest_admissible_p(g);
    Json r;
    r["G"] = g.name();
    r["claimed_doubling"] = g.claimed_doubling() ? Json(*g.claimed_doubling()) : Json(nullptr);
    r["claimed_moderate"] = g.claimed_moderate();
    r["grid"] = Json{{"t_min", grid.t_min}, {"t_max", grid.t_max}, {"points", grid.points}, {"spacing", "geometric"}};
    r["doubling"] = bklab::to_json(audit);
    r["verdict"] = to_string(verdict);
    r["smallest_admissible_p"] = p ? Json(*p) : Json(nullptr);
    return {envelope(to_string(spec.kind), spec.seed, r), std::nullopt, 0};
}

PathConfig path_config(const ExperimentSpec& spec, std::uint64_t default_horizon) {
    PathConfig c;
    c.horizon = spec.horizon.value_or(default_horizon);
    c.replicates = spec.reps.value_or(10000);
    c.seed = spec.seed;
    c.threads = spec.threads;
    return c;
}

std::vector<double> levels_of(const ExperimentSpec& spec) {
    if (!spec.a_grid.empty()) return spec.a_grid;
    return {spec.a.value_or(1.0)};
}

ExperimentResult run_last_exit(const ExperimentSpec& spec) {
    const auto dist = Distribution::parse(require(spec.dist, "dist", spec.kind));
    const auto g = ModerateFunction::parse(require(spec.g, "G", spec.kind));
    const auto cfg = path_config(spec, 1024);
    const auto levels = levels_of(spec);
    const auto run = simulate_last_exits(dist, levels, cfg);
    Json ests = Json::array();
    std::string csv = "a,mean,se,censor_rate,verdict\n";
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const auto e = summarize_last_exit(run, j, g);
        ests.push_back(bklab::to_json(e));
        csv += format_double(e.a) + ',' + format_double(e.mean) + ',' + format_double(e.se) + ',' +
               format_double(e.censor_rate) + ',' + series_label(lastexit_verdict(e)) + '\n';
    }
    Json r;
    r["dist"] = dist.name();
    r["G"] = g.name();
    r["center"] = run.center;
    r["estimates"] = ests;
    return {envelope(to_string(spec.kind), spec.seed, r), csv, 0};
}

ExperimentResult run_series(const ExperimentSpec& spec) {
    const auto dist = Distribution::parse(require(spec.dist, "dist", spec.kind));
    const auto g = ModerateFunction::parse(require(spec.g, "G", spec.kind));
    SeriesOptions o;
    o.threads = spec.threads;
    const auto e = estimate_series(dist, g, spec.a.value_or(1.0), spec.n_max.value_or(1024), spec.reps.value_or(10000),
                                   spec.seed, o);
    Json r = bklab::to_json(e);
    r["dist"] = dist.name();
    r["G"] = g.name();
    return {envelope(to_string(spec.kind), spec.seed, r), series_csv(e), 0};
}

ExperimentResult run_bounds(const ExperimentSpec& spec) {
    const auto prop = require(spec.prop, "prop", spec.kind);
    const auto dist = Distribution::parse(require(spec.dist, "dist", spec.kind));
    const auto g = ModerateFunction::parse(require(spec.g, "G", spec.kind));
    const auto paths = path_config(spec, 4096);
    SeriesConfig sc;
    sc.n_max = spec.n_max.value_or(paths.horizon);
    sc.replicates = paths.replicates;
    sc.seed = spec.seed;
    sc.threads = spec.threads;

    std::vector<BoundReport> reports;
    if (prop == "1") {
        reports.push_back(prop1_check(dist, g, spec.alpha.value_or(0.5), paths));
    } else if (prop == "2") {
        reports.push_back(prop2_check(dist, g, spec.p.value_or(0), sc));
    } else if (prop == "3") {
        reports.push_back(prop3_check(dist, g, paths, sc));
    } else if (prop == "sym") {
        SymTransferOptions o;
        if (!spec.a_grid.empty()) o.exit_levels = spec.a_grid;
        if (spec.a) o.deviation_level = *spec.a;
        if (spec.n_max) o.deviation_n_max = *spec.n_max;
        reports = sym_transfer_check(dist, g, paths, o);
    } else {
        throw ConfigError("field 'prop' must be 1, 2, 3 or sym, got '" + prop + "'");
    }
    const bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
    Json r;
    if (reports.size() == 1) {
        r = bklab::to_json(reports.front());
    } else {
        Json arr = Json::array();
        for (const auto& x : reports) arr.push_back(bklab::to_json(x));
        r["reports"] = arr;
        r["passed"] = ok;
    }
    std::string csv = "name,detail,lhs,lhs_se,rhs,rhs_se,slack,holds_within\n";
    for (const auto& x : reports) {
        csv += x.name + ',' + x.detail + ',' + format_double(x.lhs) + ',' + format_double(x.lhs_se) + ',' +
               format_double(x.rhs) + ',' + format_double(x.rhs_se) + ',' + format_double(x.slack()) + ',' +
               format_double(x.holds_within()) + '\n';
    }
    return {envelope(to_string(spec.kind), spec.seed, r), csv, ok ? 0 : 1};
}

ExperimentResult run_counterexample(const ExperimentSpec& spec) {
    const auto g = ModerateFunction::parse(spec.g.value_or("exp"));
    const auto n = static_cast<std::size_t>(spec.prefix.value_or(100000));
    if (n < 1) throw ConfigError("field 'prefix' must be >= 1");
    const auto ts = counterexample_sequence(g, n, spec.t_max.value_or(1e6));
    const auto law = normalize_counterexample(g, ts, n);
    const auto dist = Distribution::counterexample(law);
    const auto finite = moment_xg(dist, g);
    const auto doubled = moment_xg(dist, g.dilated(2.0));
    CompensatedSum h;
    for (std::size_t k = 1; k <= n; ++k) h.add(1.0 / static_cast<double>(k));
    const double lower = 2.0 * law.c * h.value();
    const bool finite_ok = finite.verdict == Evidence::converging && finite.last_increment <= 1e-9;
    const bool divergent_ok = doubled.value >= lower && doubled.verdict == Evidence::diverging;

    Json r;
    r["G"] = g.name();
    r["dist"] = dist.name();
    r["prefix"] = n;
    r["c"] = law.c;
    r["stored_mass"] = law.stored_mass;
    r["tail_mass_bound"] = law.tail_mass_bound;
    r["t_first"] = law.ts.front();
    r["t_last"] = law.ts.back();
    r["moment"] = bklab::to_json(finite);
    r["doubled_moment"] = bklab::to_json(doubled);
    r["harmonic_N"] = h.value();
    r["doubled_lower_bound"] = lower;
    r["finite_evidence"] = finite_ok;
    r["divergence_evidence"] = divergent_ok;
    r["passed"] = finite_ok && divergent_ok;

    std::string csv = "atom,mass\n";
    for (std::size_t k = 0; k < n; ++k) {
        const std::string m = format_double(law.weight(k + 1));
        csv += format_double(-law.ts[k]) + ',' + m + '\n';
        csv += format_double(law.ts[k]) + ',' + m + '\n';
    }
    return {envelope(to_string(spec.kind), spec.seed, r), csv, finite_ok && divergent_ok ? 0 : 1};
}

HypothesisSet hypotheses_of(const ExperimentSpec& spec) {
    if (!spec.hypotheses) throw ConfigError("kind " + to_string(spec.kind) + " needs field 'hypotheses'");
    return HypothesisSet::from_json(*spec.hypotheses);
}

LevelVector levels_for(const ExperimentSpec& spec, const HypothesisSet& hyp) {
    std::vector<double> c = spec.levels;
    if (c.empty() && spec.hypotheses->contains("levels")) c = number_list(*spec.hypotheses, "levels");
    if (c.empty()) throw ConfigError("kind " + to_string(spec.kind) + " needs field 'levels'");
    LevelVector lv{c};
    lv.validate(hyp.size());
    return lv;
}

ExperimentResult run_sprt(const ExperimentSpec& spec) {
    const auto hyp = hypotheses_of(spec);
    const auto lv = levels_for(spec, hyp);
    const std::size_t truth = spec.true_index.value_or(0);
    if (truth >= hyp.size()) throw ConfigError("field 'true_index' is out of range");
    DecisionRecord rec;
    Json r;
    r["hypotheses"] = hyp.to_json();
    r["levels"] = number_list_json(lv.c);
    if (!spec.observations.empty()) {
        std::vector<std::size_t> ys;
        for (double v : spec.observations) ys.push_back(hyp.symbol_index(v));
        std::size_t next = 0;
        rec = run_test(hyp, lv, [&] { return ys[next++]; }, ys.size());
        r["source"] = "observations";
    } else {
        rec = run_test(hyp, lv, iid_source(hyp, truth, spec.seed, 0), spec.horizon.value_or(100000));
        r["source"] = "simulated";
        r["true_index"] = truth;
    }
    r["record"] = rec.to_json();
    if (spec.reps && spec.observations.empty()) {
        McConfig mc;
        mc.reps = *spec.reps;
        mc.horizon = spec.horizon.value_or(100000);
        mc.seed = spec.seed;
        mc.threads = spec.threads;
        r["errors"] = bklab::to_json(estimate_errors(hyp, lv, truth, mc));
    }
    return {envelope(to_string(spec.kind), spec.seed, r), std::nullopt, 0};
}

ExperimentResult run_sweep(const ExperimentSpec& spec) {
    const auto hyp = hypotheses_of(spec);
    const auto g = ModerateFunction::parse(spec.g.value_or("power:r=1"));
    const std::vector<double> schedule =
        spec.schedule.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4} : spec.schedule;
    McConfig mc;
    mc.reps = spec.reps.value_or(10000);
    mc.horizon = spec.horizon.value_or(1000000);
    mc.seed = spec.seed;
    mc.threads = spec.threads;
    const std::size_t truth = spec.true_index.value_or(0);
    const auto rows = optimality_sweep(hyp, schedule, truth, g, mc);
    Json r;
    r["hypotheses"] = hyp.to_json();
    r["G"] = g.name();
    r["true_index"] = truth;
    Json arr = Json::array();
    for (const auto& row : rows) arr.push_back(bklab::to_json(row));
    r["rows"] = arr;
    bool decreasing = true;
    for (std::size_t k = rows.size() >= 3 ? rows.size() - 2 : 1; k < rows.size(); ++k)
        decreasing = decreasing && rows[k].ratio < rows[k - 1].ratio;
    r["ratio_decreasing_last_three"] = decreasing;
    r["note"] = "reference_G is a first-order surrogate; only the trend of the ratio is meaningful";
    return {envelope(to_string(spec.kind), spec.seed, r), sweep_csv(rows), 0};
}

ExperimentResult run_matrix(const ExperimentSpec& spec) {
    const auto& dnames = spec.dists.empty() ? default_matrix_dists : spec.dists;
    const std::vector<std::string> gnames = spec.gs.empty() ? std::vector<std::string>{"power:r=1"} : spec.gs;
    std::vector<Distribution> dists;
    for (const auto& d : dnames) dists.push_back(Distribution::parse(d));
    std::vector<ModerateFunction> gs;
    for (const auto& g : gnames) gs.push_back(ModerateFunction::parse(g));
    Theorem1Config cfg;
    if (!spec.a_grid.empty()) cfg.a_grid = spec.a_grid;
    if (spec.horizon) cfg.horizon = *spec.horizon;
    cfg.n_max = spec.n_max.value_or(cfg.horizon);
    if (spec.reps) cfg.replicates = *spec.reps;
    cfg.seed = spec.seed;
    cfg.threads = spec.threads;
    const auto rep = run_theorem1(dists, gs, cfg);
    Json r;
    r["a_grid"] = cfg.a_grid;
    r["horizon"] = cfg.horizon;
    r["n_max"] = cfg.n_max;
    r["replicates"] = cfg.replicates;
    Json cells = Json::array();
    std::string csv = "dist,G,moment,series,last_exit,consistent\n";
    for (const auto& c : rep.cells) {
        cells.push_back(to_json(c));
        csv += c.dist + ',' + c.g + ',' + moment_label(c.moment_verdict) + ',' + series_label(c.series_verdict) + ',' +
               series_label(c.last_exit_verdict) + ',' + (c.consistent ? "true" : "false") + '\n';
    }
    r["cells"] = cells;
    r["consistent"] = rep.all_consistent();
    return {envelope(to_string(spec.kind), spec.seed, r), csv, rep.all_consistent() ? 0 : 1};
}

} // namespace

// ---------------------------------------------------------------------------

bool Theorem1Report::all_consistent() const noexcept {
    return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.consistent; });
}

Evidence combine_over_grid(std::span<const Evidence> verdicts) {
    if (verdicts.empty()) return Evidence::inconclusive;
    bool all_conv = true;
    for (auto v : verdicts) {
        if (v == Evidence::diverging) return Evidence::diverging;
        all_conv = all_conv && v == Evidence::converging;
    }
    return all_conv ? Evidence::converging : Evidence::inconclusive;
}

Theorem1Report run_theorem1(std::span<const Distribution> dists, std::span<const ModerateFunction> gs,
                            const Theorem1Config& cfg) {
    if (cfg.a_grid.empty()) throw ConfigError("the a-grid is empty");
    Theorem1Report rep;
    for (std::size_t row = 0; row < dists.size(); ++row) {
        const auto& dist = dists[row];
        const std::uint64_t seed = derive_seed(cfg.seed, row);
        PathConfig pc;
        pc.horizon = cfg.horizon;
        pc.replicates = cfg.replicates;
        pc.seed = seed;
        pc.threads = cfg.threads;
        SeriesOptions so;
        so.threads = cfg.threads;
        const auto exits = simulate_last_exits(dist, cfg.a_grid, pc);
        const auto series = simulate_series(dist, cfg.a_grid, cfg.n_max, cfg.replicates, seed, so);
        for (const auto& g : gs) {
            Theorem1Cell cell;
            cell.dist = dist.name();
            cell.g = g.name();
            cell.seed = seed;
            MomentOptions mo;
            mo.seed = seed;
            mo.threads = cfg.threads;
            cell.moment = moment_xg(dist, g, mo);
            cell.moment_verdict = cell.moment.verdict;
            std::vector<Evidence> sv, lv;
            for (std::size_t j = 0; j < cfg.a_grid.size(); ++j) {
                cell.series.push_back(summarize_series(series, j, g));
                sv.push_back(cell.series.back().verdict);
                cell.last_exit.push_back(summarize_last_exit(exits, j, g, cfg.growth.censor_bound));
                lv.push_back(lastexit_verdict(cell.last_exit.back(), cfg.growth));
            }
            cell.series_verdict = combine_over_grid(sv);
            cell.last_exit_verdict = combine_over_grid(lv);
            cell.consistent = cell.moment_verdict != Evidence::inconclusive &&
                              cell.moment_verdict == cell.series_verdict &&
                              cell.series_verdict == cell.last_exit_verdict;
            rep.cells.push_back(std::move(cell));
        }
    }
    return rep;
}

nlohmann::ordered_json to_json(const Theorem1Cell& cell) {
    Json j;
    j["dist"] = cell.dist;
    j["G"] = cell.g;
    j["seed"] = cell.seed;
    Json m;
    m["value"] = cell.moment.value;
    m["mode"] = to_string(cell.moment.mode_used);
    m["verdict"] = moment_label(cell.moment.verdict);
    j["moment"] = m;
    Json s = Json::array();
    for (const auto& e : cell.series) s.push_back(cell_series_json(e));
    j["series"] = s;
    Json l = Json::array();
    for (const auto& e : cell.last_exit) {
        Json x;
        x["a"] = e.a;
        x["mean"] = e.mean;
        x["se"] = e.se;
        x["censor_rate"] = e.censor_rate;
        x["mean_quarter_horizon"] = e.mean_quarter;
        x["mean_half_horizon"] = e.mean_half;
        x["verdict"] = series_label(lastexit_verdict(e));
        l.push_back(x);
    }
    j["last_exit"] = l;
    j["verdicts"] = Json{{"a", moment_label(cell.moment_verdict)},
                         {"b", series_label(cell.series_verdict)},
                         {"c", series_label(cell.last_exit_verdict)}};
    j["consistent"] = cell.consistent;
    return j;
}

// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::moderate_audit: return "moderate-audit";
    case ExperimentKind::last_exit: return "last-exit";
    case ExperimentKind::series: return "series";
    case ExperimentKind::bounds: return "bounds";
    case ExperimentKind::counterexample: return "counterexample";
    case ExperimentKind::sprt_run: return "sprt-run";
    case ExperimentKind::sprt_sweep: return "sprt-sweep";
    case ExperimentKind::theorem1_matrix: return "theorem1-matrix";
    }
    return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::moderate_audit, ExperimentKind::last_exit, ExperimentKind::series,
                   ExperimentKind::bounds, ExperimentKind::counterexample, ExperimentKind::sprt_run,
                   ExperimentKind::sprt_sweep, ExperimentKind::theorem1_matrix}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown experiment kind '" + s + "'");
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("an experiment spec must be a JSON object");
    static const std::set<std::string> known{
        "kind", "dist", "G", "dists", "Gs", "prop", "horizon", "reps", "seed", "threads", "alpha", "p", "a",
        "a_grid", "n_max", "prefix", "t_min", "t_max", "points", "hypotheses", "levels", "true_index", "schedule",
        "observations", "out", "format"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("unknown field '" + it.key() + "'");

    ExperimentSpec s;
    if (!j.contains("kind")) throw ConfigError("missing field 'kind'");
    s.kind = parse_kind(field<std::string>(j, "kind"));
    auto opt_str = [&](const char* k, std::optional<std::string>& out) {
        if (j.contains(k)) out = field<std::string>(j, k);
    };
    auto opt_u64 = [&](const char* k, std::optional<std::uint64_t>& out) {
        if (j.contains(k)) out = field<std::uint64_t>(j, k);
    };
    auto opt_num = [&](const char* k, std::optional<double>& out) {
        if (j.contains(k)) out = field<double>(j, k);
    };
    opt_str("dist", s.dist);
    opt_str("G", s.g);
    if (j.contains("dists")) s.dists = field<std::vector<std::string>>(j, "dists");
    if (j.contains("Gs")) s.gs = field<std::vector<std::string>>(j, "Gs");
    if (j.contains("prop")) {
        const auto& v = j.at("prop");
        s.prop = v.is_number_integer() ? std::to_string(v.get<int>()) : field<std::string>(j, "prop");
    }
    opt_u64("horizon", s.horizon);
    opt_u64("reps", s.reps);
    if (j.contains("seed")) s.seed = field<std::uint64_t>(j, "seed");
    if (j.contains("threads")) s.threads = field<unsigned>(j, "threads");
    opt_num("alpha", s.alpha);
    if (j.contains("p")) s.p = field<int>(j, "p");
    opt_num("a", s.a);
    if (j.contains("a_grid")) s.a_grid = number_list(j, "a_grid");
    opt_u64("n_max", s.n_max);
    opt_u64("prefix", s.prefix);
    opt_num("t_min", s.t_min);
    opt_num("t_max", s.t_max);
    opt_u64("points", s.points);
    if (j.contains("hypotheses")) {
        if (!j.at("hypotheses").is_object()) throw ConfigError("field 'hypotheses' must be an object");
        s.hypotheses = j.at("hypotheses");
    }
    if (j.contains("levels")) s.levels = number_list(j, "levels");
    if (j.contains("true_index")) s.true_index = field<std::size_t>(j, "true_index");
    if (j.contains("schedule")) s.schedule = number_list(j, "schedule");
    if (j.contains("observations")) s.observations = number_list(j, "observations");
    opt_str("out", s.out);
    opt_str("format", s.format);
    return s;
}

nlohmann::ordered_json ExperimentSpec::to_json() const {
    Json j;
    j["kind"] = to_string(kind);
    if (dist) j["dist"] = *dist;
    if (g) j["G"] = *g;
    if (!dists.empty()) j["dists"] = dists;
    if (!gs.empty()) j["Gs"] = gs;
    if (prop) j["prop"] = *prop;
    if (horizon) j["horizon"] = *horizon;
    if (reps) j["reps"] = *reps;
    j["seed"] = seed;
    j["threads"] = threads;
    if (alpha) j["alpha"] = *alpha;
    if (p) j["p"] = *p;
    if (a) j["a"] = *a;
    if (!a_grid.empty()) j["a_grid"] = a_grid;
    if (n_max) j["n_max"] = *n_max;
    if (prefix) j["prefix"] = *prefix;
    if (t_min) j["t_min"] = *t_min;
    if (t_max) j["t_max"] = *t_max;
    if (points) j["points"] = *points;
    if (hypotheses) j["hypotheses"] = Json::parse(hypotheses->dump());
    if (!levels.empty()) j["levels"] = number_list_json(levels);
    if (true_index) j["true_index"] = *true_index;
    if (!schedule.empty()) j["schedule"] = schedule;
    if (!observations.empty()) j["observations"] = observations;
    if (out) j["out"] = *out;
    if (format) j["format"] = *format;
    return j;
}

void ExperimentSpec::validate() const {
    auto need = [&](bool present, const char* name) {
        if (!present) throw ConfigError("kind " + to_string(kind) + " needs field '" + name + "'");
    };
    switch (kind) {
    case ExperimentKind::moderate_audit: need(g.has_value(), "G"); break;
    case ExperimentKind::last_exit:
    case ExperimentKind::series:
        need(dist.has_value(), "dist");
        need(g.has_value(), "G");
        break;
    case ExperimentKind::bounds:
        need(prop.has_value(), "prop");
        need(dist.has_value(), "dist");
        need(g.has_value(), "G");
        break;
    case ExperimentKind::sprt_run:
    case ExperimentKind::sprt_sweep: need(hypotheses.has_value(), "hypotheses"); break;
    case ExperimentKind::counterexample:
    case ExperimentKind::theorem1_matrix: break;
    }
    if (threads < 1) throw ConfigError("field 'threads' must be >= 1");
    if (reps && *reps < 1) throw ConfigError("field 'reps' must be >= 1");
    if (horizon && *horizon < 1) throw ConfigError("field 'horizon' must be >= 1");
    if (format) parse_format(*format);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case ExperimentKind::moderate_audit: return run_moderate_audit(spec);
    case ExperimentKind::last_exit: return run_last_exit(spec);
    case ExperimentKind::series: return run_series(spec);
    case ExperimentKind::bounds: return run_bounds(spec);
    case ExperimentKind::counterexample: return run_counterexample(spec);
    case ExperimentKind::sprt_run: return run_sprt(spec);
    case ExperimentKind::sprt_sweep: return run_sweep(spec);
    case ExperimentKind::theorem1_matrix: return run_matrix(spec);
    }
    throw ConfigError("unhandled experiment kind");
}

} // namespace bklab
