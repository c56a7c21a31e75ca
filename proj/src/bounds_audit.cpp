#include "bklab/bounds_audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bklab/combinatorics.hpp"
#include "bklab/errors.hpp"
#include "bklab/rng.hpp"

namespace bklab {

namespace {

constexpr const char* prop3_note =
    "rhs uses a partial sum of S(X,G,1/8), which underestimates it: a violation is decisive, a pass is evidence";

double combined(double a, double b) { return std::hypot(a, b); }

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double doubling_constant(const ModerateFunction& g) {
    const auto c = g.claimed_doubling();
    if (!c) throw PreconditionError("G=" + g.name() + " carries no doubling constant");
    return *c;
}

void require_symmetric(const Distribution& dist, const char* what) {
    if (!dist.is_symmetric()) throw PreconditionError(std::string(what) + " needs a symmetric law, got " + dist.name());
}

void require_integrable(const Distribution& dist) {
    const auto m = moment_xg(dist, ModerateFunction::constant());
    if (!std::isfinite(m.value)) throw PreconditionError(dist.name() + " is not integrable");
}

int resolve_p(const ModerateFunction& g, int p) {
    const auto smallest = smallest_admissible_p(g);
    if (p == 0) {
        if (!smallest) throw ConditionViolation("no p <= 40 makes G(t)/t^(p+1) integrable for G=" + g.name(), smallest);
        return *smallest;
    }
    if (p < 0) throw DomainError("p must be a positive integer");
    if (!tail_condition_holds(g, p)) {
        std::string msg = "G(t)/t^(p+1) is not integrable for p=" + std::to_string(p) + ", G=" + g.name();
        msg += smallest ? "; smallest admissible p is " + std::to_string(*smallest) : "; no admissible p <= 40";
        throw ConditionViolation(msg, smallest);
    }
    return p;
}

BoundReport prop1_from(const Distribution& dist, const ModerateFunction& g, double alpha,
                       const LastExitEstimate& exit_half) {
    const double c = doubling_constant(g);
    const double t = truncation_threshold(dist, alpha);
    const auto m = moment_xg(dist, g);
    const double k = 4.0 * c * c;
    auto r = make_report("prop1", m.value, m.se, k * (t * eval(g, t) + exit_half.mean / alpha), k * exit_half.se / alpha);
    r.seed = exit_half.seed;
    r.dist = dist.name();
    r.g = g.name();
    r.lhs_exact = m.mode_used != MomentMode::monte_carlo;
    r.params = {{"alpha", alpha}, {"t", t}, {"c", c}, {"EG_L_half", exit_half.mean},
                {"censor_rate", exit_half.censor_rate}, {"horizon", static_cast<double>(exit_half.horizon)},
                {"reps", static_cast<double>(exit_half.replicates)}};
    r.degraded = exit_half.degraded;
    r.note = exit_half.warning;
    return r;
}

BoundReport prop2_from(const Distribution& dist, const ModerateFunction& g, int p, const SeriesEstimate& s) {
    const auto m = moment_xg(dist, g);
    const double abs_mean = moment_xg(dist, ModerateFunction::constant()).value;
    const double c_h = h_scaling_constant(g, p, geometric_grid(1.0, 1e4, 200));
    // (2p)! / 2^p is an integer; only the final product goes to floating point.
    const double comb = to_double(factorial(static_cast<unsigned>(2 * p)) >> p);
    const double coef = comb * std::pow(1.0 + abs_mean, p - 1) * c_h;
    auto r = make_report("prop2", s.partial_sum, s.partial_se, m.value * (1.0 + coef), m.se * (1.0 + coef));
    r.seed = s.seed;
    r.dist = dist.name();
    r.g = g.name();
    r.lhs_exact = s.exact_through >= s.n_max;
    r.params = {{"p", static_cast<double>(p)}, {"c_H", c_h}, {"E_XG", m.value}, {"E_abs_X", abs_mean},
                {"a", s.a}, {"n_max", static_cast<double>(s.n_max)}, {"reps", static_cast<double>(s.replicates)}};
    r.note = "lhs is the partial sum of S(X,G,1) up to n_max, a lower bound";
    return r;
}

BoundReport prop3_from(const Distribution& dist, const ModerateFunction& g, const LastExitEstimate& exit_one,
                       const SeriesEstimate& eighth) {
    auto r = make_report("prop3", exit_one.mean, exit_one.se, eval(g, 0.0) + 12.0 * eighth.partial_sum,
                         12.0 * eighth.partial_se);
    r.seed = exit_one.seed;
    r.dist = dist.name();
    r.g = g.name();
    r.lhs_exact = g.is_constant();
    r.params = {{"censor_rate", exit_one.censor_rate}, {"horizon", static_cast<double>(exit_one.horizon)},
                {"n_max", static_cast<double>(eighth.n_max)}, {"S_eighth", eighth.partial_sum},
                {"reps", static_cast<double>(exit_one.replicates)}};
    r.degraded = exit_one.degraded;
    r.note = prop3_note;
    if (!exit_one.warning.empty()) r.note += "; " + exit_one.warning;
    return r;
}

PathConfig centered_at_zero(PathConfig cfg) {
    if (!cfg.center) cfg.center = 0.0;
    return cfg;
}

SeriesOptions series_options(const SeriesConfig& cfg) {
    SeriesOptions o;
    o.threads = cfg.threads;
    o.center = 0.0;
    return o;
}

// Median of S_n/n - x at each n of the grid, from independent paths.
std::vector<double> dyadic_medians(const Distribution& dist, std::span<const std::uint64_t> ns, double x,
                                   std::uint64_t reps, std::uint64_t seed) {
    std::vector<std::vector<double>> values(ns.size(), std::vector<double>(reps));
    with_sampler(dist, [&](auto sampler) {
        for (std::uint64_t rep = 0; rep < reps; ++rep) {
            CounterStream s(derive_key(seed, StreamId::median, rep));
            double sum = 0.0;
            std::size_t next = 0;
            for (std::uint64_t n = 1; next < ns.size(); ++n) {
                sum += sampler(s) - x;
                if (n == ns[next]) values[next++][rep] = sum / static_cast<double>(n);
            }
        }
    });
    std::vector<double> out;
    out.reserve(ns.size());
    for (auto& v : values) out.push_back(empirical_median(std::move(v)));
    return out;
}

} // namespace

double BoundReport::holds_within() const noexcept {
    const double se = combined(lhs_se, rhs_se);
    const double s = slack();
    if (std::isnan(s)) return rhs == lhs ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    if (se > 0.0 && std::isfinite(s)) return s / se;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return s >= -1e-12 * scale ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

bool BoundReport::passed() const noexcept {
    const double h = holds_within();
    return lhs_exact ? h >= 0.0 : h >= -4.0;
}

BoundReport make_report(std::string name, double lhs, double lhs_se, double rhs, double rhs_se) {
    BoundReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.lhs_se = lhs_se;
    r.rhs = rhs;
    r.rhs_se = rhs_se;
    return r;
}

BoundReport prop1_check(const Distribution& dist, const ModerateFunction& g, double alpha, const PathConfig& cfg,
                        double censor_bound) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    doubling_constant(g);
    require_integrable(dist);
    const auto est = estimate_EG_lastexit(dist, g, 0.5, centered_at_zero(cfg), censor_bound);
    return prop1_from(dist, g, alpha, est);
}

BoundReport prop2_check(const Distribution& dist, const ModerateFunction& g, int p, const SeriesConfig& cfg) {
    require_symmetric(dist, "prop2");
    p = resolve_p(g, p);
    const auto s = estimate_series(dist, g, 1.0, cfg.n_max, cfg.replicates, cfg.seed, series_options(cfg));
    return prop2_from(dist, g, p, s);
}

BoundReport prop3_check(const Distribution& dist, const ModerateFunction& g, const PathConfig& cfg,
                        const SeriesConfig& series_cfg, double censor_bound) {
    require_symmetric(dist, "prop3");
    const auto exit_one = estimate_EG_lastexit(dist, g, 1.0, centered_at_zero(cfg), censor_bound);
    const auto eighth = estimate_series(dist, g, 0.125, series_cfg.n_max, series_cfg.replicates, series_cfg.seed,
                                        series_options(series_cfg));
    return prop3_from(dist, g, exit_one, eighth);
}

std::vector<BoundReport> sym_transfer_check(const Distribution& dist, const ModerateFunction& g,
                                            const PathConfig& cfg, const SymTransferOptions& opts) {
    cfg.validate();
    const double c = doubling_constant(g);
    require_integrable(dist);
    const double x = resolve_center(dist, cfg.center);
    const auto star = Distribution::symmetrized(dist);
    std::vector<BoundReport> out;

    auto base = [&](BoundReport r, std::string detail) {
        r.dist = dist.name();
        r.g = g.name();
        r.detail = std::move(detail);
        r.seed = cfg.seed;
        return r;
    };

    {
        MomentOptions mo;
        mo.seed = derive_seed(cfg.seed, 1);
        mo.threads = cfg.threads;
        const auto lhs = moment_xg(star, g, mo);
        mo.seed = derive_seed(cfg.seed, 2);
        const auto rhs = moment_xg(dist, g, mo);
        auto r = base(make_report("sym_transfer", lhs.value, lhs.se, 4.0 * c * rhs.value, 4.0 * c * rhs.se), "moment");
        r.lhs_exact = lhs.mode_used != MomentMode::monte_carlo;
        r.params = {{"c", c}, {"center", x}};
        out.push_back(std::move(r));
    }

    if (!opts.exit_levels.empty()) {
        std::vector<double> doubled;
        for (double a : opts.exit_levels) {
            if (!(a > 0.0)) throw DomainError("exit levels must be positive");
            doubled.push_back(2.0 * a);
        }
        PathConfig star_cfg = cfg;
        star_cfg.center = 0.0;
        PathConfig plain_cfg = cfg;
        plain_cfg.center = x;
        const auto star_run = simulate_last_exits(star, doubled, star_cfg, StreamId::sym_transfer_star);
        const auto plain_run = simulate_last_exits(dist, opts.exit_levels, plain_cfg, StreamId::sym_transfer_plain);
        for (std::size_t j = 0; j < doubled.size(); ++j) {
            const auto lhs = summarize_last_exit(star_run, j, g, opts.censor_bound);
            const auto rhs = summarize_last_exit(plain_run, j, g, opts.censor_bound);
            auto r = base(make_report("sym_transfer", lhs.mean, lhs.se, 2.0 * rhs.mean, 2.0 * rhs.se),
                          "last_exit a=" + fmt(opts.exit_levels[j]));
            r.lhs_exact = g.is_constant();
            r.degraded = lhs.degraded || rhs.degraded;
            r.params = {{"a", opts.exit_levels[j]}, {"censor_rate_star", lhs.censor_rate},
                        {"censor_rate", rhs.censor_rate}, {"horizon", static_cast<double>(cfg.horizon)}};
            if (r.degraded) r.note = "censoring above bound";
            out.push_back(std::move(r));
        }
    }

    if (opts.deviation_n_max >= 1) {
        const double a = opts.deviation_level;
        if (!(a > 0.0)) throw DomainError("deviation level must be positive");
        std::vector<std::uint64_t> ns;
        for (std::uint64_t n = 1; n <= opts.deviation_n_max; n *= 2) ns.push_back(n);
        const std::uint64_t n_top = ns.back();

        std::vector<double> medians(ns.size(), 0.0);
        if (!dist.is_symmetric() || x != 0.0) medians = dyadic_medians(dist, ns, x, opts.median_reps, cfg.seed);
        std::size_t first = ns.size();
        for (std::size_t k = 0; k < ns.size(); ++k) {
            if (std::abs(medians[k]) < a / 4.0) {
                first = k;
                break;
            }
        }

        SeriesOptions so;
        so.threads = cfg.threads;
        so.center = x;
        const double plain_levels[] = {a, a / 4.0};
        const double star_levels[] = {a / 2.0};
        // The two plain probabilities sit on opposite sides, so each gets its own seed.
        const auto plain_a = simulate_series(dist, std::span(plain_levels, 1), n_top, cfg.replicates,
                                             derive_seed(cfg.seed, 3), so, StreamId::sym_plain);
        const auto plain_q = simulate_series(dist, std::span(plain_levels + 1, 1), n_top, cfg.replicates,
                                             derive_seed(cfg.seed, 4), so, StreamId::sym_plain);
        so.center = 0.0;
        const auto star_h = simulate_series(star, star_levels, n_top, cfg.replicates, derive_seed(cfg.seed, 5), so,
                                            StreamId::sym_star);
        const double n0 = first < ns.size() ? static_cast<double>(ns[first]) : std::numeric_limits<double>::infinity();
        for (std::size_t k = first; k < ns.size(); ++k) {
            const auto n = ns[k];
            const auto pa = run_probability(plain_a, 0, n);
            const auto ph = run_probability(star_h, 0, n);
            const auto pq = run_probability(plain_q, 0, n);
            auto r1 = base(make_report("sym_transfer", pa.p_hat, pa.se, 2.0 * ph.p_hat, 2.0 * ph.se),
                           "deviation first n=" + std::to_string(n));
            r1.lhs_exact = pa.exact && ph.exact;
            r1.params = {{"n", static_cast<double>(n)}, {"a", a}, {"n0", n0}, {"median", medians[k]}};
            auto r2 = base(make_report("sym_transfer", 2.0 * ph.p_hat, 2.0 * ph.se, 4.0 * pq.p_hat, 4.0 * pq.se),
                           "deviation second n=" + std::to_string(n));
            r2.lhs_exact = pq.exact && ph.exact;
            r2.params = r1.params;
            out.push_back(std::move(r1));
            out.push_back(std::move(r2));
        }
    }
    return out;
}

std::vector<BoundReport> prop_suite(const Distribution& dist, std::span<const ModerateFunction> gs,
                                    const SuiteConfig& cfg) {
    require_symmetric(dist, "the proposition suite");
    require_integrable(dist);
    std::vector<int> ps;
    for (const auto& g : gs) {
        doubling_constant(g);
        ps.push_back(resolve_p(g, 0));
    }
    const double exit_levels[] = {0.5, 1.0};
    const double series_levels[] = {1.0, 0.125};
    const auto exits = simulate_last_exits(dist, exit_levels, centered_at_zero(cfg.paths));
    const auto series = simulate_series(dist, series_levels, cfg.series.n_max, cfg.series.replicates,
                                        cfg.series.seed, series_options(cfg.series));
    std::vector<BoundReport> out;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const auto& g = gs[i];
        const auto half = summarize_last_exit(exits, 0, g, cfg.censor_bound);
        const auto one = summarize_last_exit(exits, 1, g, cfg.censor_bound);
        const auto s1 = summarize_series(series, 0, g);
        const auto s8 = summarize_series(series, 1, g);
        out.push_back(prop1_from(dist, g, cfg.alpha, half));
        out.push_back(prop2_from(dist, g, ps[i], s1));
        out.push_back(prop3_from(dist, g, one, s8));
    }
    return out;
}

} // namespace bklab
