#include "bklab/lln_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "bklab/errors.hpp"

namespace bklab {

namespace {

constexpr std::size_t max_levels = 8;

bool deviates(double s, double n, double x, double a) noexcept { return std::abs(s - x * n) >= a * n; }

void check_levels(std::span<const double> levels) {
    if (levels.empty() || levels.size() > max_levels) {
        throw DomainError("between 1 and " + std::to_string(max_levels) + " levels per pass");
    }
    for (double a : levels) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("levels must be finite and >= 0");
    }
}

std::optional<double> hoeffding_range(const Distribution& dist, double center) {
    const auto mu = dist.mean();
    if (!mu || std::abs(*mu - center) > 1e-12) return std::nullopt;
    if (const auto* b = std::get_if<Bernoulli>(&dist.kind())) return std::abs(b->v1 - b->v0);
    if (std::holds_alternative<Rademacher>(dist.kind())) return 2.0;
    if (const auto bound = dist.abs_bound()) return 2.0 * *bound;
    return std::nullopt;
}

double exact_deviation_prob(const std::vector<Atom>& law, double n, double x, double a) {
    CompensatedSum p;
    for (const auto& at : law) {
        if (deviates(at.value, n, x, a)) p.add(at.mass);
    }
    return std::min(1.0, p.value());
}

double combined_se(double a, double b) noexcept { return std::sqrt(a * a + b * b); }

} // namespace

void PathConfig::validate() const {
    if (horizon < 1) throw DomainError("horizon must be >= 1");
    if (horizon >= (std::uint64_t{1} << 32)) throw DomainError("horizon must be below 2^32");
    if (replicates < 1) throw DomainError("replicates must be >= 1");
}

double resolve_center(const Distribution& dist, std::optional<double> center) {
    if (center) {
        if (!std::isfinite(*center)) throw DomainError("center must be finite");
        return *center;
    }
    if (const auto mu = dist.mean()) return *mu;
    throw PreconditionError(dist.name() + " has no finite mean; supply a center");
}

LastExitSample last_exit_time(std::span<const double> path, double a, double x) {
    if (!(a > 0.0)) throw DomainError("last_exit_time needs a > 0");
    if (path.empty()) throw DomainError("last_exit_time needs a nonempty path");
    LastExitSample out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!std::isfinite(path[i])) throw DataError("non-finite path entry at index " + std::to_string(i + 1));
        if (std::abs(path[i] - x) >= a) out.value = i + 1;
    }
    out.censored = out.value > 0 && 2 * out.value >= path.size();
    return out;
}

// ---------------------------------------------------------------------------
// Last exits

LastExitRun simulate_last_exits(const Distribution& dist, std::span<const double> levels, const PathConfig& cfg,
                                StreamId stream) {
    cfg.validate();
    check_levels(levels);
    LastExitRun run;
    run.levels.assign(levels.begin(), levels.end());
    run.horizon = cfg.horizon;
    run.replicates = cfg.replicates;
    run.seed = cfg.seed;
    run.center = resolve_center(dist, cfg.center);
    const std::size_t k = levels.size();
    for (auto* v : {&run.last, &run.quarter, &run.half}) v->assign(k, std::vector<std::uint32_t>(cfg.replicates));

    const std::uint64_t N = cfg.horizon;
    const double x = run.center;
    std::array<double, max_levels> lv{};
    std::copy(levels.begin(), levels.end(), lv.begin());
    const auto plan = plan_batches(cfg.replicates);

    with_sampler(dist, [&](auto draw) {
        run_batches(plan, cfg.threads, [&](std::size_t b) {
            for (std::uint64_t r = plan.begin(b); r < plan.end(b); ++r) {
                CounterStream s(derive_key(cfg.seed, stream, r));
                std::array<std::uint32_t, max_levels> L{};
                double S = 0.0;
                std::uint64_t n = 1;
                double nd = 1.0;
                auto advance = [&](std::uint64_t upto) {
                    for (; n <= upto; ++n, nd += 1.0) {
                        S += draw(s);
                        const double dev = std::abs(S - x * nd);
                        for (std::size_t j = 0; j < k; ++j) {
                            if (dev >= lv[j] * nd) L[j] = static_cast<std::uint32_t>(n);
                        }
                    }
                };
                advance(N / 4);
                for (std::size_t j = 0; j < k; ++j) run.quarter[j][r] = L[j];
                advance(N / 2);
                for (std::size_t j = 0; j < k; ++j) run.half[j][r] = L[j];
                advance(N);
                for (std::size_t j = 0; j < k; ++j) run.last[j][r] = L[j];
            }
        });
    });
    return run;
}

LastExitEstimate summarize_last_exit(const LastExitRun& run, std::size_t level, const ModerateFunction& g,
                                     double censor_bound) {
    if (level >= run.levels.size()) throw DomainError("no such level in the run");
    LastExitEstimate est;
    est.a = run.levels[level];
    est.replicates = run.replicates;
    est.horizon = run.horizon;
    est.seed = run.seed;

    // G(L) depends on L only; cache G over the distinct values seen.
    std::map<std::uint32_t, double> cache;
    auto G = [&](std::uint32_t L) {
        auto [it, inserted] = cache.try_emplace(L, 0.0);
        if (inserted) it->second = g.value(static_cast<double>(L));
        return it->second;
    };
    MeanAccumulator all;
    CompensatedSum quarter;
    CompensatedSum half;
    std::uint64_t censored = 0;
    const auto& last = run.last[level];
    for (std::uint64_t r = 0; r < run.replicates; ++r) {
        const std::uint32_t L = last[r];
        all.add(G(L));
        quarter.add(G(run.quarter[level][r]));
        half.add(G(run.half[level][r]));
        if (L > 0 && 2 * static_cast<std::uint64_t>(L) >= run.horizon) ++censored;
    }
    const auto e = all.estimate();
    const double R = static_cast<double>(run.replicates);
    est.mean = e.mean;
    est.se = e.se;
    est.mean_quarter = quarter.value() / R;
    est.mean_half = half.value() / R;
    est.censor_rate = static_cast<double>(censored) / R;
    if (est.censor_rate > censor_bound) {
        est.degraded = true;
        est.warning = "horizon too short: censor rate " + std::to_string(est.censor_rate) + " exceeds " +
                      std::to_string(censor_bound) + "; the mean may understate E[G(L)]";
    }
    return est;
}

LastExitEstimate estimate_EG_lastexit(const Distribution& dist, const ModerateFunction& g, double a,
                                      const PathConfig& cfg, double censor_bound) {
    if (!(a > 0.0)) throw DomainError("level a must be > 0");
    const double levels[] = {a};
    return summarize_last_exit(simulate_last_exits(dist, levels, cfg), 0, g, censor_bound);
}

Evidence lastexit_verdict(const LastExitEstimate& est, const GrowthRule& rule) {
    const bool growing = est.mean_half >= rule.growth_factor * est.mean_quarter &&
                         est.mean >= rule.growth_factor * est.mean_half;
    if (growing) return Evidence::diverging;
    if (est.censor_rate <= rule.censor_bound) return Evidence::converging;
    return Evidence::inconclusive;
}

// ---------------------------------------------------------------------------
// Exact laws of partial sums

std::optional<std::vector<Atom>> sum_law(const Distribution& dist, std::uint64_t n, std::size_t max_atoms) {
    if (n == 0) return std::vector<Atom>{{0.0, 1.0}};
    if (!dist.is_discrete()) return std::nullopt;
    const auto base = atoms(dist);
    if (base.size() > max_atoms) return std::nullopt;
    std::vector<Atom> law = base;
    for (std::uint64_t i = 1; i < n; ++i) {
        if (static_cast<double>(law.size()) * static_cast<double>(base.size()) > 64.0 * static_cast<double>(max_atoms)) {
            return std::nullopt;
        }
        law = convolve(law, base);
        if (law.size() > max_atoms) return std::nullopt;
    }
    return law;
}

TailEstimate tail_prob_mean(const Distribution& dist, std::uint64_t n, double a, std::uint64_t reps,
                            std::uint64_t seed, std::optional<double> center) {
    if (n < 1) throw DomainError("tail_prob_mean needs n >= 1");
    if (!(a >= 0.0)) throw DomainError("tail_prob_mean needs a >= 0");
    TailEstimate out;
    if (a == 0.0) {
        out.p_hat = 1.0;
        out.exact = true;
        return out;
    }
    const double x = resolve_center(dist, center);
    if (n <= 20) {
        if (const auto law = sum_law(dist, n)) {
            out.p_hat = exact_deviation_prob(*law, static_cast<double>(n), x, a);
            out.exact = true;
            return out;
        }
    }
    if (reps < 1) throw DomainError("tail_prob_mean needs reps >= 1 for Monte Carlo");
    const auto plan = plan_batches(reps);
    std::vector<std::uint64_t> hits(plan.batches, 0);
    with_sampler(dist, [&](auto draw) {
        run_batches(plan, 1, [&](std::size_t b) {
            for (std::uint64_t r = plan.begin(b); r < plan.end(b); ++r) {
                CounterStream s(derive_key(seed, StreamId::tail, r));
                double S = 0.0;
                for (std::uint64_t i = 0; i < n; ++i) S += draw(s);
                if (deviates(S, static_cast<double>(n), x, a)) ++hits[b];
            }
        });
    });
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    const auto e = proportion(total, reps);
    out.p_hat = e.mean;
    out.se = e.se;
    return out;
}

// ---------------------------------------------------------------------------
// Series

SeriesRun simulate_series(const Distribution& dist, std::span<const double> levels, std::uint64_t n_max,
                          std::uint64_t reps, std::uint64_t seed, const SeriesOptions& opts, StreamId stream) {
    if (n_max < 2) throw DomainError("series needs n_max >= 2");
    if (n_max >= (std::uint64_t{1} << 32)) throw DomainError("n_max must be below 2^32");
    check_levels(levels);
    SeriesRun run;
    run.levels.assign(levels.begin(), levels.end());
    run.n_max = n_max;
    run.replicates = reps;
    run.seed = seed;
    run.center = resolve_center(dist, opts.center);
    run.hoeffding_range = hoeffding_range(dist, run.center);
    const std::size_t k = levels.size();
    const double x = run.center;

    run.exact_p.assign(k, {});
    if (opts.exact && dist.is_discrete()) {
        const auto base = atoms(dist);
        std::vector<Atom> law{{0.0, 1.0}};
        const std::uint64_t limit = std::min(opts.exact_limit, n_max);
        for (std::uint64_t n = 1; n <= limit; ++n) {
            if (static_cast<double>(law.size()) * static_cast<double>(base.size()) > 64.0 * (1 << 20)) break;
            law = convolve(law, base);
            if (law.size() > (std::size_t{1} << 20)) break;
            for (std::size_t j = 0; j < k; ++j) {
                if (run.exact_p[j].empty()) run.exact_p[j].push_back(0.0); // index 0 unused
                run.exact_p[j].push_back(exact_deviation_prob(law, static_cast<double>(n), x, levels[j]));
            }
            run.exact_through = n;
        }
    }

    if (run.exact_through >= n_max) {
        run.plan = plan_batches(std::max<std::uint64_t>(reps, 1));
        return run;
    }
    if (reps < 1) throw DomainError("series needs reps >= 1 beyond the exact range");
    run.plan = plan_batches(reps);
    const auto& plan = run.plan;
    const std::size_t stride = n_max + 1;
    run.counts.assign(k, std::vector<std::uint32_t>(plan.batches * stride, 0));
    std::array<double, max_levels> lv{};
    std::copy(levels.begin(), levels.end(), lv.begin());
    const std::uint64_t skip = run.exact_through;

    with_sampler(dist, [&](auto draw) {
        run_batches(plan, opts.threads, [&](std::size_t b) {
            std::array<std::uint32_t*, max_levels> cnt{};
            for (std::size_t j = 0; j < k; ++j) cnt[j] = run.counts[j].data() + b * stride;
            for (std::uint64_t r = plan.begin(b); r < plan.end(b); ++r) {
                CounterStream s(derive_key(seed, stream, r));
                double S = 0.0;
                for (std::uint64_t n = 1; n <= skip; ++n) S += draw(s);
                double nd = static_cast<double>(skip) + 1.0;
                for (std::uint64_t n = skip + 1; n <= n_max; ++n, nd += 1.0) {
                    S += draw(s);
                    const double dev = std::abs(S - x * nd);
                    for (std::size_t j = 0; j < k; ++j) {
                        if (dev >= lv[j] * nd) ++cnt[j][n];
                    }
                }
            }
        });
    });
    return run;
}

TailEstimate run_probability(const SeriesRun& run, std::size_t level, std::uint64_t n) {
    if (level >= run.levels.size()) throw DomainError("no such level in the run");
    if (n < 1 || n > run.n_max) throw DomainError("n outside the simulated range");
    TailEstimate out;
    if (n <= run.exact_through) {
        out.p_hat = run.exact_p[level][n];
        out.exact = true;
        return out;
    }
    std::uint64_t hits = 0;
    const std::size_t stride = run.n_max + 1;
    for (std::size_t b = 0; b < run.plan.batches; ++b) hits += run.counts[level][b * stride + n];
    const auto e = proportion(hits, run.replicates);
    out.p_hat = e.mean;
    out.se = e.se;
    return out;
}

namespace {

double hoeffding_tail(const ModerateFunction& g, double a, double range, std::uint64_t n_max) {
    if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
    const double rate = 2.0 * a * a / (range * range);
    CompensatedSum total;
    for (std::uint64_t n = n_max + 1; n < n_max + 100000000ULL; ++n) {
        const double nd = static_cast<double>(n);
        const double term = std::exp(g.log_value(nd) - std::log(nd) + std::log(2.0) - rate * nd);
        const double capped = std::min(term, std::exp(g.log_value(nd) - std::log(nd)));
        if (!std::isfinite(capped)) return std::numeric_limits<double>::infinity();
        total.add(capped);
        // past the peak of n^-1 G(n) e^(-rate n), stop once terms are negligible
        if (term < 1e-20 * total.value() && nd * rate > 10.0) return total.value();
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace

SeriesEstimate summarize_series(const SeriesRun& run, std::size_t level, const ModerateFunction& g,
                                const BlockRule& rule) {
    if (level >= run.levels.size()) throw DomainError("no such level in the run");
    SeriesEstimate est;
    est.a = run.levels[level];
    est.n_max = run.n_max;
    est.replicates = run.exact_through >= run.n_max ? 0 : run.replicates;
    est.seed = run.seed;
    est.exact_through = run.exact_through;

    std::vector<double> w(run.n_max + 1, 0.0);
    for (std::uint64_t n = 1; n <= run.n_max; ++n) {
        const double nd = static_cast<double>(n);
        w[n] = g.value(nd) / nd;
    }
    const bool have_mc = !run.counts.empty();
    const std::size_t B = have_mc ? run.plan.batches : 0;
    const std::size_t stride = run.n_max + 1;
    std::vector<double> batch_total(B, 0.0);

    auto batch_block = [&](std::size_t b, std::uint64_t lo, std::uint64_t hi) {
        const auto* c = run.counts[level].data() + b * stride;
        CompensatedSum s;
        for (std::uint64_t n = lo; n <= hi; ++n) {
            if (c[n] != 0) s.add(w[n] * static_cast<double>(c[n]));
        }
        return s.value() / static_cast<double>(run.plan.end(b) - run.plan.begin(b));
    };

    CompensatedSum partial;
    for (unsigned i = 0;; ++i) {
        const std::uint64_t lo = std::uint64_t{1} << i;
        if (lo > run.n_max) break;
        const std::uint64_t full_hi = (std::uint64_t{2} << i) - 1;
        SeriesBlock blk;
        blk.index = i;
        blk.n_lo = lo;
        blk.n_hi = std::min(full_hi, run.n_max);
        blk.complete = blk.n_hi == full_hi;

        CompensatedSum exact;
        const std::uint64_t exact_hi = std::min(blk.n_hi, run.exact_through);
        for (std::uint64_t n = lo; n <= exact_hi; ++n) exact.add(w[n] * run.exact_p[level][n]);

        double mc = 0.0;
        double se = 0.0;
        const std::uint64_t mc_lo = std::max(lo, run.exact_through + 1);
        if (have_mc && mc_lo <= blk.n_hi) {
            CompensatedSum weighted;
            MeanAccumulator spread;
            for (std::size_t b = 0; b < B; ++b) {
                const double cb = batch_block(b, mc_lo, blk.n_hi);
                const double size = static_cast<double>(run.plan.end(b) - run.plan.begin(b));
                weighted.add(cb * size);
                spread.add(cb);
                batch_total[b] += cb;
            }
            mc = weighted.value() / static_cast<double>(run.replicates);
            se = spread.estimate().se;
        }
        blk.contribution = exact.value() + mc;
        blk.se = se;
        partial.add(blk.contribution);
        est.blocks.push_back(blk);
    }
    est.partial_sum = partial.value();
    if (B > 1) {
        MeanAccumulator spread;
        for (double t : batch_total) spread.add(t);
        est.partial_se = spread.estimate().se;
    }
    if (run.hoeffding_range) est.tail_bound = hoeffding_tail(g, est.a, *run.hoeffding_range, run.n_max);

    std::vector<double> complete;
    for (const auto& blk : est.blocks) {
        if (blk.complete) complete.push_back(blk.contribution);
    }
    est.verdict = classify_blocks(complete, rule);
    return est;
}

SeriesEstimate estimate_series(const Distribution& dist, const ModerateFunction& g, double a, std::uint64_t n_max,
                               std::uint64_t reps, std::uint64_t seed, const SeriesOptions& opts) {
    if (!(a > 0.0)) throw DomainError("level a must be > 0");
    const double levels[] = {a};
    return summarize_series(simulate_series(dist, levels, n_max, reps, seed, opts), 0, g, opts.rule);
}

// ---------------------------------------------------------------------------
// Inequalities from the proofs

double InequalityCheck::holds_within() const noexcept {
    const double slack = rhs - lhs;
    const double se = combined_se(lhs_se, rhs_se);
    if (se > 0.0) return slack / se;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return slack >= -1e-12 * scale ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
}

InequalityCheck levy_maximal_check(const Distribution& dist, std::uint64_t m, double t, std::uint64_t reps,
                                   std::uint64_t seed, unsigned threads) {
    if (!dist.is_symmetric()) throw PreconditionError("Levy's inequality needs a symmetric law, got " + dist.name());
    if (m < 1) throw DomainError("levy check needs m >= 1");
    if (!(t > 0.0)) throw DomainError("levy check needs t > 0");
    InequalityCheck out;

    if (m <= 20 && dist.is_discrete()) {
        const auto base = atoms(dist);
        std::vector<Atom> alive{{0.0, 1.0}};
        CompensatedSum hit;
        bool ok = true;
        for (std::uint64_t n = 1; n <= m && ok; ++n) {
            if (alive.size() * base.size() > (std::size_t{1} << 26)) {
                ok = false;
                break;
            }
            auto next = convolve(alive, base);
            alive.clear();
            for (const auto& a : next) {
                if (std::abs(a.value) >= t) hit.add(a.mass); else alive.push_back(a);
            }
            if (alive.size() > (std::size_t{1} << 20)) ok = false;
        }
        const auto end = ok ? sum_law(dist, m) : std::nullopt;
        if (ok && end) {
            CompensatedSum tail;
            for (const auto& a : *end) {
                if (std::abs(a.value) >= t) tail.add(a.mass);
            }
            out.lhs = hit.value();
            out.rhs = 2.0 * tail.value();
            out.exact = true;
            return out;
        }
    }

    if (reps < 1) throw DomainError("levy check needs reps >= 1 for Monte Carlo");
    const auto plan = plan_batches(reps);
    std::vector<std::uint64_t> max_hits(plan.batches, 0);
    std::vector<std::uint64_t> end_hits(plan.batches, 0);
    with_sampler(dist, [&](auto draw) {
        run_batches(plan, threads, [&](std::size_t b) {
            for (std::uint64_t r = plan.begin(b); r < plan.end(b); ++r) {
                CounterStream s(derive_key(seed, StreamId::levy_max, r));
                double S = 0.0;
                bool reached = false;
                for (std::uint64_t n = 0; n < m; ++n) {
                    S += draw(s);
                    if (std::abs(S) >= t) reached = true;
                }
                if (reached) ++max_hits[b];
                CounterStream e(derive_key(seed, StreamId::levy_end, r));
                double E = 0.0;
                for (std::uint64_t n = 0; n < m; ++n) E += draw(e);
                if (std::abs(E) >= t) ++end_hits[b];
            }
        });
    });
    std::uint64_t mh = 0;
    std::uint64_t eh = 0;
    for (std::size_t b = 0; b < plan.batches; ++b) {
        mh += max_hits[b];
        eh += end_hits[b];
    }
    const auto l = proportion(mh, reps);
    const auto e = proportion(eh, reps);
    out.lhs = l.mean;
    out.lhs_se = l.se;
    out.rhs = 2.0 * e.mean;
    out.rhs_se = 2.0 * e.se;
    return out;
}

SymmetrizationCheck symmetrization_sandwich(const Distribution& dist, std::uint64_t m, double t,
                                            std::uint64_t reps, std::uint64_t seed, unsigned threads) {
    if (m < 1) throw DomainError("symmetrization check needs m >= 1");
    if (!(t > 0.0)) throw DomainError("symmetrization check needs t > 0");
    SymmetrizationCheck out;

    if (const auto law = sum_law(dist, m)) {
        const auto star = convolve(*law, reflect(*law));
        // median of Y from its atoms
        double cdf = 0.0;
        double lo = law->back().value;
        for (const auto& a : *law) {
            cdf += a.mass;
            if (cdf >= 0.5 - 1e-12) {
                lo = a.value;
                break;
            }
        }
        double surv = 0.0;
        double hi = law->front().value;
        for (auto it = law->rbegin(); it != law->rend(); ++it) {
            surv += it->mass;
            if (surv >= 0.5 - 1e-12) {
                hi = it->value;
                break;
            }
        }
        const double mu = 0.5 * (lo + hi);
        CompensatedSum centered;
        CompensatedSum plain;
        CompensatedSum starred;
        for (const auto& a : *law) {
            if (std::abs(a.value - mu) >= 2.0 * t) centered.add(a.mass);
            if (std::abs(a.value) >= t) plain.add(a.mass);
        }
        for (const auto& a : star) {
            if (std::abs(a.value) >= 2.0 * t) starred.add(a.mass);
        }
        out.median = mu;
        out.first = {centered.value(), 0.0, 2.0 * starred.value(), 0.0, true};
        out.second = {2.0 * starred.value(), 0.0, 4.0 * plain.value(), 0.0, true};
        return out;
    }

    if (reps < 1) throw DomainError("symmetrization check needs reps >= 1 for Monte Carlo");
    const auto plan = plan_batches(reps);
    struct Hits {
        std::uint64_t centered = 0;
        std::uint64_t star = 0;
        std::uint64_t plain = 0;
    };
    std::vector<Hits> hits(plan.batches);
    double mu = 0.0;
    with_sampler(dist, [&](auto draw) {
        auto path_sum = [&](CounterStream& s) {
            double S = 0.0;
            for (std::uint64_t n = 0; n < m; ++n) S += draw(s);
            return S;
        };
        if (!dist.is_symmetric()) {
            std::vector<double> ys(reps);
            for (std::uint64_t r = 0; r < reps; ++r) {
                CounterStream s(derive_key(seed, StreamId::median, r));
                ys[r] = path_sum(s);
            }
            mu = empirical_median(std::move(ys));
        }
        run_batches(plan, threads, [&](std::size_t b) {
            for (std::uint64_t r = plan.begin(b); r < plan.end(b); ++r) {
                CounterStream c(derive_key(seed, StreamId::sym_centered, r));
                if (std::abs(path_sum(c) - mu) >= 2.0 * t) ++hits[b].centered;
                CounterStream s(derive_key(seed, StreamId::sym_star, r));
                const double y = path_sum(s);
                const double y_copy = path_sum(s);
                if (std::abs(y - y_copy) >= 2.0 * t) ++hits[b].star;
                CounterStream p(derive_key(seed, StreamId::sym_plain, r));
                if (std::abs(path_sum(p)) >= t) ++hits[b].plain;
            }
        });
    });
    Hits total;
    for (const auto& h : hits) {
        total.centered += h.centered;
        total.star += h.star;
        total.plain += h.plain;
    }
    const auto c = proportion(total.centered, reps);
    const auto s = proportion(total.star, reps);
    const auto p = proportion(total.plain, reps);
    out.median = mu;
    out.first = {c.mean, c.se, 2.0 * s.mean, 2.0 * s.se, false};
    out.second = {2.0 * s.mean, 2.0 * s.se, 4.0 * p.mean, 4.0 * p.se, false};
    return out;
}

} // namespace bklab
