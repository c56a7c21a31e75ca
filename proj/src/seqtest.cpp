#include "bklab/seqtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "bklab/errors.hpp"
#include "bklab/rng.hpp"
#include "bklab/stats.hpp"

namespace bklab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_masses(const std::vector<double>& masses, std::size_t k, const std::string& what) {
    if (masses.size() != k) throw ConfigError(what + " has " + std::to_string(masses.size()) +
                                              " masses for an alphabet of " + std::to_string(k));
    double total = 0.0;
    for (double w : masses) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError(what + " has a negative or non-finite mass");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError(what + " masses sum to " + std::to_string(total));
}

std::vector<double> cumulative(const std::vector<double>& masses) {
    std::vector<double> cum(masses.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < masses.size(); ++k) cum[k] = acc += masses[k];
    cum.back() = 1.0;
    return cum;
}

std::size_t draw(const std::vector<double>& cum, CounterStream& s) {
    const double u = s.uniform();
    std::size_t k = 0;
    while (k + 1 < cum.size() && u >= cum[k]) ++k;
    return k;
}

std::vector<double> log_levels(const LevelVector& levels, std::size_t m) {
    levels.validate(m);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = std::log(levels.c[i]);
    return out;
}

// One run of the test on observations from next(). Returns the record.
template <class Next>
DecisionRecord run_core(const HypothesisSet& hyp, const std::vector<double>& log_c, Next&& next,
                        std::uint64_t horizon) {
    const std::size_t m = hyp.size();
    DecisionRecord rec;
    rec.rho.assign(m, std::nullopt);
    std::vector<double> state(m, 0.0);
    std::size_t rejected = 0;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        log_ratio_update(state, next(), hyp);
        rec.steps = n;
        for (std::size_t i = 0; i < m; ++i) {
            if (!rec.rho[i] && std::isfinite(log_c[i]) && state[i] >= log_c[i]) {
                rec.rho[i] = n;
                ++rejected;
            }
        }
        // tau = min_i max_{j != i} rho_j is reached once all but one have been rejected.
        if (rejected + 1 >= m) {
            rec.tau = n;
            break;
        }
    }
    rec.log_ratios_at_tau = state;
    if (!rec.tau) {
        rec.censored = true;
        return rec;
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!rec.rho[i]) {
            best = i;
            break;
        }
        if (*rec.rho[i] > *rec.rho[best]) best = i;
    }
    rec.decision = best;
    return rec;
}

void check_index(const HypothesisSet& hyp, std::size_t i) {
    if (i >= hyp.size()) throw ConfigError("hypothesis index " + std::to_string(i) + " out of range");
}

void check_mc(const McConfig& cfg) {
    if (cfg.reps < 1) throw DomainError("reps must be >= 1");
    if (cfg.horizon < 1) throw DomainError("horizon must be >= 1");
}

} // namespace

HypothesisSet::HypothesisSet(std::vector<double> alphabet, std::vector<std::vector<double>> laws,
                             std::optional<std::vector<double>> reference)
    : alphabet_(std::move(alphabet)), laws_(std::move(laws)) {
    if (laws_.size() < 2) throw ConfigError("a sequential test needs at least two hypotheses");
    const std::size_t k = alphabet_.size();
    if (k == 0) throw ConfigError("empty alphabet");
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            if (alphabet_[a] == alphabet_[b]) throw ConfigError("repeated alphabet symbol");
    for (std::size_t i = 0; i < laws_.size(); ++i) check_masses(laws_[i], k, "hypothesis " + std::to_string(i));

    if (reference) {
        check_masses(*reference, k, "reference");
        reference_ = std::move(*reference);
        mixture_ = false;
        for (std::size_t y = 0; y < k; ++y)
            for (const auto& law : laws_)
                if (law[y] > 0.0 && !(reference_[y] > 0.0))
                    throw ConfigError("reference vanishes where a hypothesis does not");
    } else {
        reference_.assign(k, 0.0);
        for (const auto& law : laws_)
            for (std::size_t y = 0; y < k; ++y) reference_[y] += law[y] / static_cast<double>(laws_.size());
    }

    increments_.assign(laws_.size(), std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < laws_.size(); ++i) {
        for (std::size_t y = 0; y < k; ++y) {
            if (!(reference_[y] > 0.0)) {
                increments_[i][y] = std::numeric_limits<double>::quiet_NaN();
            } else if (laws_[i][y] > 0.0) {
                increments_[i][y] = std::log(reference_[y]) - std::log(laws_[i][y]);
            } else {
                increments_[i][y] = inf;
            }
        }
    }
}

HypothesisSet HypothesisSet::from_json(const nlohmann::json& j) {
    try {
        if (!j.contains("alphabet")) throw ConfigError("missing field: alphabet");
        if (!j.contains("hypotheses")) throw ConfigError("missing field: hypotheses");
        auto alphabet = j.at("alphabet").get<std::vector<double>>();
        auto laws = j.at("hypotheses").get<std::vector<std::vector<double>>>();
        std::optional<std::vector<double>> ref;
        if (j.contains("reference") && !j.at("reference").is_null())
            ref = j.at("reference").get<std::vector<double>>();
        return HypothesisSet(std::move(alphabet), std::move(laws), std::move(ref));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed hypothesis set: ") + e.what());
    }
}

nlohmann::ordered_json HypothesisSet::to_json() const {
    nlohmann::ordered_json j;
    j["alphabet"] = alphabet_;
    j["hypotheses"] = laws_;
    j["reference"] = reference_;
    j["reference_kind"] = mixture_ ? "uniform_mixture" : "custom";
    return j;
}

double HypothesisSet::log_ratio_increment(std::size_t i, std::size_t y) const {
    if (i >= laws_.size() || y >= alphabet_.size()) throw DomainError("index out of range");
    return increments_[i][y];
}

std::size_t HypothesisSet::symbol_index(double value) const {
    const auto it = std::find(alphabet_.begin(), alphabet_.end(), value);
    if (it == alphabet_.end()) throw DataError("observation outside the alphabet");
    return static_cast<std::size_t>(it - alphabet_.begin());
}

double HypothesisSet::kl(std::size_t i, std::size_t j) const {
    const auto& p = law(i);
    const auto& q = law(j);
    double s = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        if (p[y] == 0.0) continue;
        if (q[y] == 0.0) return inf;
        s += p[y] * std::log(p[y] / q[y]);
    }
    return std::max(s, 0.0);
}

double HypothesisSet::kl_adjusted(std::size_t i, std::size_t j) const {
    const auto& p = law(i);
    double s = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        if (p[y] == 0.0) continue;
        const double inc = increments_.at(j)[y];
        if (std::isinf(inc)) return inf;
        s += p[y] * inc;
    }
    return s;
}

std::vector<std::vector<double>> HypothesisSet::pairwise_kl() const {
    std::vector<std::vector<double>> out(size(), std::vector<double>(size(), 0.0));
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j)
            if (i != j) out[i][j] = kl(i, j);
    return out;
}

LevelVector LevelVector::uniform(std::size_t m, double level) {
    return LevelVector{std::vector<double>(m, level)};
}

void LevelVector::validate(std::size_t m) const {
    if (c.size() != m)
        throw ConfigError("expected " + std::to_string(m) + " levels, got " + std::to_string(c.size()));
    for (double v : c)
        if (!(v > 1.0)) throw ConfigError("every level must exceed 1");
}

void log_ratio_update(std::span<double> state, std::size_t y, const HypothesisSet& hyp) {
    if (state.size() != hyp.size()) throw DomainError("state size differs from the number of hypotheses");
    if (y >= hyp.alphabet_size()) throw DataError("observation outside the alphabet");
    if (!(hyp.reference()[y] > 0.0)) throw DataError("observation outside every hypothesis support");
    for (std::size_t i = 0; i < state.size(); ++i) state[i] += hyp.log_ratio_increment(i, y);
}

nlohmann::ordered_json DecisionRecord::to_json() const {
    nlohmann::ordered_json j;
    j["tau"] = tau ? nlohmann::ordered_json(*tau) : nlohmann::ordered_json(nullptr);
    j["censored"] = censored;
    j["steps"] = steps;
    j["decision"] = decision ? nlohmann::ordered_json(*decision) : nlohmann::ordered_json(nullptr);
    auto rj = nlohmann::ordered_json::array();
    for (const auto& r : rho) rj.push_back(r ? nlohmann::ordered_json(*r) : nlohmann::ordered_json(nullptr));
    j["rho"] = rj;
    j["log_ratios_at_tau"] = log_ratios_at_tau;
    return j;
}

DecisionRecord run_test(const HypothesisSet& hyp, const LevelVector& levels, const ObservationSource& stream,
                        std::uint64_t horizon) {
    if (horizon < 1) throw DomainError("horizon must be >= 1");
    const auto log_c = log_levels(levels, hyp.size());
    return run_core(hyp, log_c, [&] { return stream(); }, horizon);
}

ObservationSource iid_source(const HypothesisSet& hyp, std::size_t i, std::uint64_t seed, std::uint64_t replicate) {
    check_index(hyp, i);
    auto cum = cumulative(hyp.law(i));
    auto s = std::make_shared<CounterStream>(derive_key(seed, StreamId::sequential, replicate));
    return [cum = std::move(cum), s] { return draw(cum, *s); };
}

ErrorEstimate estimate_errors(const HypothesisSet& hyp, const LevelVector& levels, std::size_t true_index,
                              const McConfig& cfg) {
    check_index(hyp, true_index);
    check_mc(cfg);
    const auto log_c = log_levels(levels, hyp.size());
    const auto cum = cumulative(hyp.law(true_index));
    const auto plan = plan_batches(cfg.reps);
    std::vector<std::uint64_t> wrong(plan.batches, 0), censored(plan.batches, 0);
    run_batches(plan, cfg.threads, [&](std::size_t b) {
        for (std::uint64_t rep = plan.begin(b); rep < plan.end(b); ++rep) {
            CounterStream s(derive_key(cfg.seed, StreamId::sequential, rep));
            const auto rec = run_core(hyp, log_c, [&] { return draw(cum, s); }, cfg.horizon);
            if (rec.censored) {
                ++censored[b];
            } else if (*rec.decision != true_index) {
                ++wrong[b];
            }
        }
    });
    std::uint64_t w = 0, c = 0;
    for (std::size_t b = 0; b < plan.batches; ++b) {
        w += wrong[b];
        c += censored[b];
    }
    ErrorEstimate out;
    out.reps = cfg.reps;
    out.censor_rate = static_cast<double>(c) / static_cast<double>(cfg.reps);
    if (c < cfg.reps) {
        const auto e = proportion(w, cfg.reps - c);
        out.error_rate = e.mean;
        out.se = e.se;
    }
    return out;
}

double RejectionEstimate::holds_within() const noexcept {
    if (se > 0.0) return (bound - rate) / se;
    return rate <= bound ? inf : -inf;
}

RejectionEstimate estimate_rejection(const HypothesisSet& hyp, double level, std::size_t true_index,
                                     const McConfig& cfg) {
    check_index(hyp, true_index);
    check_mc(cfg);
    if (!(level > 1.0)) throw ConfigError("level must exceed 1");
    const double log_c = std::log(level);
    const auto cum = cumulative(hyp.law(true_index));
    const auto plan = plan_batches(cfg.reps);
    std::vector<std::uint64_t> hits(plan.batches, 0);
    run_batches(plan, cfg.threads, [&](std::size_t b) {
        for (std::uint64_t rep = plan.begin(b); rep < plan.end(b); ++rep) {
            CounterStream s(derive_key(cfg.seed, StreamId::sequential, rep));
            double state = 0.0;
            for (std::uint64_t n = 1; n <= cfg.horizon; ++n) {
                state += hyp.log_ratio_increment(true_index, draw(cum, s));
                if (state >= log_c) {
                    ++hits[b];
                    break;
                }
            }
        }
    });
    std::uint64_t h = 0;
    for (auto x : hits) h += x;
    const auto e = proportion(h, cfg.reps);
    RejectionEstimate out;
    out.rate = e.mean;
    out.se = e.se;
    out.bound = 1.0 / level;
    out.reps = cfg.reps;
    return out;
}

GMomentEstimate estimate_G_moment(const HypothesisSet& hyp, const LevelVector& levels, std::size_t true_index,
                                  const ModerateFunction& g, const McConfig& cfg, double censor_bound) {
    check_index(hyp, true_index);
    check_mc(cfg);
    const auto log_c = log_levels(levels, hyp.size());
    const auto cum = cumulative(hyp.law(true_index));
    const auto plan = plan_batches(cfg.reps);
    std::vector<MeanAccumulator> acc(plan.batches);
    std::vector<std::uint64_t> censored(plan.batches, 0);
    run_batches(plan, cfg.threads, [&](std::size_t b) {
        for (std::uint64_t rep = plan.begin(b); rep < plan.end(b); ++rep) {
            CounterStream s(derive_key(cfg.seed, StreamId::sequential, rep));
            const auto rec = run_core(hyp, log_c, [&] { return draw(cum, s); }, cfg.horizon);
            if (rec.censored) ++censored[b];
            acc[b].add(g.value(static_cast<double>(rec.tau.value_or(cfg.horizon))));
        }
    });
    MeanAccumulator total;
    std::uint64_t c = 0;
    for (std::size_t b = 0; b < plan.batches; ++b) {
        total.merge(acc[b]);
        c += censored[b];
    }
    const auto e = total.estimate();
    GMomentEstimate out;
    out.mean = e.mean;
    out.se = e.se;
    out.reps = cfg.reps;
    out.censor_rate = static_cast<double>(c) / static_cast<double>(cfg.reps);
    out.degraded = out.censor_rate > censor_bound;
    return out;
}

std::vector<SweepRow> optimality_sweep(const HypothesisSet& hyp, std::span<const double> schedule,
                                       std::size_t true_index, const ModerateFunction& g, const McConfig& cfg) {
    check_index(hyp, true_index);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (!(schedule[k] > 0.0 && schedule[k] < 1.0)) throw ConfigError("target errors must lie in (0, 1)");
        if (k > 0 && !(schedule[k] < schedule[k - 1]))
            throw ConfigError("target errors must be strictly decreasing");
    }
    for (std::size_t j = 0; j < hyp.size(); ++j) {
        if (j == true_index) continue;
        if (!(hyp.kl_adjusted(true_index, j) > 0.0))
            throw ConfigError("kl_adjusted(" + std::to_string(true_index) + ", " + std::to_string(j) +
                              ") is not positive; the reference law is too close to hypothesis " + std::to_string(j));
    }
    std::vector<SweepRow> rows;
    for (double a : schedule) {
        SweepRow row;
        row.target_error = a;
        row.c = 1.0 / a;
        const auto est = estimate_G_moment(hyp, LevelVector::uniform(hyp.size(), row.c), true_index, g, cfg);
        row.mean_G_tau = est.mean;
        row.se = est.se;
        row.censor_rate = est.censor_rate;
        double n_star = 0.0;
        for (std::size_t j = 0; j < hyp.size(); ++j)
            if (j != true_index) n_star = std::max(n_star, std::log(row.c) / hyp.kl_adjusted(true_index, j));
        row.reference_G = g.value(n_star);
        row.ratio = row.mean_G_tau / row.reference_G;
        rows.push_back(row);
    }
    return rows;
}

} // namespace bklab
