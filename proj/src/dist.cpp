#include "bklab/dist.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bklab/errors.hpp"
#include "bklab/stats.hpp"

namespace bklab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

double to_number(std::string_view text, std::string_view spec) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("bad number '" + std::string(text) + "' in distribution spec '" +
                          std::string(spec) + "'");
    }
    return v;
}

// key=value list. For the counterexample's G=<function spec>, pieces whose key
// is not a distribution parameter continue the function spec, so
// "G=powlog:r=1,s=1,prefix=10" keeps s=1 with G.
std::map<std::string, std::string> split_params(std::string_view body, std::string_view spec) {
    std::map<std::string, std::string> out;
    std::string last_key;
    while (!body.empty()) {
        const auto comma = body.find(',');
        const auto item = body.substr(0, comma);
        const auto eq = item.find('=');
        const auto key = item.substr(0, eq);
        if (last_key == "G" && key != "prefix" && key != "limit") {
            out[last_key] += "," + std::string(item);
        } else if (eq == std::string_view::npos) {
            throw ConfigError("expected key=value in distribution spec '" + std::string(spec) + "'");
        } else {
            last_key = std::string(key);
            out[last_key] = std::string(item.substr(eq + 1));
        }
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
    }
    return out;
}

double num_param(const std::map<std::string, std::string>& params, const std::string& key,
                 std::optional<double> fallback, std::string_view spec) {
    auto it = params.find(key);
    if (it == params.end()) {
        if (fallback) return *fallback;
        throw ConfigError("distribution spec '" + std::string(spec) + "' is missing parameter " + key);
    }
    return to_number(it->second, spec);
}

void reject_unknown(const std::map<std::string, std::string>& params,
                    std::initializer_list<std::string_view> allowed, std::string_view spec) {
    for (const auto& [key, value] : params) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown parameter '" + key + "' in distribution spec '" +
                              std::string(spec) + "'");
        }
    }
}

std::vector<Atom> merge_atoms(std::map<double, double> m) {
    std::vector<Atom> out;
    out.reserve(m.size());
    for (const auto& [v, p] : m) {
        if (p > 0.0) out.push_back({v, p});
    }
    return out;
}

template <class K>
const K* kind_as(const Distribution& d) {
    return std::get_if<K>(&d.kind());
}

const CounterexampleLaw* counterexample_of(const Distribution& d) {
    if (const auto* p = std::get_if<std::shared_ptr<const CounterexampleLaw>>(&d.kind())) return p->get();
    return nullptr;
}

} // namespace

Distribution Distribution::rademacher() { return Distribution(Rademacher{}, "rademacher"); }

Distribution Distribution::uniform_symmetric(double half_width) {
    if (!std::isfinite(half_width) || half_width <= 0.0) throw DomainError("uniform needs w > 0");
    return Distribution(UniformSymmetric{half_width}, "uniform:w=" + fmt(half_width));
}

Distribution Distribution::two_sided_pareto(double beta, double scale) {
    if (!std::isfinite(beta) || beta <= 0.0 || !std::isfinite(scale) || scale <= 0.0) {
        throw DomainError("pareto needs beta > 0 and scale > 0");
    }
    std::string name = "pareto2:beta=" + fmt(beta);
    if (scale != 1.0) name += ",scale=" + fmt(scale);
    return Distribution(TwoSidedPareto{beta, scale}, name);
}

Distribution Distribution::gaussian(double sigma) {
    if (!std::isfinite(sigma) || sigma <= 0.0) throw DomainError("gaussian needs sigma > 0");
    return Distribution(Gaussian{sigma}, "gaussian:sigma=" + fmt(sigma));
}

Distribution Distribution::bernoulli(double p, double v0, double v1) {
    if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(v0) || !std::isfinite(v1)) {
        throw DomainError("bernoulli needs p in [0, 1] and finite values");
    }
    return Distribution(Bernoulli{p, v0, v1},
                        "bernoulli:p=" + fmt(p) + ",v0=" + fmt(v0) + ",v1=" + fmt(v1));
}

Distribution Distribution::counterexample(CounterexampleLaw law) {
    if (law.ts.empty() || law.ts.size() != law.pair_mass.size()) {
        throw DomainError("counterexample law needs matching, nonempty ts and masses");
    }
    std::string name = "counterexample:G=" + law.g_name + ",prefix=" + std::to_string(law.ts.size());
    return Distribution(std::make_shared<const CounterexampleLaw>(std::move(law)), name);
}

Distribution Distribution::symmetrized(const Distribution& inner) {
    if (kind_as<Symmetrized>(inner)) throw PreconditionError("nested symmetrization is not supported");
    return Distribution(Symmetrized{std::make_shared<const Distribution>(inner)}, "sym:" + inner.name());
}

Distribution Distribution::parse(std::string_view spec) {
    if (spec.starts_with("sym:")) return symmetrized(parse(spec.substr(4)));
    const auto colon = spec.find(':');
    const auto head = spec.substr(0, colon);
    const auto params = colon == std::string_view::npos ? std::map<std::string, std::string>{}
                                                        : split_params(spec.substr(colon + 1), spec);
    if (head == "rademacher") {
        reject_unknown(params, {}, spec);
        return rademacher();
    }
    if (head == "uniform") {
        reject_unknown(params, {"w"}, spec);
        return uniform_symmetric(num_param(params, "w", 1.0, spec));
    }
    if (head == "pareto2" || head == "pareto") {
        reject_unknown(params, {"beta", "scale"}, spec);
        return two_sided_pareto(num_param(params, "beta", std::nullopt, spec),
                                num_param(params, "scale", 1.0, spec));
    }
    if (head == "gaussian") {
        reject_unknown(params, {"sigma"}, spec);
        return gaussian(num_param(params, "sigma", 1.0, spec));
    }
    if (head == "bernoulli") {
        reject_unknown(params, {"p", "v0", "v1"}, spec);
        return bernoulli(num_param(params, "p", std::nullopt, spec), num_param(params, "v0", 0.0, spec),
                         num_param(params, "v1", 1.0, spec));
    }
    if (head == "counterexample") {
        reject_unknown(params, {"G", "prefix", "limit"}, spec);
        const auto g_it = params.find("G");
        const auto g = ModerateFunction::parse(g_it == params.end() ? "exp" : g_it->second);
        const double prefix = num_param(params, "prefix", 100000.0, spec);
        if (!(prefix >= 1.0) || prefix != std::floor(prefix)) throw ConfigError("prefix must be a positive integer");
        const double limit = num_param(params, "limit", 1e6, spec);
        const auto n = static_cast<std::size_t>(prefix);
        return counterexample(normalize_counterexample(g, counterexample_sequence(g, n, limit), n));
    }
    throw ConfigError("unknown distribution '" + std::string(spec) + "'");
}

bool Distribution::is_symmetric() const noexcept {
    if (const auto* b = std::get_if<Bernoulli>(&kind_)) {
        return b->v0 == -b->v1 && (b->p == 0.5 || b->v0 == 0.0);
    }
    return true;
}

bool Distribution::is_discrete() const noexcept {
    return std::visit(
        [](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Symmetrized>) {
                return k.inner->is_discrete();
            } else {
                return std::is_same_v<K, Rademacher> || std::is_same_v<K, Bernoulli> ||
                       std::is_same_v<K, std::shared_ptr<const CounterexampleLaw>>;
            }
        },
        kind_);
}

std::optional<double> Distribution::abs_bound() const noexcept {
    return std::visit(
        [](const auto& k) -> std::optional<double> {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Rademacher>) {
                return 1.0;
            } else if constexpr (std::is_same_v<K, UniformSymmetric>) {
                return k.half_width;
            } else if constexpr (std::is_same_v<K, Bernoulli>) {
                return std::max(std::abs(k.v0), std::abs(k.v1));
            } else if constexpr (std::is_same_v<K, std::shared_ptr<const CounterexampleLaw>>) {
                return k->ts.back();
            } else if constexpr (std::is_same_v<K, Symmetrized>) {
                const auto b = k.inner->abs_bound();
                if (b) return 2.0 * *b;
                return std::nullopt;
            } else {
                return std::nullopt;
            }
        },
        kind_);
}

std::optional<double> Distribution::mean() const noexcept {
    if (const auto* b = std::get_if<Bernoulli>(&kind_)) return b->p * b->v1 + (1.0 - b->p) * b->v0;
    if (const auto* p = std::get_if<TwoSidedPareto>(&kind_)) {
        if (p->beta <= 1.0) return std::nullopt;
    }
    if (const auto* s = std::get_if<Symmetrized>(&kind_)) {
        if (!s->inner->mean()) return std::nullopt;
    }
    return 0.0;
}

std::vector<Atom> atoms(const Distribution& dist) {
    return std::visit(
        [&](const auto& k) -> std::vector<Atom> {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Rademacher>) {
                return {{-1.0, 0.5}, {1.0, 0.5}};
            } else if constexpr (std::is_same_v<K, Bernoulli>) {
                std::map<double, double> m;
                m[k.v0] += 1.0 - k.p;
                m[k.v1] += k.p;
                return merge_atoms(std::move(m));
            } else if constexpr (std::is_same_v<K, std::shared_ptr<const CounterexampleLaw>>) {
                const auto& law = *k;
                std::vector<Atom> out(2 * law.size());
                const std::size_t n = law.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const double m = 0.5 * law.pair_mass[i] / law.stored_mass;
                    out[n - 1 - i] = {-law.ts[i], m};
                    out[n + i] = {law.ts[i], m};
                }
                return out;
            } else if constexpr (std::is_same_v<K, Symmetrized>) {
                const auto inner = atoms(*k.inner);
                return convolve(inner, reflect(inner));
            } else {
                throw PreconditionError(dist.name() + " is not a discrete law");
            }
        },
        dist.kind());
}

std::vector<Atom> convolve(const std::vector<Atom>& a, const std::vector<Atom>& b) {
    std::map<double, double> m;
    for (const auto& x : a) {
        for (const auto& y : b) m[x.value + y.value] += x.mass * y.mass;
    }
    return merge_atoms(std::move(m));
}

std::vector<Atom> reflect(const std::vector<Atom>& a) {
    std::vector<Atom> out(a.rbegin(), a.rend());
    for (auto& x : out) x.value = -x.value;
    return out;
}

double CounterexampleSampler::operator()(CounterStream& s) const {
    const double u = s.uniform();
    auto it = std::upper_bound(law->cumulative.begin(), law->cumulative.end(), u);
    if (it == law->cumulative.end()) --it;
    const double t = law->ts[static_cast<std::size_t>(it - law->cumulative.begin())];
    return std::bit_cast<double>(std::bit_cast<std::uint64_t>(t) ^ (static_cast<std::uint64_t>(s.bit()) << 63));
}

std::vector<double> sample(const Distribution& dist, std::uint64_t seed, std::size_t n) {
    if (n == 0) throw DomainError("sample needs n >= 1");
    std::vector<double> out(n);
    CounterStream stream(derive_key(seed, StreamId::sample, 0));
    with_sampler(dist, [&](auto draw) {
        for (auto& x : out) x = draw(stream);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Moments

namespace {

// Density of |X| for the continuous kinds that have one in closed form.
struct AbsDensity {
    std::function<double(double)> pdf;
    double lower = 0.0;       // density vanishes below
    double upper = inf;       // and above
    double first_block = 1.0; // width of the first quadrature block
};

std::optional<AbsDensity> abs_density(const Distribution& dist) {
    using std::numbers::pi;
    if (const auto* u = kind_as<UniformSymmetric>(dist)) {
        const double w = u->half_width;
        return AbsDensity{[w](double) { return 1.0 / w; }, 0.0, w, w};
    }
    if (const auto* g = kind_as<Gaussian>(dist)) {
        const double s = g->sigma;
        return AbsDensity{[s](double x) { return std::sqrt(2.0 / pi) / s * std::exp(-0.5 * (x / s) * (x / s)); },
                          0.0, inf, s};
    }
    if (const auto* p = kind_as<TwoSidedPareto>(dist)) {
        const double b = p->beta;
        const double s = p->scale;
        return AbsDensity{[b, s](double x) { return std::exp(std::log(b) + b * std::log(s) - (b + 1.0) * std::log(x)); },
                          s, inf, s};
    }
    if (const auto* sym = kind_as<Symmetrized>(dist)) {
        if (const auto* u = kind_as<UniformSymmetric>(*sym->inner)) {
            const double w = u->half_width;
            return AbsDensity{[w](double x) { return (2.0 * w - x) / (2.0 * w * w); }, 0.0, 2.0 * w, 2.0 * w};
        }
        if (const auto* g = kind_as<Gaussian>(*sym->inner)) {
            return abs_density(Distribution::gaussian(g->sigma * std::numbers::sqrt2));
        }
    }
    return std::nullopt;
}

double gk_block(const std::function<double(double)>& f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
}

MomentResult quadrature_moment(const AbsDensity& d, const ModerateFunction& g) {
    auto f = [&](double x) {
        const double gx = g.value(x);
        const double v = x * gx * d.pdf(x);
        if (std::isfinite(v)) return v;
        if (d.pdf(x) == 0.0) return 0.0;
        return std::exp(std::log(x) + g.log_value(x) + std::log(d.pdf(x)));
    };
    std::function<double(double)> fn = f;

    MomentResult res;
    res.mode_used = MomentMode::quadrature;
    CompensatedSum total;

    if (std::isfinite(d.upper)) {
        constexpr int pieces = 8;
        const double width = (d.upper - d.lower) / pieces;
        for (int i = 0; i < pieces; ++i) {
            const double lo = d.lower + width * i;
            const double hi = i + 1 == pieces ? d.upper : lo + width;
            const double b = gk_block(fn, lo, hi);
            res.blocks.push_back(b);
            total.add(b);
        }
        res.value = total.value();
        res.verdict = std::isfinite(res.value) ? Evidence::converging : Evidence::diverging;
        return res;
    }

    // Dyadic blocks [x0 2^k, x0 2^(k+1)], preceded by [lower, x0] when lower < x0.
    double lo = d.lower;
    double hi = d.lower > 0.0 ? 2.0 * d.lower : d.first_block;
    for (int k = 0; k < 1000; ++k, lo = hi, hi *= 2.0) {
        const double b = gk_block(fn, lo, hi);
        res.blocks.push_back(b);
        if (!std::isfinite(b)) {
            res.value = inf;
            res.verdict = Evidence::diverging;
            return res;
        }
        total.add(b);
        const double sum = total.value();
        const std::size_t n = res.blocks.size();
        if (n < 4) continue;
        if (b <= 1e-17 * sum) {
            res.value = sum;
            res.verdict = Evidence::converging;
            return res;
        }
        const double r1 = res.blocks[n - 1] / res.blocks[n - 2];
        const double r2 = res.blocks[n - 2] / res.blocks[n - 3];
        if (r1 < 1.0 && std::abs(r1 - r2) <= 1e-3 * r1) {
            const double remainder = b * r1 / (1.0 - r1);
            if (remainder <= 1e-8 * sum) {
                res.value = sum + remainder;
                res.verdict = Evidence::converging;
                return res;
            }
        }
        if (n >= 40 && classify_blocks(res.blocks) == Evidence::diverging) {
            res.value = inf;
            res.verdict = Evidence::diverging;
            return res;
        }
    }
    res.value = total.value();
    res.verdict = classify_blocks(res.blocks);
    return res;
}

MomentResult atom_moment(const std::vector<Atom>& at, const ModerateFunction& g) {
    MomentResult res;
    res.mode_used = MomentMode::analytic;
    CompensatedSum total;
    for (const auto& a : at) {
        const double x = std::abs(a.value);
        total.add(a.mass * x * g.value(x));
    }
    res.value = total.value();
    res.verdict = std::isfinite(res.value) ? Evidence::converging : Evidence::diverging;
    res.terms = at.size();
    return res;
}

// Partial sums over the first `terms` atom pairs of the law's own masses
// (not renormalized to the stored prefix), in dyadic blocks of the index n.
MomentResult counterexample_moment(const CounterexampleLaw& law, const ModerateFunction& g, std::size_t terms) {
    const std::size_t N = terms == 0 ? law.size() : std::min(terms, law.size());
    MomentResult res;
    res.mode_used = MomentMode::partial_sum;
    res.terms = N;
    CompensatedSum total;
    CompensatedSum block;
    std::size_t block_end = 2; // block i covers n in [2^i, 2^(i+1))
    for (std::size_t n = 1; n <= N; ++n) {
        const double t = law.ts[n - 1];
        double term = law.pair_mass[n - 1] * t * g.value(t);
        if (!std::isfinite(term)) {
            term = std::exp(std::log(law.pair_mass[n - 1]) + std::log(t) + g.log_value(t));
        }
        total.add(term);
        block.add(term);
        res.last_increment = term;
        if (n + 1 == block_end) {
            res.blocks.push_back(block.value());
            block = CompensatedSum{};
            block_end *= 2;
        }
    }
    res.value = total.value();
    res.verdict = std::isfinite(res.value) ? classify_blocks(res.blocks) : Evidence::diverging;
    // The construction gives pair mass * t_n G(t_n) = 2c / n^2 for the defining G.
    res.remainder_bound = g.name() == law.g_name && N == law.size() ? 2.0 * law.c / static_cast<double>(N) : nan;
    return res;
}

MomentResult monte_carlo_moment(const Distribution& dist, const ModerateFunction& g, const MomentOptions& opts) {
    if (opts.reps == 0) throw DomainError("monte_carlo moment needs reps >= 1");
    const auto plan = plan_batches(opts.reps);
    std::vector<MeanAccumulator> acc(plan.batches);
    with_sampler(dist, [&](auto draw) {
        run_batches(plan, opts.threads, [&](std::size_t b) {
            for (std::uint64_t r = plan.begin(b); r < plan.end(b); ++r) {
                CounterStream s(derive_key(opts.seed, StreamId::moment, r));
                const double x = std::abs(draw(s));
                acc[b].add(x * g.value(x));
            }
        });
    });
    MeanAccumulator all;
    for (const auto& a : acc) all.merge(a);
    const auto est = all.estimate();
    MomentResult res;
    res.mode_used = MomentMode::monte_carlo;
    res.value = est.mean;
    res.se = est.se;
    res.terms = opts.reps;
    // A sample mean is always finite; it says nothing about integrability.
    res.verdict = std::isfinite(est.mean) ? Evidence::inconclusive : Evidence::diverging;
    return res;
}

std::optional<MomentResult> closed_form_moment(const Distribution& dist, const ModerateFunction& g) {
    if (dist.is_discrete() && !counterexample_of(dist)) return atom_moment(atoms(dist), g);
    if (!g.is_constant()) return std::nullopt;
    MomentResult res;
    res.mode_used = MomentMode::analytic;
    if (const auto* u = kind_as<UniformSymmetric>(dist)) {
        res.value = 0.5 * u->half_width;
    } else if (const auto* ga = kind_as<Gaussian>(dist)) {
        res.value = ga->sigma * std::sqrt(2.0 / std::numbers::pi);
    } else if (const auto* p = kind_as<TwoSidedPareto>(dist)) {
        if (p->beta <= 1.0) {
            res.value = inf;
            res.verdict = Evidence::diverging;
            return res;
        }
        res.value = p->beta * p->scale / (p->beta - 1.0);
    } else if (const auto* sym = kind_as<Symmetrized>(dist)) {
        if (const auto* u = kind_as<UniformSymmetric>(*sym->inner)) {
            res.value = 2.0 * u->half_width / 3.0;
        } else if (const auto* gi = kind_as<Gaussian>(*sym->inner)) {
            res.value = gi->sigma * std::numbers::sqrt2 * std::sqrt(2.0 / std::numbers::pi);
        } else {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }
    res.verdict = Evidence::converging;
    return res;
}

} // namespace

MomentResult moment_xg(const Distribution& dist, const ModerateFunction& g, const MomentOptions& opts) {
    const auto* law = counterexample_of(dist);
    switch (opts.mode) {
    case MomentMode::automatic:
        if (law) return counterexample_moment(*law, g, opts.partial_terms);
        if (auto r = closed_form_moment(dist, g)) return *r;
        if (auto d = abs_density(dist)) return quadrature_moment(*d, g);
        return monte_carlo_moment(dist, g, opts);
    case MomentMode::analytic:
        if (!law) {
            if (auto r = closed_form_moment(dist, g)) return *r;
        }
        break;
    case MomentMode::quadrature:
        if (auto d = abs_density(dist)) return quadrature_moment(*d, g);
        break;
    case MomentMode::partial_sum:
        if (law) return counterexample_moment(*law, g, opts.partial_terms);
        if (dist.is_discrete()) return atom_moment(atoms(dist), g);
        break;
    case MomentMode::monte_carlo: return monte_carlo_moment(dist, g, opts);
    }
    throw PreconditionError("moment mode not supported for " + dist.name() + " with G=" + g.name());
}

// ---------------------------------------------------------------------------
// Tails, medians, truncation

TailProbability tail(const Distribution& dist, double t, const McOptions& mc) {
    if (!(t >= 0.0)) throw DomainError("tail needs t >= 0");
    TailProbability out;
    if (dist.is_discrete()) {
        CompensatedSum p;
        for (const auto& a : atoms(dist)) {
            if (std::abs(a.value) >= t) p.add(a.mass);
        }
        out.p = std::min(1.0, p.value());
        return out;
    }
    if (const auto* u = kind_as<UniformSymmetric>(dist)) {
        out.p = t >= u->half_width ? 0.0 : 1.0 - t / u->half_width;
        return out;
    }
    if (const auto* g = kind_as<Gaussian>(dist)) {
        out.p = std::erfc(t / (g->sigma * std::numbers::sqrt2));
        return out;
    }
    if (const auto* p = kind_as<TwoSidedPareto>(dist)) {
        out.p = t <= p->scale ? 1.0 : std::pow(p->scale / t, p->beta);
        return out;
    }
    if (const auto* sym = kind_as<Symmetrized>(dist)) {
        if (const auto* u = kind_as<UniformSymmetric>(*sym->inner)) {
            const double w2 = 2.0 * u->half_width;
            out.p = t >= w2 ? 0.0 : (w2 - t) * (w2 - t) / (w2 * w2);
            return out;
        }
        if (const auto* g = kind_as<Gaussian>(*sym->inner)) {
            out.p = std::erfc(t / (2.0 * g->sigma));
            return out;
        }
    }
    if (mc.reps == 0) throw DomainError("tail Monte Carlo needs reps >= 1");
    std::uint64_t hits = 0;
    with_sampler(dist, [&](auto draw) {
        for (std::uint64_t r = 0; r < mc.reps; ++r) {
            CounterStream s(derive_key(mc.seed, StreamId::tail, r));
            if (std::abs(draw(s)) >= t) ++hits;
        }
    });
    const auto est = proportion(hits, mc.reps);
    out.p = est.mean;
    out.se = est.se;
    out.exact = false;
    return out;
}

double empirical_median(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("median of an empty sample");
    const std::size_t n = xs.size();
    std::sort(xs.begin(), xs.end());
    // Medians of the empirical law form [x_(ceil(n/2)), x_(floor(n/2)+1)].
    const double lo = xs[(n + 1) / 2 - 1];
    const double hi = xs[n / 2];
    return 0.5 * (lo + hi);
}

double median(const Distribution& dist, std::uint64_t reps, std::uint64_t seed) {
    if (dist.is_discrete()) {
        const auto at = atoms(dist);
        double cdf = 0.0;
        double lo = at.back().value;
        for (const auto& a : at) {
            cdf += a.mass;
            if (cdf >= 0.5 - 1e-12) {
                lo = a.value;
                break;
            }
        }
        double surv = 0.0;
        double hi = at.front().value;
        for (auto it = at.rbegin(); it != at.rend(); ++it) {
            surv += it->mass;
            if (surv >= 0.5 - 1e-12) {
                hi = it->value;
                break;
            }
        }
        return 0.5 * (lo + hi);
    }
    if (dist.is_symmetric()) return 0.0;
    if (reps == 0) throw DomainError("median needs reps >= 1");
    std::vector<double> xs(reps);
    with_sampler(dist, [&](auto draw) {
        for (std::uint64_t r = 0; r < reps; ++r) {
            CounterStream s(derive_key(seed, StreamId::median, r));
            xs[r] = draw(s);
        }
    });
    return empirical_median(std::move(xs));
}

double truncated_abs_moment(const Distribution& dist, double t) {
    if (!(t >= 0.0)) throw DomainError("truncated moment needs t >= 0");
    if (const auto* law = counterexample_of(dist)) {
        CompensatedSum s;
        for (std::size_t i = 0; i < law->size(); ++i) {
            if (law->ts[i] >= t) s.add(law->ts[i] * law->pair_mass[i] / law->stored_mass);
        }
        return s.value();
    }
    if (dist.is_discrete()) {
        CompensatedSum s;
        for (const auto& a : atoms(dist)) {
            if (std::abs(a.value) >= t) s.add(std::abs(a.value) * a.mass);
        }
        return s.value();
    }
    if (const auto* u = kind_as<UniformSymmetric>(dist)) {
        const double w = u->half_width;
        return t >= w ? 0.0 : (w * w - t * t) / (2.0 * w);
    }
    if (const auto* g = kind_as<Gaussian>(dist)) {
        const double s = g->sigma;
        return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * (t / s) * (t / s));
    }
    if (const auto* p = kind_as<TwoSidedPareto>(dist)) {
        if (p->beta <= 1.0) return inf;
        const double b = p->beta;
        const double s = p->scale;
        const double from = std::max(t, s);
        return b * std::pow(s, b) * std::pow(from, 1.0 - b) / (b - 1.0);
    }
    if (const auto* sym = kind_as<Symmetrized>(dist)) {
        if (const auto* u = kind_as<UniformSymmetric>(*sym->inner)) {
            const double w = u->half_width;
            if (t >= 2.0 * w) return 0.0;
            // int_t^{2w} x (2w - x) / (2 w^2) dx
            const double F = [&](double x) { return w * x * x - x * x * x / 3.0; }(2.0 * w) -
                             (w * t * t - t * t * t / 3.0);
            return F / (2.0 * w * w);
        }
        if (const auto* g = kind_as<Gaussian>(*sym->inner)) {
            return truncated_abs_moment(Distribution::gaussian(g->sigma * std::numbers::sqrt2), t);
        }
    }
    throw PreconditionError("no closed-form truncated moment for " + dist.name());
}

double truncation_threshold(const Distribution& dist, double alpha, const TruncationGrid& grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(grid.start > 0.0) || !(grid.ratio > 1.0)) throw DomainError("bad truncation grid");
    const double target = 1.0 - alpha;
    const double first = truncated_abs_moment(dist, 0.0);
    if (!std::isfinite(first)) {
        throw PreconditionError("E|X| is infinite for " + dist.name() + "; no truncation threshold");
    }
    if (first <= target) return 0.0;
    auto point = [&](std::uint64_t k) { return grid.start * std::pow(grid.ratio, static_cast<double>(k)); };
    auto ok = [&](std::uint64_t k) { return truncated_abs_moment(dist, point(k)) <= target; };
    std::uint64_t hi = 1;
    while (!ok(hi)) {
        hi *= 2;
        if (!std::isfinite(point(hi)) || point(hi) > 1e300) {
            throw PreconditionError("truncation threshold search ran off the grid for " + dist.name());
        }
    }
    std::uint64_t lo = 0;
    if (ok(0)) return point(0);
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ok(mid)) hi = mid; else lo = mid;
    }
    return point(hi);
}

CounterexampleLaw normalize_counterexample(const ModerateFunction& g, const std::vector<double>& ts,
                                           std::size_t prefix) {
    if (prefix == 0) throw DomainError("prefix must be >= 1");
    if (ts.size() < prefix) throw DomainError("fewer points than the requested prefix");
    for (std::size_t i = 0; i < prefix; ++i) {
        if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] > ts[i - 1]))) {
            throw DomainError("counterexample points must be positive and increasing");
        }
    }
    CounterexampleLaw law;
    law.g_name = g.name();
    law.ts.assign(ts.begin(), ts.begin() + static_cast<std::ptrdiff_t>(prefix));

    // w_n = 1 / (n^2 t_n G(t_n)); since t G(t) is nondecreasing,
    // sum_{n > N} w_n <= (1 / (t_N G(t_N))) sum_{n > N} n^-2 <= 1 / (N t_N G(t_N)).
    auto log_tg = [&](double t) { return std::log(t) + g.log_value(t); };
    std::vector<double> w(prefix);
    CompensatedSum stored;
    for (std::size_t n = 1; n <= prefix; ++n) {
        const double nn = static_cast<double>(n);
        w[n - 1] = std::exp(-2.0 * std::log(nn) - log_tg(law.ts[n - 1]));
        stored.add(w[n - 1]);
    }
    const double A = stored.value();
    const double N = static_cast<double>(prefix);
    const double B = std::exp(-std::log(N) - log_tg(law.ts.back()));
    // Total 2c (A + T) with T in [0, B]; centering gives |total - 1| <= B / (2A + B).
    law.c = 1.0 / (2.0 * (A + 0.5 * B));
    law.tail_mass_bound = 2.0 * law.c * B;
    if (!(law.tail_mass_bound <= 1e-6)) {
        throw PrecisionError("prefix " + std::to_string(prefix) + " leaves up to " + fmt(law.tail_mass_bound) +
                             " of the mass unstored (needs <= 1e-6)");
    }
    law.pair_mass.resize(prefix);
    CompensatedSum mass;
    law.cumulative.resize(prefix);
    for (std::size_t i = 0; i < prefix; ++i) {
        law.pair_mass[i] = 2.0 * law.c * w[i];
        mass.add(law.pair_mass[i]);
        law.cumulative[i] = mass.value();
    }
    law.stored_mass = mass.value();
    for (auto& x : law.cumulative) x /= law.stored_mass;
    law.cumulative.back() = 1.0;
    return law;
}

} // namespace bklab
