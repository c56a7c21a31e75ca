#ifndef BKLAB_DIST_HPP
#define BKLAB_DIST_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "bklab/evidence.hpp"
#include "bklab/modfun.hpp"
#include "bklab/rng.hpp"

namespace bklab {

struct Atom {
    double value = 0.0;
    double mass = 0.0;
};

struct Rademacher {};
struct UniformSymmetric {
    double half_width = 1.0;
};
// |X| has survival (scale/x)^beta on [scale, inf); the sign is a fair coin.
struct TwoSidedPareto {
    double beta = 2.0;
    double scale = 1.0;
};
struct Gaussian {
    double sigma = 1.0;
};
// P[X = v1] = p, P[X = v0] = 1 - p.
struct Bernoulli {
    double p = 0.5;
    double v0 = 0.0;
    double v1 = 1.0;
};

// Symmetric law on {+-t_n} built for a non-moderate G: the pair +-t_n carries
// total mass 2c / (n^2 t_n G(t_n)). Only a prefix of n is stored; sampling and
// all functionals use the law conditioned on that prefix, whose missing mass is
// at most tail_mass_bound.
struct CounterexampleLaw {
    std::string g_name;
    std::vector<double> ts;
    std::vector<double> pair_mass;  // total mass of {+t_n, -t_n}
    std::vector<double> cumulative; // normalized to the stored mass, for sampling
    double c = 0.0;
    double stored_mass = 0.0;
    double tail_mass_bound = 0.0;

    double weight(std::size_t n) const { return 0.5 * pair_mass.at(n - 1); }
    std::size_t size() const { return ts.size(); }
};

class Distribution;

struct Symmetrized {
    std::shared_ptr<const Distribution> inner;
};

// Increment law X. Immutable after construction.
class Distribution {
public:
    using Kind = std::variant<Rademacher, UniformSymmetric, TwoSidedPareto, Gaussian, Bernoulli,
                              std::shared_ptr<const CounterexampleLaw>, Symmetrized>;

    static Distribution rademacher();
    static Distribution uniform_symmetric(double half_width);
    static Distribution two_sided_pareto(double beta, double scale = 1.0);
    static Distribution gaussian(double sigma);
    static Distribution bernoulli(double p, double v0 = 0.0, double v1 = 1.0);
    static Distribution counterexample(CounterexampleLaw law);
    // Law of X - X' with X' an independent copy. Nesting is not supported.
    static Distribution symmetrized(const Distribution& inner);

    // "rademacher", "uniform:w=1", "pareto2:beta=3[,scale=1]", "gaussian:sigma=1",
    // "bernoulli:p=0.9[,v0=0,v1=1]", "counterexample:G=exp,prefix=100000", "sym:<spec>".
    static Distribution parse(std::string_view spec);

    const Kind& kind() const noexcept { return kind_; }
    // Canonical spec string; parse(name()) reproduces the law.
    const std::string& name() const noexcept { return name_; }

    bool is_symmetric() const noexcept;
    // Rademacher, Bernoulli, counterexample prefix, and their symmetrizations.
    bool is_discrete() const noexcept;
    // Largest |X| if bounded.
    std::optional<double> abs_bound() const noexcept;
    // E[X] when known in closed form.
    std::optional<double> mean() const noexcept;

private:
    Distribution(Kind kind, std::string name) : kind_(std::move(kind)), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
};

// Atoms of a discrete law, merged and sorted by value. Throws PreconditionError otherwise.
std::vector<Atom> atoms(const Distribution& dist);

// Law of the sum of two independent discrete variables.
std::vector<Atom> convolve(const std::vector<Atom>& a, const std::vector<Atom>& b);
// Law of -Y.
std::vector<Atom> reflect(const std::vector<Atom>& a);

// ---------------------------------------------------------------------------
// Samplers. Each draws one increment from a CounterStream; the hot loops in
// lln_sim dispatch on the kind once and then call these inline.

struct RademacherSampler {
    // branch-free: a data-dependent branch on a fair coin mispredicts half the time
    double operator()(CounterStream& s) const noexcept { return static_cast<double>(2 * static_cast<int>(s.bit()) - 1); }
};

struct UniformSampler {
    double half_width;
    double operator()(CounterStream& s) const noexcept { return half_width * (2.0 * s.uniform() - 1.0); }
};

struct ParetoSampler {
    double beta;
    double scale;
    double operator()(CounterStream& s) const noexcept {
        const std::uint64_t w = s();
        const double u = (static_cast<double>((w >> 11) & ((std::uint64_t{1} << 52) - 1)) + 0.5) * 0x1.0p-52;
        double x;
        if (beta == 4.0) {
            x = 1.0 / std::sqrt(std::sqrt(u));
        } else if (beta == 2.0) {
            x = 1.0 / std::sqrt(u);
        } else if (beta == 1.5) {
            x = 1.0 / std::cbrt(u * u);
        } else {
            x = std::pow(u, -1.0 / beta);
        }
        x *= scale;
        return std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) ^ (w & (std::uint64_t{1} << 63)));
    }
};

struct GaussianSampler {
    double sigma;
    double operator()(CounterStream& s) const {
        boost::random::normal_distribution<double> unit(0.0, 1.0);
        return sigma * unit(s);
    }
};

struct BernoulliSampler {
    double p;
    double v0;
    double v1;
    double operator()(CounterStream& s) const noexcept { return s.uniform() < p ? v1 : v0; }
};

struct CounterexampleSampler {
    const CounterexampleLaw* law;
    double operator()(CounterStream& s) const;
};

template <class Inner>
struct SymmetrizedSampler {
    Inner inner;
    double operator()(CounterStream& s) const {
        const double x = inner(s);
        const double x_copy = inner(s);
        return x - x_copy;
    }
};

namespace detail {

template <class F>
decltype(auto) with_base_sampler(const Distribution::Kind& kind, F&& f) {
    return std::visit(
        [&](const auto& k) -> decltype(auto) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Rademacher>) {
                return f(RademacherSampler{});
            } else if constexpr (std::is_same_v<K, UniformSymmetric>) {
                return f(UniformSampler{k.half_width});
            } else if constexpr (std::is_same_v<K, TwoSidedPareto>) {
                return f(ParetoSampler{k.beta, k.scale});
            } else if constexpr (std::is_same_v<K, Gaussian>) {
                return f(GaussianSampler{k.sigma});
            } else if constexpr (std::is_same_v<K, Bernoulli>) {
                return f(BernoulliSampler{k.p, k.v0, k.v1});
            } else if constexpr (std::is_same_v<K, std::shared_ptr<const CounterexampleLaw>>) {
                return f(CounterexampleSampler{k.get()});
            } else {
                return f(RademacherSampler{}); // unreachable: symmetrized handled by caller
            }
        },
        kind);
}

} // namespace detail

// Calls f with the concrete sampler for dist.
template <class F>
decltype(auto) with_sampler(const Distribution& dist, F&& f) {
    if (const auto* sym = std::get_if<Symmetrized>(&dist.kind())) {
        return detail::with_base_sampler(sym->inner->kind(), [&](auto inner) -> decltype(auto) {
            return f(SymmetrizedSampler<decltype(inner)>{inner});
        });
    }
    return detail::with_base_sampler(dist.kind(), std::forward<F>(f));
}

// ---------------------------------------------------------------------------
// Operations

// n i.i.d. draws from stream (seed, sample, 0); draw i depends only on (seed, i).
std::vector<double> sample(const Distribution& dist, std::uint64_t seed, std::size_t n);

enum class MomentMode { automatic, analytic, quadrature, partial_sum, monte_carlo };

struct MomentOptions {
    MomentMode mode = MomentMode::automatic;
    std::size_t partial_terms = 0; // partial_sum: number of atoms pairs, 0 = whole prefix
    std::uint64_t reps = 100000;   // monte_carlo
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct MomentResult {
    double value = 0.0;
    double se = 0.0;
    Evidence verdict = Evidence::converging;
    MomentMode mode_used = MomentMode::analytic;
    // Dyadic block contributions behind the verdict (quadrature or partial sums).
    std::vector<double> blocks;
    // partial_sum mode: the last term added, and a bound on what the unstored
    // atoms could add (NaN when no bound is known).
    double last_increment = 0.0;
    double remainder_bound = 0.0;
    std::size_t terms = 0;
};

// E[|X| G(|X|)].
MomentResult moment_xg(const Distribution& dist, const ModerateFunction& g,
                       const MomentOptions& opts = {});

struct TailProbability {
    double p = 0.0;
    double se = 0.0;
    bool exact = true;
};

struct McOptions {
    std::uint64_t reps = 100000;
    std::uint64_t seed = 0;
};

// P[|X| >= t]; Monte Carlo for laws without a closed form.
TailProbability tail(const Distribution& dist, double t, const McOptions& mc = {});

// A median: the midpoint of the interval of medians, analytic for every built-in
// kind; Monte Carlo order statistics otherwise.
double median(const Distribution& dist, std::uint64_t reps = 100001, std::uint64_t seed = 0);
// Midpoint of the median interval of an empirical sample.
double empirical_median(std::vector<double> xs);

// E[|X| ; |X| >= t] in closed form.
double truncated_abs_moment(const Distribution& dist, double t);

struct TruncationGrid {
    double start = 1e-6;
    double ratio = 1.001;
};

// Smallest t in {0} U {start * ratio^k} with E[|X| ; |X| >= t] <= 1 - alpha.
double truncation_threshold(const Distribution& dist, double alpha, const TruncationGrid& grid = {});

// Builds the normalized counterexample law from the first `prefix` points of ts.
// Throws PrecisionError if the unstored mass cannot be bounded below 1e-6.
CounterexampleLaw normalize_counterexample(const ModerateFunction& g, const std::vector<double>& ts,
                                           std::size_t prefix);

} // namespace bklab

#endif
