#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bklab/dist.hpp"
#include "bklab/errors.hpp"
#include "bklab/stats.hpp"

using namespace bklab;

namespace {

double mean_of(const std::vector<double>& xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

const Distribution& exp_counterexample() {
    static const Distribution d = [] {
        const auto g = ModerateFunction::exponential(1);
        const auto ts = counterexample_sequence(g, 100000, 1e6);
        return Distribution::counterexample(normalize_counterexample(g, ts, 100000));
    }();
    return d;
}

} // namespace

TEST_CASE("spec strings round-trip through name()") {
    for (const char* spec : {"rademacher", "uniform:w=1", "pareto2:beta=3", "pareto2:beta=1.5,scale=2",
                             "gaussian:sigma=1", "bernoulli:p=0.9,v0=0,v1=1", "sym:uniform:w=2",
                             "sym:rademacher"}) {
        const auto d = Distribution::parse(spec);
        CHECK(Distribution::parse(d.name()).name() == d.name());
    }
    CHECK(Distribution::parse("pareto2:beta=3").name() == "pareto2:beta=3");
    CHECK_THROWS_AS(Distribution::parse("cauchy"), ConfigError);
    CHECK_THROWS_AS(Distribution::parse("uniform:width=1"), ConfigError);
    CHECK_THROWS_AS(Distribution::parse("sym:sym:rademacher"), PreconditionError);
}

TEST_CASE("sampling is deterministic and prefix-stable") {
    const auto d = Distribution::gaussian(1);
    const auto a = sample(d, 11, 1000);
    const auto b = sample(d, 11, 10);
    CHECK(std::equal(b.begin(), b.end(), a.begin()));
    CHECK(sample(d, 11, 1000) == a);
    CHECK(sample(d, 12, 1000) != a);
}

TEST_CASE("rademacher and uniform sample moments") {
    const std::size_t n = 1000000;
    const auto r = sample(Distribution::rademacher(), 1, n);
    CHECK(std::abs(mean_of(r)) <= 4.0 / std::sqrt(static_cast<double>(n)));
    auto u = sample(Distribution::uniform_symmetric(1), 2, n);
    for (auto& x : u) x = std::abs(x);
    CHECK(std::abs(mean_of(u) - 0.5) <= 0.005);
}

TEST_CASE("pareto and gaussian sample tails match the closed forms") {
    const std::size_t n = 400000;
    for (double beta : {1.5, 3.0, 4.0, 2.5}) {
        const auto d = Distribution::two_sided_pareto(beta);
        const auto xs = sample(d, 3, n);
        for (double t : {1.0, 1.5, 2.0, 4.0}) {
            const double p = tail(d, t).p;
            const auto hits = std::count_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x) >= t; });
            const auto est = proportion(static_cast<std::uint64_t>(hits), n);
            CHECK(std::abs(est.mean - p) <= 4.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
        }
    }
    const auto g = Distribution::gaussian(2);
    const auto xs = sample(g, 4, n);
    for (double t : {0.5, 2.0, 4.0}) {
        const double p = tail(g, t).p;
        const auto hits = std::count_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x) >= t; });
        CHECK(std::abs(static_cast<double>(hits) / n - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("symmetrized samples are symmetric") {
    for (const char* spec : {"sym:uniform:w=1", "sym:gaussian:sigma=1", "sym:pareto2:beta=3",
                             "sym:bernoulli:p=0.9,v0=0,v1=1"}) {
        const auto d = Distribution::parse(spec);
        const std::size_t n = 200000;
        const auto xs = sample(d, 5, n);
        for (double t : {0.1, 0.5, 1.0, 2.0}) {
            const auto up = std::count_if(xs.begin(), xs.end(), [&](double x) { return x >= t; });
            const auto down = std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= -t; });
            const auto pu = proportion(static_cast<std::uint64_t>(up), n);
            const auto pd = proportion(static_cast<std::uint64_t>(down), n);
            CHECK(std::abs(pu.mean - pd.mean) <= 4.0 * std::hypot(pu.se, pd.se) + 1e-12);
        }
    }
}

TEST_CASE("atoms of discrete laws") {
    const auto r = atoms(Distribution::symmetrized(Distribution::rademacher()));
    REQUIRE(r.size() == 3);
    CHECK(r[0].value == -2.0);
    CHECK(r[0].mass == 0.25);
    CHECK(r[1].mass == 0.5);
    CHECK(r[2].mass == 0.25);
    CHECK_THROWS_AS(atoms(Distribution::gaussian(1)), PreconditionError);
}

TEST_CASE("moment_xg closed forms") {
    const auto rad = Distribution::rademacher();
    CHECK(moment_xg(rad, ModerateFunction::power(2)).value == 4.0);
    CHECK(moment_xg(Distribution::two_sided_pareto(3), ModerateFunction::constant()).value == 1.5);
    // E|X*| for rademacher: {-2, 0, 2} with masses 1/4, 1/2, 1/4
    CHECK(moment_xg(Distribution::symmetrized(rad), ModerateFunction::constant()).value == 1.0);
    const double half_normal = std::sqrt(2.0 / std::numbers::pi);
    CHECK(moment_xg(Distribution::gaussian(1), ModerateFunction::constant()).value == doctest::Approx(half_normal));
    CHECK(moment_xg(Distribution::parse("sym:gaussian:sigma=1"), ModerateFunction::constant()).value ==
          doctest::Approx(std::numbers::sqrt2 * half_normal));
}

TEST_CASE("quadrature agrees with analytic values and independent integrals") {
    MomentOptions q;
    q.mode = MomentMode::quadrature;
    CHECK(moment_xg(Distribution::two_sided_pareto(3), ModerateFunction::constant(), q).value ==
          doctest::Approx(1.5).epsilon(1e-8));
    CHECK(moment_xg(Distribution::gaussian(1), ModerateFunction::constant(), q).value ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-8));
    // E[|U|(1+|U|)^2] for U uniform on (-1,1): int_0^1 x(1+x)^2 dx = 17/12
    CHECK(moment_xg(Distribution::uniform_symmetric(1), ModerateFunction::power(2)).value ==
          doctest::Approx(17.0 / 12.0).epsilon(1e-8));
    // pareto beta=4, G=(1+t)^2: 4 int_1^inf (1+x)^2 x^-4 dx = 4 (1 + 1 + 1/3) = 28/3
    const auto r = moment_xg(Distribution::two_sided_pareto(4), ModerateFunction::power(2));
    CHECK(r.value == doctest::Approx(28.0 / 3.0).epsilon(1e-6));
    CHECK(r.verdict == Evidence::converging);
    // gaussian, G=(1+t): sqrt(2/pi) + 1
    CHECK(moment_xg(Distribution::gaussian(1), ModerateFunction::power(1)).value ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi) + 1.0).epsilon(1e-8));
    // triangular law of |X*| for uniform(1): int_0^2 x(1+x)(2-x)/2 dx = 2/3 + 2/3 = 4/3
    CHECK(moment_xg(Distribution::parse("sym:uniform:w=1"), ModerateFunction::power(1)).value ==
          doctest::Approx(2.0 / 3.0 + 2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("divergent moments give divergence evidence") {
    const auto r = moment_xg(Distribution::two_sided_pareto(1.5), ModerateFunction::power(1));
    CHECK(r.verdict == Evidence::diverging);
    CHECK(moment_label(r.verdict) == "divergence-evidence");
    CHECK(moment_xg(Distribution::two_sided_pareto(4), ModerateFunction::power(3)).verdict == Evidence::diverging);
    CHECK(moment_xg(Distribution::two_sided_pareto(2), ModerateFunction::exponential(1)).verdict ==
          Evidence::diverging);
}

TEST_CASE("unsupported moment modes are rejected") {
    MomentOptions q;
    q.mode = MomentMode::quadrature;
    CHECK_THROWS_AS(moment_xg(Distribution::rademacher(), ModerateFunction::power(1), q), PreconditionError);
    q.mode = MomentMode::analytic;
    CHECK_THROWS_AS(moment_xg(Distribution::gaussian(1), ModerateFunction::power(1), q), PreconditionError);
}

TEST_CASE("monte carlo moment brackets the quadrature value") {
    MomentOptions mc;
    mc.mode = MomentMode::monte_carlo;
    mc.reps = 200000;
    mc.seed = 9;
    const auto d = Distribution::gaussian(1);
    const auto g = ModerateFunction::power(2);
    const auto est = moment_xg(d, g, mc);
    const auto exact = moment_xg(d, g);
    CHECK(std::abs(est.value - exact.value) <= 4.0 * est.se);
    mc.threads = 3;
    CHECK(moment_xg(d, g, mc).value == est.value);
}

TEST_CASE("tail probabilities") {
    CHECK(tail(Distribution::rademacher(), 0.5).p == 1.0);
    CHECK(tail(Distribution::rademacher(), 1.5).p == 0.0);
    CHECK(tail(Distribution::two_sided_pareto(3), 2.0).p == doctest::Approx(0.125));
    // cross-check against a numeric integral of the density
    const double numeric = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double x) { return 3.0 * std::pow(x, -4.0); }, 2.0, INFINITY);
    CHECK(tail(Distribution::two_sided_pareto(3), 2.0).p == doctest::Approx(numeric).epsilon(1e-10));
    for (const char* spec : {"uniform:w=1", "gaussian:sigma=1", "pareto2:beta=3", "sym:uniform:w=1",
                             "bernoulli:p=0.3,v0=-1,v1=2"}) {
        const auto d = Distribution::parse(spec);
        double prev = 1.0;
        for (double t = 0.0; t < 5.0; t += 0.01) {
            const double p = tail(d, t).p;
            CHECK(p <= prev + 1e-15);
            prev = p;
        }
    }
    McOptions mc;
    mc.reps = 100000;
    const auto est = tail(Distribution::parse("sym:pareto2:beta=3"), 2.0, mc);
    CHECK_FALSE(est.exact);
    CHECK(est.se > 0.0);
}

TEST_CASE("medians") {
    CHECK(median(Distribution::uniform_symmetric(1)) == 0.0);
    CHECK(median(Distribution::rademacher()) == 0.0);
    CHECK(median(Distribution::bernoulli(0.9)) == 1.0);
    CHECK(median(Distribution::bernoulli(0.3)) == 0.0);
    CHECK(empirical_median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(empirical_median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("truncation thresholds") {
    const double t_rad = truncation_threshold(Distribution::rademacher(), 0.5);
    CHECK(t_rad > 1.0);
    CHECK(t_rad <= 1.001 + 1e-12);
    CHECK(truncation_threshold(Distribution::uniform_symmetric(1), 0.5) == 0.0);
    // E[|X|; |X| >= t] = 3 / (2 t^2) for pareto(3), so 0.75 is reached at t = sqrt 2
    const double t_par = truncation_threshold(Distribution::two_sided_pareto(3), 0.25);
    CHECK(t_par >= std::numbers::sqrt2);
    CHECK(t_par <= std::numbers::sqrt2 * 1.001);
    CHECK(truncated_abs_moment(Distribution::two_sided_pareto(3), t_par) <= 0.75);
    CHECK(truncated_abs_moment(Distribution::two_sided_pareto(3), t_par / 1.001) > 0.75);
    // gaussian: sqrt(2/pi) exp(-t^2/2) <= 0.25
    const double t_g = truncation_threshold(Distribution::gaussian(1), 0.75);
    const double exact = std::sqrt(-2.0 * std::log(0.25 / std::sqrt(2.0 / std::numbers::pi)));
    CHECK(t_g >= exact);
    CHECK(t_g <= exact * 1.001);
    CHECK_THROWS_AS(truncation_threshold(Distribution::two_sided_pareto(1.0), 0.5), PreconditionError);
}

TEST_CASE("truncated moment of the triangular law matches quadrature") {
    const auto d = Distribution::parse("sym:uniform:w=1.5");
    for (double t : {0.0, 0.7, 2.0, 3.5}) {
        const double q = t >= 3.0 ? 0.0
                                  : boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                        [](double x) { return x * (3.0 - x) / 4.5; }, t, 3.0);
        CHECK(truncated_abs_moment(d, t) == doctest::Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("counterexample law normalization") {
    const auto& d = exp_counterexample();
    const auto& law = *std::get<std::shared_ptr<const CounterexampleLaw>>(d.kind());
    CHECK(law.stored_mass >= 1.0 - 1e-5);
    CHECK(law.stored_mass <= 1.0);
    CHECK(law.stored_mass + law.tail_mass_bound >= 1.0);
    CHECK(law.tail_mass_bound <= 1e-6);
    const auto at = atoms(d);
    double total = 0.0;
    for (const auto& a : at) total += a.mass;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < law.size(); ++i) {
        CHECK(at[law.size() - 1 - i].value == -at[law.size() + i].value);
        CHECK(at[law.size() - 1 - i].mass == at[law.size() + i].mass);
    }
    CHECK_THROWS_AS(normalize_counterexample(ModerateFunction::exponential(1), law.ts, 1), PrecisionError);
}

TEST_CASE("counterexample samples stay in the stored support") {
    const auto& d = exp_counterexample();
    const auto& law = *std::get<std::shared_ptr<const CounterexampleLaw>>(d.kind());
    const std::set<double> support(law.ts.begin(), law.ts.end());
    for (double x : sample(d, 21, 100000)) CHECK(support.count(std::abs(x)) == 1);
}

TEST_CASE("counterexample dichotomy") {
    const auto& d = exp_counterexample();
    const auto& law = *std::get<std::shared_ptr<const CounterexampleLaw>>(d.kind());
    const auto g = ModerateFunction::exponential(1);
    const auto finite = moment_xg(d, g);
    CHECK(finite.verdict == Evidence::converging);
    CHECK(finite.last_increment <= 1e-9);
    CHECK(finite.remainder_bound <= 2.0 * law.c / 1e5 * 1.000001);
    const auto doubled = moment_xg(d, g.dilated(2.0));
    CHECK(doubled.verdict == Evidence::diverging);
    double harmonic = 0.0;
    for (int n = 1; n <= 100000; ++n) harmonic += 1.0 / n;
    CHECK(doubled.value >= 2.0 * law.c * harmonic);
}

TEST_CASE("counterexample spec string") {
    const auto d = Distribution::parse("counterexample:G=exp,prefix=1000");
    CHECK(d.name() == "counterexample:G=exp:b=1,prefix=1000");
    CHECK(d.is_symmetric());
    CHECK(d.is_discrete());
    CHECK_THROWS_AS(Distribution::parse("counterexample:G=exp,prefix=1"), PrecisionError);
}
