#ifndef BKLAB_LLN_SIM_HPP
#define BKLAB_LLN_SIM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bklab/dist.hpp"
#include "bklab/evidence.hpp"
#include "bklab/modfun.hpp"
#include "bklab/rng.hpp"
#include "bklab/stats.hpp"

namespace bklab {

struct PathConfig {
    std::uint64_t horizon = 1024;
    std::uint64_t replicates = 10000;
    std::uint64_t seed = 0;
    // Deviation center x; defaults to the analytic mean of the law.
    std::optional<double> center;
    unsigned threads = 1;

    void validate() const;
};

// Center used for dist under cfg. PreconditionError if neither is known.
double resolve_center(const Distribution& dist, std::optional<double> center);

struct LastExitSample {
    std::uint64_t value = 0;
    // A deviation landed in the last dyadic block: value > 0 and 2 value >= N.
    bool censored = false;
};

// Largest n <= N with |Y_n - x| >= a, else 0. DataError on non-finite entries.
LastExitSample last_exit_time(std::span<const double> path, double a, double x = 0.0);

// One simulation pass recording, for each level a_j, the last exit of
// |S_n - n x| >= a_j n per replicate, plus the same statistic restricted to
// n <= N/4 and n <= N/2. Independent of G, so one pass serves many G.
struct LastExitRun {
    std::vector<double> levels;
    std::uint64_t horizon = 0;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    double center = 0.0;
    std::vector<std::vector<std::uint32_t>> last;     // [level][replicate]
    std::vector<std::vector<std::uint32_t>> quarter;  // restricted to n <= N/4
    std::vector<std::vector<std::uint32_t>> half;     // restricted to n <= N/2
};

LastExitRun simulate_last_exits(const Distribution& dist, std::span<const double> levels,
                                const PathConfig& cfg, StreamId stream = StreamId::last_exit);

struct LastExitEstimate {
    double a = 0.0;
    double mean = 0.0;
    double se = 0.0;
    double censor_rate = 0.0;
    std::uint64_t replicates = 0;
    std::uint64_t horizon = 0;
    std::uint64_t seed = 0;
    // E[G(L)] restricted to the horizons N/4, N/2, N.
    double mean_quarter = 0.0;
    double mean_half = 0.0;
    // censor_rate above the bound: the mean may understate E[G(L)].
    bool degraded = false;
    std::string warning;
};

LastExitEstimate summarize_last_exit(const LastExitRun& run, std::size_t level, const ModerateFunction& g,
                                     double censor_bound = 1e-3);

LastExitEstimate estimate_EG_lastexit(const Distribution& dist, const ModerateFunction& g, double a,
                                      const PathConfig& cfg, double censor_bound = 1e-3);

struct GrowthRule {
    double censor_bound = 1e-3;
    // E[G(L)] growing by this factor over both horizon doublings reads as divergence.
    double growth_factor = 1.1;
};

// finite (converging) when censoring is negligible and the truncated means have
// stopped growing; divergence when they keep growing; otherwise inconclusive.
Evidence lastexit_verdict(const LastExitEstimate& est, const GrowthRule& rule = {});

struct TailEstimate {
    double p_hat = 0.0;
    double se = 0.0;
    bool exact = false;
};

// P[|S_n - n x| >= a n]; exact for finite support when n <= 20 and the law of
// S_n has at most 2^20 atoms.
TailEstimate tail_prob_mean(const Distribution& dist, std::uint64_t n, double a, std::uint64_t reps,
                            std::uint64_t seed, std::optional<double> center = std::nullopt);

// Law of S_n for a discrete law, or nullopt once it would exceed max_atoms.
std::optional<std::vector<Atom>> sum_law(const Distribution& dist, std::uint64_t n,
                                         std::size_t max_atoms = std::size_t{1} << 20);

struct SeriesOptions {
    // Summands for n <= exact_limit come from the exact law of S_n when the
    // increment law is discrete and the support stays below 2^20 atoms.
    bool exact = true;
    std::uint64_t exact_limit = 64;
    unsigned threads = 1;
    std::optional<double> center;
    BlockRule rule{};
};

// Hit counts of |S_n - n x| >= a_j n from one pass of paths up to n_max, kept
// per batch so that any G can be folded in later with batch-means errors.
struct SeriesRun {
    std::vector<double> levels;
    std::uint64_t n_max = 0;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    double center = 0.0;
    std::uint64_t exact_through = 0;            // summands n <= this are exact
    std::vector<std::vector<double>> exact_p;   // [level][n], n <= exact_through
    BatchPlan plan;
    std::vector<std::vector<std::uint32_t>> counts; // [level][batch * (n_max + 1) + n]
    std::optional<double> hoeffding_range;          // hi - lo of a bounded law centered at x
};

SeriesRun simulate_series(const Distribution& dist, std::span<const double> levels, std::uint64_t n_max,
                          std::uint64_t reps, std::uint64_t seed, const SeriesOptions& opts = {},
                          StreamId stream = StreamId::series);

// P[|S_n - n x| >= a_j n] from a series run: exact below exact_through, else
// the pooled hit frequency with its binomial standard error.
TailEstimate run_probability(const SeriesRun& run, std::size_t level, std::uint64_t n);

struct SeriesBlock {
    unsigned index = 0;
    std::uint64_t n_lo = 0;
    std::uint64_t n_hi = 0;
    double contribution = 0.0;
    double se = 0.0;
    bool complete = true; // covers all of [2^i, 2^(i+1))
};

struct SeriesEstimate {
    double a = 0.0;
    std::uint64_t n_max = 0;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    std::uint64_t exact_through = 0;
    std::vector<SeriesBlock> blocks;
    double partial_sum = 0.0;
    double partial_se = 0.0;
    // Bound on sum_{n > n_max} from Hoeffding's inequality, when the law is bounded.
    std::optional<double> tail_bound;
    Evidence verdict = Evidence::inconclusive;
};

SeriesEstimate summarize_series(const SeriesRun& run, std::size_t level, const ModerateFunction& g,
                                const BlockRule& rule = {});

SeriesEstimate estimate_series(const Distribution& dist, const ModerateFunction& g, double a, std::uint64_t n_max,
                               std::uint64_t reps, std::uint64_t seed, const SeriesOptions& opts = {});

struct InequalityCheck {
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
    bool exact = false;

    // (rhs - lhs) in combined standard errors; +-inf when both sides are exact.
    double holds_within() const noexcept;
};

// P[max_{n<=m} |S_n| >= t] against 2 P[|S_m| >= t]. Symmetric laws only.
InequalityCheck levy_maximal_check(const Distribution& dist, std::uint64_t m, double t, std::uint64_t reps,
                                   std::uint64_t seed, unsigned threads = 1);

// For Y = S_m and Y* = Y - Y':
//   first:  P[|Y - med Y| >= 2t] <= 2 P[|Y*| >= 2t]
//   second: 2 P[|Y*| >= 2t]      <= 4 P[|Y| >= t]
struct SymmetrizationCheck {
    InequalityCheck first;
    InequalityCheck second;
    double median = 0.0;
};

SymmetrizationCheck symmetrization_sandwich(const Distribution& dist, std::uint64_t m, double t,
                                            std::uint64_t reps, std::uint64_t seed, unsigned threads = 1);

} // namespace bklab

#endif
