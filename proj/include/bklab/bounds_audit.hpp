#ifndef BKLAB_BOUNDS_AUDIT_HPP
#define BKLAB_BOUNDS_AUDIT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bklab/dist.hpp"
#include "bklab/lln_sim.hpp"
#include "bklab/modfun.hpp"

namespace bklab {

// One inequality lhs <= rhs with Monte Carlo error accounting. The two sides
// always come from independent streams, so their errors combine in quadrature.
struct BoundReport {
    std::string name; // prop1 | prop2 | prop3 | sym_transfer
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
    std::uint64_t seed = 0;

    std::string dist;
    std::string g;
    std::string detail; // which inequality of a collection
    std::vector<std::pair<std::string, double>> params;
    bool lhs_exact = false;
    bool degraded = false;
    std::string note;

    double slack() const noexcept { return rhs - lhs; }
    // (rhs - lhs) in combined standard errors; +-inf when both sides are exact.
    double holds_within() const noexcept;
    // holds_within >= -4, and >= 0 when the left side is exact.
    bool passed() const noexcept;
};

BoundReport make_report(std::string name, double lhs, double lhs_se, double rhs, double rhs_se);

struct SeriesConfig {
    std::uint64_t n_max = 1024;
    std::uint64_t replicates = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// E|X|G(|X|) <= 4c^2 (t G(t) + E[G(L_{1/2})] / alpha) with t from truncation_threshold.
BoundReport prop1_check(const Distribution& dist, const ModerateFunction& g, double alpha, const PathConfig& cfg,
                        double censor_bound = 1e-3);

// S(X,G,1) <= K_p(X). p = 0 picks the smallest admissible p. ConditionViolation
// (a PreconditionError) when the tail condition fails for the requested p.
BoundReport prop2_check(const Distribution& dist, const ModerateFunction& g, int p, const SeriesConfig& cfg);

// E[G(L_1)] <= G(0) + 12 S(X,G,1/8), the series side truncated at n_max.
BoundReport prop3_check(const Distribution& dist, const ModerateFunction& g, const PathConfig& cfg,
                        const SeriesConfig& series_cfg, double censor_bound = 1e-3);

struct SymTransferOptions {
    std::vector<double> exit_levels{0.5, 1.0};
    double deviation_level = 1.0;
    std::uint64_t deviation_n_max = 1024; // dyadic grid 1, 2, 4, ..., n_max
    std::uint64_t median_reps = 4001;
    double censor_bound = 1e-3;
};

// The three transfers between X and X* = X - X':
//   moment:     E|X*|G(|X*|) <= 4c E|X|G(|X|)
//   last_exit:  E[G(L*_{2a})] <= 2 E[G(L_a)]            per exit level
//   deviation:  P[|U_n| >= a] <= 2 P[|U*_n| >= a/2]     (first)
//               2 P[|U*_n| >= a/2] <= 4 P[|U_n| >= a/4] (second)
// The deviation reports cover n >= n0, the first grid point where the median
// of U_n - x is below a/4; n0 is recorded in each of them.
std::vector<BoundReport> sym_transfer_check(const Distribution& dist, const ModerateFunction& g,
                                            const PathConfig& cfg, const SymTransferOptions& opts = {});

struct SuiteConfig {
    double alpha = 0.5;
    PathConfig paths;
    SeriesConfig series;
    double censor_bound = 1e-3;
};

// prop1, prop2 and prop3 for every G, sharing one last-exit pass (levels 1/2, 1)
// and one series pass (levels 1, 1/8) between all of them.
std::vector<BoundReport> prop_suite(const Distribution& dist, std::span<const ModerateFunction> gs,
                                    const SuiteConfig& cfg);

} // namespace bklab

#endif
