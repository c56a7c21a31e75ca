#ifndef BKLAB_SEQTEST_HPP
#define BKLAB_SEQTEST_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "bklab/modfun.hpp"

namespace bklab {

// m >= 2 candidate laws on a common finite alphabet, with a reference law P
// (by default the uniform mixture). Observations are alphabet indices.
class HypothesisSet {
public:
    // ConfigError on m < 2, ragged or negative masses, masses not summing to 1,
    // or a reference that vanishes where some candidate does not.
    HypothesisSet(std::vector<double> alphabet, std::vector<std::vector<double>> laws,
                  std::optional<std::vector<double>> reference = std::nullopt);

    // {"alphabet": [...], "hypotheses": [[...], ...], "reference": [...]?}
    static HypothesisSet from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;

    std::size_t size() const noexcept { return laws_.size(); }
    std::size_t alphabet_size() const noexcept { return alphabet_.size(); }
    const std::vector<double>& alphabet() const noexcept { return alphabet_; }
    const std::vector<double>& law(std::size_t i) const { return laws_.at(i); }
    const std::vector<double>& reference() const noexcept { return reference_; }
    bool mixture_reference() const noexcept { return mixture_; }

    // log p(y) - log p_i(y); +inf where p_i(y) = 0 < p(y).
    double log_ratio_increment(std::size_t i, std::size_t y) const;
    // Alphabet index of a symbol value. DataError if absent.
    std::size_t symbol_index(double value) const;

    // KL(P_i || P_j), +inf when P_i is not dominated by P_j.
    double kl(std::size_t i, std::size_t j) const;
    // E_i[log(p / p_j)]: the drift of log R^j under P_i.
    double kl_adjusted(std::size_t i, std::size_t j) const;
    std::vector<std::vector<double>> pairwise_kl() const;

private:
    std::vector<double> alphabet_;
    std::vector<std::vector<double>> laws_;
    std::vector<double> reference_;
    std::vector<std::vector<double>> increments_; // [i][y]
    bool mixture_ = true;
};

// Per-hypothesis levels c_i > 1, possibly +inf.
struct LevelVector {
    std::vector<double> c;

    static LevelVector uniform(std::size_t m, double level);
    // ConfigError unless every entry exceeds 1.
    void validate(std::size_t m) const;
};

// Adds log p(y) - log p_i(y) to each state entry. DataError when y lies
// outside every support (reference mass zero) or outside the alphabet.
void log_ratio_update(std::span<double> state, std::size_t y, const HypothesisSet& hyp);

struct DecisionRecord {
    // Stopping step; empty when the horizon came first (censored).
    std::optional<std::uint64_t> tau;
    bool censored = false;
    std::uint64_t steps = 0;
    // Accepted hypothesis: an index with the largest rejecting time, smallest index on ties.
    std::optional<std::size_t> decision;
    // Rejecting times observed by the stop; empty means not (yet) rejected.
    std::vector<std::optional<std::uint64_t>> rho;
    std::vector<double> log_ratios_at_tau;

    nlohmann::ordered_json to_json() const;
};

// Source of alphabet indices, one per call.
using ObservationSource = std::function<std::size_t()>;

// Consumes observations until tau or the horizon. ConfigError on m < 2.
DecisionRecord run_test(const HypothesisSet& hyp, const LevelVector& levels, const ObservationSource& stream,
                        std::uint64_t horizon);

// i.i.d. draws from law i on the sequential stream of (seed, replicate).
ObservationSource iid_source(const HypothesisSet& hyp, std::size_t i, std::uint64_t seed, std::uint64_t replicate);

struct McConfig {
    std::uint64_t reps = 10000;
    std::uint64_t horizon = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct ErrorEstimate {
    // Wrong decisions among stopped runs; empty when every run was censored.
    std::optional<double> error_rate;
    double se = 0.0;
    double censor_rate = 0.0;
    std::uint64_t reps = 0;
};

ErrorEstimate estimate_errors(const HypothesisSet& hyp, const LevelVector& levels, std::size_t true_index,
                              const McConfig& cfg);

struct RejectionEstimate {
    double rate = 0.0; // P_i[rho_i <= horizon]
    double se = 0.0;
    double bound = 0.0; // 1 / c_i
    std::uint64_t reps = 0;
    // (bound - rate) in standard errors; +inf when no run rejected.
    double holds_within() const noexcept;
};

// Rejection of the true hypothesis by its own likelihood ratio, run to the horizon.
RejectionEstimate estimate_rejection(const HypothesisSet& hyp, double level, std::size_t true_index,
                                     const McConfig& cfg);

struct GMomentEstimate {
    double mean = 0.0;
    double se = 0.0;
    double censor_rate = 0.0;
    bool degraded = false;
    std::uint64_t reps = 0;
};

// E_i[G(min(tau, horizon))]; degraded when the censor rate exceeds censor_bound.
GMomentEstimate estimate_G_moment(const HypothesisSet& hyp, const LevelVector& levels, std::size_t true_index,
                                  const ModerateFunction& g, const McConfig& cfg, double censor_bound = 1e-3);

struct SweepRow {
    double target_error = 0.0;
    double c = 0.0;
    double mean_G_tau = 0.0;
    double se = 0.0;
    double reference_G = 0.0;
    double ratio = 0.0;
    double censor_rate = 0.0;
};

// Levels c_j = 1/a for each target error a, all rows on the same seed.
// reference_G = G(max_{j != i} log c_j / kl_adjusted(i, j)). The schedule must
// be strictly decreasing in (0, 1); ConfigError when some kl_adjusted(i, j) <= 0.
std::vector<SweepRow> optimality_sweep(const HypothesisSet& hyp, std::span<const double> schedule,
                                       std::size_t true_index, const ModerateFunction& g, const McConfig& cfg);

} // namespace bklab

#endif
