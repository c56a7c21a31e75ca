#ifndef BKLAB_EXPERIMENT_HPP
#define BKLAB_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bklab/dist.hpp"
#include "bklab/evidence.hpp"
#include "bklab/lln_sim.hpp"
#include "bklab/modfun.hpp"

namespace bklab {

// ---------------------------------------------------------------------------
// Equivalence matrix: three verdicts per (law, G) that should agree.

struct Theorem1Config {
    std::vector<double> a_grid{0.5, 1.0};
    std::uint64_t horizon = std::uint64_t{1} << 15;
    std::uint64_t n_max = std::uint64_t{1} << 15;
    std::uint64_t replicates = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    GrowthRule growth{};
};

struct Theorem1Cell {
    std::string dist;
    std::string g;
    std::uint64_t seed = 0;
    MomentResult moment;
    std::vector<SeriesEstimate> series;      // one per a
    std::vector<LastExitEstimate> last_exit; // one per a
    Evidence moment_verdict = Evidence::inconclusive;
    Evidence series_verdict = Evidence::inconclusive;
    Evidence last_exit_verdict = Evidence::inconclusive;
    // All three agree and none is inconclusive.
    bool consistent = false;
};

struct Theorem1Report {
    std::vector<Theorem1Cell> cells;
    bool all_consistent() const noexcept;
};

// Verdicts over an a-grid: divergence at any a is divergence; convergence needs every a.
Evidence combine_over_grid(std::span<const Evidence> verdicts);

// One path pass per law (levels a_grid, seed derived from the root seed and the
// row index) serves every G of that row.
Theorem1Report run_theorem1(std::span<const Distribution> dists, std::span<const ModerateFunction> gs,
                            const Theorem1Config& cfg);

nlohmann::ordered_json to_json(const Theorem1Cell& cell);

// ---------------------------------------------------------------------------
// Declarative experiment specs, shared by the CLI and --config files.

enum class ExperimentKind {
    moderate_audit,
    last_exit,
    series,
    bounds,
    counterexample,
    sprt_run,
    sprt_sweep,
    theorem1_matrix
};

std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::moderate_audit;
    std::optional<std::string> dist;
    std::optional<std::string> g;
    std::vector<std::string> dists;
    std::vector<std::string> gs;
    std::optional<std::string> prop; // 1 | 2 | 3 | sym
    std::optional<std::uint64_t> horizon;
    std::optional<std::uint64_t> reps;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::optional<double> alpha;
    std::optional<int> p;
    std::optional<double> a;
    std::vector<double> a_grid;
    std::optional<std::uint64_t> n_max;
    std::optional<std::uint64_t> prefix;
    std::optional<double> t_min;
    std::optional<double> t_max;
    std::optional<std::uint64_t> points;
    // sequential test
    std::optional<nlohmann::json> hypotheses;
    std::vector<double> levels;
    std::optional<std::size_t> true_index;
    std::vector<double> schedule;
    std::vector<double> observations;
    // output
    std::optional<std::string> out;
    std::optional<std::string> format;

    // Field names follow the CLI flags. ConfigError names any unknown or mistyped field.
    static ExperimentSpec from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    // ConfigError naming the first missing kind-specific knob.
    void validate() const;
};

struct ExperimentResult {
    nlohmann::ordered_json document;
    std::optional<std::string> csv;
    // 0 pass / consistent, 1 fail / inconsistent.
    int exit_code = 0;
};

// Dispatches to the owning module. Configuration problems surface as
// ConfigError, PreconditionError or DomainError for the caller to map to exit 2.
ExperimentResult run_experiment(const ExperimentSpec& spec);

} // namespace bklab

#endif
