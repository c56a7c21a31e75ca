#ifndef BKLAB_EVIDENCE_HPP
#define BKLAB_EVIDENCE_HPP

#include <span>
#include <string>

namespace bklab {

// Uniform verdict vocabulary. A finite computation never proves convergence or
// divergence; every verdict is evidence only.
enum class Evidence { converging, diverging, inconclusive };

// Wording used by moment functionals: finite | divergence-evidence | inconclusive.
std::string moment_label(Evidence e);
// Wording used by series and last-exit estimates: converging-evidence | diverging-evidence | inconclusive.
std::string series_label(Evidence e);
Evidence evidence_from_label(const std::string& label);

// Rules for classifying a nonnegative sequence of dyadic block contributions.
struct BlockRule {
    // Blocks at or below floor_rel * (largest block) count as vanished.
    double floor_rel = 1e-9;
    // b[k] >= grow_ratio * b[k-1] on the last two transitions reads as non-decay.
    double grow_ratio = 0.95;
    // b[k] <= decay_ratio * b[k-1] on the last two transitions reads as geometric decay.
    double decay_ratio = 0.9;
};

// Looks at the final three blocks: all vanished or geometrically decaying gives
// converging; all above the floor and nondecreasing up to grow_ratio gives
// diverging; anything else, or fewer than three blocks, is inconclusive.
// An infinite or NaN block is divergence.
Evidence classify_blocks(std::span<const double> blocks, const BlockRule& rule = {});

} // namespace bklab

#endif
