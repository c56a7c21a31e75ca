#include "bklab/evidence.hpp"

#include <algorithm>
#include <cmath>

#include "bklab/errors.hpp"

namespace bklab {

std::string moment_label(Evidence e) {
    switch (e) {
    case Evidence::converging: return "finite";
    case Evidence::diverging: return "divergence-evidence";
    case Evidence::inconclusive: break;
    }
    return "inconclusive";
}

std::string series_label(Evidence e) {
    switch (e) {
    case Evidence::converging: return "converging-evidence";
    case Evidence::diverging: return "diverging-evidence";
    case Evidence::inconclusive: break;
    }
    return "inconclusive";
}

Evidence evidence_from_label(const std::string& label) {
    if (label == "finite" || label == "converging-evidence") return Evidence::converging;
    if (label == "divergence-evidence" || label == "diverging-evidence") return Evidence::diverging;
    if (label == "inconclusive") return Evidence::inconclusive;
    throw ConfigError("unknown verdict label '" + label + "'");
}

Evidence classify_blocks(std::span<const double> blocks, const BlockRule& rule) {
    for (double b : blocks) {
        if (!std::isfinite(b)) return Evidence::diverging;
    }
    if (blocks.size() < 3) return Evidence::inconclusive;

    const double largest = *std::max_element(blocks.begin(), blocks.end());
    const double floor = rule.floor_rel * largest;
    const auto last = blocks.subspan(blocks.size() - 3);

    auto vanished = [&](double b) { return b <= floor; };
    if (largest <= 0.0 || std::all_of(last.begin(), last.end(), vanished)) {
        return Evidence::converging;
    }

    bool decaying = true;
    bool growing = true;
    for (std::size_t k = 1; k < last.size(); ++k) {
        const double prev = last[k - 1];
        const double cur = last[k];
        if (!(vanished(cur) || cur <= rule.decay_ratio * prev)) decaying = false;
        if (vanished(prev) || vanished(cur) || cur < rule.grow_ratio * prev) growing = false;
    }
    if (decaying) return Evidence::converging;
    if (growing) return Evidence::diverging;
    return Evidence::inconclusive;
}

} // namespace bklab
